//! The generalized critical set: interior zeros of the gradient, flat
//! boundary points with vanishing normal derivative, and singular boundary
//! points; blow-up traces with frequency extrapolation and homogeneity
//! exponent fits; the flat-point epsilon-regularity check; Minkowski
//! content estimation.

use crate::error::Error;
use crate::fields::ScalarField;
use crate::frequency::frequency_profile;
use crate::geometry::{Ball, ConvexDomain, Membership};
use crate::linalg::{add, dist, norm, scale, sub, Point};
use crate::quadrature::QuadSpec;
use crate::symmetry::{lattice_points, strata_membership};
use crate::Result;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Interior,
    BoundaryFlat,
    BoundarySingular,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub kind: CriticalKind,
    pub normal_derivative: Option<f64>,
    /// Extrapolated frequency at scale zero.
    pub n0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupTrace {
    pub q: Vec<f64>,
    /// Scales in decreasing order.
    pub scales: Vec<f64>,
    pub n_seq: Vec<f64>,
    /// Window normalizations sqrt(H / r^{n-1}) per scale.
    pub norms: Vec<f64>,
    /// Tail extrapolation of the frequency.
    pub n0: f64,
    /// Homogeneity exponent fit from log H^{1/2} r^{-(n-1)/2} vs log r.
    pub exponent: f64,
    pub truncated: bool,
}

/// Inward normal derivative at a boundary point by a limit quotient over a
/// shrinking h ladder.
pub fn normal_derivative<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    q: Point,
    h_floor: f64,
) -> Option<f64> {
    let faces = domain.active_faces(q);
    if faces.len() != 1 {
        return None;
    }
    let inward = scale(domain.halves[faces[0]].normal, -1.0);
    let uq = field.value(q);
    let mut h = 1e-2_f64.max(4.0 * h_floor);
    let mut quotient = 0.0;
    for _ in 0..10 {
        quotient = (field.value(add(q, scale(inward, h))) - uq) / h;
        if h <= h_floor.max(1e-6) * 4.0 {
            break;
        }
        h *= 0.5;
    }
    Some(quotient)
}

fn fd_step<F: ScalarField + ?Sized>(field: &F) -> f64 {
    field.probe_step()
}

/// Lattice sweep plus Newton/bisection refinement of the generalized
/// critical set inside `region`.
pub fn critical_points<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    region: Ball,
    step: f64,
    tol: f64,
) -> Result<Vec<CriticalPoint>> {
    if !(step > 0.0) {
        return Err(Error::invalid("sweep step must be positive"));
    }
    let dim = field.dim();
    let h_fd = fd_step(field);
    let mut found: Vec<(Point, CriticalKind, Option<f64>)> = Vec::new();

    // Interior candidates: gradient small relative to the local gradient
    // variation, then Newton on grad u = 0.
    for q in lattice_points(region, step, dim) {
        if domain.contains(q) != Membership::Interior {
            continue;
        }
        let g = field.grad(q);
        let gn = norm(g);
        let mut hess_scale: f64 = 0.0;
        for a in 0..dim {
            let mut qp = q;
            qp[a] += step;
            hess_scale = hess_scale.max(dist(field.grad(qp), g) / step);
        }
        if gn > 2.0 * step * hess_scale.max(1e-9) {
            continue;
        }
        if let Some(root) = refine_interior(field, q, step, tol, h_fd, dim) {
            if domain.contains(root) == Membership::Interior
                && dist(root, region.center) <= region.radius
                && found.iter().all(|(p, _, _)| dist(*p, root) > step / 2.0)
            {
                found.push((root, CriticalKind::Interior, None));
            }
        }
    }

    // Flat boundary candidates in 3D: lattice sweep of each face with a
    // descent onto the zero level of the normal derivative (its zero set is
    // generically a curve, so the result is a sampled point list).
    if dim == 3 {
        for (fi, face) in domain.halves.iter().enumerate() {
            if domain.halves[..fi].iter().any(|g| {
                dist(g.normal, face.normal) < 1e-12 && (g.offset - face.offset).abs() < 1e-12
            }) {
                continue;
            }
            let d2 = face.signed_excess(region.center).abs();
            if d2 >= region.radius {
                continue;
            }
            let base = sub(region.center, scale(face.normal, face.signed_excess(region.center)));
            let rho = (region.radius * region.radius - d2 * d2).sqrt();
            let n = face.normal;
            let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let mut e1 = [
                n[1] * helper[2] - n[2] * helper[1],
                n[2] * helper[0] - n[0] * helper[2],
                n[0] * helper[1] - n[1] * helper[0],
            ];
            e1 = scale(e1, 1.0 / norm(e1));
            let e2 = [
                n[1] * e1[2] - n[2] * e1[1],
                n[2] * e1[0] - n[0] * e1[2],
                n[0] * e1[1] - n[1] * e1[0],
            ];
            let at = |s: f64, t: f64| add(add(base, scale(e1, s)), scale(e2, t));
            let nd_at = |s: f64, t: f64| -> Option<f64> {
                let x = at(s, t);
                if domain.contains(x) != Membership::Boundary
                    || domain.active_faces(x).len() != 1
                    || dist(x, region.center) > region.radius
                {
                    return None;
                }
                normal_derivative(field, domain, x, h_fd)
            };
            let samples = ((2.0 * rho / step).ceil() as usize).max(2);
            for i in 0..=samples {
                for j in 0..=samples {
                    let mut s = -rho + 2.0 * rho * i as f64 / samples as f64;
                    let mut t = -rho + 2.0 * rho * j as f64 / samples as f64;
                    let Some(mut v) = nd_at(s, t) else { continue };
                    if v.abs() > step {
                        continue;
                    }
                    // Newton descent toward the zero level of nd(s, t).
                    let mut ok = false;
                    for _ in 0..40 {
                        if v.abs() <= tol {
                            ok = true;
                            break;
                        }
                        let hfd = (step * 1e-3).max(1e-7);
                        let (Some(vs), Some(vt)) = (nd_at(s + hfd, t), nd_at(s, t + hfd)) else {
                            break;
                        };
                        let gs = (vs - v) / hfd;
                        let gt = (vt - v) / hfd;
                        let g2 = gs * gs + gt * gt;
                        if g2 < 1e-30 {
                            break;
                        }
                        s -= v * gs / g2;
                        t -= v * gt / g2;
                        match nd_at(s, t) {
                            Some(nv) => v = nv,
                            None => break,
                        }
                    }
                    if ok {
                        let x = at(s, t);
                        if found.iter().all(|(p, _, _)| dist(*p, x) > step / 2.0) {
                            found.push((x, CriticalKind::BoundaryFlat, Some(v)));
                        }
                    }
                }
            }
        }
    }

    // Flat boundary candidates (2D faces): vanishing inward normal derivative.
    if dim == 2 {
        for (fi, face) in domain.halves.iter().enumerate() {
            if domain.halves[..fi].iter().any(|g| {
                dist(g.normal, face.normal) < 1e-12 && (g.offset - face.offset).abs() < 1e-12
            }) {
                continue;
            }
            let base = sub(region.center, scale(face.normal, face.signed_excess(region.center)));
            let d2 = face.signed_excess(region.center).abs();
            if d2 >= region.radius {
                continue;
            }
            let rho = (region.radius * region.radius - d2 * d2).sqrt();
            let dir = [-face.normal[1], face.normal[0], 0.0];
            let nd_at = |t: f64| -> Option<f64> {
                let x = add(base, scale(dir, t));
                if domain.contains(x) != Membership::Boundary
                    || domain.active_faces(x).len() != 1
                {
                    return None;
                }
                normal_derivative(field, domain, x, h_fd)
            };
            let samples = ((2.0 * rho / step).ceil() as usize).max(2);
            let mut prev: Option<(f64, f64)> = None;
            for i in 0..=samples {
                let t = -rho + 2.0 * rho * i as f64 / samples as f64;
                let Some(v) = nd_at(t) else {
                    prev = None;
                    continue;
                };
                if let Some((tp, vp)) = prev {
                    if vp == 0.0 || v == 0.0 || vp.signum() != v.signum() {
                        // Bisect the sign change.
                        let (mut a, mut b, mut fa) = (tp, t, vp);
                        for _ in 0..80 {
                            let m = 0.5 * (a + b);
                            let fm = nd_at(m).unwrap_or(0.0);
                            if fm == 0.0 || (b - a) < 1e-14 {
                                a = m;
                                b = m;
                                break;
                            }
                            if fa.signum() == fm.signum() {
                                a = m;
                                fa = fm;
                            } else {
                                b = m;
                            }
                        }
                        let t_root = 0.5 * (a + b);
                        let x = add(base, scale(dir, t_root));
                        let ndv = nd_at(t_root).unwrap_or(0.0);
                        if ndv.abs() <= tol.max(1e-8)
                            && dist(x, region.center) <= region.radius
                            && found.iter().all(|(p, _, _)| dist(*p, x) > step / 2.0)
                        {
                            found.push((x, CriticalKind::BoundaryFlat, Some(ndv)));
                        }
                    }
                }
                prev = Some((t, v));
            }
        }
    }

    // Singular boundary points.
    for p in domain.singular_points(region) {
        if found.iter().all(|(q, _, _)| dist(*q, p) > 1e-9) {
            found.push((p, CriticalKind::BoundarySingular, None));
        }
    }

    let mut out = Vec::with_capacity(found.len());
    for (p, kind, nd) in found {
        let trace = blowup_trace(field, domain, p, 0.5, 8, 0.25, 360)?;
        out.push(CriticalPoint {
            location: p[..dim].to_vec(),
            kind,
            normal_derivative: nd,
            n0: trace.n0,
        });
    }
    out.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
    Ok(out)
}

fn refine_interior<F: ScalarField + ?Sized>(
    field: &F,
    start: Point,
    step: f64,
    tol: f64,
    h_fd: f64,
    dim: usize,
) -> Option<Point> {
    let mut x = start;
    for _ in 0..60 {
        let g = field.grad(x);
        if norm(g) <= tol {
            return Some(x);
        }
        // Finite-difference Hessian of u = Jacobian of grad u.
        let mut hess = [[0.0f64; 3]; 3];
        for a in 0..dim {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h_fd;
            xm[a] -= h_fd;
            let gp = field.grad(xp);
            let gm = field.grad(xm);
            for b in 0..dim {
                hess[b][a] = (gp[b] - gm[b]) / (2.0 * h_fd);
            }
        }
        let delta = solve_small(&hess, g, dim);
        match delta {
            Some(d) if norm(d) <= 4.0 * step => {
                x = sub(x, d);
            }
            _ => return bisect_gradient(field, x, step, tol, dim),
        }
    }
    if norm(field.grad(x)) <= tol {
        Some(x)
    } else {
        bisect_gradient(field, x, step, tol, dim)
    }
}

/// Box-shrinking coordinate bisection on the gradient components, the
/// fallback when the Hessian is degenerate.
fn bisect_gradient<F: ScalarField + ?Sized>(
    field: &F,
    center: Point,
    step: f64,
    tol: f64,
    dim: usize,
) -> Option<Point> {
    let mut x = center;
    let mut half = step;
    for _ in 0..80 {
        if norm(field.grad(x)) <= tol {
            return Some(x);
        }
        let mut best = x;
        let mut best_g = norm(field.grad(x));
        for a in 0..dim {
            for sgn in [-1.0, 1.0] {
                let mut y = x;
                y[a] += sgn * half;
                let gy = norm(field.grad(y));
                if gy < best_g {
                    best_g = gy;
                    best = y;
                }
            }
        }
        if best == x {
            half *= 0.5;
            if half < 1e-15 {
                break;
            }
        } else {
            x = best;
        }
    }
    if norm(field.grad(x)) <= tol {
        Some(x)
    } else {
        None
    }
}

fn solve_small(m: &[[f64; 3]; 3], b: Point, dim: usize) -> Option<Point> {
    if dim == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        Some([
            (b[0] * m[1][1] - b[1] * m[0][1]) / det,
            (m[0][0] * b[1] - m[1][0] * b[0]) / det,
            0.0,
        ])
    } else {
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if det.abs() < 1e-14 {
            return None;
        }
        let mut out = [0.0; 3];
        for i in 0..3 {
            let mut mm = *m;
            for row in 0..3 {
                mm[row][i] = b[row];
            }
            let di = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1])
                - mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0])
                + mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
            out[i] = di / det;
        }
        Some(out)
    }
}

/// Frequency trace along the blow-up ladder r_j = initial * ratio^j with
/// Aitken extrapolation of the monotone tail and a homogeneity exponent fit.
pub fn blowup_trace<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    q: Point,
    ratio: f64,
    depth: usize,
    initial_scale: f64,
    quad: usize,
) -> Result<BlowupTrace> {
    if domain.contains(q) == Membership::Exterior {
        return Err(Error::invalid("blow-up center must lie in the closed domain"));
    }
    if !(ratio > 0.0 && ratio < 1.0) || depth < 3 {
        return Err(Error::invalid("need 0 < ratio < 1 and depth >= 3"));
    }
    let dim = field.dim();
    let mut radii: Vec<f64> = (0..depth).map(|j| initial_scale * ratio.powi(j as i32)).collect();
    radii.reverse(); // ascending for the profile
    let profile = frequency_profile(field, domain, q, &radii, quad)?;

    // Reorder to decreasing scale, truncating at the first degenerate radius
    // from the top.
    let mut scales = Vec::new();
    let mut n_seq = Vec::new();
    let mut norms = Vec::new();
    let mut truncated = false;
    for rec in profile.records.iter().rev() {
        if rec.degenerate {
            truncated = true;
            break;
        }
        scales.push(rec.r);
        n_seq.push(rec.n);
        norms.push((rec.h / rec.r.powi(dim as i32 - 1)).sqrt());
    }
    if n_seq.len() < 3 {
        return Err(Error::AllRadiiDegenerate);
    }

    // Aitken delta-squared on the last three frequencies.
    let m = n_seq.len();
    let (a0, a1, a2) = (n_seq[m - 3], n_seq[m - 2], n_seq[m - 1]);
    let denom = a2 - 2.0 * a1 + a0;
    let n0 = if denom.abs() > 1e-12 {
        let cand = a2 - (a2 - a1) * (a2 - a1) / denom;
        // Extrapolation must stay below the monotone tail; fall back to the
        // last value when the curvature is the wrong way.
        if cand.is_finite() && cand <= a2 + 1e-6 && cand > 0.0 {
            cand
        } else {
            a2
        }
    } else {
        a2
    };

    // Least-squares slope of log(H^{1/2} r^{-(n-1)/2}) = log(norm) vs log r.
    let xs: Vec<f64> = scales.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let npts = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let exponent = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);

    Ok(BlowupTrace { q: q[..dim].to_vec(), scales, n_seq, norms, n0, exponent, truncated })
}

/// Flat-point epsilon-regularity: a boundary-flat critical point must carry
/// N0 >= 2 - 0.05 and belong to the (n-2)-stratum at the smallest scale.
pub fn epsilon_regularity_check<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    q: Point,
    tol: f64,
    eps: f64,
    quad: usize,
) -> Result<bool> {
    let dim = field.dim();
    if domain.contains(q) != Membership::Boundary || domain.active_faces(q).len() != 1 {
        return Err(Error::NotBoundaryFlatCritical(q));
    }
    let nd = normal_derivative(field, domain, q, fd_step(field))
        .ok_or(Error::NotBoundaryFlatCritical(q))?;
    if nd.abs() > tol {
        return Err(Error::NotBoundaryFlatCritical(q));
    }
    let trace = blowup_trace(field, domain, q, 0.5, 10, 0.25, quad)?;
    if trace.n0 < 2.0 - 0.05 {
        return Ok(false);
    }
    let r_min = *trace.scales.last().unwrap();
    let spec = QuadSpec::light(dim).with_angular(quad.min(256));
    let (member, _) =
        strata_membership(field, domain, q, dim - 2, eps, r_min, 0.25, spec)?;
    Ok(member)
}

/// CSV table `x,y[,z],kind,normal_derivative,N0` for a critical set.
pub fn critical_points_to_csv(points: &[CriticalPoint], dim: usize) -> String {
    let mut out = String::from(if dim == 2 {
        "x,y,kind,normal_derivative,N0\n"
    } else {
        "x,y,z,kind,normal_derivative,N0\n"
    });
    for p in points {
        let kind = match p.kind {
            CriticalKind::Interior => "interior",
            CriticalKind::BoundaryFlat => "boundary_flat",
            CriticalKind::BoundarySingular => "boundary_singular",
        };
        let nd = p.normal_derivative.map_or(String::new(), |v| v.to_string());
        let coords: Vec<String> = p.location.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{},{kind},{nd},{}\n", coords.join(","), p.n0));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiRow {
    pub r: f64,
    pub tube_volume: f64,
    /// Vol(B_r(A)) / (2r)^{n-s}.
    pub content: f64,
}

/// Upper Minkowski content table for a finite point set.
pub fn minkowski_content(points: &[Point], dim: usize, s: f64, radii: &[f64]) -> Vec<MinkowskiRow> {
    let bound = points
        .iter()
        .map(|p| norm(*p))
        .fold(0.0f64, f64::max)
        + radii.iter().cloned().fold(0.0f64, f64::max)
        + 0.25;
    radii
        .iter()
        .map(|&r| {
            let vol = crate::covering::tube_volume(points, r, dim, bound);
            MinkowskiRow { r, tube_volume: vol, content: vol / (2.0 * r).powf(dim as f64 - s) }
        })
        .collect()
}
