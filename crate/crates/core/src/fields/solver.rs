//! Masked-grid Dirichlet solver on [-2, 2]^dim: 5/7-point Laplacian with the
//! zero boundary condition imposed by linear interpolation to the exact
//! boundary intersection along grid lines, outer data on the sphere |x| = 2.
//! Eliminating the cut values keeps the system symmetric positive definite,
//! so it is solved by Jacobi-preconditioned conjugate gradients with a
//! coarse-to-fine cascade for the initial guess.

use super::{GridField, Mask, ScalarField};
use crate::error::Error;
use crate::geometry::{sphere_samples, Ball, ConvexDomain, Membership};
use crate::linalg::{norm, Point};
use crate::Result;
use rayon::prelude::*;

const OUTER_RADIUS: f64 = 2.0;
const CG_TOL: f64 = 1e-12;
const CG_MAX_ITER: usize = 60_000;

pub fn solve_dirichlet(
    domain: &ConvexDomain,
    boundary_data: &(dyn Fn(Point) -> f64 + Sync),
    resolution: usize,
) -> Result<GridField> {
    if resolution < 4 {
        return Err(Error::invalid("solver resolution must be at least 4 nodes per unit"));
    }
    // Cascade of halved resolutions for warm starts.
    let mut chain = vec![resolution];
    while *chain.last().unwrap() > 32 && chain.last().unwrap() % 2 == 0 {
        chain.push(chain.last().unwrap() / 2);
    }
    let mut prev: Option<GridField> = None;
    for &res in chain.iter().rev() {
        prev = Some(solve_single(domain, boundary_data, res, prev.as_ref())?);
    }
    let mut gf = prev.unwrap();
    gf.normalization_frequency = Some(normalization_frequency(&gf));
    Ok(gf)
}

fn solve_single(
    domain: &ConvexDomain,
    boundary_data: &(dyn Fn(Point) -> f64 + Sync),
    resolution: usize,
    warm: Option<&GridField>,
) -> Result<GridField> {
    let dim = domain.dim;
    let h = 1.0 / resolution as f64;
    let side = 4 * resolution + 1;
    let mut shape = [1usize; 3];
    shape[..dim].copy_from_slice(&vec![side; dim]);
    let n_total: usize = shape.iter().product();

    let mut gf = GridField {
        dim,
        origin: [-2.0, -2.0, if dim == 3 { -2.0 } else { 0.0 }],
        h,
        shape,
        values: vec![0.0; n_total],
        mask: vec![Mask::Exterior; n_total],
        domain: domain.clone(),
        residual: 0.0,
        normalization_frequency: None,
    };

    // Classify nodes and assign known values.
    let mut unknown_of = vec![usize::MAX; n_total];
    let mut unknowns: Vec<[usize; 3]> = Vec::new();
    let mut any_outside_ball = false;
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let id = gf.idx(i, j, k);
                let p = gf.node(i, j, k);
                let m = domain.contains(p);
                let r = norm(p);
                if m == Membership::Exterior {
                    gf.values[id] = 0.0;
                } else if m == Membership::Boundary {
                    gf.values[id] = 0.0;
                    if r > OUTER_RADIUS - 1e-12 {
                        any_outside_ball = true;
                    }
                } else if r >= OUTER_RADIUS - 1e-12 {
                    any_outside_ball = true;
                    let q = if r > 0.0 {
                        [
                            p[0] * OUTER_RADIUS / r,
                            p[1] * OUTER_RADIUS / r,
                            p[2] * OUTER_RADIUS / r,
                        ]
                    } else {
                        p
                    };
                    gf.values[id] =
                        if domain.contains(q) != Membership::Exterior { boundary_data(q) } else { 0.0 };
                } else {
                    unknown_of[id] = unknowns.len();
                    unknowns.push([i, j, k]);
                }
            }
        }
    }
    if !any_outside_ball {
        return Err(Error::invalid(
            "domain does not reach outside B_2(0); class requires Omega with points beyond the sphere",
        ));
    }
    let n = unknowns.len();
    if n == 0 {
        return Err(Error::invalid("domain has no interior nodes inside B_2(0)"));
    }

    // Assemble rows: diagonal, up to 2*dim unknown neighbors, right-hand side.
    let mut diag = vec![0.0f64; n];
    let mut nbs = vec![[u32::MAX; 6]; n];
    let mut rhs = vec![0.0f64; n];
    let offsets: [[i64; 3]; 6] =
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    for (row, &[i, j, k]) in unknowns.iter().enumerate() {
        let p = gf.node(i, j, k);
        diag[row] = 2.0 * dim as f64;
        for (a, off) in offsets.iter().enumerate().take(2 * dim) {
            let ni = i as i64 + off[0];
            let nj = j as i64 + off[1];
            let nk = k as i64 + off[2];
            let nid = gf.idx(ni as usize, nj as usize, nk as usize);
            let q = gf.node(ni as usize, nj as usize, nk as usize);
            if unknown_of[nid] != usize::MAX {
                nbs[row][a] = unknown_of[nid] as u32;
                continue;
            }
            // Eliminated neighbor: locate the first crossing of the segment
            // p -> q with the domain boundary or the outer sphere.
            let (theta, g) = crossing(domain, boundary_data, p, q, gf.values[nid]);
            let theta = theta.max(1e-6);
            diag[row] += 1.0 / theta - 1.0;
            rhs[row] += g / theta;
        }
    }

    // Initial guess from the coarse solution where available.
    let mut x = vec![0.0f64; n];
    if let Some(coarse) = warm {
        for (row, &[i, j, k]) in unknowns.iter().enumerate() {
            x[row] = coarse.value(gf.node(i, j, k));
        }
    }

    let residual = conjugate_gradient(&diag, &nbs, &rhs, &mut x, dim)?;

    for (row, &[i, j, k]) in unknowns.iter().enumerate() {
        let id = gf.idx(i, j, k);
        gf.values[id] = x[row];
    }
    gf.residual = residual;
    gf.mask = build_mask(&gf);
    Ok(gf)
}

/// Fraction of the step at which segment p -> q leaves the admissible region,
/// together with the Dirichlet value at the crossing.
fn crossing(
    domain: &ConvexDomain,
    boundary_data: &(dyn Fn(Point) -> f64 + Sync),
    p: Point,
    q: Point,
    fallback_value: f64,
) -> (f64, f64) {
    let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let mut t_face = f64::INFINITY;
    for hs in &domain.halves {
        let denom = hs.normal[0] * d[0] + hs.normal[1] * d[1] + hs.normal[2] * d[2];
        if denom <= 0.0 {
            continue;
        }
        let t = -hs.signed_excess(p) / denom;
        if t >= -1e-12 && t <= 1.0 + 1e-12 {
            t_face = t_face.min(t.max(0.0));
        }
    }
    // Sphere crossing |p + t d| = OUTER_RADIUS.
    let aa = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let bb = 2.0 * (p[0] * d[0] + p[1] * d[1] + p[2] * d[2]);
    let cc = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - OUTER_RADIUS * OUTER_RADIUS;
    let mut t_sph = f64::INFINITY;
    let disc = bb * bb - 4.0 * aa * cc;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        for t in [(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)] {
            if t >= -1e-12 && t <= 1.0 + 1e-12 {
                t_sph = t_sph.min(t.max(0.0));
            }
        }
    }
    if t_face <= t_sph && t_face.is_finite() {
        (t_face.min(1.0), 0.0)
    } else if t_sph.is_finite() {
        let t = t_sph.min(1.0);
        let c = [p[0] + t * d[0], p[1] + t * d[1], p[2] + t * d[2]];
        let g = if domain.contains(c) != Membership::Exterior { boundary_data(c) } else { 0.0 };
        (t, g)
    } else {
        // No crossing found within the cell; take the neighbor value as-is.
        (1.0, fallback_value)
    }
}

fn apply(diag: &[f64], nbs: &[[u32; 6]], x: &[f64], y: &mut [f64], dim: usize) {
    y.par_iter_mut().enumerate().for_each(|(i, yi)| {
        let mut acc = diag[i] * x[i];
        for &nb in nbs[i].iter().take(2 * dim) {
            if nb != u32::MAX {
                acc -= x[nb as usize];
            }
        }
        *yi = acc;
    });
}

fn conjugate_gradient(
    diag: &[f64],
    nbs: &[[u32; 6]],
    b: &[f64],
    x: &mut [f64],
    dim: usize,
) -> Result<f64> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0.0);
    }
    let mut ax = vec![0.0; n];
    apply(diag, nbs, x, &mut ax, dim);
    let mut r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bi, axi)| bi - axi).collect();
    let mut z: Vec<f64> = r.iter().zip(diag.iter()).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut best = f64::INFINITY;
    for _it in 0..CG_MAX_ITER {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        best = best.min(rn);
        if rn <= CG_TOL {
            return Ok(rn);
        }
        apply(diag, nbs, &p, &mut ap, dim);
        let pap: f64 = p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if best <= 1e-10 {
        Ok(best)
    } else {
        Err(Error::SolverDiverged { residual: best, iterations: CG_MAX_ITER })
    }
}

pub fn build_mask(gf: &GridField) -> Vec<Mask> {
    let mut mask = vec![Mask::Exterior; gf.values.len()];
    let offsets: [[i64; 3]; 6] =
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    for k in 0..gf.shape[2] {
        for j in 0..gf.shape[1] {
            for i in 0..gf.shape[0] {
                let id = gf.idx(i, j, k);
                let p = gf.node(i, j, k);
                match gf.domain.contains(p) {
                    Membership::Exterior => mask[id] = Mask::Exterior,
                    Membership::Boundary => mask[id] = Mask::BoundaryAdjacent,
                    Membership::Interior => {
                        let mut adjacent = false;
                        for off in offsets.iter().take(2 * gf.dim) {
                            let ni = i as i64 + off[0];
                            let nj = j as i64 + off[1];
                            let nk = k as i64 + off[2];
                            if ni < 0
                                || nj < 0
                                || nk < 0
                                || ni >= gf.shape[0] as i64
                                || nj >= gf.shape[1] as i64
                                || nk >= gf.shape[2] as i64
                            {
                                continue;
                            }
                            let q = gf.node(ni as usize, nj as usize, nk as usize);
                            if gf.domain.contains(q) != Membership::Interior {
                                adjacent = true;
                                break;
                            }
                        }
                        mask[id] = if adjacent { Mask::BoundaryAdjacent } else { Mask::Interior };
                    }
                }
            }
        }
    }
    mask
}

/// N(0, 2 - h, u) diagnostic for the class normalization, computed directly
/// on the grid.
fn normalization_frequency(gf: &GridField) -> f64 {
    let r = OUTER_RADIUS - 2.0 * gf.h;
    let hn = gf.h.powi(gf.dim as i32);
    let mut dirichlet = 0.0;
    for k in 0..gf.shape[2] {
        for j in 0..gf.shape[1] {
            for i in 0..gf.shape[0] {
                let p = gf.node(i, j, k);
                if norm(p) <= r && gf.mask[gf.idx(i, j, k)] != Mask::Exterior {
                    let g = gf.node_grad(i, j, k);
                    dirichlet += hn * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
                }
            }
        }
    }
    let count = if gf.dim == 2 { 720 } else { 4096 };
    let u0 = gf.value([0.0; 3]);
    let mut height = 0.0;
    for (xq, w) in sphere_samples(Ball { center: [0.0; 3], radius: r }, gf.dim, count) {
        if gf.domain.contains(xq) != Membership::Exterior {
            let d = gf.value(xq) - u0;
            height += w * d * d;
        }
    }
    if height <= 0.0 {
        return f64::INFINITY;
    }
    r * dirichlet / height
}
