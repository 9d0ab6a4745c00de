//! Rescaled windows T_{p,r}u = (u(p + ry) - u(p)) / ||.||, quantitative
//! (k, eps)-symmetry defects, and strata membership/scans.
//!
//! The infimum over all k-symmetric comparison functions is replaced by a
//! constructive two-part defect: distance from the degree-lambda homogeneous
//! extension of the window's own sphere trace, plus the k smallest
//! eigenvalues of the gradient covariance normalized by its trace.  Both
//! parts vanish exactly on k-symmetric windows, and all thresholds are
//! calibrated on the closed-form oracle suite.

use crate::error::Error;
use crate::fields::{require_resolved, ScalarField};
use crate::geometry::{sphere_samples, Ball, ConvexDomain, Membership};
use crate::linalg::{add, dot, scale, Point, SymMat};
use crate::quadrature::{membership_factor, radial_shells, QuadSpec};
use crate::Result;
use rayon::prelude::*;

pub const DEGENERATE_NORMALIZATION: f64 = 1e-14;

/// Scale ladder ratio for strata membership checks, with at most 12 rungs.
pub const LADDER_RATIO: f64 = 0.5;
pub const MAX_LADDER_RUNGS: usize = 12;

pub struct RescaledWindow<'a, F: ScalarField + ?Sized> {
    field: &'a F,
    domain: &'a ConvexDomain,
    pub p: Point,
    pub r: f64,
    pub normalization: f64,
}

impl<'a, F: ScalarField + ?Sized> RescaledWindow<'a, F> {
    pub fn rescaled_domain(&self) -> ConvexDomain {
        self.domain.rescale(self.p, self.r).expect("window scale is positive")
    }
}

impl<'a, F: ScalarField + ?Sized> ScalarField for RescaledWindow<'a, F> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn value(&self, y: Point) -> f64 {
        (self.field.value(add(self.p, scale(y, self.r))) - self.field.value(self.p))
            / self.normalization
    }

    fn grad(&self, y: Point) -> Point {
        scale(self.field.grad(add(self.p, scale(y, self.r))), self.r / self.normalization)
    }

    fn resolves(&self, ball: Ball) -> bool {
        self.field.resolves(Ball {
            center: add(self.p, scale(ball.center, self.r)),
            radius: ball.radius * self.r,
        })
    }

    fn min_radius(&self) -> f64 {
        self.field.min_radius() / self.r
    }

    fn probe_step(&self) -> f64 {
        self.field.probe_step() / self.r
    }
}

/// Build the unit-normalized window T_{p,r}u.  The normalization is the
/// restricted sphere L2 norm of u(p + r .) - u(p) on the unit sphere.
pub fn rescale<'a, F: ScalarField + ?Sized>(
    field: &'a F,
    domain: &'a ConvexDomain,
    p: Point,
    r: f64,
    quad: usize,
) -> Result<RescaledWindow<'a, F>> {
    require_resolved(field, Ball { center: p, radius: r })?;
    let dim = field.dim();
    let up = field.value(p);
    let mut norm2 = 0.0;
    for (y, w) in sphere_samples(Ball { center: [0.0; 3], radius: 1.0 }, dim, quad) {
        let x = add(p, scale(y, r));
        let factor = membership_factor(domain, x);
        if factor > 0.0 {
            let dv = field.value(x) - up;
            norm2 += w * factor * dv * dv;
        }
    }
    let normalization = norm2.sqrt();
    if normalization <= DEGENERATE_NORMALIZATION {
        return Err(Error::DegenerateWindow(normalization));
    }
    Ok(RescaledWindow { field, domain, p, r, normalization })
}

#[derive(Debug, Clone)]
pub struct SymmetryReport {
    /// `defects[k]` for k = 0..=dim: homogeneity defect plus the k smallest
    /// gradient-covariance eigenvalues over the trace.
    pub defects: Vec<f64>,
    /// Homogeneity exponent used for the comparison profile (the frequency
    /// coefficient of the window).
    pub exponent: f64,
    /// Eigenvalues of the gradient covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors; the last k are the near-invariance directions.
    pub directions: Vec<Point>,
}

/// Full defect table of a window.
pub fn symmetry_report<F: ScalarField + ?Sized>(
    window: &RescaledWindow<'_, F>,
    spec: QuadSpec,
) -> SymmetryReport {
    let dim = window.dim();
    let tdomain = window.rescaled_domain();

    // Sphere trace and the frequency coefficient of the window.
    let unit_nodes = sphere_samples(Ball { center: [0.0; 3], radius: 1.0 }, dim, spec.angular);
    let mut trace_vals = Vec::with_capacity(unit_nodes.len());
    let mut h1 = 0.0;
    let mut lam_num = 0.0;
    for (y, w) in &unit_nodes {
        let v = window.value(*y);
        trace_vals.push(v);
        let factor = membership_factor(&tdomain, *y);
        if factor > 0.0 {
            h1 += w * factor * v * v;
            lam_num += w * factor * v * dot(window.grad(*y), *y);
        }
    }
    let exponent = if h1 > 0.0 { (lam_num / h1).max(0.0) } else { 0.0 };

    let mut hom = 0.0;
    let mut cov = SymMat::zero(dim);
    for (s, wr) in radial_shells(0.0, 1.0, 1.0, spec) {
        let sa = s.powf(exponent);
        for (j, (y, w)) in unit_nodes.iter().enumerate() {
            let x = scale(*y, s);
            let factor = membership_factor(&tdomain, x);
            if factor == 0.0 {
                continue;
            }
            // Surface measure on the shell of radius s.
            let ws = w * s.powi(dim as i32 - 1) * factor * wr;
            let v = window.value(x);
            let resid = v - sa * trace_vals[j];
            hom += ws * resid * resid;
            cov.add_outer(window.grad(x), ws);
        }
    }

    let (eigenvalues, directions) = cov.eigen();
    let trace = cov.trace();
    let mut defects = Vec::with_capacity(dim + 1);
    for k in 0..=dim {
        let inv = if k == 0 || trace <= 1e-300 {
            0.0
        } else {
            eigenvalues[dim - k..].iter().sum::<f64>() / trace
        };
        defects.push(hom + inv);
    }
    SymmetryReport { defects, exponent, eigenvalues, directions }
}

pub fn symmetry_defect<F: ScalarField + ?Sized>(
    window: &RescaledWindow<'_, F>,
    k: usize,
    spec: QuadSpec,
) -> Result<f64> {
    let dim = window.dim();
    if k > dim {
        return Err(Error::BadStratumIndex { k, dim });
    }
    Ok(symmetry_report(window, spec).defects[k])
}

#[derive(Debug, Clone, Copy)]
pub struct QuantSymmetry {
    pub symmetric: bool,
    pub degenerate: bool,
    pub defect: f64,
}

/// Is u (k, eps)-symmetric in B_r(p)?  A degenerate window (u constant on
/// the sphere) counts as symmetric for every k, flagged.
pub fn is_quant_symmetric<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    p: Point,
    r: f64,
    k: usize,
    eps: f64,
    spec: QuadSpec,
) -> Result<QuantSymmetry> {
    match rescale(field, domain, p, r, spec.angular) {
        Ok(window) => {
            let defect = symmetry_defect(&window, k, spec)?;
            Ok(QuantSymmetry { symmetric: defect < eps, degenerate: false, defect })
        }
        Err(Error::DegenerateWindow(_)) => {
            Ok(QuantSymmetry { symmetric: true, degenerate: true, defect: 0.0 })
        }
        Err(e) => Err(e),
    }
}

/// Membership in the stratum S^k_{eps, r}: u is not (k+1, eps)-symmetric at
/// any ladder scale s = max_scale * (1/2)^j down to r (at most 12 rungs).
/// Returns the membership flag and the smallest (k+1)-defect seen.
pub fn strata_membership<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    p: Point,
    k: usize,
    eps: f64,
    r: f64,
    max_scale: f64,
    spec: QuadSpec,
) -> Result<(bool, f64)> {
    if !(r < max_scale) {
        return Err(Error::invalid("strata membership needs r < max_scale"));
    }
    let mut s = max_scale;
    let mut min_defect = f64::INFINITY;
    let mut rung = 0;
    while s >= r * (1.0 - 1e-12) && rung < MAX_LADDER_RUNGS {
        let q = is_quant_symmetric(field, domain, p, s, k + 1, eps, spec)?;
        if q.symmetric {
            return Ok((false, q.defect.min(min_defect)));
        }
        min_defect = min_defect.min(q.defect);
        s *= LADDER_RATIO;
        rung += 1;
    }
    Ok((true, min_defect))
}

#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub p: Point,
    /// Smallest (k+1)-symmetry defect over the scale ladder.
    pub min_defect: f64,
}

/// Lattice scan of the stratum inside `region`: all absolute-lattice points
/// of the given spacing in region and the closed domain passing membership.
pub fn strata_scan<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    region: Ball,
    step: f64,
    k: usize,
    eps: f64,
    r: f64,
    max_scale: f64,
    spec: QuadSpec,
) -> Result<Vec<ScanPoint>> {
    if !(step > 0.0) {
        return Err(Error::invalid("scan step must be positive"));
    }
    let dim = field.dim();
    let lattice = lattice_points(region, step, dim)
        .into_iter()
        .filter(|q| domain.contains(*q) != Membership::Exterior)
        .collect::<Vec<_>>();
    let results: Vec<Option<ScanPoint>> = lattice
        .par_iter()
        .map(|q| {
            match strata_membership(field, domain, *q, k, eps, r, max_scale, spec) {
                Ok((true, min_defect)) => Some(ScanPoint { p: *q, min_defect }),
                _ => None,
            }
        })
        .collect();
    Ok(results.into_iter().flatten().collect())
}

/// Absolute lattice (multiples of `step`) clipped to the closed ball.
pub fn lattice_points(region: Ball, step: f64, dim: usize) -> Vec<Point> {
    let mut out = Vec::new();
    let lo: Vec<i64> = (0..dim)
        .map(|d| ((region.center[d] - region.radius) / step - 1e-9).ceil() as i64)
        .collect();
    let hi: Vec<i64> = (0..dim)
        .map(|d| ((region.center[d] + region.radius) / step + 1e-9).floor() as i64)
        .collect();
    let mut idx = lo.clone();
    loop {
        let mut q = [0.0; 3];
        for d in 0..dim {
            q[d] = idx[d] as f64 * step;
        }
        if crate::linalg::dist(q, region.center) <= region.radius + 1e-12 {
            out.push(q);
        }
        // Odometer increment.
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] <= hi[d] {
                break;
            }
            idx[d] = lo[d];
            d += 1;
            if d == dim {
                return out;
            }
        }
    }
}

/// CSV with per-point defect margin.
pub fn scan_to_csv(points: &[ScanPoint], dim: usize) -> String {
    let mut out = String::new();
    out.push_str(if dim == 2 { "x,y,min_defect\n" } else { "x,y,z,min_defect\n" });
    for sp in points {
        if dim == 2 {
            out.push_str(&format!("{},{},{}\n", sp.p[0], sp.p[1], sp.min_defect));
        } else {
            out.push_str(&format!("{},{},{},{}\n", sp.p[0], sp.p[1], sp.p[2], sp.min_defect));
        }
    }
    out
}
