//! Jones beta-numbers for discrete measures.  `beta_eigen` uses the
//! eigenvalue identity for the mass-averaged covariance; `beta_bruteforce`
//! minimizes the defining least-squares distance over lines directly and
//! exists to pin the eigen route down, radius scaling included:
//!
//!   beta^2(p, r) = (1/r^k) * integral over B_r(p) of dist(x, L)^2 / r^2.

use crate::error::Error;
use crate::linalg::{dist, dot, sub, Point, SymMat};
use crate::Result;

#[derive(Debug, Clone, Default)]
pub struct DiscreteMeasure {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::invalid("points and weights must have equal length"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        Ok(DiscreteMeasure { points, weights })
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass inside the closed ball.
    pub fn mass_in(&self, p: Point, r: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| dist(**x, p) <= r)
            .map(|(_, w)| w)
            .sum()
    }

    fn restricted(&self, p: Point, r: f64) -> (Vec<Point>, Vec<f64>) {
        let mut pts = Vec::new();
        let mut ws = Vec::new();
        for (x, w) in self.points.iter().zip(&self.weights) {
            if dist(*x, p) <= r && *w > 0.0 {
                pts.push(*x);
                ws.push(*w);
            }
        }
        (pts, ws)
    }

    /// CSV rows `x,y[,z],w`.
    pub fn from_csv(text: &str, dim: usize) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('x') || line.starts_with('#') {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("csv line {}: {e}", lineno + 1)))?;
            if cols.len() != dim + 1 {
                return Err(Error::invalid(format!(
                    "csv line {}: expected {} columns",
                    lineno + 1,
                    dim + 1
                )));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(&cols[..dim]);
            points.push(p);
            weights.push(cols[dim]);
        }
        DiscreteMeasure::new(points, weights)
    }

    pub fn to_csv(&self, dim: usize) -> String {
        let mut out = String::from(if dim == 2 { "x,y,w\n" } else { "x,y,z,w\n" });
        for (p, w) in self.points.iter().zip(&self.weights) {
            if dim == 2 {
                out.push_str(&format!("{},{},{}\n", p[0], p[1], w));
            } else {
                out.push_str(&format!("{},{},{},{}\n", p[0], p[1], p[2], w));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BetaResult {
    pub beta: f64,
    /// Best-fit affine plane: base point and orthonormal spanning vectors.
    pub base: Point,
    pub span: Vec<Point>,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

/// Eigenvalues below this relative share of the trace are clamped to zero;
/// exactly coplanar supports then report beta = 0.
const EIGEN_CLAMP: f64 = 1e-13;

pub fn beta_eigen(mu: &DiscreteMeasure, dim: usize, p: Point, r: f64, k: usize) -> Result<BetaResult> {
    if k == 0 || k >= dim {
        return Err(Error::BadStratumIndex { k, dim });
    }
    if !(r > 0.0) {
        return Err(Error::invalid("beta radius must be positive"));
    }
    let (pts, ws) = mu.restricted(p, r);
    let mass: f64 = ws.iter().sum();
    if mass <= 0.0 {
        return Ok(BetaResult { beta: 0.0, base: p, span: Vec::new(), eigenvalues: vec![0.0; dim] });
    }
    let mut center = [0.0; 3];
    for (x, w) in pts.iter().zip(&ws) {
        for d in 0..dim {
            center[d] += w * x[d];
        }
    }
    for c in center.iter_mut().take(dim) {
        *c /= mass;
    }
    let mut cov = SymMat::zero(dim);
    for (x, w) in pts.iter().zip(&ws) {
        cov.add_outer(sub(*x, center), *w);
    }
    cov.scale(1.0 / mass);
    let (mut vals, vecs) = cov.eigen();
    let trace = vals.iter().sum::<f64>();
    for v in vals.iter_mut() {
        if *v < EIGEN_CLAMP * trace {
            *v = 0.0;
        }
    }
    let residual: f64 = vals[k..].iter().sum();
    let beta2 = (mass / r.powi(k as i32)) * residual / (r * r);
    Ok(BetaResult {
        beta: beta2.max(0.0).sqrt(),
        base: center,
        span: vecs[..k].to_vec(),
        eigenvalues: vals,
    })
}

/// Direct minimization over lines for dim = 2, k = 1: angle grid of 3600,
/// golden-section refinement of the offset for each angle, then a nested
/// golden polish of the best angle.
pub fn beta_bruteforce(
    mu: &DiscreteMeasure,
    dim: usize,
    p: Point,
    r: f64,
    k: usize,
) -> Result<BetaResult> {
    if dim != 2 || k != 1 {
        return Err(Error::UnsupportedBruteForce { dim, k });
    }
    if !(r > 0.0) {
        return Err(Error::invalid("beta radius must be positive"));
    }
    let (pts, ws) = mu.restricted(p, r);
    if pts.len() > 1000 {
        return Err(Error::invalid("brute-force oracle restricted to <= 1000 support points"));
    }
    let mass: f64 = ws.iter().sum();
    if mass <= 0.0 {
        return Ok(BetaResult { beta: 0.0, base: p, span: Vec::new(), eigenvalues: vec![0.0; 2] });
    }

    // Squared-distance cost for the line with normal angle theta and offset b.
    let cost_b = |theta: f64, b: f64| -> f64 {
        let n = [-theta.sin(), theta.cos(), 0.0];
        pts.iter().zip(&ws).map(|(x, w)| {
            let d = dot(n, *x) - b;
            w * d * d
        }).sum()
    };
    // Projections bracket the optimal offset.
    let bracket = |theta: f64| -> (f64, f64) {
        let n = [-theta.sin(), theta.cos(), 0.0];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in &pts {
            let t = dot(n, *x);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        (lo - 1e-12, hi + 1e-12)
    };
    let golden_offset = |theta: f64| -> (f64, f64) {
        let (mut a, mut b) = bracket(theta);
        const PHI: f64 = 0.6180339887498949;
        let mut c = b - PHI * (b - a);
        let mut d = a + PHI * (b - a);
        let mut fc = cost_b(theta, c);
        let mut fd = cost_b(theta, d);
        for _ in 0..90 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - PHI * (b - a);
                fc = cost_b(theta, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + PHI * (b - a);
                fd = cost_b(theta, d);
            }
            if (b - a).abs() < 1e-14 * (1.0 + b.abs()) {
                break;
            }
        }
        let mid = 0.5 * (a + b);
        (cost_b(theta, mid), mid)
    };

    let grid = 3600;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..grid {
        let theta = std::f64::consts::PI * i as f64 / grid as f64;
        let (c, b) = golden_offset(theta);
        if c < best.0 {
            best = (c, theta, b);
        }
    }
    // Nelder-Mead-style polish of the angle via nested golden section.
    let dtheta = std::f64::consts::PI / grid as f64;
    let (mut a, mut b) = (best.1 - dtheta, best.1 + dtheta);
    const PHI: f64 = 0.6180339887498949;
    let mut c = b - PHI * (b - a);
    let mut d = a + PHI * (b - a);
    let mut fc = golden_offset(c).0;
    let mut fd = golden_offset(d).0;
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - PHI * (b - a);
            fc = golden_offset(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + PHI * (b - a);
            fd = golden_offset(d).0;
        }
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    let (cost, offset) = golden_offset(theta);
    let cost = cost.min(best.0);

    // cost sums w * dist^2, so beta^2 = cost / (r^k * r^2).
    let beta2 = cost / (r.powi(k as i32) * r * r);
    let n = [-theta.sin(), theta.cos(), 0.0];
    let dir = [theta.cos(), theta.sin(), 0.0];
    let base = [offset * n[0], offset * n[1], 0.0];
    Ok(BetaResult {
        beta: beta2.max(0.0).sqrt(),
        base,
        span: vec![dir],
        eigenvalues: Vec::new(),
    })
}

/// CSV table `p_x,p_y[,p_z],r,k,beta`.
pub fn results_to_csv(rows: &[(Point, f64, usize, f64)], dim: usize) -> String {
    let mut out =
        String::from(if dim == 2 { "p_x,p_y,r,k,beta\n" } else { "p_x,p_y,p_z,r,k,beta\n" });
    for (p, r, k, beta) in rows {
        if dim == 2 {
            out.push_str(&format!("{},{},{},{},{}\n", p[0], p[1], r, k, beta));
        } else {
            out.push_str(&format!("{},{},{},{},{},{}\n", p[0], p[1], p[2], r, k, beta));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pt2;

    fn unit_measure(pts: Vec<Point>) -> DiscreteMeasure {
        let n = pts.len();
        DiscreteMeasure::new(pts, vec![1.0; n]).unwrap()
    }

    #[test]
    fn collinear_points_have_zero_beta() {
        let mu = unit_measure(vec![pt2(-0.5, -0.25), pt2(0.0, 0.0), pt2(0.6, 0.3)]);
        let be = beta_eigen(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        assert_eq!(be.beta, 0.0);
        // The witness line is their common direction.
        let d = be.span[0];
        assert!((d[1] / d[0] - 0.5).abs() < 1e-9);

        let bb = beta_bruteforce(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        assert!(bb.beta <= 1e-10, "brute force beta = {}", bb.beta);
    }

    #[test]
    fn single_atom_and_empty_ball() {
        let mu = unit_measure(vec![pt2(0.2, 0.1)]);
        let be = beta_eigen(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        assert_eq!(be.beta, 0.0);
        let be = beta_eigen(&mu, 2, pt2(5.0, 5.0), 1.0, 1).unwrap();
        assert_eq!(be.beta, 0.0);
    }

    #[test]
    fn square_corners_closed_form() {
        // Four unit weights at (+-1/2, +-1/2): optimal line through 0 along
        // an axis, each distance 1/2, so beta^2 = 4 * 1/4 = 1.
        let mu = unit_measure(vec![
            pt2(0.5, 0.5),
            pt2(0.5, -0.5),
            pt2(-0.5, 0.5),
            pt2(-0.5, -0.5),
        ]);
        let bb = beta_bruteforce(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        assert!((bb.beta - 1.0).abs() < 1e-9, "beta = {}", bb.beta);
        let be = beta_eigen(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        assert!((be.beta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_agrees_with_bruteforce_on_asymmetric_data() {
        let mu = unit_measure(vec![pt2(0.8, 0.0), pt2(-0.8, 0.0), pt2(0.0, 0.6)]);
        let be = beta_eigen(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        let bb = beta_bruteforce(&mu, 2, [0.0; 3], 1.0, 1).unwrap();
        assert!((be.beta - bb.beta).abs() < 1e-6, "{} vs {}", be.beta, bb.beta);
    }

    #[test]
    fn k_out_of_range_errors() {
        let mu = unit_measure(vec![pt2(0.0, 0.0)]);
        assert!(beta_eigen(&mu, 2, [0.0; 3], 1.0, 0).is_err());
        assert!(beta_eigen(&mu, 2, [0.0; 3], 1.0, 2).is_err());
        assert!(beta_bruteforce(&mu, 3, [0.0; 3], 1.0, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mu = unit_measure(vec![pt2(0.25, -0.5), pt2(0.125, 1.0)]);
        let csv = mu.to_csv(2);
        let back = DiscreteMeasure::from_csv(&csv, 2).unwrap();
        assert_eq!(mu.points, back.points);
        assert_eq!(mu.weights, back.weights);
    }
}
