//! Composite quadrature over balls, annuli, and restricted spheres.  Angular
//! nodes come from `sphere_samples`; radial integration uses composite
//! Gauss-Legendre panels.  Nodes falling exactly on a domain face carry half
//! weight so that piecewise integrands aligned with faces are treated as
//! their two-sided average.

use crate::geometry::{sphere_samples, Ball, ConvexDomain, Membership};
use crate::linalg::{gauss_legendre, Point};

#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub angular: usize,
    pub radial_panels: usize,
    pub gauss: usize,
}

impl QuadSpec {
    /// Default used by the verification suite: 720 angular nodes in 2D,
    /// 4096 in 3D.
    pub fn standard(dim: usize) -> Self {
        QuadSpec { angular: if dim == 2 { 720 } else { 4096 }, radial_panels: 24, gauss: 8 }
    }

    /// Cheaper rule for lattice scans, where each point needs many windows.
    pub fn light(dim: usize) -> Self {
        QuadSpec { angular: if dim == 2 { 96 } else { 512 }, radial_panels: 6, gauss: 4 }
    }

    pub fn with_angular(mut self, count: usize) -> Self {
        self.angular = count;
        self
    }
}

/// Membership factor: 1 inside, 1/2 exactly on a face, 0 outside.
pub fn membership_factor(domain: &ConvexDomain, x: Point) -> f64 {
    match domain.contains(x) {
        Membership::Interior => 1.0,
        Membership::Boundary => 0.5,
        Membership::Exterior => 0.0,
    }
}

/// Integral of `f` over the sphere bd B_r(p) restricted to the closed domain.
pub fn sphere_integral<F: FnMut(Point) -> f64>(
    domain: &ConvexDomain,
    ball: Ball,
    dim: usize,
    count: usize,
    mut f: F,
) -> f64 {
    let mut acc = 0.0;
    for (x, w) in sphere_samples(ball, dim, count) {
        let factor = membership_factor(domain, x);
        if factor > 0.0 {
            acc += w * factor * f(x);
        }
    }
    acc
}

/// Radial shell nodes (radius, weight) covering [r0, r1] with panels sized
/// relative to `scale` (usually r1).
pub fn radial_shells(r0: f64, r1: f64, scale: f64, spec: QuadSpec) -> Vec<(f64, f64)> {
    assert!(r1 > r0 && r0 >= 0.0);
    let frac = ((r1 - r0) / scale.max(r1)).min(1.0);
    let panels = ((spec.radial_panels as f64 * frac).ceil() as usize).max(2);
    let gl = gauss_legendre(spec.gauss);
    let mut out = Vec::with_capacity(panels * spec.gauss);
    let dx = (r1 - r0) / panels as f64;
    for p in 0..panels {
        let a = r0 + p as f64 * dx;
        for (t, w) in &gl {
            out.push((a + 0.5 * dx * (t + 1.0), 0.5 * dx * w));
        }
    }
    out
}

/// Integral of `f` over the annulus (or ball when r0 = 0) restricted to the
/// closed domain, via radial shells of restricted sphere integrals.
pub fn annulus_integral<F: FnMut(Point) -> f64 + Copy>(
    domain: &ConvexDomain,
    center: Point,
    r0: f64,
    r1: f64,
    dim: usize,
    spec: QuadSpec,
    f: F,
) -> f64 {
    let mut acc = 0.0;
    for (s, w) in radial_shells(r0, r1, r1, spec) {
        let shell = sphere_integral(domain, Ball { center, radius: s }, dim, spec.angular, f);
        acc += w * shell;
    }
    acc
}
