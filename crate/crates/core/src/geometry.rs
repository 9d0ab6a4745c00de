//! Convex domains as half-space intersections: membership and distance
//! queries, rescaling, singular-point extraction, and quadrature node
//! generation on spheres.  All experiment geometry lives inside B_2(0), so
//! the boundary tolerance is absolute in those coordinates.

use crate::error::Error;
use crate::linalg::{add, dist, dot, norm, scale, sub, Point};
use crate::Result;
use serde::{Deserialize, Serialize};

/// Absolute boundary tolerance: 1e-10 times the B_2(0) diameter proxy.
pub const BOUNDARY_TOL: f64 = 4.0e-10;

/// The set {x : normal . x <= offset}.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let n = norm(normal);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "half-space normal must be unit length (|n| = {n})"
            )));
        }
        Ok(HalfSpace { normal, offset })
    }

    /// Normalizing constructor: accepts any nonzero direction.
    pub fn through(direction: Point, offset: f64) -> Result<Self> {
        let n = norm(direction);
        if n < 1e-300 {
            return Err(Error::invalid("half-space normal must be nonzero"));
        }
        Ok(HalfSpace { normal: scale(direction, 1.0 / n), offset: offset / n })
    }

    pub fn signed_excess(&self, x: Point) -> f64 {
        dot(self.normal, x) - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// Open intersection of half-spaces in dimension 2 or 3.  An empty list of
/// half-spaces is all of R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain {
    pub dim: usize,
    pub halves: Vec<HalfSpace>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains_point(&self, x: Point) -> bool {
        dist(x, self.center) <= self.radius + BOUNDARY_TOL
    }
}

impl ConvexDomain {
    pub fn new(dim: usize, halves: Vec<HalfSpace>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::invalid(format!("domain dimension must be 2 or 3, got {dim}")));
        }
        for h in &halves {
            if dim == 2 && h.normal[2].abs() > 1e-12 {
                return Err(Error::invalid("2D half-space normal has a z component"));
            }
        }
        Ok(ConvexDomain { dim, halves })
    }

    /// All of R^dim.
    pub fn whole_space(dim: usize) -> Self {
        ConvexDomain { dim, halves: Vec::new() }
    }

    pub fn contains(&self, x: Point) -> Membership {
        debug_assert!(x.iter().all(|c| c.is_finite()));
        let mut on_face = false;
        for h in &self.halves {
            let e = h.signed_excess(x);
            if e > BOUNDARY_TOL {
                return Membership::Exterior;
            }
            if e >= -BOUNDARY_TOL {
                on_face = true;
            }
        }
        if on_face {
            Membership::Boundary
        } else {
            Membership::Interior
        }
    }

    /// T_{p, r} Omega = (Omega - p) / r.
    pub fn rescale(&self, p: Point, r: f64) -> Result<ConvexDomain> {
        if !(r > 0.0) {
            return Err(Error::InvalidScale(r));
        }
        let halves = self
            .halves
            .iter()
            .map(|h| HalfSpace { normal: h.normal, offset: (h.offset - dot(h.normal, p)) / r })
            .collect();
        Ok(ConvexDomain { dim: self.dim, halves })
    }

    /// Faces within tolerance of `x`.
    pub fn active_faces(&self, x: Point) -> Vec<usize> {
        self.halves
            .iter()
            .enumerate()
            .filter(|(_, h)| h.signed_excess(x).abs() <= BOUNDARY_TOL)
            .map(|(i, _)| i)
            .collect()
    }

    /// Boundary points inside `region` at which the geometric blow-up is not
    /// flat.  In 2D these are the vertices where two faces with distinct
    /// normals meet; in 3D, sampled points along edges.
    pub fn singular_points(&self, region: Ball) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        let push_unique = |p: Point, out: &mut Vec<Point>| {
            if out.iter().all(|q| dist(*q, p) > 1e-9) {
                out.push(p);
            }
        };
        for i in 0..self.halves.len() {
            for j in (i + 1)..self.halves.len() {
                let a = &self.halves[i];
                let b = &self.halves[j];
                if dist(a.normal, b.normal) < 1e-9 {
                    continue;
                }
                if self.dim == 2 {
                    if let Some(p) = line_intersection_2d(a, b) {
                        if region.contains_point(p)
                            && self.contains(p) == Membership::Boundary
                            && self.active_faces(p).len() >= 2
                        {
                            push_unique(p, &mut out);
                        }
                    }
                } else {
                    // Edge = intersection of two face planes; sample it through the region.
                    if let Some((q, d)) = plane_intersection_line_3d(a, b) {
                        let t0 = dot(sub(region.center, q), d);
                        let step = region.radius / 64.0;
                        let mut t = t0 - region.radius;
                        while t <= t0 + region.radius {
                            let p = add(q, scale(d, t));
                            if region.contains_point(p)
                                && self.contains(p) == Membership::Boundary
                                && self.active_faces(p).len() >= 2
                            {
                                push_unique(p, &mut out);
                            }
                            t += step;
                        }
                    }
                }
            }
        }
        out
    }
}

fn line_intersection_2d(a: &HalfSpace, b: &HalfSpace) -> Option<Point> {
    let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
    if det.abs() < 1e-14 {
        return None;
    }
    let x = (a.offset * b.normal[1] - b.offset * a.normal[1]) / det;
    let y = (a.normal[0] * b.offset - b.normal[0] * a.offset) / det;
    Some([x, y, 0.0])
}

fn plane_intersection_line_3d(a: &HalfSpace, b: &HalfSpace) -> Option<(Point, Point)> {
    let d = [
        a.normal[1] * b.normal[2] - a.normal[2] * b.normal[1],
        a.normal[2] * b.normal[0] - a.normal[0] * b.normal[2],
        a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0],
    ];
    let dn = norm(d);
    if dn < 1e-14 {
        return None;
    }
    let d = scale(d, 1.0 / dn);
    // Point on both planes: solve in the span of the two normals.
    let nn = dot(a.normal, b.normal);
    let det = 1.0 - nn * nn;
    let ca = (a.offset - b.offset * nn) / det;
    let cb = (b.offset - a.offset * nn) / det;
    Some((add(scale(a.normal, ca), scale(b.normal, cb)), d))
}

/// Quadrature nodes on the sphere `|x - center| = radius` with weights
/// summing to its surface measure: uniform angles in 2D, a Fibonacci
/// lattice with equal weights in 3D.
pub fn sphere_samples(ball: Ball, dim: usize, count: usize) -> Vec<(Point, f64)> {
    assert!(count >= 8 || dim == 2, "sphere_samples requires count >= 8");
    let r = ball.radius;
    let c = ball.center;
    if dim == 2 {
        let w = 2.0 * std::f64::consts::PI * r / count as f64;
        (0..count)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                (add(c, [r * th.cos(), r * th.sin(), 0.0]), w)
            })
            .collect()
    } else {
        let w = 4.0 * std::f64::consts::PI * r * r / count as f64;
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let th = golden * i as f64;
                (add(c, [r * rho * th.cos(), r * rho * th.sin(), r * z]), w)
            })
            .collect()
    }
}

// JSON wire format: {"dim":2,"halves":[{"normal":[a,b],"offset":c},...]}.

#[derive(Serialize, Deserialize)]
struct HalfSpaceWire {
    normal: Vec<f64>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct DomainWire {
    dim: usize,
    halves: Vec<HalfSpaceWire>,
}

impl Serialize for ConvexDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DomainWire {
            dim: self.dim,
            halves: self
                .halves
                .iter()
                .map(|h| HalfSpaceWire {
                    normal: h.normal[..self.dim].to_vec(),
                    offset: h.offset,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = DomainWire::deserialize(d)?;
        let mut halves = Vec::with_capacity(w.halves.len());
        for hw in &w.halves {
            if hw.normal.len() != w.dim {
                return Err(serde::de::Error::custom("normal length != dim"));
            }
            let mut n = [0.0; 3];
            n[..w.dim].copy_from_slice(&hw.normal);
            halves.push(
                HalfSpace::new(n, hw.offset).map_err(|e| serde::de::Error::custom(e.to_string()))?,
            );
        }
        ConvexDomain::new(w.dim, halves).map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}
