//! Hypothesis checkers for the discrete and rectifiable Reifenberg theorems.
//! A ball family induces the measure mu = sum tau_i^k delta_{x_i}; at every
//! dyadic scale r_l = 2^{-l} and every trigger center x (support points plus
//! an r_l-lattice over B_2(0)) with B_{r_l}(x) inside B_2(0) and
//! mu(B_{r_l}(x)) >= eps_k r_l^k, the checker tests
//!
//!   sum_{i >= l} integral over B_{2 r_l}(x) of beta(z, 16 r_i)^2 dmu(z)
//!     < r_l^k delta^2.

use crate::beta::{beta_eigen, DiscreteMeasure};
use crate::error::Error;
use crate::linalg::{dist, Point};
use crate::symmetry::lattice_points;
use crate::Result;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct BallFamily {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
    pub k: usize,
    pub dim: usize,
}

impl BallFamily {
    pub fn new(centers: Vec<Point>, radii: Vec<f64>, k: usize, dim: usize) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::invalid("centers and radii must have equal length"));
        }
        if radii.iter().any(|t| !(*t > 0.0) || *t > 1.0 + 1e-12) {
            return Err(Error::invalid("ball radii must lie in (0, 1]"));
        }
        for i in 0..centers.len() {
            for j in (i + 1)..centers.len() {
                if dist(centers[i], centers[j]) < radii[i] + radii[j] - 1e-12 {
                    return Err(Error::OverlappingBalls(i, j));
                }
            }
        }
        Ok(BallFamily { centers, radii, k, dim })
    }

    /// mu = sum tau_i^k delta_{x_i}.
    pub fn measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::new(
            self.centers.clone(),
            self.radii.iter().map(|t| t.powi(self.k as i32)).collect(),
        )
        .expect("weights are positive")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Wire {
            k: usize,
            dim: usize,
            balls: Vec<(Vec<f64>, f64)>,
        }
        let w: Wire = serde_json::from_str(text)?;
        let mut centers = Vec::with_capacity(w.balls.len());
        let mut radii = Vec::with_capacity(w.balls.len());
        for (c, t) in &w.balls {
            let mut p = [0.0; 3];
            p[..w.dim.min(3)].copy_from_slice(&c[..w.dim.min(c.len())]);
            centers.push(p);
            radii.push(*t);
        }
        BallFamily::new(centers, radii, w.k, w.dim)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReifWitness {
    pub x: Vec<f64>,
    pub level: usize,
    pub scale: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReifVerdict {
    pub satisfied: bool,
    pub delta: f64,
    pub eps_k: f64,
    pub max_depth: usize,
    /// mu(B_1(0)).
    pub packing: f64,
    /// Worst trigger by lhs/rhs ratio.
    pub worst: Option<ReifWitness>,
    /// Per-level worst triggers.
    pub witnesses: Vec<ReifWitness>,
    /// Largest mu(B_{r_l}(x)) / r_l^k seen over triggers (Ahlfors witness).
    pub max_mass_ratio: f64,
    pub trigger_count: usize,
}

fn sweep(
    mu: &DiscreteMeasure,
    dim: usize,
    k: usize,
    delta: f64,
    eps_k: f64,
    max_depth: usize,
) -> Result<ReifVerdict> {
    let support = &mu.points;
    let n = support.len();

    // beta^2 tail sums per support point: tails[z][l] = sum_{i >= l} beta(z, 16 r_i)^2.
    let beta_sq: Vec<Vec<f64>> = support
        .par_iter()
        .map(|z| {
            (0..=max_depth)
                .map(|i| {
                    let r16 = 16.0 * 0.5_f64.powi(i as i32);
                    beta_eigen(mu, dim, *z, r16, k).map(|b| b.beta * b.beta).unwrap_or(0.0)
                })
                .collect()
        })
        .collect();
    let mut tails = vec![vec![0.0; max_depth + 2]; n];
    for z in 0..n {
        for l in (0..=max_depth).rev() {
            tails[z][l] = tails[z][l + 1] + beta_sq[z][l];
        }
    }

    let mut worst: Option<ReifWitness> = None;
    let mut witnesses = Vec::new();
    let mut satisfied = true;
    let mut max_mass_ratio: f64 = 0.0;
    let mut trigger_count = 0usize;

    for l in 0..=max_depth {
        let r_l = 0.5_f64.powi(l as i32);
        // Candidate centers: support plus a scale-matched lattice over B_2(0).
        let mut centers: Vec<Point> = support.clone();
        centers.extend(lattice_points(
            crate::geometry::Ball { center: [0.0; 3], radius: 2.0 - r_l },
            r_l,
            dim,
        ));
        let rhs = r_l.powi(k as i32) * delta * delta;
        let mut level_worst: Option<ReifWitness> = None;
        for x in centers {
            if crate::linalg::norm(x) > 2.0 - r_l + 1e-12 {
                continue;
            }
            let mass = mu.mass_in(x, r_l);
            if mass < eps_k * r_l.powi(k as i32) {
                continue;
            }
            trigger_count += 1;
            max_mass_ratio = max_mass_ratio.max(mass / r_l.powi(k as i32));
            let mut lhs = 0.0;
            for (z, (pt, w)) in support.iter().zip(&mu.weights).enumerate() {
                let _ = pt;
                if dist(support[z], x) <= 2.0 * r_l {
                    lhs += w * tails[z][l];
                }
            }
            let witness = ReifWitness {
                x: x[..dim].to_vec(),
                level: l,
                scale: r_l,
                lhs,
                rhs,
                mass,
            };
            if lhs >= rhs {
                satisfied = false;
            }
            let ratio = lhs / rhs;
            if level_worst.as_ref().map_or(true, |w| ratio > w.lhs / w.rhs) {
                level_worst = Some(witness.clone());
            }
            if worst.as_ref().map_or(true, |w| ratio > w.lhs / w.rhs) {
                worst = Some(witness);
            }
        }
        if let Some(w) = level_worst {
            witnesses.push(w);
        }
    }

    let packing = mu.mass_in([0.0; 3], 1.0);
    Ok(ReifVerdict {
        satisfied,
        delta,
        eps_k,
        max_depth,
        packing,
        worst,
        witnesses,
        max_mass_ratio,
        trigger_count,
    })
}

/// Discrete Reifenberg hypothesis check for a disjoint ball family.
pub fn discrete_reifenberg_check(
    family: &BallFamily,
    delta: f64,
    eps_k: f64,
    max_depth: usize,
) -> Result<ReifVerdict> {
    if !(delta > 0.0 && eps_k > 0.0) {
        return Err(Error::invalid("delta and eps_k must be positive"));
    }
    let mu = family.measure();
    sweep(&mu, family.dim, family.k, delta, eps_k, max_depth)
}

/// Rectifiable Reifenberg check for a unit-weight sample of a set: weights
/// are rescaled to (sample spacing)^k so mu approximates k-dimensional
/// Hausdorff measure, then the same dyadic sweep runs.
pub fn rectifiable_check(
    sample: &DiscreteMeasure,
    dim: usize,
    k: usize,
    delta: f64,
    max_depth: usize,
) -> Result<ReifVerdict> {
    if sample.points.is_empty() {
        return sweep(sample, dim, k, delta, 1.0, max_depth);
    }
    let spacing = median_nn_spacing(&sample.points);
    let w = spacing.powi(k as i32);
    let mu = DiscreteMeasure::new(sample.points.clone(), vec![w; sample.points.len()])?;
    sweep(&mu, dim, k, delta, 1.0, max_depth)
}

fn median_nn_spacing(points: &[Point]) -> f64 {
    let mut nn: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| dist(*p, *q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nn[nn.len() / 2]
}
