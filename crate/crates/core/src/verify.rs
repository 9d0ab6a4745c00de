//! The built-in verification suite: every invariant that has a closed-form
//! or cross-checked oracle, run over the preset library, with measured
//! constants reported.  The CLI `verify` command serializes the report;
//! artifacts are deterministic for a fixed seed.

use crate::beta::{beta_bruteforce, beta_eigen, DiscreteMeasure};
use crate::frequency::{doubling_check, frequency_profile, max_frequency};
use crate::linalg::pt2;
use crate::oracles;
use crate::quadrature::QuadSpec;
use crate::symmetry::{rescale, symmetry_defect};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub details: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name
            ));
        }
        out.push_str(&format!(
            "{}: {}/{} checks passed\n",
            if self.all_passed { "OK" } else { "FAILED" },
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        ));
        out
    }
}

fn check(name: &str, passed: bool, measured: BTreeMap<String, f64>, details: String) -> CheckResult {
    CheckResult { name: name.into(), passed, measured, details }
}

/// Run the full invariant suite.  `quad` is the angular node count (720 is
/// the acceptance default).
pub fn run(seed: u64, quad: usize) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    // Boundary monotonicity over the homogeneous suite, 20-rung ladders.
    {
        let mut worst_drop: f64 = 0.0;
        let mut ok = true;
        for o in oracles::homogeneous_suite() {
            let radii: Vec<f64> = (1..=20).map(|i| 0.025 * i as f64).collect();
            let prof = frequency_profile(&o.field, &o.domain, [0.0; 3], &radii, quad)?;
            let ns: Vec<f64> = prof.valid_records().map(|r| r.n).collect();
            for w in ns.windows(2) {
                worst_drop = worst_drop.max(w[0] - w[1]);
                if w[1] < w[0] - 1e-3 {
                    ok = false;
                }
            }
        }
        let mut m = BTreeMap::new();
        m.insert("worst_drop".into(), worst_drop);
        checks.push(check(
            "boundary_monotonicity",
            ok,
            m,
            "N(Q, r) nondecreasing within 1e-3 on 20-rung ladders".into(),
        ));
    }

    // lambda = N on homogeneous fields.
    {
        let mut worst: f64 = 0.0;
        for o in oracles::homogeneous_suite() {
            let radii = [0.1, 0.2, 0.3, 0.4];
            let prof = frequency_profile(&o.field, &o.domain, [0.0; 3], &radii, quad)?;
            for rec in prof.valid_records() {
                worst = worst.max((rec.lambda - rec.n).abs() / rec.n.max(1e-12));
            }
        }
        let mut m = BTreeMap::new();
        m.insert("worst_relative_gap".into(), worst);
        checks.push(check(
            "lambda_equals_n_homogeneous",
            worst <= 0.01,
            m,
            "frequency coefficient equals N within 1% on the oracle library".into(),
        ));
    }

    // Doubling equalities: ratios 8, 32, 16.
    {
        let cases = [("half_plane_linear", 0.2, 0.4, 8.0), ("poly_Im_z2", 0.1, 0.2, 32.0), ("wedge_2pi_3", 0.2, 0.4, 16.0)];
        let mut ok = true;
        let mut m = BTreeMap::new();
        for (name, s, big_s, ratio) in cases {
            let o = oracles::preset(name).unwrap();
            let rep = doubling_check(&o.field, &o.domain, [0.0; 3], s, big_s, quad, 1e-3)?;
            let eq_lhs = (rep.lhs - ratio).abs() <= 1e-6 * ratio;
            let eq_bound = (rep.bound - ratio).abs() <= 1e-3 * ratio;
            ok &= rep.satisfied && eq_lhs && eq_bound;
            m.insert(format!("{name}_lhs"), rep.lhs);
            m.insert(format!("{name}_bound"), rep.bound);
        }
        checks.push(check(
            "doubling_equalities",
            ok,
            m,
            "H doubling tight with ratios 8 / 32 / 16 on the closed forms".into(),
        ));
    }

    // Quadrature stability: doubling the node count moves N by < 0.1%.
    {
        let mut worst: f64 = 0.0;
        for name in ["wedge_2pi_3", "poly_Im_z2"] {
            let o = oracles::preset(name).unwrap();
            let n1 = frequency_profile(&o.field, &o.domain, [0.0; 3], &[0.3], quad)?.records[0].n;
            let n2 =
                frequency_profile(&o.field, &o.domain, [0.0; 3], &[0.3], 2 * quad)?.records[0].n;
            worst = worst.max((n1 - n2).abs() / n2);
        }
        let mut m = BTreeMap::new();
        m.insert("worst_relative_shift".into(), worst);
        checks.push(check(
            "quadrature_stability",
            worst < 1e-3,
            m,
            "doubling the angular node count changes N by < 0.1%".into(),
        ));
    }

    // Rescaling invariance of N through windows.
    {
        let o = oracles::preset("wedge_2pi_3").unwrap();
        let p = pt2(0.04, 0.03);
        let b = 0.2;
        let direct = frequency_profile(&o.field, &o.domain, p, &[0.1 * b], quad)?.records[0].n;
        let window = rescale(&o.field, &o.domain, p, b, quad)?;
        let tdomain = window.rescaled_domain();
        let via_window = frequency_profile(&window, &tdomain, [0.0; 3], &[0.1], quad)?.records[0].n;
        let gap = (direct - via_window).abs();
        let mut m = BTreeMap::new();
        m.insert("gap".into(), gap);
        checks.push(check(
            "rescaling_invariance",
            gap <= 1e-8,
            m,
            "N agrees on rescaled window and source within 1e-8".into(),
        ));
    }

    // Constancy of N implies vanishing homogeneity defect.
    {
        let mut ok = true;
        let mut m = BTreeMap::new();
        for name in ["poly_Re_z2", "wedge_pi_2", "wedge_2pi_3"] {
            let o = oracles::preset(name).unwrap();
            let radii = [0.2, 0.25, 0.3, 0.35, 0.4];
            let prof = frequency_profile(&o.field, &o.domain, [0.0; 3], &radii, quad)?;
            let ns: Vec<f64> = prof.valid_records().map(|r| r.n).collect();
            let spread =
                ns.iter().cloned().fold(f64::MIN, f64::max) - ns.iter().cloned().fold(f64::MAX, f64::min);
            let defect =
                crate::frequency::homogeneity_defect(&o.field, &o.domain, [0.0; 3], 0.2, 0.4, quad)?;
            m.insert(format!("{name}_spread"), spread);
            m.insert(format!("{name}_defect"), defect);
            if spread <= 1e-6 && defect > 1e-6 {
                ok = false;
            }
        }
        checks.push(check(
            "constancy_gives_homogeneity",
            ok,
            m,
            "ladders with constant N have vanishing homogeneity defect".into(),
        ));
    }

    // Beta oracle equivalence on seeded random 2D measures.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut collinear_worst: f64 = 0.0;
        for case in 0..100 {
            let atoms = rng.gen_range(3..=50);
            let collinear = case % 10 == 0;
            let dir = {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
                (t.cos(), t.sin())
            };
            let mut pts = Vec::with_capacity(atoms);
            let mut ws = Vec::with_capacity(atoms);
            for _ in 0..atoms {
                let (x, y) = if collinear {
                    let t: f64 = rng.gen_range(-0.9..0.9);
                    (t * dir.0, t * dir.1)
                } else {
                    (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9))
                };
                pts.push(pt2(x, y));
                ws.push(rng.gen_range(0.1..1.0));
            }
            let mu = DiscreteMeasure::new(pts, ws)?;
            let be = beta_eigen(&mu, 2, [0.0; 3], 1.0, 1)?;
            let bb = beta_bruteforce(&mu, 2, [0.0; 3], 1.0, 1)?;
            let gap = (be.beta - bb.beta).abs();
            if collinear {
                collinear_worst = collinear_worst.max(be.beta.max(bb.beta));
            }
            worst = worst.max(gap);
        }
        let mut m = BTreeMap::new();
        m.insert("worst_gap".into(), worst);
        m.insert("collinear_worst_beta".into(), collinear_worst);
        checks.push(check(
            "beta_oracle_equivalence",
            worst <= 1e-6 && collinear_worst <= 1e-10,
            m,
            "eigen and brute-force beta agree to 1e-6 on 100 random measures".into(),
        ));
    }

    // Reifenberg families: segment satisfied, empty satisfied, area rejected.
    {
        let seg = segment_family(5);
        let v1 = crate::reifenberg::discrete_reifenberg_check(&seg, 0.01, 1.0, 6)?;
        let empty = crate::reifenberg::BallFamily::new(Vec::new(), Vec::new(), 1, 2)?;
        let v2 = crate::reifenberg::discrete_reifenberg_check(&empty, 0.01, 1.0, 6)?;
        let area = area_family();
        let v3 = crate::reifenberg::discrete_reifenberg_check(&area, 0.01, 1.0, 3)?;
        let mut m = BTreeMap::new();
        m.insert("segment_packing".into(), v1.packing);
        m.insert("area_packing".into(), v3.packing);
        checks.push(check(
            "discrete_reifenberg_families",
            v1.satisfied && v1.packing <= 2.0 && v2.satisfied && !v3.satisfied,
            m,
            "segment family passes with mu(B_1) <= 2; area grid fails at delta = 0.01".into(),
        ));
    }

    // Frequency drop vs symmetry defect: monotone relationship on samples.
    {
        let o = oracles::preset("poly_Im_z2").unwrap();
        let spec = QuadSpec::standard(2).with_angular(quad.min(360));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        while pairs.len() < 50 {
            let x: f64 = rng.gen_range(-0.3..0.3);
            let r: f64 = rng.gen_range(0.05..0.2);
            let p = pt2(x, 0.0);
            let Ok(e) = max_frequency(&o.field, &o.domain, p, 2.0 * r, 5, spec.angular) else {
                continue;
            };
            let Ok(prof) = frequency_profile(&o.field, &o.domain, p, &[0.1 * r], spec.angular)
            else {
                continue;
            };
            let rec = prof.records[0];
            if rec.degenerate {
                continue;
            }
            let drop = e - rec.n;
            let Ok(window) = rescale(&o.field, &o.domain, p, r, spec.angular) else {
                continue;
            };
            let Ok(d0) = symmetry_defect(&window, 0, spec) else { continue };
            pairs.push((drop, d0));
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let q = pairs.len() / 4;
        let low: f64 = pairs[..q].iter().map(|p| p.1).sum::<f64>() / q as f64;
        let high: f64 = pairs[pairs.len() - q..].iter().map(|p| p.1).sum::<f64>() / q as f64;
        let rho = spearman(&pairs);
        let mut m = BTreeMap::new();
        m.insert("low_drop_mean_defect".into(), low);
        m.insert("high_drop_mean_defect".into(), high);
        m.insert("spearman".into(), rho);
        checks.push(check(
            "quantitative_rigidity_trend",
            low <= high && rho > 0.3,
            m,
            "smaller frequency drop gives smaller 0-symmetry defect (50 samples)".into(),
        ));
    }

    // Frequency coefficient bound in nearly symmetric windows.
    {
        let mut fitted_bound: f64 = 0.0;
        let mut lam_max: f64 = 0.0;
        let spec = QuadSpec::standard(2).with_angular(quad.min(360));
        for o in oracles::homogeneous_suite() {
            let e = max_frequency(&o.field, &o.domain, [0.0; 3], 0.4, 5, spec.angular)?;
            fitted_bound = fitted_bound.max(e);
            for r in [0.1, 0.2, 0.3] {
                let window = rescale(&o.field, &o.domain, [0.0; 3], r, spec.angular)?;
                let d0 = symmetry_defect(&window, 0, spec)?;
                if d0 <= 0.05 {
                    let prof = frequency_profile(&o.field, &o.domain, [0.0; 3], &[r], spec.angular)?;
                    lam_max = lam_max.max(prof.records[0].lambda.abs());
                }
            }
        }
        let mut m = BTreeMap::new();
        m.insert("fitted_bound".into(), fitted_bound);
        m.insert("lambda_max".into(), lam_max);
        checks.push(check(
            "lambda_bound_symmetric_windows",
            lam_max <= 2.0 * fitted_bound,
            m,
            "|lambda| <= 2 x fitted frequency bound in (0, 0.05)-symmetric windows".into(),
        ));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { seed, checks, all_passed })
}

fn spearman(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    let rank = |vals: Vec<f64>| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut r = vec![0.0; n];
        for (pos, i) in idx.iter().enumerate() {
            r[*i] = pos as f64;
        }
        r
    };
    let rx = rank(pairs.iter().map(|p| p.0).collect());
    let ry = rank(pairs.iter().map(|p| p.1).collect());
    let mean = (n as f64 - 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..n {
        num += (rx[i] - mean) * (ry[i] - mean);
        dx += (rx[i] - mean).powi(2);
        dy += (ry[i] - mean).powi(2);
    }
    num / (dx.sqrt() * dy.sqrt()).max(1e-300)
}

/// 2^m disjoint balls of radius 2^{-m} spaced 2 tau along a segment.
pub fn segment_family(m: u32) -> crate::reifenberg::BallFamily {
    let tau = 0.5_f64.powi(m as i32);
    let count = 1usize << m;
    let start = -(count as f64 - 1.0) * tau;
    let centers = (0..count).map(|i| pt2(start + 2.0 * tau * i as f64, 0.0)).collect();
    crate::reifenberg::BallFamily::new(centers, vec![tau; count], 1, 2).unwrap()
}

/// A tau-spaced grid of balls filling a square.
pub fn area_family() -> crate::reifenberg::BallFamily {
    let tau = 0.5_f64.powi(5);
    let half = 0.9;
    let steps = (2.0 * half / tau) as i64;
    let mut centers = Vec::new();
    for i in 0..=steps {
        for j in 0..=steps {
            centers.push(pt2(-half + tau * i as f64, -half + tau * j as f64));
        }
    }
    let n = centers.len();
    crate::reifenberg::BallFamily::new(centers, vec![0.495 * tau; n], 1, 2).unwrap()
}
