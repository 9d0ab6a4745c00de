//! Good/bad ball classification and the alternating tree covering of the
//! quantitative stratum.
//!
//! A ball B_r(p) is good when every stratum lattice point q inside it keeps
//! nearly the ceiling frequency at the fine scale: N(q, gamma rho r) >=
//! E - eta'.  Good trees refine by maximal (2/5)r_j-nets of the not yet
//! removed stratum points; bad trees net stratum points away from the
//! (k-1)-plane of small-drop points into stop balls of radius eta r_{i-1}
//! and refine only inside the plane neighborhood.  The final cover
//! alternates tree types from the root until no leaves remain, then
//! inflates stop radii to max(R, r_s).

use crate::error::Error;
use crate::fields::ScalarField;
use crate::frequency::frequency_profile;
use crate::geometry::{Ball, ConvexDomain, Membership};
use crate::linalg::{dist, Point};
use crate::quadrature::QuadSpec;
use crate::symmetry::{lattice_points, strata_scan};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const MAX_TREE_DEPTH: usize = 64;
const MAX_ALTERNATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    /// Refinement ratio, at most 1/10.
    pub rho: f64,
    /// Frequency-drop threshold.
    pub eta: f64,
    /// Drop tolerance in the good-ball test.
    pub eta_prime: f64,
    /// Rigidity scale factor: drops measured at radius gamma rho r.
    pub gamma: f64,
    /// Symmetry threshold defining the stratum.
    pub epsilon: f64,
    /// Final covering scale R.
    pub final_scale: f64,
    /// Stratum index.
    pub k: usize,
    /// Frequency ceiling E; measured over the region when absent.
    pub e_ceiling: Option<f64>,
    /// Stratum lattice spacing as a fraction of R.
    #[serde(default = "default_lattice_frac")]
    pub lattice_frac: f64,
    /// Top of the symmetry scale ladder.
    #[serde(default = "default_max_scale")]
    pub max_scale: f64,
    /// Angular quadrature nodes for frequency and defect integrals.
    #[serde(default = "default_quad")]
    pub quad: usize,
}

fn default_lattice_frac() -> f64 {
    0.2
}
fn default_max_scale() -> f64 {
    0.25
}
fn default_quad() -> usize {
    96
}

impl CoverParams {
    pub fn defaults(k: usize, final_scale: f64) -> Self {
        CoverParams {
            rho: 0.1,
            eta: 0.01,
            eta_prime: 0.02,
            gamma: 0.1,
            epsilon: 0.01,
            final_scale,
            k,
            e_ceiling: None,
            lattice_frac: default_lattice_frac(),
            max_scale: default_max_scale(),
            quad: default_quad(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 0.1) {
            return Err(Error::invalid("rho must lie in (0, 1/10]"));
        }
        if !(self.eta > 0.0 && self.eta <= self.eta_prime) {
            return Err(Error::invalid("need 0 < eta <= eta_prime"));
        }
        if !(self.final_scale > 0.0 && self.final_scale < 1.0) {
            return Err(Error::invalid("need 0 < R < 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) || !(self.epsilon > 0.0) {
            return Err(Error::invalid("gamma in (0,1) and epsilon > 0 required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Good,
    Bad,
    Stop,
}

/// Best-fit affine plane recorded on bad balls: base point plus orthonormal
/// spanning directions ((k-1)-dimensional; empty when k = 0 has no plane).
#[derive(Debug, Clone, Serialize)]
pub struct FitPlane {
    pub base: Vec<f64>,
    pub span: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BallNode {
    pub center: Vec<f64>,
    pub radius: f64,
    pub tag: Tag,
    pub parent: Option<usize>,
    pub level: usize,
    pub plane: Option<FitPlane>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StopBall {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Radius after inflation to max(R, r_s).
    pub inflated_radius: f64,
    pub from_good_tree: bool,
    /// Measured sup of N(., 2 r_s) over nearby stratum points (bad-tree stops).
    pub measured_sup_n: Option<f64>,
    /// Whether the stop satisfies its size/drop law.
    pub size_law_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverResult {
    pub params: CoverParams,
    pub e_ceiling: f64,
    pub region_center: Vec<f64>,
    pub region_radius: f64,
    pub stratum_size: usize,
    pub stops: Vec<StopBall>,
    pub stop_count: usize,
    /// Sum of r_s^k over stop balls (before inflation).
    pub stop_packing: f64,
    /// Leaf counts per alternation level.
    pub leaf_counts: Vec<usize>,
    /// Sum over tree leaves of r^k per alternation.
    pub leaf_packing: Vec<f64>,
    /// Observed packing constants: max over good trees of leaf sum / r_A^k,
    /// and over bad trees of leaf sum / (rho r_A^k).
    pub c1_observed: f64,
    pub c2_observed: f64,
    /// Every stratum lattice point lies in some inflated stop ball.
    pub covered: bool,
    pub uncovered: Vec<Vec<f64>>,
    pub trace: Vec<BallNode>,
    /// stop_count * R^k.
    pub cardinality_statistic: f64,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub tag: Tag,
    /// Stratum point failing the small-drop test, if bad.
    pub witness: Option<Point>,
    pub plane: Option<Plane>,
}

/// Memoized N(q, r) evaluations keyed on quantized coordinates.
pub struct FrequencyCache<'a, F: ScalarField + ?Sized> {
    field: &'a F,
    domain: &'a ConvexDomain,
    quad: usize,
    cache: BTreeMap<(i64, i64, i64, i64), f64>,
}

impl<'a, F: ScalarField + ?Sized> FrequencyCache<'a, F> {
    pub fn new(field: &'a F, domain: &'a ConvexDomain, quad: usize) -> Self {
        FrequencyCache { field, domain, quad, cache: BTreeMap::new() }
    }

    fn key(q: Point, r: f64) -> (i64, i64, i64, i64) {
        let s = |v: f64| (v * 1e12).round() as i64;
        (s(q[0]), s(q[1]), s(q[2]), s(r))
    }

    /// N(q, r); NaN when degenerate.
    pub fn n(&mut self, q: Point, r: f64) -> f64 {
        let key = Self::key(q, r);
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let v = frequency_profile(self.field, self.domain, q, &[r], self.quad)
            .ok()
            .and_then(|p| p.valid_records().next().map(|rec| rec.n))
            .unwrap_or(f64::NAN);
        self.cache.insert(key, v);
        v
    }
}

/// Good/bad classification of one ball against the stratum point set.
pub fn classify_with_points<F: ScalarField + ?Sized>(
    cache: &mut FrequencyCache<'_, F>,
    strata: &[Point],
    ball: Ball,
    params: &CoverParams,
    e_ceiling: f64,
) -> Classification {
    let r_fine = params.gamma * params.rho * ball.radius;
    let inside: Vec<Point> =
        strata.iter().copied().filter(|q| dist(*q, ball.center) <= ball.radius).collect();
    let mut witness = None;
    for q in &inside {
        let n = cache.n(*q, r_fine);
        // Degenerate measurements cannot certify the drop; treat as failing.
        if !(n >= e_ceiling - params.eta_prime) {
            witness = Some(*q);
            break;
        }
    }
    if witness.is_none() {
        return Classification { tag: Tag::Good, witness: None, plane: None };
    }
    // Bad ball: fit the (k-1)-plane through the small-drop points.
    let plane = if params.k == 0 {
        None
    } else {
        let r_drop = 2.0 * params.eta * ball.radius;
        let small_drop: Vec<Point> = inside
            .iter()
            .copied()
            .filter(|q| cache.n(*q, r_drop) >= e_ceiling - params.eta)
            .collect();
        Some(fit_plane(&small_drop, params.k, cache.field.dim()))
    };
    Classification { tag: Tag::Bad, witness, plane }
}

/// Standalone classification op: builds its own stratum lattice at spacing
/// lattice_frac * r inside the ball.
pub fn classify_ball<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    ball: Ball,
    params: &CoverParams,
) -> Result<Classification> {
    params.validate()?;
    let e = match params.e_ceiling {
        Some(e) => e,
        None => measure_ceiling(field, domain, ball, params)?,
    };
    let spec = QuadSpec::light(field.dim()).with_angular(params.quad);
    let step = params.lattice_frac * ball.radius;
    let strata: Vec<Point> = strata_scan(
        field,
        domain,
        ball,
        step,
        params.k,
        params.epsilon,
        params.eta * params.final_scale,
        params.max_scale,
        spec,
    )?
    .into_iter()
    .map(|sp| sp.p)
    .collect();
    let mut cache = FrequencyCache::new(field, domain, params.quad);
    Ok(classify_with_points(&mut cache, &strata, ball, params, e))
}

/// Affine plane as base point plus orthonormal spanning directions.
pub type Plane = (Point, Vec<Point>);

/// A tree leaf: ball center, radius, and the fitted plane for bad balls.
pub type Leaf = (Point, f64, Option<Plane>);

/// Mass-weighted best-fit (k-1)-plane via the covariance top eigenvectors.
fn fit_plane(points: &[Point], k: usize, dim: usize) -> Plane {
    if points.is_empty() {
        return ([0.0; 3], Vec::new());
    }
    let mut center = [0.0; 3];
    for p in points {
        for d in 0..dim {
            center[d] += p[d];
        }
    }
    for c in center.iter_mut().take(dim) {
        *c /= points.len() as f64;
    }
    if k <= 1 {
        // 0-dimensional plane: just the centroid.
        return (center, Vec::new());
    }
    let mut cov = crate::linalg::SymMat::zero(dim);
    for p in points {
        cov.add_outer(crate::linalg::sub(*p, center), 1.0);
    }
    let (_vals, vecs) = cov.eigen();
    (center, vecs[..k - 1].to_vec())
}

fn dist_to_plane(q: Point, plane: &Plane, dim: usize) -> f64 {
    let d = crate::linalg::sub(q, plane.0);
    let mut par = 0.0;
    for v in &plane.1 {
        let c = crate::linalg::dot(d, *v);
        par += c * c;
    }
    let mut total = 0.0;
    for a in 0..dim {
        total += d[a] * d[a];
    }
    (total - par).max(0.0).sqrt()
}

/// Greedy maximal net over `points` (already deterministically ordered).
fn maximal_net(points: &[Point], spacing: f64) -> Vec<Point> {
    let mut net: Vec<Point> = Vec::new();
    for p in points {
        if net.iter().all(|q| dist(*p, *q) > spacing) {
            net.push(*p);
        }
    }
    net
}

pub struct TreeOutcome {
    pub leaves: Vec<Leaf>,
    pub stops: Vec<StopBall>,
    pub nodes: Vec<BallNode>,
    /// Sum of r^k over leaves.
    pub leaf_packing: f64,
}

fn node(center: Point, radius: f64, tag: Tag, level: usize, dim: usize) -> BallNode {
    BallNode { center: center[..dim].to_vec(), radius, tag, parent: None, level, plane: None }
}

/// Good tree rooted at a good ball: at each level j a maximal (2/5) r_j-net
/// of the surviving stratum points inside the good region is classified;
/// recursion ends when r_j <= R and the last net becomes the stop balls.
pub fn good_tree<F: ScalarField + ?Sized>(
    cache: &mut FrequencyCache<'_, F>,
    strata: &[Point],
    root: Ball,
    params: &CoverParams,
    e_ceiling: f64,
) -> Result<TreeOutcome> {
    let dim = cache.field.dim();
    let mut nodes = vec![node(root.center, root.radius, Tag::Good, 0, dim)];
    let mut leaves = Vec::new();
    let mut stops = Vec::new();
    let mut leaf_packing = 0.0;

    let mut good_centers: Vec<(Point, f64)> = vec![(root.center, root.radius)];
    let mut removed: Vec<(Point, f64)> = Vec::new(); // bad balls of all prior levels
    let mut level = 1usize;
    loop {
        if level > MAX_TREE_DEPTH {
            return Err(Error::TreeDepthExceeded(MAX_TREE_DEPTH));
        }
        let r_j = params.rho.powi(level as i32) * root.radius;
        let r_prev = params.rho.powi(level as i32 - 1) * root.radius;
        let candidates: Vec<Point> = strata
            .iter()
            .copied()
            .filter(|q| dist(*q, root.center) <= root.radius)
            .filter(|q| good_centers.iter().any(|(g, _)| dist(*q, *g) <= r_prev))
            .filter(|q| removed.iter().all(|(b, rb)| dist(*q, *b) > *rb))
            .collect();
        let net = maximal_net(&candidates, 0.4 * r_j);
        if r_j <= params.final_scale {
            // Stop level: every net ball stops, tags no longer matter.
            for z in net {
                let mut n = node(z, r_j, Tag::Stop, level, dim);
                n.parent = Some(0);
                nodes.push(n);
                stops.push(StopBall {
                    center: z[..dim].to_vec(),
                    radius: r_j,
                    inflated_radius: r_j.max(params.final_scale),
                    from_good_tree: true,
                    measured_sup_n: None,
                    size_law_ok: params.rho * params.final_scale <= r_j + 1e-12
                        && r_j <= params.final_scale + 1e-12,
                });
            }
            break;
        }
        let mut new_good = Vec::new();
        for z in net {
            let c =
                classify_with_points(cache, strata, Ball { center: z, radius: r_j }, params, e_ceiling);
            let mut n = node(z, r_j, c.tag, level, dim);
            n.parent = Some(0);
            if let Some((base, span)) = &c.plane {
                n.plane = Some(FitPlane {
                    base: base[..dim].to_vec(),
                    span: span.iter().map(|v| v[..dim].to_vec()).collect(),
                });
            }
            nodes.push(n);
            match c.tag {
                Tag::Good => new_good.push((z, r_j)),
                Tag::Bad => {
                    removed.push((z, r_j));
                    leaf_packing += r_j.powi(params.k as i32);
                    leaves.push((z, r_j, c.plane));
                }
                Tag::Stop => unreachable!(),
            }
        }
        if new_good.is_empty() {
            break;
        }
        good_centers = new_good;
        level += 1;
    }
    Ok(TreeOutcome { leaves, stops, nodes, leaf_packing })
}

/// Bad tree rooted at a bad ball with its (k-1)-plane: stratum points away
/// from the plane neighborhood become stop balls of radius eta r_{i-1};
/// refinement continues only inside it.
pub fn bad_tree<F: ScalarField + ?Sized>(
    cache: &mut FrequencyCache<'_, F>,
    strata: &[Point],
    root: Ball,
    root_plane: Option<Plane>,
    params: &CoverParams,
    e_ceiling: f64,
) -> Result<TreeOutcome> {
    let dim = cache.field.dim();
    let mut nodes = vec![node(root.center, root.radius, Tag::Bad, 0, dim)];
    let mut leaves = Vec::new();
    let mut stops: Vec<StopBall> = Vec::new();
    let mut leaf_packing = 0.0;

    let mut bad_balls: Vec<Leaf> =
        vec![(root.center, root.radius, root_plane)];
    let mut level = 1usize;
    let in_root =
        |q: &Point| dist(*q, root.center) <= root.radius;

    while !bad_balls.is_empty() {
        if level > MAX_TREE_DEPTH {
            return Err(Error::TreeDepthExceeded(MAX_TREE_DEPTH));
        }
        let r_i = params.rho.powi(level as i32) * root.radius;
        let r_prev = params.rho.powi(level as i32 - 1) * root.radius;
        let stop_radius = params.eta * r_prev;

        let mut stop_candidates: Vec<Point> = Vec::new();
        let mut refine_candidates: Vec<Point> = Vec::new();
        if r_i > params.final_scale {
            for q in strata.iter().filter(|q| in_root(q)) {
                for (b, rb, plane) in &bad_balls {
                    if dist(*q, *b) > *rb {
                        continue;
                    }
                    let near_plane = match plane {
                        Some(pl) if params.k >= 1 => {
                            dist_to_plane(*q, pl, dim) <= 2.0 * params.rho * r_prev
                        }
                        _ => false, // k = 0: the (k-1)-plane is empty
                    };
                    if near_plane {
                        refine_candidates.push(*q);
                    } else {
                        stop_candidates.push(*q);
                    }
                    break;
                }
            }
        } else {
            // Terminal level: stop-net every surviving stratum point in the
            // previous level's bad balls, so covering control is preserved
            // even when the very first refinement scale lands below R.
            for q in strata.iter().filter(|q| in_root(q)) {
                if bad_balls.iter().any(|(b, rb, _)| dist(*q, *b) <= *rb) {
                    stop_candidates.push(*q);
                }
            }
        }

        for s in maximal_net(&stop_candidates, 0.4 * stop_radius) {
            let sup_n = measured_sup_n(cache, strata, s, stop_radius, params);
            let in_band = params.eta * params.final_scale <= stop_radius + 1e-12
                && stop_radius <= params.final_scale + 1e-12;
            let drop_ok = sup_n.map_or(false, |v| v <= e_ceiling - params.eta / 2.0);
            let mut n = node(s, stop_radius, Tag::Stop, level, dim);
            n.parent = Some(0);
            nodes.push(n);
            stops.push(StopBall {
                center: s[..dim].to_vec(),
                radius: stop_radius,
                inflated_radius: stop_radius.max(params.final_scale),
                from_good_tree: false,
                measured_sup_n: sup_n,
                size_law_ok: in_band || drop_ok,
            });
        }

        if r_i <= params.final_scale {
            break;
        }

        let net = maximal_net(&refine_candidates, 0.4 * r_i);
        let mut next_bad = Vec::new();
        for z in net {
            let c =
                classify_with_points(cache, strata, Ball { center: z, radius: r_i }, params, e_ceiling);
            let mut n = node(z, r_i, c.tag, level, dim);
            n.parent = Some(0);
            nodes.push(n);
            match c.tag {
                Tag::Good => {
                    leaf_packing += r_i.powi(params.k as i32);
                    leaves.push((z, r_i, None));
                }
                Tag::Bad => next_bad.push((z, r_i, c.plane)),
                Tag::Stop => unreachable!(),
            }
        }
        bad_balls = next_bad;
        level += 1;
    }
    Ok(TreeOutcome { leaves, stops, nodes, leaf_packing })
}

/// Sup of N(., 2 r_s) over the stop center and stratum points in B_{2 r_s}.
fn measured_sup_n<F: ScalarField + ?Sized>(
    cache: &mut FrequencyCache<'_, F>,
    strata: &[Point],
    s: Point,
    r_s: f64,
    _params: &CoverParams,
) -> Option<f64> {
    let mut sup: Option<f64> = None;
    let mut consider = |q: Point, cache: &mut FrequencyCache<'_, F>| {
        let n = cache.n(q, 2.0 * r_s);
        if n.is_finite() {
            sup = Some(sup.map_or(n, |v: f64| v.max(n)));
        }
    };
    consider(s, cache);
    for q in strata.iter().filter(|q| dist(**q, s) <= 2.0 * r_s) {
        consider(*q, cache);
    }
    sup
}

fn measure_ceiling<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    region: Ball,
    params: &CoverParams,
) -> Result<f64> {
    let step = region.radius / 4.0;
    let mut e: f64 = 0.0;
    let mut any = false;
    for q in lattice_points(region, step, field.dim()) {
        if domain.contains(q) == Membership::Exterior {
            continue;
        }
        if let Ok(v) =
            crate::frequency::max_frequency(field, domain, q, region.radius, 6, params.quad)
        {
            e = e.max(v);
            any = true;
        }
    }
    if any {
        Ok(e)
    } else {
        Err(Error::AllRadiiDegenerate)
    }
}

/// The full alternating covering of the stratum inside `region`.
pub fn build_cover<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    region: Ball,
    params: &CoverParams,
) -> Result<CoverResult> {
    params.validate()?;
    if region.radius <= params.final_scale {
        return Err(Error::invalid("region radius must exceed the final scale R"));
    }
    let dim = field.dim();
    let e_ceiling = match params.e_ceiling {
        Some(e) => e,
        None => measure_ceiling(field, domain, region, params)?,
    };

    let spec = QuadSpec::light(dim).with_angular(params.quad);
    let mut strata: Vec<Point> = strata_scan(
        field,
        domain,
        region,
        params.lattice_frac * params.final_scale,
        params.k,
        params.epsilon,
        params.eta * params.final_scale,
        params.max_scale,
        spec,
    )?
    .into_iter()
    .map(|sp| sp.p)
    .collect();
    strata.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut cache = FrequencyCache::new(field, domain, params.quad);
    let mut trace: Vec<BallNode> = Vec::new();
    let mut stops: Vec<StopBall> = Vec::new();
    let mut leaf_counts = Vec::new();
    let mut leaf_packing = Vec::new();
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;

    let root_class = classify_with_points(&mut cache, &strata, region, params, e_ceiling);
    let mut current: Vec<Leaf> =
        vec![(region.center, region.radius, root_class.plane.clone())];
    let mut current_good = root_class.tag == Tag::Good;

    let mut alternation = 0;
    while !current.is_empty() {
        alternation += 1;
        if alternation > MAX_ALTERNATIONS {
            return Err(Error::CoverDepthExceeded(MAX_ALTERNATIONS));
        }
        let mut next = Vec::new();
        let mut packing = 0.0;
        for (center, radius, plane) in current {
            let root = Ball { center, radius };
            let outcome = if current_good {
                good_tree(&mut cache, &strata, root, params, e_ceiling)?
            } else {
                bad_tree(&mut cache, &strata, root, plane, params, e_ceiling)?
            };
            let rak = radius.powi(params.k as i32);
            if current_good {
                c1 = c1.max(outcome.leaf_packing / rak);
            } else {
                c2 = c2.max(outcome.leaf_packing / (params.rho * rak));
            }
            packing += outcome.leaf_packing;
            trace.extend(outcome.nodes);
            stops.extend(outcome.stops);
            next.extend(outcome.leaves);
        }
        leaf_counts.push(next.len());
        leaf_packing.push(packing);
        current = next;
        current_good = !current_good;
    }

    let stop_packing: f64 = stops.iter().map(|s| s.radius.powi(params.k as i32)).sum();
    let mut uncovered = Vec::new();
    for q in &strata {
        let covered = stops.iter().any(|s| {
            let mut c = [0.0; 3];
            c[..dim].copy_from_slice(&s.center);
            dist(*q, c) <= s.inflated_radius + 1e-12
        });
        if !covered {
            uncovered.push(q[..dim].to_vec());
        }
    }

    let stop_count = stops.len();
    Ok(CoverResult {
        params: params.clone(),
        e_ceiling,
        region_center: region.center[..dim].to_vec(),
        region_radius: region.radius,
        stratum_size: strata.len(),
        covered: uncovered.is_empty(),
        uncovered,
        stop_count,
        stop_packing,
        leaf_counts,
        leaf_packing,
        c1_observed: c1,
        c2_observed: c2,
        cardinality_statistic: stop_count as f64 * params.final_scale.powi(params.k as i32),
        stops,
        trace,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeRow {
    pub r: f64,
    pub stratum_points: usize,
    pub tube_volume: f64,
    /// Vol(B_r(S)) / r^{n-k}.
    pub ratio: f64,
    /// Vol(B_r(S)) / (2r)^{n-s} with s = k.
    pub minkowski: f64,
}

/// Tubular volume of B_r(points) by lattice counting at resolution r/8: a
/// cell counts when its center or any corner is within r of the set.
pub fn tube_volume(points: &[Point], r: f64, dim: usize, bound: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let cell = r / 8.0;
    let lo = -(bound / cell).ceil() as i64;
    let hi = (bound / cell).ceil() as i64;
    let near = |x: Point| points.iter().any(|p| dist(x, *p) <= r);
    let mut count = 0usize;
    if dim == 2 {
        for i in lo..=hi {
            for j in lo..=hi {
                let x = i as f64 * cell;
                let y = j as f64 * cell;
                let probes = [
                    [x + 0.5 * cell, y + 0.5 * cell, 0.0],
                    [x, y, 0.0],
                    [x + cell, y, 0.0],
                    [x, y + cell, 0.0],
                    [x + cell, y + cell, 0.0],
                ];
                if probes.iter().any(|p| near(*p)) {
                    count += 1;
                }
            }
        }
    } else {
        for i in lo..=hi {
            for j in lo..=hi {
                for k in lo..=hi {
                    let x = [i as f64 * cell, j as f64 * cell, k as f64 * cell];
                    let c = [x[0] + 0.5 * cell, x[1] + 0.5 * cell, x[2] + 0.5 * cell];
                    if near(c) || near(x) {
                        count += 1;
                    }
                }
            }
        }
    }
    count as f64 * cell.powi(dim as i32)
}

/// Volume table for Vol(B_r(S^k_{eps, r})) / r^{n-k} across radii, with the
/// Minkowski-content column Vol/(2r)^{n-s}.
pub fn volume_estimate<F: ScalarField + ?Sized>(
    field: &F,
    domain: &ConvexDomain,
    region: Ball,
    k: usize,
    epsilon: f64,
    radii: &[f64],
    quad: usize,
) -> Result<Vec<VolumeRow>> {
    let dim = field.dim();
    let spec = QuadSpec::light(dim).with_angular(quad);
    let mut rows = Vec::new();
    for &r in radii {
        let scan = strata_scan(field, domain, region, r / 4.0, k, epsilon, r, 0.25, spec)?;
        let pts: Vec<Point> = scan.iter().map(|sp| sp.p).collect();
        let vol = tube_volume(&pts, r, dim, region.radius + 2.0 * r);
        rows.push(VolumeRow {
            r,
            stratum_points: pts.len(),
            tube_volume: vol,
            ratio: vol / r.powi(dim as i32 - k as i32),
            minkowski: vol / (2.0 * r).powi(dim as i32 - k as i32),
        });
    }
    Ok(rows)
}
