//! Experiment configuration: JSON in, artifacts out.  Configurations
//! round-trip (emit -> parse -> equal) and carry every command-specific
//! parameter block; the CLI flags only choose the command and override the
//! output directory, thread cap, and seed.

use boundary_strata::covering::CoverParams;
use boundary_strata::error::Error;
use boundary_strata::fields::{AnalyticField, Field};
use boundary_strata::geometry::ConvexDomain;
use boundary_strata::linalg::Point;
use boundary_strata::oracles;
use boundary_strata::Result;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Field source: a preset name, an explicit analytic field, or a grid
    /// file written by `solve`.
    pub field: FieldSpec,
    /// Domain override; defaults to the field's associated domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<ConvexDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<FreqSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strata: Option<StrataSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reif: Option<ReifSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<VolumeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<BlowupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    pub resolution: usize,
    /// Output base name (writes <name>.bin and <name>.json under out/).
    #[serde(default = "default_solve_name")]
    pub name: String,
}

fn default_solve_name() -> String {
    "field".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqSpec {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    #[serde(default = "default_quad")]
    pub quad: usize,
}

pub fn default_quad() -> usize {
    720
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrataSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub step: f64,
    pub k: usize,
    pub epsilon: f64,
    pub r: f64,
    #[serde(default = "default_max_scale")]
    pub max_scale: f64,
    #[serde(default = "default_scan_quad")]
    pub quad: usize,
}

fn default_max_scale() -> f64 {
    0.25
}

fn default_scan_quad() -> usize {
    96
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSpec {
    /// CSV of x,y[,z],w rows.
    pub measure_csv: PathBuf,
    pub dim: usize,
    pub queries: Vec<BetaQuery>,
    /// Also run the brute-force oracle (dim 2, k 1 only).
    #[serde(default)]
    pub bruteforce: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaQuery {
    pub p: Vec<f64>,
    pub r: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReifSpec {
    /// JSON ball family {k, dim, balls: [[(x,y[,z]), tau], ...]}.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_json: Option<PathBuf>,
    /// Unit-weight sample CSV for the rectifiable check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_csv: Option<PathBuf>,
    #[serde(default)]
    pub dim: usize,
    #[serde(default)]
    pub k: usize,
    pub delta: f64,
    #[serde(default = "default_eps_k")]
    pub eps_k: f64,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
}

fn default_eps_k() -> f64 {
    1.0
}

fn default_depth() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(flatten)]
    pub params: CoverParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub k: usize,
    pub epsilon: f64,
    pub radii: Vec<f64>,
    #[serde(default = "default_scan_quad")]
    pub quad: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSpec {
    pub points: Vec<Vec<f64>>,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_blowup_depth")]
    pub depth: usize,
    #[serde(default = "default_initial_scale")]
    pub initial_scale: f64,
    #[serde(default = "default_quad")]
    pub quad: usize,
    /// Also write each window T_{q, r_j}u as a sampled grid snapshot.
    #[serde(default)]
    pub dump_windows: bool,
}

fn default_ratio() -> f64 {
    0.5
}

fn default_blowup_depth() -> usize {
    10
}

fn default_initial_scale() -> f64 {
    0.25
}

pub fn point_of(v: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..v.len().min(3)].copy_from_slice(&v[..v.len().min(3)]);
    p
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Resolve the field and its domain, solving a grid when requested.
    pub fn resolve_field(&self) -> Result<(Field, ConvexDomain)> {
        let (field, domain) = if let Some(name) = &self.field.preset {
            let o = oracles::preset(name).ok_or_else(|| {
                Error::invalid(format!(
                    "unknown preset '{name}'; available: {}",
                    oracles::preset_names().join(", ")
                ))
            })?;
            (o.field, o.domain)
        } else if let Some(a) = &self.field.analytic {
            (Field::Analytic(a.clone()), a.domain.clone())
        } else if let Some(path) = &self.field.grid_file {
            let g = boundary_strata::fields::GridField::load(path)?;
            let d = g.domain.clone();
            (Field::Grid(g), d)
        } else {
            return Err(Error::invalid("field spec needs preset, analytic, or grid_file"));
        };
        let domain = self.domain.clone().unwrap_or(domain);
        if let Some(solve) = &self.solve {
            let exact = field.clone();
            let trace = move |x: Point| exact.value_for_trace(x);
            let grid =
                boundary_strata::fields::solve_dirichlet(&domain, &trace, solve.resolution)?;
            return Ok((Field::Grid(grid), domain));
        }
        Ok((field, domain))
    }
}

trait TraceValue {
    fn value_for_trace(&self, x: Point) -> f64;
}

impl TraceValue for Field {
    fn value_for_trace(&self, x: Point) -> f64 {
        use boundary_strata::fields::ScalarField;
        self.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = ExperimentConfig {
            field: FieldSpec {
                preset: Some("wedge_2pi_3".into()),
                analytic: None,
                grid_file: None,
            },
            domain: None,
            solve: Some(SolveSpec { resolution: 64, name: "field".into() }),
            freq: Some(FreqSpec { center: vec![0.0, 0.0], radii: vec![0.1, 0.2], quad: 720 }),
            strata: None,
            beta: None,
            reif: None,
            cover: None,
            volume: None,
            blowup: None,
            out: Some(PathBuf::from("/tmp/x")),
            seed: 7,
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
