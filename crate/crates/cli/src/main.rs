//! bstrata: frequency profiles, strata scans, beta tables, Reifenberg
//! verdicts, stratum coverings, and blow-up traces for harmonic fields on
//! convex domains, plus a `verify` command that runs the oracle suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 I/O.

mod config;

use boundary_strata::error::Error;
use boundary_strata::fields::{Field, ScalarField};
use boundary_strata::geometry::Ball;
use boundary_strata::quadrature::QuadSpec;
use clap::{Parser, Subcommand};
use config::{point_of, ExperimentConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bstrata", about = "Frequency/strata/covering experiments on convex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve the Dirichlet problem onto a grid and store it.
    Solve,
    /// Frequency profile CSV and N(r) plot.
    Freq,
    /// Stratum lattice scan CSV and overlay plot.
    Strata,
    /// Jones beta tables for a discrete measure.
    Beta,
    /// Discrete/rectifiable Reifenberg verdict.
    Reif,
    /// Good/bad-tree covering of the stratum.
    Cover,
    /// Tubular volume table for the stratum.
    Volume,
    /// Blow-up traces at chosen points.
    Blowup,
    /// Run the built-in oracle verification suite.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::SolverDiverged { .. }
        | Error::AllRadiiDegenerate
        | Error::DegenerateHeight { .. }
        | Error::DegenerateWindow(_)
        | Error::CoverDepthExceeded(_)
        | Error::TreeDepthExceeded(_) => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn run(cli: &Cli) -> boundary_strata::Result<ExitCode> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::invalid("--config <path> is required"))?;
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;

    match cli.command {
        Command::Verify => {
            let report = boundary_strata::verify::run(cfg.seed, 720)?;
            std::fs::write(out.join("verify.json"), serde_json::to_string_pretty(&report)?)?;
            std::fs::write(out.join("verify.txt"), report.summary())?;
            print!("{}", report.summary());
            return Ok(if report.all_passed { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::Beta => return cmd_beta(&cfg, &out),
        Command::Reif => return cmd_reif(&cfg, &out),
        _ => {}
    }

    let (field, domain) = cfg.resolve_field()?;
    match cli.command {
        Command::Solve => {
            let spec = cfg
                .solve
                .as_ref()
                .ok_or_else(|| Error::invalid("solve command needs a solve block"))?;
            match &field {
                Field::Grid(g) => {
                    g.save(&out.join(&spec.name))?;
                    println!(
                        "solved at resolution {} (residual {:.3e}, N(0,2) = {:?})",
                        spec.resolution, g.residual, g.normalization_frequency
                    );
                }
                Field::Analytic(_) => {
                    return Err(Error::invalid("solve block did not produce a grid field"))
                }
            }
        }
        Command::Freq => {
            let spec =
                cfg.freq.as_ref().ok_or_else(|| Error::invalid("freq command needs a freq block"))?;
            let profile = boundary_strata::frequency::frequency_profile(
                &field,
                &domain,
                point_of(&spec.center),
                &spec.radii,
                spec.quad,
            )?;
            std::fs::write(out.join("freq.csv"), profile.to_csv())?;
            std::fs::write(out.join("freq.svg"), boundary_strata::plot::profile_svg(&profile))?;
            println!("wrote freq.csv and freq.svg ({} radii)", profile.records.len());
        }
        Command::Strata => {
            let spec = cfg
                .strata
                .as_ref()
                .ok_or_else(|| Error::invalid("strata command needs a strata block"))?;
            let region = Ball::new(point_of(&spec.center), spec.radius)?;
            let pts = boundary_strata::symmetry::strata_scan(
                &field,
                &domain,
                region,
                spec.step,
                spec.k,
                spec.epsilon,
                spec.r,
                spec.max_scale,
                QuadSpec::light(field.dim()).with_angular(spec.quad),
            )?;
            std::fs::write(
                out.join("strata.csv"),
                boundary_strata::symmetry::scan_to_csv(&pts, field.dim()),
            )?;
            if field.dim() == 2 {
                std::fs::write(
                    out.join("strata.svg"),
                    boundary_strata::plot::strata_svg(&domain, &pts, spec.radius + 0.1),
                )?;
            }
            println!("stratum points: {}", pts.len());
        }
        Command::Cover => {
            let spec = cfg
                .cover
                .as_ref()
                .ok_or_else(|| Error::invalid("cover command needs a cover block"))?;
            let region = Ball::new(point_of(&spec.center), spec.radius)?;
            let result =
                boundary_strata::covering::build_cover(&field, &domain, region, &spec.params)?;
            std::fs::write(out.join("cover.json"), serde_json::to_string_pretty(&result)?)?;
            if field.dim() == 2 {
                std::fs::write(
                    out.join("cover.svg"),
                    boundary_strata::plot::cover_svg(&domain, &result, spec.radius + 0.1),
                )?;
            }
            println!(
                "stops: {} (covered: {}, E = {:.4})",
                result.stop_count, result.covered, result.e_ceiling
            );
        }
        Command::Volume => {
            let spec = cfg
                .volume
                .as_ref()
                .ok_or_else(|| Error::invalid("volume command needs a volume block"))?;
            let region = Ball::new(point_of(&spec.center), spec.radius)?;
            let rows = boundary_strata::covering::volume_estimate(
                &field,
                &domain,
                region,
                spec.k,
                spec.epsilon,
                &spec.radii,
                spec.quad,
            )?;
            std::fs::write(out.join("volume.json"), serde_json::to_string_pretty(&rows)?)?;
            let mut csv = String::from("r,points,tube_volume,ratio,minkowski\n");
            for row in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.r, row.stratum_points, row.tube_volume, row.ratio, row.minkowski
                ));
            }
            std::fs::write(out.join("volume.csv"), csv)?;
            println!("volume rows: {}", rows.len());
        }
        Command::Blowup => {
            let spec = cfg
                .blowup
                .as_ref()
                .ok_or_else(|| Error::invalid("blowup command needs a blowup block"))?;
            let mut traces = Vec::new();
            for (pi, p) in spec.points.iter().enumerate() {
                let q = point_of(p);
                let trace = boundary_strata::critical::blowup_trace(
                    &field,
                    &domain,
                    q,
                    spec.ratio,
                    spec.depth,
                    spec.initial_scale,
                    spec.quad,
                )?;
                if spec.dump_windows {
                    for (si, r) in trace.scales.iter().enumerate() {
                        let window = boundary_strata::symmetry::rescale(
                            &field, &domain, q, *r, spec.quad,
                        )?;
                        let tdomain = window.rescaled_domain();
                        let snap = boundary_strata::fields::sample_to_grid(
                            &window, &tdomain, [0.0; 3], 1.0, 65,
                        )?;
                        snap.save(&out.join(format!("window_{pi}_{si}")))?;
                    }
                }
                traces.push(trace);
            }
            std::fs::write(out.join("blowup.json"), serde_json::to_string_pretty(&traces)?)?;
            println!("traces: {}", traces.len());
        }
        Command::Beta | Command::Reif | Command::Verify => unreachable!(),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_beta(cfg: &ExperimentConfig, out: &Path) -> boundary_strata::Result<ExitCode> {
    let spec = cfg.beta.as_ref().ok_or_else(|| Error::invalid("beta command needs a beta block"))?;
    let text = std::fs::read_to_string(&spec.measure_csv)?;
    let mu = boundary_strata::beta::DiscreteMeasure::from_csv(&text, spec.dim)?;
    let mut rows = Vec::new();
    for q in &spec.queries {
        let p = point_of(&q.p);
        let res = boundary_strata::beta::beta_eigen(&mu, spec.dim, p, q.r, q.k)?;
        rows.push((p, q.r, q.k, res.beta));
        if spec.bruteforce {
            let bf = boundary_strata::beta::beta_bruteforce(&mu, spec.dim, p, q.r, q.k)?;
            rows.push((p, q.r, q.k, bf.beta));
        }
    }
    std::fs::write(out.join("beta.csv"), boundary_strata::beta::results_to_csv(&rows, spec.dim))?;
    println!("beta rows: {}", rows.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_reif(cfg: &ExperimentConfig, out: &Path) -> boundary_strata::Result<ExitCode> {
    let spec = cfg.reif.as_ref().ok_or_else(|| Error::invalid("reif command needs a reif block"))?;
    let verdict = if let Some(path) = &spec.family_json {
        let fam = boundary_strata::reifenberg::BallFamily::from_json(&std::fs::read_to_string(
            path,
        )?)?;
        boundary_strata::reifenberg::discrete_reifenberg_check(
            &fam,
            spec.delta,
            spec.eps_k,
            spec.max_depth,
        )?
    } else if let Some(path) = &spec.sample_csv {
        let mu = boundary_strata::beta::DiscreteMeasure::from_csv(
            &std::fs::read_to_string(path)?,
            spec.dim,
        )?;
        boundary_strata::reifenberg::rectifiable_check(
            &mu,
            spec.dim,
            spec.k,
            spec.delta,
            spec.max_depth,
        )?
    } else {
        return Err(Error::invalid("reif block needs family_json or sample_csv"));
    };
    std::fs::write(out.join("reif.json"), serde_json::to_string_pretty(&verdict)?)?;
    println!("satisfied: {} (packing {:.4})", verdict.satisfied, verdict.packing);
    Ok(ExitCode::SUCCESS)
}
