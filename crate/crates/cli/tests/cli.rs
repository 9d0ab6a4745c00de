//! End-to-end runs of the bstrata binary: artifact content, exit codes, and
//! byte-level determinism of CSV/JSON outputs for a fixed config and seed.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bstrata")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bstrata-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn freq_on_wedge_matches_closed_form() {
    let dir = scratch("freq");
    let cfg = write_config(
        &dir,
        "freq.json",
        r#"{
            "field": {"preset": "wedge_2pi_3"},
            "freq": {"center": [0.0, 0.0], "radii": [0.1, 0.2, 0.3, 0.4], "quad": 720}
        }"#,
    );
    let outdir = dir.join("out");
    let (ok, _, err) = run(&["freq", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "freq failed: {err}");
    let csv = std::fs::read_to_string(outdir.join("freq.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let n = cols[5];
        assert!((n - 1.5).abs() <= 0.02 * 1.5, "N column {n} off 1.5");
        rows += 1;
    }
    assert_eq!(rows, 4);
    assert!(outdir.join("freq.svg").exists());
}

#[test]
fn cover_on_linear_field_is_empty() {
    let dir = scratch("cover");
    let cfg = write_config(
        &dir,
        "cover.json",
        r#"{
            "field": {"preset": "half_plane_linear"},
            "cover": {
                "center": [0.0, 0.0], "radius": 0.25,
                "rho": 0.1, "eta": 0.01, "eta_prime": 0.02, "gamma": 0.1,
                "epsilon": 0.01, "final_scale": 0.125, "k": 0, "e_ceiling": 1.0
            }
        }"#,
    );
    let outdir = dir.join("out");
    let (ok, _, err) =
        run(&["cover", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "cover failed: {err}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("cover.json")).unwrap()).unwrap();
    assert_eq!(json["stop_count"], 0);
    assert_eq!(json["covered"], true);
}

#[test]
fn verify_twice_is_byte_identical() {
    let dir = scratch("verify");
    let cfg = write_config(&dir, "verify.json", r#"{"field": {"preset": "half_plane_linear"}}"#);
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out in [&out1, &out2] {
        let (ok, stdout, err) = run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "5",
        ]);
        assert!(ok, "verify failed: {err}");
        assert!(stdout.contains("OK"), "verify not green:\n{stdout}");
    }
    let a = std::fs::read(out1.join("verify.json")).unwrap();
    let b = std::fs::read(out2.join("verify.json")).unwrap();
    assert_eq!(a, b, "verify.json differs between identical seeded runs");
    // The report lists the headline checks by name, all green.
    let report = String::from_utf8(a).unwrap();
    for name in [
        "boundary_monotonicity",
        "doubling_equalities",
        "lambda_equals_n_homogeneous",
        "beta_oracle_equivalence",
    ] {
        assert!(report.contains(name), "verify report missing check {name}");
    }
    assert!(report.contains("\"all_passed\": true"));
    println!("PASS criterion 11: verify artifacts byte-identical for a fixed seed");
}

#[test]
fn cover_twice_is_byte_identical() {
    let dir = scratch("coverdet");
    let cfg = write_config(
        &dir,
        "cover.json",
        r#"{
            "field": {"preset": "poly_Im_z2"},
            "cover": {
                "center": [0.0, 0.0], "radius": 0.25,
                "rho": 0.1, "eta": 0.01, "eta_prime": 0.02, "gamma": 0.1,
                "epsilon": 0.01, "final_scale": 0.125, "k": 0, "e_ceiling": 2.0
            }
        }"#,
    );
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out in [&out1, &out2] {
        let (ok, _, err) =
            run(&["cover", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(ok, "{err}");
    }
    assert_eq!(
        std::fs::read(out1.join("cover.json")).unwrap(),
        std::fs::read(out2.join("cover.json")).unwrap()
    );
}

#[test]
fn freq_twice_is_byte_identical() {
    let dir = scratch("freqdet");
    let cfg = write_config(
        &dir,
        "freq.json",
        r#"{
            "field": {"preset": "poly_Im_z2"},
            "freq": {"center": [0.0, 0.0], "radii": [0.1, 0.25], "quad": 360}
        }"#,
    );
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out in [&out1, &out2] {
        let (ok, _, err) =
            run(&["freq", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(ok, "{err}");
    }
    assert_eq!(
        std::fs::read(out1.join("freq.csv")).unwrap(),
        std::fs::read(out2.join("freq.csv")).unwrap()
    );
}

#[test]
fn solve_then_reuse_grid_file() {
    let dir = scratch("solve");
    let outdir = dir.join("out");
    let cfg = write_config(
        &dir,
        "solve.json",
        r#"{
            "field": {"preset": "poly_Im_z2"},
            "solve": {"resolution": 16, "name": "field"}
        }"#,
    );
    let (ok, _, err) =
        run(&["solve", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "solve failed: {err}");
    assert!(outdir.join("field.bin").exists() && outdir.join("field.json").exists());

    // Frequency profile straight off the stored grid.
    let cfg2 = write_config(
        &dir,
        "freq.json",
        &format!(
            r#"{{
                "field": {{"grid_file": "{}"}},
                "freq": {{"center": [0.0, 0.0], "radii": [0.3, 0.4], "quad": 360}}
            }}"#,
            outdir.join("field").to_str().unwrap()
        ),
    );
    let (ok, _, err) =
        run(&["freq", "--config", cfg2.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "freq on grid failed: {err}");
    let csv = std::fs::read_to_string(outdir.join("freq.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[5] - 2.0).abs() <= 0.2, "grid N = {}", cols[5]);
    }
}

#[test]
fn strata_beta_reif_blowup_smoke() {
    let dir = scratch("smoke");
    let outdir = dir.join("out");
    std::fs::create_dir_all(&outdir).unwrap();

    let cfg = write_config(
        &dir,
        "strata.json",
        r#"{
            "field": {"preset": "poly_Im_z2"},
            "strata": {"center": [0.0, 0.0], "radius": 0.125, "step": 0.03125,
                       "k": 0, "epsilon": 0.01, "r": 0.015625}
        }"#,
    );
    let (ok, _, err) =
        run(&["strata", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "strata failed: {err}");
    assert!(outdir.join("strata.csv").exists() && outdir.join("strata.svg").exists());

    // Beta on a measure file.
    let measure = dir.join("measure.csv");
    std::fs::write(&measure, "x,y,w\n0.8,0.0,1.0\n-0.8,0.0,1.0\n0.0,0.6,1.0\n").unwrap();
    let cfg = write_config(
        &dir,
        "beta.json",
        &format!(
            r#"{{
                "field": {{"preset": "poly_Im_z2"}},
                "beta": {{"measure_csv": "{}", "dim": 2, "bruteforce": true,
                          "queries": [{{"p": [0.0, 0.0], "r": 1.0, "k": 1}}]}}
            }}"#,
            measure.to_str().unwrap()
        ),
    );
    let (ok, _, err) =
        run(&["beta", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "beta failed: {err}");
    let beta_csv = std::fs::read_to_string(outdir.join("beta.csv")).unwrap();
    assert_eq!(beta_csv.lines().count(), 3, "header + eigen + bruteforce rows");

    // Reifenberg family from JSON.
    let family = dir.join("family.json");
    std::fs::write(
        &family,
        r#"{"k": 1, "dim": 2, "balls": [[[-0.5, 0.0], 0.25], [[0.5, 0.0], 0.25]]}"#,
    )
    .unwrap();
    let cfg = write_config(
        &dir,
        "reif.json",
        &format!(
            r#"{{
                "field": {{"preset": "poly_Im_z2"}},
                "reif": {{"family_json": "{}", "delta": 0.01, "max_depth": 4}}
            }}"#,
            family.to_str().unwrap()
        ),
    );
    let (ok, _, err) =
        run(&["reif", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "reif failed: {err}");
    assert!(outdir.join("reif.json").exists());

    // Blow-up trace with window dumps.
    let cfg = write_config(
        &dir,
        "blowup.json",
        r#"{
            "field": {"preset": "wedge_2pi_3"},
            "blowup": {"points": [[0.0, 0.0]], "depth": 4, "quad": 180, "dump_windows": true}
        }"#,
    );
    let (ok, _, err) =
        run(&["blowup", "--config", cfg.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert!(ok, "blowup failed: {err}");
    assert!(outdir.join("blowup.json").exists());
    assert!(outdir.join("window_0_0.bin").exists());
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    // Unknown preset: validation failure, code 1.
    let cfg = write_config(&dir, "bad.json", r#"{"field": {"preset": "nope"}}"#);
    let out = Command::new(bin())
        .args(["freq", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Unparseable config: code 1.
    let cfg = write_config(&dir, "junk.json", "{not json");
    let out = Command::new(bin())
        .args(["freq", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Missing config file: I/O failure, code 3.
    let out = Command::new(bin())
        .args(["freq", "--config", dir.join("absent.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
