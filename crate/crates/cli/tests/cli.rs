use std::path::Path;
use std::process::{Command, Output};

use lfdeblur::io::{json, lfz};
use lfdeblur::solver::objective;
use lfdeblur::SolverConfig;

fn lfdeblur(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfdeblur"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = lfdeblur(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn rmse_of(stdout: &[u8]) -> f64 {
    let v: serde_json::Value = serde_json::from_slice(stdout).unwrap();
    v["rmse"].as_f64().unwrap()
}

fn write_path(dir: &Path, name: &str, points: &str) {
    let n = points.matches('[').count() - 1;
    std::fs::write(
        dir.join(name),
        format!(r#"{{"version": 1, "n": {n}, "control_points": {points}}}"#),
    )
    .unwrap();
}

fn synth(dir: &Path, dims: [&str; 4], extra: &[&str]) {
    let mut args = vec!["synth", "--kind", "two-plane", "--dims"];
    args.extend(dims);
    args.extend(["--depths", "0.5", "1.0", "--seed", "1", "-o", "sharp.lfz"]);
    args.extend(extra);
    ok(dir, &args);
}

#[test]
fn metrics_of_a_file_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), ["8", "8", "3", "3"], &[]);
    let out = ok(dir.path(), &["metrics", "--a", "sharp.lfz", "--b", "sharp.lfz"]);
    assert_eq!(String::from_utf8(out).unwrap().trim(), r#"{"rmse":0.0}"#);
}

#[test]
fn zero_path_blur_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), ["10", "9", "4", "3"], &[]);
    write_path(dir.path(), "zero.json", "[[0, 0, 0], [0, 0, 0], [0, 0, 0]]");
    ok(
        dir.path(),
        &["blur", "-i", "sharp.lfz", "--path", "zero.json", "-o", "blurred.lfz"],
    );
    assert_eq!(
        rmse_of(&ok(dir.path(), &["metrics", "--a", "blurred.lfz", "--b", "sharp.lfz"])),
        0.0
    );
}

#[test]
fn exit_codes_classify_failures() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(lfdeblur(p, &["synth", "--kind", "plane"]).status.code(), Some(1));
    assert_eq!(lfdeblur(p, &["no-such-command"]).status.code(), Some(1));
    std::fs::write(p.join("junk.lfz"), b"not a light field").unwrap();
    let out = lfdeblur(p, &["metrics", "--a", "junk.lfz", "--b", "junk.lfz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty() && !out.stderr.is_empty());
    assert_eq!(
        lfdeblur(p, &["metrics", "--a", "missing.lfz", "--b", "junk.lfz"])
            .status
            .code(),
        Some(2)
    );

    synth(p, ["8", "8", "3", "3"], &[]);
    std::fs::write(
        p.join("wild.json"),
        r#"{"lr_lightfield": 1e200, "iters_stage1": 5, "iters_stage2": 0}"#,
    )
    .unwrap();
    let out = lfdeblur(
        p,
        &[
            "deblur-blind",
            "-i",
            "sharp.lfz",
            "--config",
            "wild.json",
            "-o",
            "o.lfz",
            "--path-out",
            "o.json",
            "--report",
            "r.json",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("r.json")).unwrap()).unwrap();
    assert!(!report["loss_trace"].as_array().unwrap().is_empty());
}

#[test]
fn report_objective_matches_reevaluation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    synth(p, ["12", "12", "4", "4"], &["--texture", "blocks"]);
    write_path(p, "path.json", "[[0, 0, 0], [0.5, -0.3, 0.01], [0.8, 0.4, 0]]");
    std::fs::write(
        p.join("solver.json"),
        r#"{"iters_stage1": 80, "iters_stage2": 20, "T": 8}"#,
    )
    .unwrap();
    ok(
        p,
        &[
            "blur",
            "-i",
            "sharp.lfz",
            "--path",
            "path.json",
            "--time-samples",
            "8",
            "-o",
            "blurred.lfz",
        ],
    );
    ok(
        p,
        &[
            "deblur-blind",
            "-i",
            "blurred.lfz",
            "--config",
            "solver.json",
            "-o",
            "out.lfz",
            "--path-out",
            "found.json",
            "--report",
            "report.json",
        ],
    );
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("report.json")).unwrap()).unwrap();
    let cfg: SolverConfig = serde_json::from_value(report["config"].clone()).unwrap();
    assert_eq!(cfg.iters_stage1, 80);
    let value = objective(
        &lfz::load(&p.join("out.lfz")).unwrap(),
        &json::load_path(&p.join("found.json")).unwrap(),
        &lfz::load(&p.join("blurred.lfz")).unwrap(),
        &cfg,
        report["final_eps"].as_f64().unwrap(),
    )
    .unwrap();
    let reported = report["final_objective"].as_f64().unwrap();
    assert!((value - reported).abs() <= 1e-5 * value.abs(), "{value} vs {reported}");
}

#[test]
fn blind_deblurring_pipeline_reduces_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    synth(p, ["24", "24", "6", "6"], &["--texture", "blocks"]);
    write_path(p, "path.json", "[[0, 0, 0], [0.31, -0.05, 0.02], [-0.66, 0.57, 0.005]]");
    ok(
        p,
        &[
            "blur",
            "-i",
            "sharp.lfz",
            "--path",
            "path.json",
            "--time-samples",
            "16",
            "-o",
            "blurred.lfz",
        ],
    );
    ok(
        p,
        &[
            "deblur-blind",
            "-i",
            "blurred.lfz",
            "-o",
            "out.lfz",
            "--path-out",
            "found.json",
            "--report",
            "report.json",
        ],
    );
    let before = rmse_of(&ok(
        p,
        &["metrics", "--a", "blurred.lfz", "--b", "sharp.lfz", "--central-view"],
    ));
    let after = rmse_of(&ok(
        p,
        &["metrics", "--a", "out.lfz", "--b", "sharp.lfz", "--central-view"],
    ));
    assert!(after < 0.6 * before, "{before} -> {after}");
}

#[test]
fn views_and_texture_recovery_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    synth(p, ["16", "16", "5", "5"], &[]);
    ok(p, &["view", "-i", "sharp.lfz", "--sub", "2", "2", "-o", "sub.png"]);
    ok(p, &["view", "-i", "sharp.lfz", "--full-aperture", "-o", "full.png"]);
    ok(
        p,
        &[
            "recover-texture",
            "-i",
            "sharp.lfz",
            "--zmin",
            "0.4",
            "--zmax",
            "1.2",
            "--slopes",
            "5",
            "-o",
            "t.png",
            "--weights",
            "w.json",
        ],
    );
    let w: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("w.json")).unwrap()).unwrap();
    let sum: f64 = w["weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-9);
    assert_eq!(
        lfdeblur(p, &["view", "-i", "sharp.lfz", "--sub", "9", "0", "-o", "bad.png"])
            .status
            .code(),
        Some(1)
    );
}
