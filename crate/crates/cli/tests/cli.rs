//! End-to-end tests of the command-line interface: exit codes, file
//! artifacts, and report determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curvlab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("curvlab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn model_writes_operator_and_summary_line() {
    let dir = tmpdir("model");
    let out = run_in(&dir, &["model", "--name", "sxh2", "--dim", "5"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("scalar="));
    assert!(text.contains("lambda_min="));
    let payload = std::fs::read_to_string(dir.join("sxh2_5.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&payload).unwrap();
    assert_eq!(value["n"], 5);
    assert_eq!(value["mat"].as_array().unwrap().len(), 55);
}

#[test]
fn model_negative_curvature_sphere_is_negated_identity() {
    let dir = tmpdir("model-neg");
    let out = run_in(
        &dir,
        &["model", "--name", "sphere", "--dim", "4", "--kappa", "-1"],
    );
    assert!(out.status.success());
    let payload = std::fs::read_to_string(dir.join("sphere_4.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&payload).unwrap();
    let mat = value["mat"].as_array().unwrap();
    // upper triangle of −Id on a 6-dim bivector space
    let diag_positions = [0usize, 6, 11, 15, 18, 20];
    for (k, entry) in mat.iter().enumerate() {
        let expect = if diag_positions.contains(&k) { -1.0 } else { 0.0 };
        assert_eq!(entry.as_f64().unwrap(), expect);
    }
}

#[test]
fn model_rejects_odd_complex_projective_dimension() {
    let dir = tmpdir("model-cpm");
    let out = run_in(&dir, &["model", "--name", "cpm", "--dim", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_rejects_unknown_name() {
    let dir = tmpdir("model-unknown");
    let out = run_in(&dir, &["model", "--name", "nonsense", "--dim", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("known models"));
}

#[test]
fn compute_q_of_identity_scales_by_n_minus_one() {
    let dir = tmpdir("compute-q");
    assert!(run_in(&dir, &["model", "--name", "sphere", "--dim", "4"])
        .status
        .success());
    let out = run_in(
        &dir,
        &["compute", "q", "--input", "sphere_4.json"],
    );
    assert!(out.status.success(), "{out:?}");
    let payload = std::fs::read_to_string(dir.join("sphere_4_q.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&payload).unwrap();
    let mat = value["mat"].as_array().unwrap();
    let diag_positions = [0usize, 6, 11, 15, 18, 20];
    for (k, entry) in mat.iter().enumerate() {
        let expect = if diag_positions.contains(&k) { 3.0 } else { 0.0 };
        assert!((entry.as_f64().unwrap() - expect).abs() <= 1e-12);
    }
}

#[test]
fn compute_decompose_emits_three_components() {
    let dir = tmpdir("compute-dec");
    assert!(run_in(&dir, &["model", "--name", "sxh2", "--dim", "5"])
        .status
        .success());
    let out = run_in(&dir, &["compute", "decompose", "--input", "sxh2_5.json"]);
    assert!(out.status.success(), "{out:?}");
    for suffix in ["rid", "r0", "rw"] {
        assert!(dir.join(format!("sxh2_5_{suffix}.json")).exists());
    }
    // conformally flat: the Weyl part is numerically zero
    let rw = std::fs::read_to_string(dir.join("sxh2_5_rw.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&rw).unwrap();
    let norm: f64 = value["mat"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap().powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(norm <= 1e-10);
}

#[test]
fn compute_rejects_empty_and_malformed_files() {
    let dir = tmpdir("compute-bad");
    std::fs::write(dir.join("empty.json"), "").unwrap();
    let out = run_in(&dir, &["compute", "q", "--input", "empty.json"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(dir.join("short.json"), "{\"n\": 4, \"mat\": [1.0, 2.0]}").unwrap();
    let out = run_in(&dir, &["compute", "q", "--input", "short.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("upper-triangle"));
}

#[test]
fn ode_exports_trajectory_csv() {
    let dir = tmpdir("ode");
    assert!(run_in(&dir, &["model", "--name", "sphere", "--dim", "4"])
        .status
        .success());
    let out = run_in(
        &dir,
        &[
            "ode",
            "--input",
            "sphere_4.json",
            "--t-end",
            "0.1",
            "--step",
            "0.01",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.join("sphere_4_trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("t,norm,trace,norm_r_id,norm_r_0,norm_r_w,lambda_min"));
    assert_eq!(lines.len(), 12); // header + initial state + 10 steps
}

#[test]
fn verify_bohm_wilking_passes_and_writes_report() {
    let dir = tmpdir("verify-bw");
    let out = run_in(
        &dir,
        &[
            "verify",
            "bohm-wilking",
            "--dim",
            "5",
            "--trials",
            "50",
            "--seed",
            "42",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("bohm-wilking: pass"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("bohm-wilking_5.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["seed"], 42);
    // resolved configuration is echoed into the report
    assert!(report["constants"]["config.tol.boundary"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_negative_control_exits_one_with_witness() {
    let dir = tmpdir("verify-neg");
    let out = run_in(
        &dir,
        &[
            "verify",
            "invariance",
            "--cone",
            "nnricci",
            "--dim",
            "4",
            "--samples",
            "80",
            "--seed",
            "7",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("invariance_4.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "violation");
    assert!(report["witness"]["slope_margin"].as_f64().unwrap() <= -1e-4);
    assert!(report["witness"]["boundary_operator"]["mat"].is_array());
}

#[test]
fn verify_unknown_check_exits_two() {
    let dir = tmpdir("verify-unknown");
    let out = run_in(&dir, &["verify", "mystery", "--dim", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("known checks"));
}

#[test]
fn verify_reports_are_reproducible_modulo_meta() {
    let dir = tmpdir("verify-repro");
    let args = [
        "verify",
        "collinearity",
        "--dim",
        "5",
        "--seed",
        "9",
        "--out",
        "a.json",
    ];
    assert!(run_in(&dir, &args).status.success());
    let mut args2 = args;
    args2[7] = "b.json";
    assert!(run_in(&dir, &args2).status.success());
    let strip = |path: &str| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join(path)).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("meta");
        v
    };
    assert_eq!(strip("a.json"), strip("b.json"));
}

#[test]
fn verify_all_writes_summary() {
    let dir = tmpdir("verify-all");
    let out = run_in(
        &dir,
        &["verify", "all", "--dim", "5", "--seed", "3", "--out", "summary.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["verdict"], "pass");
    let checks = summary["checks"].as_array().unwrap();
    assert!(checks.len() >= 5);
    // one pass line per check on stdout
    let text = stdout(&out);
    for check in checks {
        let name = check["check"].as_str().unwrap();
        assert!(text.contains(name), "missing stdout line for {name}");
    }
}

#[test]
fn verify_tolerance_override_is_parsed_and_echoed() {
    let dir = tmpdir("verify-tol");
    let out = run_in(
        &dir,
        &[
            "verify",
            "invariance",
            "--cone",
            "scal",
            "--dim",
            "4",
            "--samples",
            "20",
            "--seed",
            "1",
            "--tol",
            "boundary=1e-8",
            "--tol",
            "slope=1e-5",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("invariance_4.json")).unwrap())
            .unwrap();
    assert_eq!(report["constants"]["config.tol.boundary"], 1e-8);
    assert_eq!(report["constants"]["config.tol.slope"], 1e-5);
    let bad = run_in(&dir, &["verify", "invariance", "--cone", "scal", "--tol", "bogus=1"]);
    assert_eq!(bad.status.code(), Some(2));
}
