mod common;

use common::{json, run, write_config, SPHERE, TORUS};

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn report_csv_for_clifford_torus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"surface": {"family": "clifford", "n": 2, "r": 0.5}, "grid": {"nodes": 16}, "output": {"format": "csv"}}"#,
    );
    let csv_path = dir.path().join("table.csv");
    let out = run(&["report", "--config", path_str(&cfg), "--out", path_str(&csv_path)]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["result"]["nodes"], 256);
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["u_1", "u_2", "lambda_1", "lambda_2", "c", "kappa_gamma", "gk", "prop_residual"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 256);
    for r in &rows {
        assert!((r[2].parse::<f64>().unwrap() + 1.7320508).abs() < 1e-7);
        assert!((r[3].parse::<f64>().unwrap() - 0.5773503).abs() < 1e-7);
    }
}

#[test]
fn report_json_echoes_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", SPHERE);
    let out = run(&["report", "--config", path_str(&cfg), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "report");
    assert_eq!(v["config"]["grid"]["nodes"], 8);
    assert_eq!(v["config"]["numerics"]["h_fd"], 1e-5);
    assert_eq!(v["config"]["structure"]["kind"], "parallel");
    assert_eq!(v["config"]["structure"]["base_point"], serde_json::json!([1.0, 0.0, 0.0, 0.0]));
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 64);
    let kappa = 1.0 / 0.5f64.sin().powi(2);
    for row in v["result"]["rows"].as_array().unwrap() {
        assert!((row[5].as_f64().unwrap() - kappa).abs() < 1e-5);
    }
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("broken.json", "{ not json"),
        ("unknown.json", r#"{"surface": {"family": "clifford", "n": 2, "r": 0.5}, "extra": true}"#),
        ("range.json", r#"{"surface": {"family": "clifford", "n": 2, "r": 2.0}}"#),
    ] {
        let cfg = write_config(dir.path(), name, text);
        let out = run(&["report", "--config", path_str(&cfg)]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let out = run(&["report", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gauss_bonnet_sphere_and_torus() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = write_config(dir.path(), "s.json", SPHERE);
    let out = run(&["gauss-bonnet", "--config", path_str(&sphere), "--grid", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["result"]["integral"].as_f64().unwrap() - 12.5663706).abs() < 1e-5);
    assert!((v["result"]["target"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(v["result"]["degree_integral"], 1);
    assert_eq!(v["result"]["degree_preimage"], 1);

    let torus = write_config(dir.path(), "t.json", TORUS);
    let out = run(&["gauss-bonnet", "--config", path_str(&torus)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["integral"].as_f64().unwrap().abs() < 1e-6);
    assert_eq!(v["result"]["degree_preimage"], 0);
}

#[test]
fn gauss_bonnet_tight_tolerance_fails_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"surface": {"family": "perturbed_sphere", "rho": 0.5, "amplitude": 0.05, "frequency": 3, "n": 2},
            "grid": {"nodes": 32}, "numerics": {"tolerance": 1e-12}}"#,
    );
    let out = run(&["gauss-bonnet", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["passed"], false);
}

#[test]
fn gauss_bonnet_odd_dimension_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "o.json", r#"{"surface": {"family": "geodesic_sphere", "rho": 0.5, "n": 3}}"#);
    let out = run(&["gauss-bonnet", "--config", path_str(&cfg), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = write_config(dir.path(), "s.json", SPHERE);
    let out = run(&["certify", "--config", path_str(&sphere)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let expect = 1.0 / 0.5f64.tan() - 0.25f64.tan();
    assert!((v["result"]["min_margin_curvature"].as_f64().unwrap() - expect).abs() < 1e-6);
    assert_eq!(v["result"]["verdict"], "certified");

    let raised = write_config(
        dir.path(),
        "d.json",
        r#"{"surface": {"family": "geodesic_sphere", "rho": 0.5, "n": 2}, "grid": {"nodes": 32}, "numerics": {"delta": 2.0}}"#,
    );
    assert_eq!(run(&["certify", "--config", path_str(&raised)]).status.code(), Some(1));

    let torus = write_config(dir.path(), "t.json", r#"{"surface": {"family": "clifford", "n": 2, "r": 0.7071067811865476}}"#);
    let out = run(&["certify", "--config", path_str(&torus), "--convention", "enclosing"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["result"]["verdict"], "failed");
}

#[test]
fn counterexample_exit_codes() {
    let out = run(&["counterexample", "--epsilon", "0.2", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["result"]["r"].as_f64().unwrap() - 0.4785).abs() < 1e-4);
    assert_eq!(v["result"]["euler_characteristic"], 0);
    assert_eq!(run(&["counterexample", "--epsilon", "0.41", "--grid", "16"]).status.code(), Some(0));
    assert_eq!(run(&["counterexample", "--epsilon", "0.45"]).status.code(), Some(2));
    assert_eq!(run(&["counterexample", "--epsilon", "-0.1"]).status.code(), Some(2));
    assert_eq!(run(&["counterexample", "--epsilon", "abc"]).status.code(), Some(2));
}

#[test]
fn xia_sphere_passes_and_torus_fails_at_stage_2() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = write_config(dir.path(), "s.json", r#"{"surface": {"family": "geodesic_sphere", "rho": 1.2, "n": 2}, "grid": {"nodes": 32}}"#);
    let out = run(&["xia", "--config", path_str(&sphere)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["result"]["t_star"].as_f64().unwrap() < 1.0);

    let torus = write_config(dir.path(), "t.json", TORUS);
    let out = run(&["xia", "--config", path_str(&torus)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["result"]["failed_stage"], 2);
    let stages = v["result"]["stages"].as_array().unwrap();
    assert!(stages.iter().any(|s| s["stage"] == 3 && s["passed"] == false));
}

#[test]
fn out_flag_writes_the_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", SPHERE);
    let target = dir.path().join("report.json");
    let out = run(&["certify", "--config", path_str(&cfg), "--out", path_str(&target)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["command"], "certify");
}

#[test]
fn quaternion_structure_needs_s3() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(
        dir.path(),
        "q.json",
        r#"{"surface": {"family": "geodesic_sphere", "rho": 0.5, "n": 2}, "structure": {"kind": "quaternion"}, "grid": {"nodes": 32}}"#,
    );
    assert_eq!(run(&["gauss-bonnet", "--config", path_str(&ok)]).status.code(), Some(0));
    let bad = write_config(
        dir.path(),
        "b.json",
        r#"{"surface": {"family": "geodesic_sphere", "rho": 0.5, "n": 4}, "structure": {"kind": "quaternion"}}"#,
    );
    assert_eq!(run(&["gauss-bonnet", "--config", path_str(&bad)]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.json",
        r#"{"surface": {"family": "perturbed_sphere", "rho": 0.5, "amplitude": 0.05, "frequency": 3, "n": 2},
            "grid": {"nodes": 24}, "seed": 17}"#,
    );
    for cmd in ["report", "gauss-bonnet", "certify", "xia"] {
        let a = run(&[cmd, "--config", path_str(&cfg)]);
        let b = run(&[cmd, "--config", path_str(&cfg)]);
        assert_eq!(a.status.code(), b.status.code(), "{cmd}");
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn shipped_configs_resolve() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = gaussmap_cli::config::load(&path).unwrap();
        cfg.resolve(&gaussmap_cli::Overrides::default()).unwrap();
        count += 1;
    }
    assert!(count >= 4);
}
