use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dbar(mode: &str, config: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbar"))
        .arg(mode)
        .arg("--config")
        .arg(config)
        .args(extra)
        .output()
        .expect("dbar runs")
}

fn write_config(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const BIDISK: &str = r#"{
  "domains": [
    {"type": "disk", "center": [0, 0], "radius": 1},
    {"type": "disk", "center": [0, 0], "radius": 1}
  ],
  "potential": "conj(z1)*conj(z2)",
  "operator": "both",
  "quadrature": {"nr": 12, "ntheta": 16},
  "eval_points": {"count": 3, "margin": 0.05, "seed": 4}
}"#;

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exponent_table_for_three_variables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "e.json", r#"{"n": 3, "output": {"format": "csv"}}"#);
    let out = dbar("exponents", &cfg, &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let got: Vec<(String, String, String)> = rows
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string(), r[2].to_string())
        })
        .collect();
    assert_eq!(
        got,
        [("0", "8", "(1,1,6)"), ("1", "16", "(9,1,6)"), ("2", "24", "(9,9,6)")]
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    );
}

#[test]
fn solve_both_operators_matches_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "s.json", BIDISK);
    let report = stdout_json(&dbar("solve", &cfg, &[]));
    let reports = report["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    let value = |r: &Value, i: usize| {
        let v = &r["points"][i]["value"];
        (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
    };
    for i in 0..3 {
        let p = &reports[0]["points"][i]["point"];
        let z1 = (p[0][0].as_f64().unwrap(), p[0][1].as_f64().unwrap());
        let z2 = (p[1][0].as_f64().unwrap(), p[1][1].as_f64().unwrap());
        let u = (z1.0 * z2.0 - z1.1 * z2.1, -(z1.0 * z2.1 + z1.1 * z2.0));
        let (t, tt) = (value(&reports[0], i), value(&reports[1], i));
        assert!((t.0 - u.0).abs() + (t.1 - u.1).abs() < 1e-10);
        assert!((tt.0 - t.0).abs() + (tt.1 - t.1).abs() < 1e-3);
    }
    assert_eq!(reports[1]["closed"], Value::Bool(true));
    assert!(reports[0]["points"][0]["terms"].as_array().unwrap().len() == 3);
}

#[test]
fn reports_are_deterministic_and_echo_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let body = BIDISK.replace("\"operator\": \"both\"", "\"operator\": \"both\", \"tolerances\": {\"error\": 1e-2, \"residual\": 1e-2}");
    let cfg = write_config(&dir, "s.json", &body);
    let a = dbar("verify", &cfg, &[]);
    let b = dbar("verify", &cfg, &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    let echo = serde_json::to_string(&report["config"]).unwrap();
    let cfg2 = write_config(&dir, "echo.json", &echo);
    let c = dbar("verify", &cfg2, &[]);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn malformed_expression_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "s.json", BIDISK);
    let out = dbar("solve", &cfg, &["--override", "potential=conj(z1)*+"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position"));
    let missing = write_config(&dir, "m.json", r#"{"domains": []}"#);
    assert_eq!(dbar("solve", &missing, &[]).status.code(), Some(1));
    let unknown = write_config(&dir, "u.json", r#"{"n": 3, "colour": "red"}"#);
    assert_eq!(dbar("exponents", &unknown, &[]).status.code(), Some(1));
}

#[test]
fn tolerance_breach_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = BIDISK.replace("\"operator\": \"both\"", "\"operator\": \"ttilde\", \"tolerances\": {\"error\": 1e-30}");
    let cfg = write_config(&dir, "s.json", &body);
    let out = dbar("verify", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn near_boundary_point_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let body = BIDISK.replace(
        "{\"count\": 3, \"margin\": 0.05, \"seed\": 4}",
        "[[[0.99999, 0], [0, 0]]]",
    );
    let cfg = write_config(&dir, "s.json", &body);
    assert_eq!(dbar("solve", &cfg, &[]).status.code(), Some(2));
}

#[test]
fn csv_output_file_with_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let body = BIDISK.replace("\"operator\": \"both\"", "\"operator\": \"both\", \"output\": {\"format\": \"csv\"}");
    let cfg = write_config(&dir, "s.json", &body);
    let out_path = dir.path().join("out.csv");
    let out = dbar(
        "solve",
        &cfg,
        &["--override", "operator=t", "--out", out_path.to_str().unwrap()],
    );
    assert!(out.status.success());
    let body = std::fs::read_to_string(&out_path).unwrap();
    assert!(body.starts_with("operator,point,set,sign,re,im"));
    let first = body.lines().nth(1).unwrap();
    let re: &str = first.split(',').nth(4).unwrap();
    let mantissa = re.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17);
}

#[test]
fn star_domain_and_checking_modes() {
    let dir = tempfile::tempdir().unwrap();
    let bounds = write_config(
        &dir,
        "b.json",
        r#"{"domains": [{"type": "star", "center": [0, 0], "coeffs": [1.0, [0.1, 0.05]]}],
            "probes": {"count": 5}}"#,
    );
    let r = stdout_json(&dbar("bounds", &bounds, &[]));
    assert_eq!(r["passed"], Value::Bool(true));
    assert_eq!(r["result"]["series"].as_array().unwrap().len(), 4);

    let stokes = write_config(
        &dir,
        "st.json",
        r#"{"domains": [{"type": "ellipse", "center": [0.1, 0], "a": 1.5, "b": 1.0}],
            "stokes": {"f": "conj(z1)^2*z1", "g": "z1 + conj(z1)"},
            "quadrature": {"nr": 16, "ntheta": 48}}"#,
    );
    let r = stdout_json(&dbar("stokes", &stokes, &[]));
    assert_eq!(r["passed"], Value::Bool(true));

    let ident = write_config(&dir, "i.json", r#"{"n": 3, "samples": 200, "seed": 2}"#);
    let r = stdout_json(&dbar("identities", &ident, &[]));
    assert_eq!(r["passed"], Value::Bool(true));
}

#[test]
fn convergence_and_supnorm_modes() {
    let dir = tempfile::tempdir().unwrap();
    let conv = write_config(
        &dir,
        "c.json",
        r#"{"domains": [{"type": "ellipse", "center": [0, 0], "a": 1.3, "b": 1.0},
                        {"type": "disk", "center": [0, 0], "radius": 1}],
            "potential": "conj(z1)^2*conj(z2)",
            "suites": [{"nr": 8, "ntheta": 12}, {"nr": 16, "ntheta": 24}],
            "eval_points": {"count": 2, "margin": 0.1, "seed": 3},
            "fd_step": 1e-4,
            "tolerances": {"residual": 1e-3}}"#,
    );
    let r = stdout_json(&dbar("convergence", &conv, &[]));
    assert_eq!(r["passed"], Value::Bool(true));
    let rows = r["result"]["studies"][0]["rows"].as_array().unwrap();
    assert!(rows[1]["holomorphic_defect"].as_f64().unwrap() <= 1e-3);

    let sup = write_config(
        &dir,
        "p.json",
        r#"{"domains": [{"type": "disk", "center": [0, 0], "radius": 1},
                        {"type": "disk", "center": [0, 0], "radius": 1}],
            "catalog": [["conj(z2)", "conj(z1)"], ["0", "0"]],
            "quadrature": {"nr": 8, "ntheta": 12},
            "eval_points": {"count": 2, "margin": 0.1, "seed": 3}}"#,
    );
    let r = stdout_json(&dbar("supnorm", &sup, &[]));
    let rows = r["result"]["tables"][0]["rows"].as_array().unwrap();
    assert!(rows[0]["ratio"].as_f64().unwrap().is_finite());
    assert_eq!(rows[1]["ratio"], Value::Null);
}
