use std::path::{Path, PathBuf};
use std::process::Command;

use motherbody_cli::{run, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_motherbody"))
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn tmp_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("motherbody-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// Runs in-process; returns (code, stdout, stderr).
fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("motherbody").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn assert_valid(schema: &str, doc: &Value) {
    let text = std::fs::read_to_string(schema_dir().join(format!("{schema}.schema.json"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn summary(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn phase_reports_critical_times() {
    let v = summary(&["phase", "--a", "2", "--c", "1"]);
    assert_eq!(v["t_c"], 7.0);
    let ts = v["t_star"].as_f64().unwrap();
    assert!((ts - 0.191_137_347_024_299_1).abs() < 1e-14, "{ts}");
    assert_valid("phase", &v);
}

#[test]
fn droplet_area_and_moments() {
    let dir = tmp_dir("droplet");
    let d = dir.to_str().unwrap();
    let v = summary(&["droplet", "--a", "2", "--c", "1", "--t", "0.1", "--samples", "256", "--out", d]);
    assert!((v["area"].as_f64().unwrap() - 0.1 * std::f64::consts::PI).abs() < 1e-12);
    let m: Vec<f64> = serde_json::from_value(v["moments"].clone()).unwrap();
    assert!(m[0].abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12 && m[2].abs() < 1e-12);
    assert_valid("droplet", &v);

    let csv = std::fs::read_to_string(dir.join("boundary.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,re_z,im_z"));
    assert_eq!(lines.count(), 256);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("droplet.json")).unwrap()).unwrap();
    assert_eq!(written, v);
}

#[test]
fn measures_and_spectral_match_schemas() {
    let dir = tmp_dir("measures");
    let d = dir.to_str().unwrap();
    let m = summary(&["measures", "--a", "2", "--c", "1", "--t", "0.1", "--grid", "50", "--out", d, "--format", "json"]);
    assert_valid("measures", &m);
    assert!((m["mu1_mass"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    for name in ["mu1", "mu2", "gamma"] {
        let t: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap())
                .unwrap();
        assert_valid("table", &t);
    }
    let s = summary(&["spectral", "--a", "2", "--c", "1", "--t", "0.1"]);
    assert_valid("spectral", &s);
    assert_eq!(s["discriminant_roots"].as_array().unwrap().len(), 8);
}

#[test]
fn oracle_routes_agree() {
    let v = summary(&["oracle", "--a", "2", "--c", "1", "--n", "6", "--N", "12", "--route", "both"]);
    assert_eq!(v["routes_agree"], true);
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 7);
    assert_eq!(v["coeffs"][6], "1");
    assert_valid("oracle", &v);
}

#[test]
fn verify_all_writes_report() {
    let (code, out, err) = call(&["verify-all", "--a", "2", "--c", "1", "--t", "0.5", "--ladder", "8,16,32"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_valid("verify", &v);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 10);
    assert_eq!(v["config"]["ladder"], serde_json::json!([8, 16, 32]));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = |d: &str| {
        vec!["droplet", "--a", "2", "--c", "1", "--t", "0.1", "--samples", "64", "--out"]
            .into_iter()
            .map(String::from)
            .chain([d.to_string()])
            .collect::<Vec<_>>()
    };
    let (d1, d2) = (tmp_dir("det1"), tmp_dir("det2"));
    let o1 = bin().args(args(d1.to_str().unwrap())).output().unwrap();
    let o2 = bin().args(args(d2.to_str().unwrap())).output().unwrap();
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(o1.stdout, o2.stdout);
    for f in ["boundary.csv", "droplet.json"] {
        assert_eq!(std::fs::read(d1.join(f)).unwrap(), std::fs::read(d2.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let o = bin().args(["phase", "--a", "2", "--c", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_OK));

    // Beyond t*: rejected input.
    let o = bin().args(["droplet", "--a", "2", "--c", "1", "--t", "0.5"]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INPUT));
    let report: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["kind"], "PhaseViolation");
    assert_valid("error", &report);

    // a^2 < 2c
    let (code, _, err) = call(&["droplet", "--a", "1", "--c", "1", "--t", "0.1"]);
    assert_eq!(code, EXIT_INPUT, "{err}");

    // Unknown flag is a usage error.
    let o = bin().args(["phase", "--a", "2", "--c", "1", "--alpha", "3"]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INPUT));

    // A divergent Newton solve is a numerical failure.
    let (code, _, err) = call(&["droplet", "--a", "2", "--c", "1", "--t", "0.1", "--tol", "0"]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
    let report: Value = serde_json::from_str(&err).unwrap();
    assert_valid("error", &report);
}

#[test]
fn missing_flag_is_named() {
    let (code, out, err) = call(&["droplet", "--c", "1", "--t", "0.1"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(out.is_empty());
    let report: Value = serde_json::from_str(&err).unwrap();
    assert_eq!(report["kind"], "ParseError");
    assert!(report["message"].as_str().unwrap().contains("--a"), "{report}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tmp_dir("config");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "command = \"phase\"\na = 3\nc = 1.0\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = summary(&["phase", "--config", c]);
    assert_eq!(from_file["a"], 3.0);
    let overridden = summary(&["phase", "--config", c, "--a", "2"]);
    assert_eq!(overridden["a"], 2.0);
    assert_eq!(overridden["t_c"], 7.0);

    // "2" and "2.0" parse to the same value on the command line too.
    assert_eq!(summary(&["phase", "--a", "2.0", "--c", "1"]), summary(&["phase", "--a", "2", "--c", "1"]));

    let (code, _, err) = call(&["droplet", "--config", c]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("phase"), "{err}");

    std::fs::write(&cfg, "a = 2\nc = 1\nalpha = 0.5\n").unwrap();
    let (code, _, err) = call(&["phase", "--config", c]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("alpha"), "{err}");

    let (code, _, err) = call(&["phase", "--config", dir.join("absent.toml").to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT, "{err}");
}
