use std::f64::consts::FRAC_PI_2;
use std::process::{Command, Output};

use dido::{gamma_star, ClassificationRecord, ProblemParams, Regime, ThresholdResult};

fn dido(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dido")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_symmetric_is_at_threshold() {
    let o = dido(&["solve", "--dim", "2", "--rho", "1", "1", "--vol", "1.5707963", "1.5707963", "--gamma", "0"]);
    assert!(o.status.success());
    let r: ClassificationRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.regime, Regime::AtThreshold);
    assert!((r.alpha - FRAC_PI_2).abs() <= 1e-10);
    assert!((r.beta - FRAC_PI_2).abs() <= 1e-10);
}

#[test]
fn gamma_star_passes_through() {
    let o = dido(&["gamma-star", "--dim", "2", "--rho", "2", "1", "--vol", "1", "1"]);
    assert!(o.status.success());
    let t: ThresholdResult = serde_json::from_str(&stdout(&o)).unwrap();
    let p = ProblemParams::new(2, 2.0, 1.0, 1.0, 1.0, 0.0).unwrap();
    assert_eq!(t.gamma_star.to_bits(), gamma_star(&p).unwrap().gamma_star.to_bits());
}

#[test]
fn gamma_sweep_transitions_once() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = dido(&[
        "sweep", "--vary", "gamma", "--range", "0", "2", "41", "--dim", "3", "--rho", "1", "2", "--vol", "2", "1",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["swept_value", "gamma_star", "regime", "alpha", "beta", "R_minus", "R_plus", "F_total", "F_interface"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 41);
    let regimes: Vec<&str> = rows.iter().map(|r| &r[2]).collect();
    let switches = regimes.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(switches, 1);
    assert_eq!(regimes[0], "II");
    assert_eq!(regimes[40], "I");
    let total: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    let first_i = regimes.iter().position(|&r| r == "I").unwrap();
    for (k, r) in rows.iter().enumerate() {
        if &r[2] == "I" {
            assert_eq!(r[8].parse::<f64>().unwrap(), 0.0);
            assert!((total[k] - total[first_i]).abs() <= 1e-10 * total[first_i]);
        }
        if k > 0 {
            assert!(total[k] >= total[k - 1] - 1e-10 * total[k]);
        }
    }
}

#[test]
fn ratio_sweeps_run() {
    for vary in ["rho_ratio", "volume_ratio"] {
        let o = dido(&["sweep", "--vary", vary, "--range", "0.5", "2", "4", "--dim", "2", "--rho", "1", "1", "--vol", "1", "1"]);
        assert!(o.status.success());
        assert_eq!(stdout(&o).lines().count(), 5);
    }
}

#[test]
fn from_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("record.json");
    let args = ["solve", "--dim", "3", "--rho", "1", "2", "--vol", "2", "1", "--gamma", "0.3"];
    let first = dido(&args);
    std::fs::write(&path, &first.stdout).unwrap();
    let again = dido(&["solve", "--from-json", path.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(first.stdout, again.stdout);
    let aliased = dido(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(first.stdout, aliased.stdout);
    let overridden = dido(&["solve", "--from-json", path.to_str().unwrap(), "--gamma", "0.5"]);
    let r: ClassificationRecord = serde_json::from_str(&stdout(&overridden)).unwrap();
    assert_eq!(r.params.gamma, 0.5);
    assert_eq!(r.params.v_minus, 2.0);
}

#[test]
fn bare_params_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    std::fs::write(&path, r#"{"N": 2, "rho_minus": 1, "rho_plus": 1, "V_minus": 1, "V_plus": 1, "gamma": 0}"#).unwrap();
    let o = dido(&["solve", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--seed", "11", "--draws", "4"];
    let a = dido(&args);
    let b = dido(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let reports: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);
    let sweep = ["sweep", "--vary", "gamma", "--range", "0", "1", "9", "--dim", "4", "--rho", "1", "3", "--vol", "1", "1"];
    assert_eq!(dido(&sweep).stdout, dido(&sweep).stdout);
}

#[test]
fn export_geometry_formats() {
    let base = ["export-geometry", "--dim", "2", "--rho", "1", "2", "--vol", "3", "1", "--gamma", "0.1", "--resolution", "32"];
    let svg = dido(&[&base[..], &["--format", "svg"]].concat());
    assert!(svg.status.success());
    let text = stdout(&svg);
    assert!(text.starts_with("<svg") && text.contains("stroke-dasharray"));
    let csv = dido(&[&base[..], &["--format", "csv"]].concat());
    assert_eq!(stdout(&csv).lines().count(), 1 + 2 * 33);
    let json = dido(&[&base[..], &["--format", "json"]].concat());
    let v: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(v["left"].as_array().unwrap().len(), 33);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["solve", "--dim", "2", "--rho", "1", "1"],
        &["solve", "--dim", "1", "--rho", "1", "1", "--vol", "1", "1"],
        &["solve", "--dim", "2", "--rho", "1", "1", "--vol", "1", "1", "--gamma", "-1"],
        &["sweep", "--vary", "gamma", "--range", "1", "0", "5", "--dim", "2", "--rho", "1", "1", "--vol", "1", "1"],
        &["sweep", "--vary", "gamma", "--range", "0", "1", "1", "--dim", "2", "--rho", "1", "1", "--vol", "1", "1"],
        &["solve", "--from-json", "/nonexistent/path.json"],
    ] {
        let o = dido(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let o = dido(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("export-geometry"));
}
