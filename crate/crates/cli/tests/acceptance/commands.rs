//! Command-line contract of the `belltensor` binary.

use std::f64::consts::FRAC_PI_4;
use std::process::{Command, Output};

use approx::assert_abs_diff_eq;
use belltensor::OptimizerConfig;
use belltensor_cli::{run_scan, AlphaGrid, ScanConfig, ScanMode};
use serde_json::Value;

fn belltensor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_belltensor"))
        .args(args)
        .env_remove("BELLTENSOR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Data rows of a scan CSV as (alpha, sin2a, value, violated).
fn scan_rows(csv: &str) -> Vec<(f64, f64, f64, bool)> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3] == "1",
            )
        })
        .collect()
}

#[test]
fn tensor_json_record() {
    let v = json(&belltensor(&["tensor", "--n", "3", "--alpha", "0.3"]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["order"], "base4-rowmajor-site1-msb");
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 64);
    // zzz is index 63, xxx is index 21
    assert_abs_diff_eq!(entries[63].as_f64().unwrap(), 0.6f64.cos(), epsilon = 1e-12);
    assert_abs_diff_eq!(entries[21].as_f64().unwrap(), 0.6f64.sin(), epsilon = 1e-12);
}

#[test]
fn degrees_flag_matches_radians() {
    let deg = belltensor(&["tensor", "--n", "2", "--alpha-deg", "30", "--analytic"]);
    let rad = belltensor(&[
        "tensor",
        "--n",
        "2",
        "--alpha",
        &30f64.to_radians().to_string(),
        "--analytic",
    ]);
    assert_eq!(stdout(&deg), stdout(&rad));
    let both = belltensor(&["tensor", "--n", "2", "--alpha", "0.1", "--alpha-deg", "5"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn tensor_csv_labels() {
    let out = belltensor(&["tensor", "--n", "2", "--alpha", "0.2", "--format", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,label,value");
    assert_eq!(lines.len(), 17);
    assert!(lines[1].starts_with("0,II,1"));
    assert!(lines[16].starts_with("15,zz,"));
}

#[test]
fn criterion_record_fields() {
    let v = json(&belltensor(&[
        "criterion",
        "--n",
        "3",
        "--alpha",
        "0.7",
        "--restarts",
        "8",
    ]));
    let s = 1.4f64.sin();
    assert_abs_diff_eq!(v["value"].as_f64().unwrap(), 2.0 * s, epsilon = 1e-6);
    assert_eq!(v["violated"], true);
    assert_eq!(v["frames"].as_array().unwrap().len(), 3);
    assert_eq!(v["c"].as_array().unwrap().len(), 3);
    assert!(v["restarts_agreeing"].as_u64().unwrap() >= 1);

    let sum = json(&belltensor(&[
        "criterion",
        "--n",
        "3",
        "--alpha",
        "0.1",
        "--mode",
        "sum-squares",
        "--restarts",
        "8",
    ]));
    assert_eq!(sum["violated"], false);
    assert!(sum["c"].is_null());
}

#[test]
fn bell_record_fields() {
    let v = json(&belltensor(&[
        "bell",
        "--n",
        "2",
        "--alpha",
        "0.3",
        "--mode",
        "chsh",
        "--restarts",
        "8",
    ]));
    let s = 0.6f64.sin();
    assert_eq!(v["functional"], "CHSH");
    assert_abs_diff_eq!(v["value"].as_f64().unwrap(), 2.0 * (1.0 + s * s).sqrt(), epsilon = 1e-6);
    assert_eq!(v["local_bound"], 2.0);
    assert_eq!(v["violated"], true);
    let settings = v["settings"].as_array().unwrap();
    assert_eq!(settings.len(), 2);
    assert_eq!(settings[0].as_array().unwrap().len(), 2);

    let bad = belltensor(&["bell", "--n", "3", "--alpha", "0.3", "--mode", "chsh"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_catalog_export() {
    let text = stdout(&belltensor(&["oracle", "--n", "2"]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sign_bits_hex,local_bound");
    assert_eq!(lines.len(), 17);
    assert!(lines.contains(&"8,2"));
    assert!(lines.contains(&"0,4"));
    let three = stdout(&belltensor(&["oracle", "--n", "3"]));
    assert_eq!(three.lines().count(), 257);
    assert_eq!(belltensor(&["oracle", "--n", "5"]).status.code(), Some(3));
}

#[test]
fn parameter_errors_exit_2() {
    assert_eq!(
        belltensor(&["tensor", "--n", "3", "--alpha", "1.2"]).status.code(),
        Some(2)
    );
    assert_eq!(belltensor(&["bisect", "--n", "4"]).status.code(), Some(2));
    assert_eq!(belltensor(&["bisect", "--n", "9"]).status.code(), Some(2));
    assert_eq!(
        belltensor(&["scan", "--n", "3", "--mode", "wwzb", "--points", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        belltensor(&["tensor", "--n", "3", "--alpha", "0.1", "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        belltensor(&["criterion", "--n", "3", "--alpha", "0.1", "--restarts", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn catalog_capacity_exits_3() {
    // qubit counts past the state cap are plain parameter errors
    assert_eq!(
        belltensor(&["tensor", "--n", "13", "--alpha", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(belltensor(&["oracle", "--n", "7"]).status.code(), Some(3));
}

#[test]
fn scan_bodies_are_deterministic() {
    let args = ["scan", "--n", "3", "--mode", "wwzb", "--points", "4", "--restarts", "6"];
    let a = stdout(&belltensor(&args));
    let b = stdout(&belltensor(&args));
    assert!(a.starts_with("# generated_unix="));
    let body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a), body(&b));
    assert_eq!(scan_rows(&a).len(), 4);
}

#[test]
fn seed_environment_variable() {
    let args = ["scan", "--n", "2", "--mode", "mabk", "--points", "2", "--restarts", "2"];
    let default = stdout(&belltensor(&args));
    assert!(default.contains(&format!("seed={}", belltensor::optimize::DEFAULT_SEED)));
    let out = Command::new(env!("CARGO_BIN_EXE_belltensor"))
        .args(args)
        .env("BELLTENSOR_SEED", "42")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("seed=42"));
}

#[test]
fn scan_json_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    let out = belltensor(&[
        "scan",
        "--n",
        "2",
        "--mode",
        "wwzb",
        "--points",
        "3",
        "--restarts",
        "4",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["metadata"]["mode"], "wwzb");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);

    let csv_path = dir.path().join("scan.csv");
    let config = ScanConfig {
        n: 2,
        alpha_grid: AlphaGrid::new(0.0, FRAC_PI_4, 3).unwrap(),
        mode: ScanMode::Wwzb,
        optimizer: OptimizerConfig::default().with_restarts(4),
        output_path: Some(csv_path.clone()),
    };
    let report = run_scan(&config).unwrap();
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), report.to_csv().unwrap());
}

#[test]
fn two_qubit_mabk_scan_follows_gisin_value() {
    let text = stdout(&belltensor(&[
        "scan",
        "--n",
        "2",
        "--mode",
        "mabk",
        "--points",
        "12",
        "--restarts",
        "16",
    ]));
    for (_, s, value, violated) in scan_rows(&text) {
        assert_abs_diff_eq!(value, 2.0 * (1.0 + s * s).sqrt(), epsilon = 1e-6);
        assert_eq!(violated, s > 1e-3);
    }
}

#[test]
fn criterion_scans_and_threshold_consistency() {
    let three = scan_rows(&stdout(&belltensor(&["scan", "--n", "3", "--mode", "criterion"])));
    assert_eq!(three.len(), 50);
    let step = FRAC_PI_4 / 49.0;
    for &(_, s, _, violated) in &three {
        if s <= 0.5 - 1e-3 {
            assert!(!violated, "n=3 violated at sin2a={s}");
        }
    }
    let first = three.iter().find(|r| r.3).expect("violation above threshold").0;
    let bisect = json(&belltensor(&["bisect", "--n", "3"]));
    let alpha_star = bisect["alpha_rad"].as_f64().unwrap();
    assert!(
        (first - alpha_star).abs() <= step,
        "grid {first} vs bisection {alpha_star}"
    );
    assert_abs_diff_eq!(bisect["sin_2alpha"].as_f64().unwrap(), 0.5, epsilon = 1e-3);

    let four = scan_rows(&stdout(&belltensor(&["scan", "--n", "4", "--mode", "criterion"])));
    for (alpha, _, _, violated) in four {
        assert_eq!(violated, alpha > 0.0, "n=4 at alpha={alpha}");
    }
}

#[test]
fn seven_qubit_threshold() {
    let v = json(&belltensor(&["bisect", "--n", "7"]));
    assert_abs_diff_eq!(v["sin_2alpha"].as_f64().unwrap(), 0.125, epsilon = 5e-3);
}

#[test]
fn reproduce_filter_and_injected_failure() {
    let only = belltensor(&["reproduce", "--only", "statement2"]);
    assert_eq!(only.status.code(), Some(0));
    let table = stdout(&only);
    let rows: Vec<&str> = table
        .lines()
        .skip(1)
        .filter(|l| l.contains("PASS") || l.contains("FAIL"))
        .collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|l| l.starts_with("statement2.")));

    let bad = belltensor(&["reproduce", "--only", "oracle", "--expect", "oracle.count.n2=17"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("oracle.count.n2"));

    let unknown = belltensor(&["reproduce", "--expect", "no.such.check=1"]);
    assert_eq!(unknown.status.code(), Some(2));
}
