use std::process::{Command, Output};

use serde_json::Value;

fn stabilis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabilis"))
        .args(args)
        .env_remove("STABILIS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = stabilis(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Parses CSV output, skipping the `#` provenance lines.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const SMALL_STRASSEN: [&str; 6] = ["strassen", "--samples", "5", "--seed", "11", "--n-eps=100"];

#[test]
fn strassen_emits_one_row_per_epsilon_deterministically() {
    let a = stdout(&SMALL_STRASSEN);
    let b = stdout(&SMALL_STRASSEN);
    assert_eq!(a, b);
    assert!(a.starts_with("# stabilis"));
    assert!(a.contains("# seed: 11") && a.contains("# t: 53"));
    let (header, rows) = csv_rows(&a);
    assert_eq!(header, ["epsilon", "rel_p05", "rel_med", "rel_p95", "abs_p05", "abs_med", "abs_p95"]);
    assert_eq!(rows.len(), 100);
    let eps: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!((eps[0], eps[99]), (1e-8, 1e-2));
    let other = stdout(&["strassen", "--samples", "5", "--seed", "12"]);
    assert_ne!(a, other);
}

#[test]
fn seed_can_come_from_the_environment() {
    let flag = stdout(&["strassen", "--samples", "3", "--n-eps", "4", "--seed", "9"]);
    let env = Command::new(env!("CARGO_BIN_EXE_stabilis"))
        .args(["strassen", "--samples", "3", "--n-eps", "4"])
        .env("STABILIS_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag, String::from_utf8(env.stdout).unwrap());
}

#[test]
fn sine_emits_k_max_rows() {
    let text = stdout(&["sine", "--k-max", "20"]);
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["k", "u", "rel_lop"]);
    assert_eq!(rows.len(), 20);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1).to_string());
        assert_eq!(r[1].parse::<f64>().unwrap(), 2f64.powi(-53));
    }
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["strassen", "--samples", "4", "--n-eps", "6", "--seed", "3"];
    let (header, rows) = csv_rows(&stdout(&args));
    let json: Value = serde_json::from_str(&stdout(&[&args[..], &["--format", "json"]].concat())).unwrap();
    assert_eq!(json["config"]["command"], "strassen");
    assert_eq!(json["config"]["seed"], 3);
    let json_rows = json["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for (csv_row, json_row) in rows.iter().zip(json_rows) {
        for (name, cell) in header.iter().zip(csv_row) {
            let from_json = json_row[name].as_f64().unwrap();
            assert_eq!(cell.parse::<f64>().unwrap().to_bits(), from_json.to_bits(), "{name}");
        }
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("stabilis-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sine.csv");
    let args = ["sine", "--k-max", "5"];
    stdout(&[&args[..], &["-o", path.to_str().unwrap()]].concat());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&args));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    // configuration problems
    for args in [
        &["cond", "no-such-function", "1,2"][..],
        &["strassen", "--eps", "0.5", "0.1"],
        &["sine", "--guard", "64"],
        &["cond", "product", "1,(2"],
        &["strassen", "--bogus"],
    ] {
        assert_eq!(stabilis(args).status.code(), Some(2), "{args:?}");
    }
    // well-formed request that cannot be computed
    let out = stabilis(&["excess", "sum", "hadamard", "--x", "1,-1,1,1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn cond_examples() {
    let (header, rows) = csv_rows(&stdout(&["cond", "product", "1,2,3"]));
    let kappa: f64 = rows[0][column(&header, "kappa")].parse().unwrap();
    assert!((kappa - 3f64.sqrt()).abs() < 1e-15);
    assert_eq!(rows[0][column(&header, "method")], "closed-form");

    let (header, rows) = csv_rows(&stdout(&["cond", "--jacobian", "sum", "1,1"]));
    let kappa: f64 = rows[0][column(&header, "kappa")].parse().unwrap();
    assert!((kappa - 0.5f64.sqrt()).abs() < 1e-15);

    let (header, rows) = csv_rows(&stdout(&["cond", "sum", "1,-1"]));
    assert_eq!(rows[0][column(&header, "kappa")], "inf");

    let (header, rows) = csv_rows(&stdout(&["cond", "sin", "pi/6"]));
    let kappa: f64 = rows[0][column(&header, "kappa")].parse().unwrap();
    let x = std::f64::consts::FRAC_PI_6;
    assert!((kappa - x / x.tan()).abs() < 1e-14);

    let (header, rows) = csv_rows(&stdout(&["cond", "--sample", "--seed", "1", "product", "1,2,3"]));
    let kappa: f64 = rows[0][column(&header, "kappa")].parse().unwrap();
    assert!((kappa - 3f64.sqrt()).abs() < 0.05 * 3f64.sqrt());
    assert_eq!(rows[0][column(&header, "method")], "sampled");
}

#[test]
fn amen_examples() {
    let (header, rows) = csv_rows(&stdout(&["amen", "sum", "--x", "1,2,3", "--a", "8", "--n", "200"]));
    assert_eq!(rows[0][column(&header, "verdict")], "PASS");
    assert_eq!(rows[0][column(&header, "witness")], "");

    let x = format!("{}", std::f64::consts::FRAC_PI_2 + 1e6 * std::f64::consts::PI);
    let (header, rows) = csv_rows(&stdout(&["amen", "sin", "--x", &x, "--a", "8", "--seed", "5"]));
    assert_eq!(rows[0][column(&header, "verdict")], "FAIL");
    assert_eq!(rows[0][column(&header, "growth_ok")], "false");
    assert_eq!(rows[0][column(&header, "witness_verified")], "true");
}

#[test]
fn excess_examples() {
    let (header, rows) = csv_rows(&stdout(&["excess", "strassen-g", "strassen-h", "--eps", "1e-4"]));
    let excess: f64 = rows[0][column(&header, "excess")].parse().unwrap();
    let bound: f64 = rows[0][column(&header, "lower_bound")].parse().unwrap();
    assert_eq!(bound, 2500.0);
    assert!(excess >= bound, "{excess}");

    let (header, rows) = csv_rows(&stdout(&["excess", "sum", "hadamard", "--x", "1,1,1,1"]));
    let excess: f64 = rows[0][column(&header, "excess")].parse().unwrap();
    let want = (1.0 + 0.5f64.sqrt()) * (1.0 + 2f64.sqrt()) / 2.0;
    assert!((excess - want).abs() < 1e-12);
}
