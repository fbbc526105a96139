use std::path::Path;
use std::process::{Command, Output};

fn mgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgt"))
        .args(args)
        .output()
        .expect("mgt runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn design_audit_decode() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let path = path.to_str().unwrap();

    let out = mgt(&["design", "--t", "64", "--s", "2", "--seed", "3", "--out", path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("GTMATRIX v1 N=25 t=64 s=2 "));
    assert_eq!(text.lines().count(), 26);

    let out = mgt(&["audit", "--matrix", path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("PASS\n"));

    let out = mgt(&["decode", "--matrix", path, "--hidden", "3,40"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("recovered 3,40"), "{text}");
    let json_end = text.rfind("recovered").unwrap();
    let transcript: serde_json::Value = serde_json::from_str(&text[..json_end]).unwrap();
    assert!(transcript.is_object() || transcript.is_array());
}

#[test]
fn audit_failure_exit_code() {
    // With t = 4 the degree bound is 1, so any candidate edge violates it.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.txt");
    std::fs::write(&path, "GTMATRIX v1 N=4 t=4 s=2 k=1 seed=0\n1000\n0100\n0010\n0001\n").unwrap();
    let out = mgt(&["audit", "--matrix", path.to_str().unwrap(), "--scope", "all"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("violations TwoGoodDegree="), "{text}");
    assert!(text.ends_with("FAIL\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mgt(&["design", "--t", "64", "--s", "4"]).status.code(), Some(2));
    let missing = mgt(&["audit", "--matrix", "/nonexistent/matrix.txt"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    mgt(&["design", "--t", "16", "--s", "2", "--out", path.to_str().unwrap()]);
    assert!(Path::new(&path).exists());
    let zero = mgt(&["decode", "--matrix", path.to_str().unwrap(), "--hidden", "0,4"]);
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn verify_prints_campaign_row() {
    let out = mgt(&["verify", "--t", "64", "--s", "3", "--mode", "random", "--trials", "200", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert_eq!(header.len(), 14);
    let row = reader.records().next().unwrap().unwrap();
    let field = |name: &str| &row[header.iter().position(|h| h == name).unwrap()];
    assert_eq!(field("runs"), "200");
    assert_eq!(field("failures"), "0");
    assert_eq!(field("N"), "44");
}

#[test]
fn rates_json() {
    let out = mgt(&["rates"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["c3"].as_f64().unwrap() - 1.355458).abs() < 1e-5);
    assert!((v["value_s2"].as_f64().unwrap() + 1.0).abs() < 1e-9);
}
