//! CLI surface tests: exit codes, output shapes, determinism, round trips.

use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_qjacobi"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

#[test]
fn domain_violation_exits_2() {
    let (code, _, err) = run(&["check", "--q", "1/2", "--a", "3"]);
    assert_eq!(code, 2, "stderr: {err}");
    let (code, _, _) = run(&["check", "--q", "5/4"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["check", "--b", "7/2"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["check"]);
    assert_eq!(code, 0);
}

#[test]
fn eigen_n0_matches_expected_matrix() {
    let (code, out, _) = run(&["eigen", "--n", "0"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(
        v,
        serde_json::json!([["-65/32", "-3/32"], ["0/1", "-17/16"]])
    );
}

#[test]
fn verify_is_deterministic_and_green() {
    let (code1, out1, _) = run(&["verify", "--nmax", "2"]);
    let (code2, out2, _) = run(&["verify", "--nmax", "2"]);
    assert_eq!(code1, 0);
    assert_eq!(code2, 0);
    assert_eq!(out1, out2, "verify output must be byte-identical");
    let checks: serde_json::Value = serde_json::from_str(out1.trim()).unwrap();
    assert!(checks.as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn csv_matrix_is_two_by_two_header_free() {
    let (code, out, _) = run(&["eigen", "--n", "0", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.trim().lines().collect();
    assert_eq!(lines.len(), 2);
    for line in &lines {
        assert_eq!(line.split(',').count(), 2);
        assert!(!line.contains("Lambda"), "CSV must be header-free");
    }
    assert_eq!(lines[0], "-65/32,-3/32");
}

#[test]
fn gaussian_rational_crossing() {
    // v = i crosses as {"re":"0/1","im":"1/1"} in eta F0 row entries.
    let (code, out, _) = run(&[
        "eta", "--q", "2/3", "--a", "1/3", "--b", "-1/1", "--v", "0/1+1/1i", "--n", "1",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("\"re\""), "complex entries must use re/im objects");
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2); // two rows at n = 1
}

#[test]
fn moments_certified_mode_emits_enclosures() {
    let (code, out, _) = run(&[
        "moments", "--nmax", "1", "--mode", "certified", "--tol", "1e-10",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let first = &v.as_array().unwrap()[0];
    assert!(first["series"][0][0]["re"]["mid"].is_string());
    assert!(first["series"][0][0]["re"]["rad"].is_string());
    assert_eq!(first["M"][1][1], "1/1");
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("qjacobi-cli-io-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eigen.json");
    let (code, out, _) = run(&["eigen", "--n", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let contents = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&contents).unwrap();
    assert_eq!(v[0][0], "-257/64");
    std::fs::remove_file(&path).ok();
}

#[test]
fn symmetry_report_schema() {
    let (code, out, _) = run(&["symmetry", "--nmax", "6"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let entries = v.as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        assert!(e["equation"].is_string());
        assert!(e["x"].is_number());
        assert_eq!(e["pass"], true);
        assert!(e["residual-norm"].is_string());
    }
    // Exact equations report the literal "0" residual.
    assert!(entries.iter().any(|e| e["residual-norm"] == "0"));
}
