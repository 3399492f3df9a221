use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qws(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qws"))
        .args(args)
        .env_remove("QWS_WINDOW_DEFAULT")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qws-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn constant(c: i64) -> String {
    format!(r#"{{"window": [0, 0], "modes": {{"0": "{}"}}, "exact": true}}"#, c)
}

fn matrix2(a: i64, b: i64, c: i64, d: i64) -> String {
    format!("[[{}, {}], [{}, {}]]", constant(a), constant(b), constant(c), constant(d))
}

#[test]
fn rootsys_reports_coxeter_data() {
    let out = qws(&["rootsys", "--type", "A", "--rank", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["coxeter_number"], 4);
    assert_eq!(v["exponents"], serde_json::json!([1, 2, 3]));
    assert_eq!(v["orbits"].as_array().unwrap().len(), 3);
}

#[test]
fn excluded_type_exits_with_code_4() {
    let out = qws(&["rmatrix", "--type", "E", "--rank", "6"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E6"));
}

#[test]
fn rmatrix_residuals_vanish() {
    let out = qws(&["rmatrix", "--type", "A", "--rank", "2", "--modes", "-2..2"]);
    assert!(out.status.success());
    let v = json(&out);
    let modes = v["per_mode"].as_array().unwrap();
    assert_eq!(modes.len(), 5);
    for m in modes {
        assert_eq!(m["kernels_agree"], true);
        for row in m["tangency_residual"].as_array().unwrap() {
            assert!(row.as_array().unwrap().iter().all(|x| x == "0"));
        }
    }
}

#[test]
fn window_default_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qws"))
        .args(["rmatrix", "--type", "A", "--rank", "1"])
        .env("QWS_WINDOW_DEFAULT", "0..1")
        .output()
        .unwrap();
    assert_eq!(json(&out)["per_mode"].as_array().unwrap().len(), 2);
}

#[test]
fn gauge_fix_of_a_companion_input_is_the_identity() {
    let input = scratch("companion.json", &matrix2(0, -1, 1, 5));
    let out = qws(&["gauge-fix", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["canonical"]["u"][0]["modes"]["0"], "5");
    assert_eq!(v["n"][1][0]["modes"], serde_json::json!({}));
}

#[test]
fn gauge_fix_writes_to_out_and_both_algorithms_agree() {
    let input = scratch("cell.json", &matrix2(-1, -1, 0, -1));
    let a = scratch("a.json", "");
    let b = scratch("b.json", "");
    for (path, alg) in [(&a, "elimination"), (&b, "recursive")] {
        let out = qws(&["gauge-fix", "--input", input.to_str().unwrap(), "--algorithm", alg, "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let (a, b) = (fs::read_to_string(a).unwrap(), fs::read_to_string(b).unwrap());
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["canonical"]["u"][0]["modes"]["0"], "-2");
}

#[test]
fn shape_violation_exits_with_code_2() {
    let input = scratch("bad.json", &matrix2(0, 1, 1, 5));
    assert_eq!(qws(&["gauge-fix", "--input", input.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn window_exhaustion_exits_with_code_3() {
    let t = |m: &str| format!(r#"{{"window": [0, 1], "modes": {}, "exact": false}}"#, m);
    let m = format!(
        "[[{}, {}], [{}, {}]]",
        t(r#"{"0": "1", "1": "1"}"#),
        constant(-1),
        t(r#"{"1": "-1"}"#),
        constant(1)
    );
    let input = scratch("truncated.json", &m);
    let path = input.to_str().unwrap();
    assert!(qws(&["gauge-fix", "--input", path, "--modes", "0..1"]).status.success());
    assert_eq!(qws(&["gauge-fix", "--input", path, "--modes", "0..5"]).status.code(), Some(3));
}

#[test]
fn degenerate_lattice_exits_with_code_5() {
    let out = qws(&["lattice", "--type", "A", "--rank", "1", "--N", "2", "--check", "jacobi"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn lattice_checks_pass_on_a_coprime_lattice() {
    for check in ["jacobi", "gaugefix", "theta"] {
        let out = qws(&["lattice", "--type", "A", "--rank", "1", "--N", "3", "--check", check, "--seed", "5"]);
        assert!(out.status.success(), "{}", check);
    }
}

#[test]
fn lattice_input_round_trips_through_a_file() {
    let input = scratch("lattice.json", r#"[[["1", "-1"], ["0", "1"]], [["2", "-1"], ["1", "0"]], [["0", "-1"], ["1", "3"]]]"#);
    let out = qws(&["lattice", "--type", "A", "--rank", "1", "--N", "3", "--check", "gaugefix", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["seed"], Value::Null);
    assert_eq!(v["canonical"].as_array().unwrap().len(), 3);
    assert_eq!(v["stabilizer_dimension"], 0);
    let wrong = qws(&["lattice", "--type", "A", "--rank", "1", "--N", "4", "--check", "gaugefix", "--input", input.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn fr_coeff_prints_the_a1_family() {
    let out = qws(&["fr-coeff", "--n", "2", "--p", "1", "--s", "1", "--m", "1", "--format", "table"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "(1 - q)/(1 + q)");
}

#[test]
fn fraction_check_passes() {
    let out = qws(&["fraction-check", "--n", "4", "--modes", "-3..3"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["cases"].as_array().unwrap().len(), 24);
}

#[test]
fn miura_is_deterministic_and_matches_the_oracle() {
    let a = qws(&["miura", "--n", "3", "--seed", "11", "--check"]);
    let b = qws(&["miura", "--n", "3", "--seed", "11", "--check"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["oracle"]["agrees"], true);
}

#[test]
fn miura_reads_lambda_from_a_file() {
    let generated = qws(&["miura", "--n", "2", "--seed", "2"]);
    let lambda = json(&generated)["lambda"].to_string();
    let input = scratch("lambda.json", &lambda);
    let out = qws(&["miura", "--lambda", input.to_str().unwrap(), "--check"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["u"], json(&generated)["u"]);
}

#[test]
fn mcell_and_scalar_operator() {
    let cell = scratch("mcell.json", &matrix2(-1, -1, 0, -1));
    assert!(qws(&["mcell-check", "--input", cell.to_str().unwrap()]).status.success());
    let off = scratch("off.json", &matrix2(1, -1, 0, 2));
    assert_eq!(qws(&["mcell-check", "--input", off.to_str().unwrap()]).status.code(), Some(1));
    let comp = scratch("comp.json", &matrix2(0, -1, 1, 4));
    let v = json(&qws(&["scalar-op", "--input", comp.to_str().unwrap()]));
    let c: Vec<&str> = v["coefficients"].as_array().unwrap().iter().map(|s| s["modes"]["0"].as_str().unwrap()).collect();
    assert_eq!(c, ["1", "4", "1"]);
}

#[test]
fn verify_all_prints_one_line_per_criterion() {
    let out = qws(&["verify-all", "--seed", "7", "--format", "table"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().filter(|l| l.contains("criterion")).collect();
    assert_eq!(lines.len(), 12);
    assert!(text.starts_with("seed 7"));
    let any_failed = lines.iter().any(|l| l.starts_with("[FAIL]"));
    assert_eq!(out.status.code(), Some(if any_failed { 1 } else { 0 }));
}
