use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hbb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbb"))
        .args(args)
        .env_remove("HBB_THREADS")
        .output()
        .expect("hbb runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Values of the last CSV column.
fn last_column(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

const NU_0: &str = r#"{"n": 2, "density": {"kind": "power-weight", "exponent": 0, "scale": 1}}"#;

#[test]
fn kernel_at_origin_is_one() {
    let v = json(&hbb(&["kernel", "eval", "--n", "2", "--alpha", "0", "--x", "0,0", "--y", "0.3,0.4"]));
    assert_eq!(v["value"], 1.0);
}

#[test]
fn kernel_eval_matches_disc_closed_form() {
    // n = 2, alpha = 0: R(z, w) = 2 Re (1 - z conj(w))^-2 - 1
    let v = json(&hbb(&["kernel", "eval", "--n", "2", "--alpha", "0", "--x", "0.3,-0.2", "--y", "0.5,0.4"]));
    let (a, b) = (1.0 - (0.3 * 0.5 + -0.2 * 0.4), -(-0.2 * 0.5 - 0.3 * 0.4));
    let m2 = a * a + b * b;
    let re = (a * a - b * b) / (m2 * m2);
    let oracle = 2.0 * re - 1.0;
    let got = v["value"].as_f64().unwrap();
    assert!((got - oracle).abs() < 1e-11 * oracle.abs(), "{got} vs {oracle}");
}

#[test]
fn point_outside_ball_exits_2() {
    let o = hbb(&["kernel", "eval", "--n", "2", "--alpha", "0", "--x", "1,0", "--y", "0.3,0.4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("open unit ball"), "{}", stderr(&o));
}

#[test]
fn norm_scan_has_one_row_per_radius() {
    let o = hbb(&["kernel", "norm-scan", "--n", "2", "--alpha", "0", "--p", "2", "--beta", "0", "--count", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "radius,one_minus_r2,value");
    assert_eq!(text.lines().count(), 1 + 5);
    let o = hbb(&["kernel", "bracket-scan", "--n", "3", "--beta", "1", "--s", "0", "--radii", "0.5,0.9,0.99"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 3);
}

#[test]
fn lattice_reloads_and_passes_audit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lattice.json");
    let o = hbb(&["lattice", "--n", "2", "--delta", "0.5", "--horizon", "0.999", "-o", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let audit = json(&hbb(&["lattice", "--check", path.to_str().unwrap()]));
    assert_eq!(audit["separation_ok"], true);
    assert_eq!(audit["uncovered"], 0);
    assert!(audit["min_separation"].as_f64().unwrap() >= 0.5);
}

#[test]
fn lattice_output_is_deterministic() {
    let args = ["lattice", "--n", "2", "--delta", "0.5", "--horizon", "0.99"];
    let (a, b) = (hbb(&args), hbb(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_delta_exits_2() {
    let o = hbb(&["lattice", "--n", "2", "--delta", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tampered_lattice_fails_audit() {
    let dir = tempfile::tempdir().unwrap();
    let good = hbb(&["lattice", "--n", "2", "--delta", "0.5", "--horizon", "0.9"]);
    let mut lat: Value = serde_json::from_slice(&good.stdout).unwrap();
    // a duplicate point breaks separation
    let first = lat["points"][1].clone();
    lat["points"].as_array_mut().unwrap().push(first);
    let path = write(dir.path(), "bad.json", &lat.to_string());
    let o = hbb(&["lattice", "--check", &path]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn averaging_of_volume_measure_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "nu.json", NU_0);
    let o = hbb(&["measure", "averaging", "--measure", &m, "--radii", "0,0.5,0.9,0.99,0.999"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for v in last_column(&stdout(&o)) {
        assert!((v - 1.0).abs() <= 1e-9, "{v}");
    }
}

#[test]
fn berezin_of_atom_at_origin_is_its_weight() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "atom.json", r#"{"n": 2, "atoms": [{"x": [0, 0], "w": 0.7}]}"#);
    let o = hbb(&["measure", "berezin", "--measure", &m, "--phi", "1", "--alpha", "0", "--x", "0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((last_column(&stdout(&o))[0] - 0.7).abs() < 1e-15);
}

#[test]
fn carleson_statistic_of_volume_measure_is_finite() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "nu.json", NU_0);
    let v = json(&hbb(&["measure", "carleson", "--measure", &m, "--lambda", "1", "--horizon", "0.999"]));
    assert_eq!(v["unbounded"], false);
    assert!(v["value"].as_f64().unwrap().is_finite());
}

#[test]
fn schema_violation_names_the_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "bad.json", r#"{"n": 2, "atoms": [{"x": [0.1, 0.2], "w": -1}]}"#);
    let o = hbb(&["measure", "averaging", "--measure", &m, "--x", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/atoms/0/w"), "{}", stderr(&o));
    let m = write(dir.path(), "typo.json", r#"{"n": 2, "denisty": null}"#);
    let o = hbb(&["measure", "averaging", "--measure", &m, "--x", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn toeplitz_matrix_of_volume_measure_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "nu.json", NU_0);
    let v = json(&hbb(&["toeplitz", "matrix", "--measure", &m, "--s", "0.5", "-K", "6"]));
    for (i, row) in v["rows"].as_array().unwrap().iter().enumerate() {
        for (j, e) in row.as_array().unwrap().iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((e.as_f64().unwrap() - want).abs() <= 1e-6);
        }
    }
}

#[test]
fn rank_one_spectrum_has_one_nonzero_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "atom.json", r#"{"n": 2, "atoms": [{"x": [0.3, -0.1], "w": 2}]}"#);
    let v = json(&hbb(&["toeplitz", "spectrum", "--measure", &m, "--s", "0.5", "-K", "8"]));
    let e: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(e[0] > 0.0);
    assert!(e[1..].iter().all(|l| l.abs() <= 1e-10 * e[0]), "{e:?}");
}

#[test]
fn intertwine_report_has_residual() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "atom.json", r#"{"n": 2, "atoms": [{"x": [0.3, -0.1], "w": 2}]}"#);
    let v = json(&hbb(&["toeplitz", "intertwine", "--measure", &m, "--s", "0.5", "--t", "1", "-K", "4"]));
    assert!(v["residual"].as_f64().unwrap() <= 1e-8 * v["scale"].as_f64().unwrap());
}

#[test]
fn schatten_weight_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "nu.json", NU_0);
    let o = hbb(&["toeplitz", "spectrum", "--measure", &m, "--s", "-1", "--alpha", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2s - alpha > -1"), "{}", stderr(&o));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    let o = hbb(&["kernel", "eval", "--n", "3", "--alpha", "1", "--x", "0,0,0", "--y", "0.1,0.2,0.3", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["value"], 1.0);
}

#[test]
fn verify_kernels_passes() {
    let o = hbb(&["verify", "kernels"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let check = &v["checks"][0];
    for field in ["name", "property", "status", "value", "bracket"] {
        assert!(!check[field].is_null(), "missing {field}");
    }
}

#[test]
fn index_shift_fault_fails_stirling_check() {
    let o = hbb(&["verify", "kernels", "--inject-fault", "gamma-index-shift"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let stirling = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "stirling-consistency")
        .unwrap();
    assert_eq!(stirling["status"], "fail");
}

#[test]
fn unknown_suite_exits_2() {
    assert_eq!(hbb(&["verify", "lemmas"]).status.code(), Some(2));
}
