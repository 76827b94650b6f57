use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nilhom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilhom")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PLANE: &str = r#"{"name": "r2", "dimension": 2, "brackets": []"#;

fn plane_with(field: &str) -> String {
    format!("{PLANE}, {field}}}")
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn classify_heisenberg_standard() {
    let out = nilhom(&["classify", "heisenberg", "--derivation", "standard"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["answer"], "yes");
    assert_eq!(v["Q"], 4.0);
}

#[test]
fn classify_negative_examples() {
    for args in [&["classify", "r2-shear-weight1"][..], &["classify", "rototranslation", "--derivation", "diag110"]] {
        let out = nilhom(args);
        assert_eq!(code(&out), 1, "{args:?}");
        let v = json(&out);
        assert_eq!(v["answer"], "no");
        assert!(!v["reasons"].as_array().unwrap().is_empty());
    }
}

#[test]
fn classify_automorphism_by_name() {
    let out = nilhom(&["classify", "engel", "--automorphism", "standard@0.5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["Q"], 7.0);
}

#[test]
fn malformed_json_is_a_usage_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"name\": \"x\",\n  \"dimension\": 2,\n  \"brackets\": [}\n");
    let out = nilhom(&["classify", &p]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&nilhom(&["classify", "heisenberg", "--bogus"])), 2);
    assert_eq!(code(&nilhom(&["classify", "no-such-entry"])), 2);
}

#[test]
fn catalog_regression() {
    let dir = tempfile::tempdir().unwrap();
    let out = nilhom(&["catalog", "--export", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rows = json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 8);
    assert!(rows.as_array().unwrap().iter().all(|r| r["matches"] == true));
    let exported = dir.path().join("engel.json");
    let out = nilhom(&["classify", exported.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["Q"], 7.0);
}

#[test]
fn build_then_eval_heisenberg() {
    let dir = tempfile::tempdir().unwrap();
    let ball = dir.path().join("ball.json");
    assert_eq!(code(&nilhom(&["build", "heisenberg", "--out", ball.to_str().unwrap()])), 0);
    let pts =
        write(dir.path(), "pts.csv", "0,0,0,1,0,0\n0.3,-0.2,0.7,0.3,-0.2,0.7\n0,0,0,0.4,0.3,0.2\n0,0,0,0.8,0.6,0.8\n");
    let run = || {
        let out = nilhom(&["eval", "heisenberg", "--points", &pts, "--ball", ball.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    let rows = csv_rows(&first);
    assert!(rows[0][1] > 0.0);
    assert_eq!(rows[1][1], 0.0);
    // δ₂(0.4, 0.3, 0.2) = (0.8, 0.6, 0.8)
    assert!((rows[3][1] / rows[2][1] - 2.0).abs() < 1e-6, "{rows:?}");
    let fresh = nilhom(&["eval", "heisenberg", "--points", &pts]);
    let rows_fresh = csv_rows(&String::from_utf8(fresh.stdout).unwrap());
    assert!((rows_fresh[0][1] - rows[0][1]).abs() < 1e-10);
}

#[test]
fn build_refuses_without_distance() {
    let out = nilhom(&["build", "r2-diag-0.5-2"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["answer"], "no");
}

#[test]
fn verify_box_ball_certificate() {
    let out = nilhom(&["verify", "r2-spiral", "--shape", "box", "--samples", "2000", "--convexity-samples", "20000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["certificate"]["passed"], true);
    assert!(v["certificate"]["max_f"].as_f64().unwrap() <= 1.0 + 1e-12);
    assert_eq!(v["convexity"]["violations"], 0);
}

#[test]
fn verify_corrupted_cap_fails() {
    let out =
        nilhom(&["verify", "heisenberg", "--corrupt-cap", "1e-6", "--samples", "1000", "--convexity-samples", "1000"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert!(v["axioms"]["triangle"].as_f64().unwrap() > 1e-3);
}

#[test]
fn verify_euclidean_identity_generator() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "r2.json", &plane_with(r#""derivation": [[1, 0], [0, 1]]"#));
    let out = nilhom(&[
        "verify",
        &p,
        "--shape",
        "euclidean",
        "--samples",
        "2000",
        "--convexity-samples",
        "2000",
        "--tolerance",
        "1e-10",
        "--homogeneity-tolerance",
        "1e-10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json(&out)["certificate"].is_null());
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "r2-shear-1.5", "--samples", "500", "--convexity-samples", "500", "--seed", "9"];
    let a = nilhom(&args);
    let b = nilhom(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

fn decompose_file(dir: &Path, name: &str, matrix: &str, lambda: f64) -> Value {
    let p = write(dir, name, &plane_with(&format!(r#""automorphism": {matrix}, "lambda": {lambda}"#)));
    let out = nilhom(&["decompose", &p]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    json(&out)
}

fn close(v: &Value, expected: [[f64; 2]; 2], tol: f64) -> bool {
    (0..2).all(|i| (0..2).all(|j| (v[i][j].as_f64().unwrap() - expected[i][j]).abs() <= tol))
}

#[test]
fn decompose_examples() {
    let dir = tempfile::tempdir().unwrap();
    let v = decompose_file(dir.path(), "diag.json", "[[2, 0], [0, 4]]", 2.0);
    assert!(close(&v["K"], [[1.0, 0.0], [0.0, 1.0]], 1e-9));
    assert!(close(&v["A"], [[1.0, 0.0], [0.0, 2.0]], 1e-9));

    let c = std::f64::consts::SQRT_2;
    let v = decompose_file(dir.path(), "conf.json", &format!("[[{c}, {}], [{c}, {c}]]", -c), 2.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(close(&v["K"], [[h, -h], [h, h]], 1e-9));
    assert!(close(&v["A"], [[1.0, 0.0], [0.0, 1.0]], 1e-9));

    let s = 2.0 * 2f64.ln();
    let v = decompose_file(dir.path(), "shear.json", &format!("[[2, {s}], [0, 2]]"), 2.0);
    assert!(close(&v["K"], [[1.0, 0.0], [0.0, 1.0]], 1e-9));
    assert!(close(&v["A"], [[1.0, 1.0], [0.0, 1.0]], 1e-9));
    assert!(v["residuals"]["product"].as_f64().unwrap() < 1e-9);
}

#[test]
fn decompose_needs_lambda_for_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.json", &plane_with(r#""automorphism": [[2, 0], [0, 2]]"#));
    assert_eq!(code(&nilhom(&["decompose", &p])), 2);
    assert_eq!(code(&nilhom(&["decompose", &p, "--lambda", "2"])), 0);
    assert_eq!(code(&nilhom(&["decompose", &p, "--lambda", "1"])), 2);
}

#[test]
fn render_euclidean_circle() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "r2.json", &plane_with(r#""derivation": [[2, 0], [0, 2]]"#));
    let out = nilhom(&["render", &p, "--shape", "euclidean", "--resolution", "90"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("angle,x,y,gauge_residual\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 90);
    for r in rows {
        assert!((r[1].hypot(r[2]) - 1.0).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn render_box_ball_is_the_square() {
    let out = nilhom(&["render", "r2-spiral", "--shape", "box", "--resolution", "360"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    for r in &rows {
        assert!((r[1].abs().max(r[2].abs()) - 1.0).abs() < 1e-9, "{r:?}");
    }
    for k in [45, 135, 225, 315] {
        let r = &rows[k];
        assert!((r[1].abs() - 1.0).abs() < 1e-9 && (r[2].abs() - 1.0).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn render_shear_sphere_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("s.svg");
    let csv = dir.path().join("s.csv");
    assert_eq!(code(&nilhom(&["render", "r2-shear-1.5", "--resolution", "120", "--out", svg.to_str().unwrap()])), 0);
    assert_eq!(code(&nilhom(&["render", "r2-shear-1.5", "--resolution", "120", "--out", csv.to_str().unwrap()])), 0);
    let s = fs::read_to_string(&svg).unwrap();
    assert_eq!(s.matches("<polyline").count(), 1);
    assert!(s.contains("viewBox"));
    let rows = csv_rows(&fs::read_to_string(&csv).unwrap());
    for i in 0..60 {
        let (a, b) = (&rows[i], &rows[i + 60]);
        assert!((a[1] + b[1]).abs() < 1e-9 && (a[2] + b[2]).abs() < 1e-9, "{a:?} {b:?}");
        assert!(a[3] < 1e-9);
    }
}

#[test]
fn render_heisenberg_slice_and_bad_dimension() {
    let out = nilhom(&["render", "heisenberg", "--slice", "1,3", "--resolution", "24"]);
    assert_eq!(code(&out), 0);
    assert_eq!(csv_rows(&String::from_utf8(out.stdout).unwrap()).len(), 24);
    assert_eq!(code(&nilhom(&["render", "heisenberg", "--slice", "1,4"])), 2);
    assert_eq!(code(&nilhom(&["render", "engel"])), 2);
}

#[test]
fn outputs_are_byte_identical() {
    for args in [&["catalog"][..], &["render", "r2-spiral", "--resolution", "32"], &["build", "engel"]] {
        assert_eq!(nilhom(args).stdout, nilhom(args).stdout, "{args:?}");
    }
}
