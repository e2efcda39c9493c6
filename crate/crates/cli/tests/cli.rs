use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cnr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnr")).args(args).output().expect("cnr runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn close(v: &Value, want: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() < 1e-8
}

#[test]
fn nilpotent_gives_half_disk_radius() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "nil.csv", "0,1\n0,0\n");
    let s = json(&cnr(&["range", "--matrix", m.to_str().unwrap(), "--c", "1,0"]));
    assert!(close(&s["radius"], 0.5));
    assert_eq!(s["is_ellipse"], true);
    assert!(close(&s["ellipse"]["semi_minor"], 0.5));
}

#[test]
fn diagonal_gives_segment() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "d.csv", "3,0\n0,1\n");
    let s = json(&cnr(&["range", "--matrix", m.to_str().unwrap(), "--c", "2,1"]));
    assert_eq!(s["interval"], serde_json::json!([5.0, 7.0]));
    assert!(close(&s["radius"], 7.0));
    assert_eq!(s["shape"]["kind"], "segment");
}

#[test]
fn identity_with_zero_sum_weights_is_origin() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "i.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let s = json(&cnr(&["range", "--matrix", m.to_str().unwrap(), "--c", "1,0,-1"]));
    assert_eq!(s["shape"]["kind"], "point");
    assert!(close(&s["radius"], 0.0));
    assert_eq!(s["is_symmetric"], true);
}

#[test]
fn json_and_csv_matrices_agree() {
    let dir = TempDir::new().unwrap();
    let csv = write(dir.path(), "m.csv", "1+2j,0.5\n-1j,3\n");
    let js = write(
        dir.path(),
        "m.json",
        r#"{"rows":2,"cols":2,"data":[[1,2],[0.5,0],[0,-1],[3,0]]}"#,
    );
    let a = cnr(&["range", "--matrix", csv.to_str().unwrap(), "--c", "2,-1", "--ambient", "infinite"]);
    let b = cnr(&["range", "--matrix", js.to_str().unwrap(), "--c", "2,-1", "--ambient", "infinite"]);
    assert_eq!(json(&a), json(&b));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "1,2j\n0.5,-1\n");
    let args = ["range", "--matrix", m.to_str().unwrap(), "--c", "1,0", "--samples", "300", "--format", "csv"];
    let a = cnr(&args);
    let b = cnr(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("re,im"));
    assert_eq!(text.lines().count(), 721);
}

#[test]
fn svg_is_well_formed() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "0,1\n0,0\n");
    let out = dir.path().join("r.svg");
    let s = json(&cnr(&[
        "range", "--matrix", m.to_str().unwrap(), "--c", "1,0", "--samples", "200", "--format", "svg", "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(s["oracle"]["containment"], true);
    let text = fs::read_to_string(&out).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("valid XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    let polygon = root.descendants().find(|n| n.has_tag_name("polygon")).expect("boundary drawn");
    let side: f64 = root.attribute("width").unwrap().parse().unwrap();
    for pair in polygon.attribute("points").unwrap().split_whitespace() {
        let (x, y) = pair.split_once(',').unwrap();
        let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
        assert!(x > 0.0 && x < side && y > 0.0 && y < side);
    }
    assert_eq!(root.descendants().filter(|n| n.attribute("class") == Some("focus")).count(), 2);
}

#[test]
fn classify_examples() {
    let text = |c: &str| String::from_utf8(cnr(&["classify", "--c", c]).stdout).unwrap();
    assert_eq!(text("2,1"), "regime: CaseI\nsum: 3\nnorm: yes\n");
    assert_eq!(text("1,1,-1"), "regime: CaseII\np: 2\nsum: 1\nnorm: yes\n");
    assert_eq!(text("1,0,-1"), "regime: CaseIII\nsum: 0\nnorm: no\n");
    let j = json(&cnr(&["classify", "--c", "1,1,-1", "--format", "json"]));
    assert_eq!(j["p"], 2);
}

#[test]
fn verify_expected_outcomes() {
    let dir = TempDir::new().unwrap();
    let map = |name: &str, body: &str| write(dir.path(), name, body).to_str().unwrap().to_string();
    let case_one = map("one.json", r#"{"variant":"case_one","expect":"pass"}"#);
    let transpose = map("t.json", r#"{"variant":"transpose","expect":"fail","n":3}"#);
    let i_variant = map(
        "i.json",
        r#"{"variant":"case_three","use_i":true,"expect":"fail","n":3,"fixture":"projection"}"#,
    );
    let report = dir.path().join("r.jsonl");
    let out = cnr(&["verify", "--map", &case_one, "--c", "2,1", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let lines = fs::read_to_string(&report).unwrap();
    assert_eq!(lines.lines().count(), 50);
    for line in lines.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true);
    }
    assert_eq!(cnr(&["verify", "--map", &transpose, "--c", "2,1"]).status.code(), Some(0));
    assert_eq!(cnr(&["verify", "--map", &i_variant, "--c", "1,1,-1"]).status.code(), Some(0));
}

#[test]
fn verify_reports_mismatch_and_config_errors() {
    let dir = TempDir::new().unwrap();
    let wrong = write(dir.path(), "w.json", r#"{"variant":"case_one","expect":"fail"}"#);
    assert_eq!(cnr(&["verify", "--map", wrong.to_str().unwrap(), "--c", "2,1"]).status.code(), Some(1));
    let regime = write(dir.path(), "r.json", r#"{"variant":"case_three","expect":"pass","n":3}"#);
    let out = cnr(&["verify", "--map", regime.to_str().unwrap(), "--c", "1,1,-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("regime mismatch"));
    let bad = write(dir.path(), "b.json", r#"{"variant":"case_one","expect":"maybe"}"#);
    assert_eq!(cnr(&["verify", "--map", bad.to_str().unwrap(), "--c", "2,1"]).status.code(), Some(2));
}

#[test]
fn oracle_reports_containment_and_coverage() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "0.3+1j,1,-0.5j\n0,-1+0.2j,0.7\n0.4,0,0.5-0.5j\n");
    let r = json(&cnr(&["oracle", "--matrix", m.to_str().unwrap(), "--c", "1,0", "--samples", "100000"]));
    assert_eq!(r["containment"], true);
    assert!(r["coverage"].as_f64().unwrap() >= 0.90, "{r}");
    let out = cnr(&["oracle", "--matrix", m.to_str().unwrap(), "--c", "1,0", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ellipse_fit_on_rank_one() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "1,2\n0.5,1\n");
    let r = json(&cnr(&["ellipse-fit", "--matrix", m.to_str().unwrap(), "--c", "1,-1", "--ambient", "infinite"]));
    assert_eq!(r["is_ellipse"], true);
    assert!(r["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.csv", "1,2\n3,x+\n");
    let out = cnr(&["range", "--matrix", bad.to_str().unwrap(), "--c", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 3"));

    let m = write(dir.path(), "m.csv", "1,0\n0,1\n");
    let out = cnr(&["range", "--matrix", m.to_str().unwrap(), "--c", "3,2,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
    let out = cnr(&["range", "--matrix", m.to_str().unwrap(), "--c", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(cnr(&["range", "--c", "1,0"]).status.code(), Some(2));
}

#[test]
fn thread_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cnr"))
        .args(["classify", "--c", "2,1"])
        .env("CNR_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}
