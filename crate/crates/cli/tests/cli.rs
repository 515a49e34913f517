use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn surfqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfqp")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr carries a JSON error")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn pipeline_on_the_order_two_four_sphere() {
    let out = surfqp(&["pipeline", "--differential", p(&fixture("order24.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["reduced"]["vertices"], 2);
    assert_eq!(v["reduced"]["arrows"].as_array().unwrap().len(), 0);
    assert_eq!(v["reduced"]["potential"].as_array().unwrap().len(), 0);
    assert_eq!(v["comparison"]["pass"], true);
}

#[test]
fn self_folded_wkb_triangulation_is_refused() {
    let out = surfqp(&["pipeline", "--differential", p(&fixture("order24_self_folded.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert!(err["error"].as_str().unwrap().contains("self-folded"));
    assert_eq!(err["details"]["non_degenerate"], false);
}

#[test]
fn pole_free_data_gets_the_euler_diagnostic() {
    let out = surfqp(&["pipeline", "--differential", p(&fixture("genus2_no_poles.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["details"]["faces"], 0);
    assert_eq!(err["details"]["euler_characteristic"], -2);
    assert!(err["error"].as_str().unwrap().contains("no trivalent cellulation"));
}

#[test]
fn build_then_verify_torus() {
    let dir = tempfile::tempdir().unwrap();
    let qp = dir.path().join("qp.json");
    let out = surfqp(&["qp", "build", "--surface", p(&fixture("torus_d2.json")), "--out", p(&qp)]);
    assert_eq!(out.status.code(), Some(0));
    let out = surfqp(&["ainfty", "verify", "--qp", p(&qp), "--nmax", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json_of(&out)["pass"], true);
    let out = surfqp(&["ainfty", "euler", "--qp", p(&qp)]);
    assert_eq!(json_of(&out)["kernel_rank"], 2);
    let out = surfqp(&["qp", "jacobian", "--qp", p(&qp), "--order", "3"]);
    assert_eq!(json_of(&out)["totals"].as_array().unwrap().len(), 3);
    let dims = surfqp(&["ginzburg", "dims", "--qp", p(&qp), "--order", "3"]);
    assert_eq!(dims.stdout, out.stdout);
    let out = surfqp(&["ainfty", "constants", "--qp", p(&qp)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!json_of(&out).as_object().unwrap().is_empty());
}

#[test]
fn flip_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.json");
    let torus = fixture("torus_d2.json");
    assert_eq!(
        surfqp(&["surface", "flip", "--surface", p(&torus), "--edge", "3", "--out", p(&once)]).status.code(),
        Some(0)
    );
    let twice = surfqp(&["surface", "flip", "--surface", p(&once), "--edge", "3", "--canonical"]);
    let start = surfqp(&["surface", "flip", "--surface", p(&torus), "--canonical"]);
    assert_eq!(twice.status.code(), Some(0));
    assert_eq!(twice.stdout, start.stdout);
}

#[test]
fn random_is_deterministic_for_a_seed() {
    let args = ["surface", "random", "--genus", "2", "--punctures", "2", "--flips", "30", "--seed", "7"];
    let a = surfqp(&args);
    let b = surfqp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = surfqp(&["surface", "random", "--genus", "2", "--punctures", "2", "--flips", "30", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn validate_reports_and_sorts_keys() {
    let out = surfqp(&["surface", "validate", "--surface", p(&fixture("genus2_d2.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let top: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    assert_eq!(json_of(&out)["rank_formula"], 12);
}

#[test]
fn broken_triangulation_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(
        &f,
        r#"{"genus":0,"punctures":0,"boundary":[3],"edges":[{"kind":"Boundary","ends":[0,1]},{"kind":"Boundary","ends":[1,2]},{"kind":"Boundary","ends":[2,0]}],"triangles":[[[0,1],[0,1],[2,1]]]}"#,
    )
    .unwrap();
    let out = surfqp(&["surface", "validate", "--surface", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn wall_is_numerical_and_lists_connections() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("wall.json");
    std::fs::write(&f, r#"{"P": [-1, 0, 1], "Q": [0, 0, 1]}"#).unwrap();
    let out = surfqp(&["wkb", "triangulate", "--differential", p(&f), "--theta", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert!(!err["details"]["saddle_connections"].as_array().unwrap().is_empty());
    let out = surfqp(&["wkb", "triangulate", "--differential", p(&f), "--theta", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["non_degenerate"], true);
}

#[test]
fn classify_trace_and_plot() {
    let d = fixture("order24.json");
    let out = surfqp(&["wkb", "classify", "--differential", p(&d)]);
    assert_eq!(json_of(&out)["pole_orders"], serde_json::json!([2, 4]));
    let out = surfqp(&["wkb", "trace", "--differential", p(&d), "--start", "1.5,-0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["trajectory"]["terminal"]["kind"], "PoleCapture");
    let out = surfqp(&["wkb", "plot", "--differential", p(&d)]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("<svg"));
}

#[test]
fn floer_assemble_and_compare() {
    let torus = fixture("torus_d2.json");
    let out = surfqp(&["floer", "compare", "--cellulation", p(&torus)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["pass"], true);
    let dir = tempfile::tempdir().unwrap();
    let areas = dir.path().join("areas.json");
    std::fs::write(&areas, r#"["1/2", 3]"#).unwrap();
    let out = surfqp(&["floer", "assemble", "--cellulation", p(&torus), "--areas", p(&areas), "--background", "none"]);
    let v = json_of(&out);
    assert_eq!(v["qp"]["potential"].as_array().unwrap().len(), 4);
    std::fs::write(&areas, r#"["-1", 3]"#).unwrap();
    let out = surfqp(&["floer", "assemble", "--cellulation", p(&torus), "--areas", p(&areas)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(surfqp(&["nonsense"]).status.code(), Some(64));
    assert_eq!(surfqp(&["qp", "build", "--surface", "/nonexistent.json"]).status.code(), Some(64));
    assert_eq!(
        surfqp(&["pipeline", "--differential", p(&fixture("order24.json")), "--order", "2"]).status.code(),
        Some(64)
    );
    assert_eq!(surfqp(&["--help"]).status.code(), Some(0));
}
