use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn alexgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alexgeo")).args(args).output().expect("spawn alexgeo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("alexgeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn distance_on_three_halves_pi_cone() {
    let o = alexgeo(&["distance", "--space", &data("cone.json"), "--p", "1,0", "--q", "1,5pi/4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.765367");
}

#[test]
fn distance_json_carries_schema() {
    let o = alexgeo(&["distance", "--space", &data("cone.json"), "--p", "1,0", "--q", "1,5pi/4", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "alexgeo/1");
    assert!((v["distance"].as_f64().unwrap() - 0.7653668647301798).abs() < 1e-12);
}

#[test]
fn trace_on_tetrahedron_passes_checker() {
    let svg = scratch("trace.svg");
    let o = alexgeo(&[
        "trace-qg", "--space", &data("tetra.json"), "--from", "F0:0.2,0.3", "--dir", "1.1", "--length", "5",
        "--check", "--out", "svg", "--output", svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["schema"], "alexgeo/1");
    assert_eq!(report["report"]["passed"], true);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("width=\"1000\""));
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let args = [
        "flow", "--space", &data("plane.json"), "--function", &data("quadratic.json"), "--p", "1,0.3", "--out", "csv",
    ];
    let a = alexgeo(&args);
    let b = alexgeo(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn syntax_error_exits_2_with_location() {
    let bad = scratch("syntax.json");
    std::fs::write(&bad, "{\n  \"type\": \"cone\",\n  \"theta\": \n}").unwrap();
    let o = alexgeo(&["distance", "--space", bad.to_str().unwrap(), "--p", "1,0", "--q", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("syntax.json:4:1"), "{err}");
}

#[test]
fn validation_error_exits_2_with_line() {
    let bad = scratch("angle.json");
    std::fs::write(&bad, "{\n  \"type\": \"cone\",\n  \"theta\": 7\n}").unwrap();
    let o = alexgeo(&["distance", "--space", bad.to_str().unwrap(), "--p", "1,0", "--q", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("angle.json:3:"));
}

#[test]
fn bad_point_exits_2() {
    let o = alexgeo(&["distance", "--space", &data("square.json"), "--p", "2,2", "--q", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_extremal_apex_exits_1() {
    let o = alexgeo(&["verify-extremal", "--space", &data("cone.json"), "--subset", "point:0,0", "--funcs", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn square_boundary_is_extremal() {
    let o = alexgeo(&["verify-extremal", "--space", &data("square.json"), "--subset", "boundary", "--funcs", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn lieberman_loop_on_square() {
    let o = alexgeo(&["check-qg", "--space", &data("square.json"), "--nodes", "0,0;1,0;1,1;0,1;0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn stored_curve_round_trip() {
    let curve = scratch("geo.json");
    let o = alexgeo(&[
        "geodesic", "--space", &data("doubled_cap.json"), "--p", "S0:0.5,0", "--q", "S1:0.5,pi",
        "--output", curve.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = alexgeo(&[
        "develop", "--space", &data("doubled_cap.json"), "--curve", curve.to_str().unwrap(), "--base", "S0:0,0",
        "--out", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("t,r,phi,turn\n"));
}

#[test]
fn main_example_is_tight() {
    let o = alexgeo(&[
        "tight-check", "--space", &data("plane.json"), "--function", &data("main_example.json"), "--center", "0,0",
        "--radius", "0.05", "--samples", "50", "--out", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["passed"].as_bool().unwrap());
}

#[test]
fn suite_quick_emits_ledger() {
    let o = alexgeo(&["suite", "--quick", "--only", "1,7,11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('C')).count(), 3);
    assert!(text.contains("C01 PASS"));
}

#[test]
fn suite_strict_reports_failures() {
    let o = alexgeo(&["suite", "--quick", "--strict", "--only", "11"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_exits_2() {
    let o = alexgeo(&["teleport"]);
    assert_eq!(o.status.code(), Some(2));
}
