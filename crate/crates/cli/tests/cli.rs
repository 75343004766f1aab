use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mapf-tct")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_solve_validate_trace() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    let inst = dir.path().join("map.inst.json");
    let sol = dir.path().join("sol.json");
    let tree = dir.path().join("tree.json");
    let out = ok(&["gen", "--family", "rings", "--difficulty", "medium", "--seed", "3", "--size", "57", "--out", s(&map), "--n", "4"]);
    assert!(out.contains("sha256"));
    assert!(inst.exists());
    ok(&["solve", "--instance", s(&inst), "--out", s(&sol), "--dump-tree", s(&tree), "--svg"]);
    let nodes: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&tree).unwrap()).unwrap();
    assert!(!nodes.as_array().unwrap().is_empty());
    assert!(dir.path().join("sol.svg").exists());
    assert!(dir.path().join("sol.trace.json").exists());
    let report: serde_json::Value = serde_json::from_str(&ok(&["validate", "--instance", s(&inst), "--solution", s(&sol)])).unwrap();
    assert_eq!(report["ok_collision"], true);
    let stem = dir.path().join("again");
    ok(&["trace", "--instance", s(&inst), "--solution", s(&sol), "--out", s(&stem)]);
    assert!(std::fs::read_to_string(dir.path().join("again.svg")).unwrap().contains("agent-path"));
}

#[test]
fn validate_rejects_a_tampered_solution() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("m.json");
    let inst = dir.path().join("m.inst.json");
    let sol = dir.path().join("s.json");
    ok(&["gen", "--seed", "1", "--size", "30", "--out", s(&map), "--n", "2"]);
    ok(&["solve", "--instance", s(&inst), "--out", s(&sol), "--planner", "pibt-comm"]);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    // teleport agent 0's last waypoint one second early
    let wps = v["paths"][0]["waypoints"].as_array_mut().unwrap();
    let last = wps.last_mut().unwrap();
    last[2] = serde_json::json!(0.0);
    std::fs::write(&sol, v.to_string()).unwrap();
    let out = run(&["validate", "--instance", s(&inst), "--solution", s(&sol)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "bench", "--planner", "maapgdl,plf", "--family", "random-forest,waves", "--n", "2", "--seeds", "0..2", "--size", "30", "--workers", "1", "--out",
        s(dir.path()),
    ]);
    assert!(out.contains("planner"));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert!(dir.path().join("runs.json").exists());
}

#[test]
fn bad_arguments_fail() {
    assert!(!run(&["bench", "--seeds", "5..2", "--out", "x"]).status.success());
    assert!(!run(&["solve", "--instance", "/nonexistent.json", "--out", "/tmp/x.json"]).status.success());
    assert!(!run(&["gen", "--family", "swamp", "--out", "/tmp/x.json"]).status.success());
}
