mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixtures::{line, two_cycle};
use toro_core::depgraph::build_dependency_graph;
use toro_core::ilp::parse_lp;
use toro_core::instance::{validate, Instance};
use toro_core::mindist::variable_count;

fn toro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toro")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, inst: &Instance) -> String {
    let p = dir.join(name);
    std::fs::write(&p, inst.to_json()).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_is_deterministic_and_valid() {
    let a = toro(&["generate", "--mode", "no-overlap", "--n", "10", "--seed", "1"]);
    let b = toro(&["generate", "--mode", "no-overlap", "--n", "10", "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let inst = Instance::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(inst.len(), 10);
    assert!(validate(&inst).is_empty());

    let empty = toro(&["generate", "--n", "0"]);
    assert_eq!(Instance::from_json(std::str::from_utf8(&empty.stdout).unwrap()).unwrap().len(), 0);
}

#[test]
fn generate_overlap_respects_degree_caps() {
    let out = toro(&["generate", "--mode", "overlap", "--avg-degree", "2", "--max-degree", "4", "--n", "20", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let inst = Instance::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let g = build_dependency_graph(&inst);
    assert!((0..20).all(|v| g.out_degree(v) <= 4 && g.in_degree(v) <= 4));
    assert!(validate(&inst).is_empty());
}

#[test]
fn solve_methods() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = write(dir.path(), "cycle.json", &two_cycle());
    let r = stdout_json(&toro(&["solve", &cyc]));
    assert_eq!(r["grasp_count"], 3);
    assert_eq!(r["plan"]["actions"][0]["to"], serde_json::json!({"buffer": 0}));

    let flat = write(dir.path(), "line.json", &line(4));
    assert_eq!(stdout_json(&toro(&["solve", &flat, "--method", "greedy"]))["grasp_count"], 4);

    let a = stdout_json(&toro(&["solve", &flat, "--method", "random", "--seed", "5"]));
    let b = stdout_json(&toro(&["solve", &flat, "--method", "random", "--seed", "5"]));
    assert_eq!(a["plan"], b["plan"]);

    let mismatch = toro(&["solve", &cyc, "--method", "tsp-exact"]);
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("overlap"));
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = line(2);
    bad.objects[1].start = bad.objects[0].start;
    let p = write(dir.path(), "bad.json", &bad);
    let out = toro(&["solve", &p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("start-overlap"));
    assert_eq!(toro(&["validate", &p]).status.code(), Some(2));
}

#[test]
fn validate_replays_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = write(dir.path(), "cycle.json", &two_cycle());
    let report = dir.path().join("r.json");
    assert!(toro(&["solve", &cyc, "-o", report.to_str().unwrap()]).status.success());
    let out = toro(&["validate", &cyc, "--plan", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn export_lp_models() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = write(dir.path(), "cycle.json", &two_cycle());
    let out = toro(&["export-lp", &cyc, "--model", "mindist", "--buffered", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(parse_lp(&text).unwrap().num_vars, variable_count(2, 1));
    assert!(text.contains(&format!("variables {}", variable_count(2, 1))));

    let out = toro(&["export-lp", &cyc, "--model", "fvs-enumerate"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let m = parse_lp(&text).unwrap();
    assert_eq!(parse_lp(&toro_core::ilp::export_standard_lp(&m)).unwrap(), m);
    assert_eq!(m.num_vars, 2);

    let flat = write(dir.path(), "line.json", &line(3));
    let out = toro(&["export-lp", &flat, "--model", "fvs-constraint"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("trivial"));
    assert_eq!(toro(&["export-lp", &flat, "--model", "nope"]).status.code(), Some(2));
}

#[test]
fn graph_and_tsp_exports() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = write(dir.path(), "cycle.json", &two_cycle());
    let edges = String::from_utf8(toro(&["graph", &cyc]).stdout).unwrap();
    assert_eq!(edges, "# vertices 2\n0 1\n1 0\n");
    assert!(String::from_utf8(toro(&["graph", &cyc, "--format", "dot"]).stdout).unwrap().starts_with("digraph"));

    let flat = write(dir.path(), "line.json", &line(2));
    let tsp = String::from_utf8(toro(&["export-tsp", &flat]).stdout).unwrap();
    assert!(tsp.contains("DIMENSION: 9"));
}

#[test]
fn bench_writes_csv() {
    let out = toro(&["bench", "--kind", "fvs", "--n", "5..6", "--instances", "3", "--methods", "ilp-constraint,msch,mdh", "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], toro_core::bench::CSV_HEADER);
    assert_eq!(lines.len(), 7);
    for row in &lines[1..] {
        let ratio: f64 = row.split(',').nth(10).unwrap().parse().unwrap();
        assert!(ratio >= 1.0 - 1e-9);
    }
    assert_eq!(toro(&["bench", "--kind", "fvs", "--n", "5", "--methods", "greedy"]).status.code(), Some(2));
}
