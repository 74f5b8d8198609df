use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use graph_uncertainty::graph::random_graph;
use graph_uncertainty::spectral::{eig_sym, DEFAULT_EIG_TOL};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graph-uncertainty"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn gen_ring_and_random_are_deterministic() {
    let out = run(&["gen", "ring:4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "4\n0 1 1.0\n1 2 1.0\n2 3 1.0\n3 0 1.0\n");

    let a = run(&["gen", "random:8,0.5,42"]);
    let b = run(&["gen", "random:8,0.5,42"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let bad = run(&["gen", "ring:4:chord=1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn gen_writes_the_chord_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex3.edges");
    let out = run(&["gen", "ring:5000:chord=2499,4999,1.0", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let g = graph_uncertainty::Graph::from_edge_list(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(g.n(), 5000);
    assert_eq!(g.edges().len(), 5001);
    assert!(g.has_edge(4999, 2499));
}

#[test]
fn bound_on_chord_ring_improves_classical() {
    let out = run(&["bound", "--gen", "ring:500:chord=249,499,1.0", "--variant", "squared"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let classical = report["classical_q"].as_f64().unwrap();
    let improved = report["improved_q"].as_f64().unwrap();
    assert!(improved > classical, "{improved} <= {classical}");
    assert_eq!(report["variant"], "squared");
    assert_eq!(report["s_prefix"].as_array().unwrap().len(), 16);
    let keys: Vec<&String> = report.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["n", "variant", "classical_q", "improved_q", "sum_bound", "iterations", "s_prefix"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("classical_q=2.8284271247 (2.8284)"), "{stderr}");
}

#[test]
fn dft_mode_gives_n_for_both_variants() {
    let out = run(&["bound", "--dft", "16"]);
    assert!(out.status.success());
    let reports = stdout_json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert!((r["classical_q"].as_f64().unwrap() - 16.0).abs() < 1e-9);
        assert!((r["improved_q"].as_f64().unwrap() - 16.0).abs() < 1e-9);
        assert_eq!(r["iterations"].as_array().unwrap().len(), 1);
    }
}

#[test]
fn missing_graph_file_is_a_usage_error() {
    let out = run(&["bound", "--graph", "/definitely/not/here.edges"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
    assert!(out.stdout.is_empty());
}

#[test]
fn size_cap_requires_allow_slow() {
    let out = run(&["bound", "--gen", "ring:2001"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-slow"));
}

#[test]
fn invalid_tolerance_is_a_usage_error() {
    let out = run(&["bound", "--gen", "ring:8", "--eig-tol", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["oracle", "--dft", "4", "--exhaustive", "--rank-tol", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rihaczek_eigenvector_signal_has_unit_energy() {
    let dir = tempfile::tempdir().unwrap();
    let g = random_graph(8, 0.5, 42).unwrap();
    let b = eig_sym(&g.laplacian(), DEFAULT_EIG_TOL).unwrap();
    let signal: String = (0..8).map(|v| format!("{:?}\n", b.entry(v, 3).re)).collect();
    let graph = write(dir.path(), "g8.edges", &g.to_edge_list());
    let sig = write(dir.path(), "x.txt", &signal);
    let report = dir.path().join("report.json");
    let out = run(&["rihaczek", "--graph", &graph, "--signal", &sig, "--report", report.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("energy 1.0000000000"));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.lines().all(|l| l.split(',').count() == 8));
    let rep: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert!((rep["energy"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((rep["spectral_marginal"][3].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn rihaczek_random_signal_reports_small_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let sig = write(dir.path(), "x.txt", "0.3 -1.0 2.0 0.25\n1.5 0.0 -0.7 0.9 # eight values\n");
    let report = dir.path().join("r.json");
    let csv = dir.path().join("e.csv");
    let out = run(&[
        "rihaczek", "--gen", "random:8,0.5,42", "--signal", &sig,
        "--out", csv.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rep: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert!(rep["vertex_marginal_residual"].as_f64().unwrap() < 1e-10);
    assert!(rep["spectral_marginal_residual"].as_f64().unwrap() < 1e-10);
    assert!(rep["l1_norm"].as_f64().unwrap() >= 1.0 - 1e-10);
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 8);
}

#[test]
fn rihaczek_rejects_zero_and_mismatched_signals() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "z.txt", "0 0 0 0\n");
    let out = run(&["rihaczek", "--gen", "ring:4", "--signal", &zero]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero-energy signal"));
    let short = write(dir.path(), "s.txt", "1 2 3\n");
    let out = run(&["rihaczek", "--gen", "ring:4", "--signal", &short]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_exhaustive_on_dft4() {
    let out = run(&["oracle", "--dft", "4", "--exhaustive"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_eq!(r["min_feasible_product"], 4);
    assert_eq!(r["violations"], 0);
    let keys: Vec<&String> = r.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        ["n", "min_feasible_product", "bound_squared", "bound_linear", "violations", "marginal_count", "seed"]
    );
}

#[test]
fn oracle_exhaustive_on_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g8.edges", &random_graph(8, 0.5, 42).unwrap().to_edge_list());
    let out = run(&["oracle", "--graph", &g, "--exhaustive"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    let min = r["min_feasible_product"].as_u64().unwrap() as f64;
    assert!(min >= (r["bound_squared"].as_f64().unwrap() - 1e-9).ceil());
    assert!(min >= (r["bound_linear"].as_f64().unwrap() - 1e-9).ceil());

    let big = run(&["oracle", "--gen", "ring:9", "--exhaustive"]);
    assert_eq!(big.status.code(), Some(1));
}

#[test]
fn oracle_randomized_on_ring64() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(&["gen", "ring:64"]);
    let ring = write(dir.path(), "ring64.edges", &String::from_utf8_lossy(&gen.stdout));
    let out = run(&["oracle", "--graph", &ring, "--trials", "1000", "--seed", "7"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_eq!(r["violations"], 0);
    assert_eq!(r["seed"], 7);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["bound", "--gen", "random:20,0.3,5"][..],
        &["oracle", "--gen", "random:7,0.5,9", "--exhaustive"][..],
        &["oracle", "--dft", "12", "--trials", "50", "--seed", "3"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stderr, b.stderr);
    }
}

#[test]
fn oracle_violation_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let wheel = write(dir.path(), "wheel.edges", "5\n0 1 1\n0 2 1\n0 3 1\n0 4 1\n1 2 1\n2 3 1\n3 4 1\n4 1 1\n");
    let out = run(&["oracle", "--graph", &wheel, "--exhaustive"]);
    assert_eq!(out.status.code(), Some(2));
    let r = stdout_json(&out);
    assert_eq!(r["min_feasible_product"], 2);
    assert_eq!(r["violations"], 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 bound violations"));
}
