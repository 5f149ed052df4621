use std::path::Path;
use std::process::{Command, Output};

use fairdiv::checks::{check_property, Property};
use fairdiv::instio::{fixture, load_instance, write_instance, Format};
use fairdiv::oracle::is_po_bf;
use fairdiv::{Allocation, Instance};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairdiv")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_fixture(dir: &Path, name: &str) -> String {
    let path = dir.join(format!("{name}.json"));
    let out = run(&["fixture", name, "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    path.to_str().unwrap().to_string()
}

fn bundles(json: &str) -> Vec<Vec<usize>> {
    let value: serde_json::Value = serde_json::from_str(json).unwrap();
    serde_json::from_value(value["bundles"].clone()).unwrap()
}

#[test]
fn solve_market_on_prop5() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "prop5_scaled_n2");
    let out = run(&["solve", "--input", &input, "--alg", "alg_eq1_po", "--exact"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let inst = fixture("prop5_scaled_n2").unwrap().instance;
    let a = Allocation::new(inst.n_goods(), bundles(&stdout(&out))).unwrap();
    assert!(check_property(&inst, &a, &Property::Eq1).unwrap().holds);
    assert!(is_po_bf(&inst, &a).unwrap().pareto_optimal);

    let trace = dir.path().join("trace.txt");
    let out = run(&["solve", "--input", &input, "--alg", "alg_eq1_po", "--approx", "1/10", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("phase1_done\n") && text.ends_with("terminated reason=eps_eq1\n"));
}

#[test]
fn solve_leximin_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("identical.csv");
    std::fs::write(&input, "agent,g1,g2,g3\na1,3,2,1\na2,3,2,1\n").unwrap();
    let alloc = dir.path().join("alloc.json");
    let out = run(&["solve", "--input", input.to_str().unwrap(), "--alg", "leximin_bf", "--out", alloc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&alloc).unwrap()).unwrap();
    assert_eq!(written["utilities"], serde_json::json!([3, 3]));
    assert_eq!(written["algorithm"], "leximin_bf");

    let out = run(&[
        "check", "--input", input.to_str().unwrap(), "--allocation", alloc.to_str().unwrap(), "--props", "EQX+EF1,PO",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "EQX: holds\nEF1: holds\nPO: holds\n");
}

#[test]
fn decision_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let example1 = write_fixture(dir.path(), "example1");
    assert_eq!(run(&["solve", "--input", &example1, "--alg", "eq_po_binary"]).status.code(), Some(2));
    let prop5 = write_fixture(dir.path(), "prop5_scaled_n2");
    let out = run(&["verify", "--input", &prop5, "--combo", "EQ1,EF1,PO"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("examined 2187 of 2187"));
    let out = run(&["verify", "--input", &prop5, "--combo", "EQ1+PO"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("witness:"));
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let example1 = write_fixture(dir.path(), "example1");
    let out = run(&["solve", "--input", &example1, "--alg", "alg_eq1_po"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive"));
    assert_eq!(run(&["solve", "--input", "/nonexistent.json", "--alg", "leximin_bf"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--input", &example1, "--combo", "EQ1", "--cap", "10"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["fixture", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn gen_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for ext in ["json", "csv"] {
        let path = dir.path().join(format!("g.{ext}"));
        let out = run(&["gen", "--kind", "dirichlet", "--n", "3", "--m", "8", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let inst: Instance = load_instance(&path).unwrap();
        assert_eq!((inst.n_agents(), inst.n_goods()), (3, 8));
        let again = run(&["gen", "--kind", "dirichlet", "--n", "3", "--m", "8", "--seed", "7", "--format", ext]);
        let format = if ext == "json" { Format::Json } else { Format::Csv };
        assert_eq!(stdout(&again), write_instance(&inst, format));
    }
}

#[test]
fn fixture_listing_and_verification() {
    let out = run(&["fixture", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l.starts_with("example1\t")));
    let out = run(&["fixture", "santa_tight", "--verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn experiment_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |tag: &str, jobs: &str| {
        let summary = dir.path().join(format!("summary-{tag}.csv"));
        let details = dir.path().join(format!("details-{tag}.csv"));
        let out = run(&[
            "experiment", "--count", "12", "--seed", "5", "--n", "2", "--m", "5", "--jobs", jobs,
            "--out", summary.to_str().unwrap(), "--details", details.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(summary).unwrap(), std::fs::read(details).unwrap())
    };
    let first = run_once("a", "1");
    assert_eq!(first, run_once("b", "4"));
    let summary = String::from_utf8(first.0).unwrap();
    assert!(summary.starts_with("algorithm,combo,satisfied,total,fraction\n"));
    assert!(summary.contains("leximin_bf,EQX+PO,12,12,1.0000"));
    assert!(summary.contains("mnw_bf,EF1+PO,12,12,1.0000"));
    assert!(summary.contains("alg_eq1_po,EQ1+PO,12,12,1.0000"));
}
