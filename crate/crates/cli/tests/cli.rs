use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn qmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmatch"))
        .args(args)
        .output()
        .expect("binary starts")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_prints_summary_and_matching() {
    let g = repo("data/petersen.txt");
    for model in ["matrix", "list"] {
        let o = qmatch(&["solve", g.to_str().unwrap(), "--model", model]);
        assert!(o.status.success());
        let out = stdout(&o);
        let mut lines = out.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with(&format!("model={model} n=10 m=15 size=5 ")), "{head}");
        assert_eq!(lines.count(), 5);
    }
}

#[test]
fn solve_json_holds_the_report_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let g = repo("data/blossom_stem.txt");
    let o = qmatch(&["solve", g.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["matching"]["edges"].as_array().unwrap().len(), 3);
    assert!(v["report"]["t"].as_u64().unwrap() >= v["report"]["i"].as_u64().unwrap());
    assert!(!v["phases"][0]["phase1_events"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let cfg = repo("configs/small.toml");
    let o = qmatch(&["sweep", "--config", cfg.to_str().unwrap(), "--csv", csv.to_str().unwrap(), "--fit"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    // 2 models x 3 families x 3 sizes x 5 seeds, plus the header.
    assert_eq!(text.lines().count(), 91);
    let rows = qmatch::experiments::read_csv(&csv).unwrap();
    assert!(rows.iter().all(|r| Some(r.match_size) == r.brute_size));
}

#[test]
fn verify_passes_on_a_short_run() {
    let o = qmatch(&["verify", "--n-max", "10", "--trials", "50"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("runs                 100"));
    assert!(out.trim_end().ends_with("PASS"));
}

#[test]
fn bad_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.txt");
    fs::write(&g, "3 2\n0 1\n").unwrap();
    let o = qmatch(&["solve", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("declares 2 edges"));
    let o = qmatch(&["solve", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(2));
}
