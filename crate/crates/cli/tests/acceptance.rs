//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use qmatch::experiments::{self, ExperimentConfig, Family, Metric, VerifySummary};
use qmatch::QueryModel;

const INSTANCES: u64 = 2000;
const SCALE_SIZES: [usize; 4] = [64, 128, 256, 512];
const SCALE_SEEDS: u64 = 20;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("criterion {id}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn main() -> ExitCode {
    let mut rep = Report { failed: 0 };

    let started = Instant::now();
    let small = experiments::verify(16, INSTANCES).expect("verification batch runs");
    let small_time = started.elapsed();

    let started = Instant::now();
    let cfg = ExperimentConfig {
        models: vec![QueryModel::Matrix, QueryModel::List],
        families: vec![Family::Gnp { p: 0.5 }],
        sizes: SCALE_SIZES.to_vec(),
        seeds: SCALE_SEEDS,
        seed_start: 0,
        brute_force: false,
        complete_level: true,
        output: None,
    };
    let rows = experiments::run_experiment(&cfg).expect("scaling sweep runs");
    let scale_time = started.elapsed();

    criterion_1(&mut rep, &small, small_time);
    criterion_2(&mut rep, &small, &rows);
    criterion_3(&mut rep, &small, &rows);
    criterion_4(&mut rep, &small, &rows);
    criterion_5(&mut rep, &small, &rows);
    criterion_6(&mut rep, &rows, scale_time);
    criterion_7(&mut rep, &small);
    criterion_8(&mut rep);

    if rep.failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria fail", rep.failed);
        ExitCode::FAILURE
    }
}

fn criterion_1(rep: &mut Report, s: &VerifySummary, took: Duration) {
    let ok = s.runs as u64 == 2 * INSTANCES && s.size_mismatches == 0 && took < Duration::from_secs(120);
    rep.line(
        1,
        ok,
        format!(
            "{} of {} runs ({INSTANCES} instances x 2 models, n in [2,16]) match the exhaustive optimum; {:.1}s",
            s.runs - s.size_mismatches,
            s.runs,
            took.as_secs_f64()
        ),
    );
}

fn criterion_2(rep: &mut Report, s: &VerifySummary, rows: &[experiments::Row]) {
    let big = rows
        .iter()
        .filter(|r| r.max_call_i_phase1 > experiments::phase1_cap(r.model, r.n))
        .count();
    rep.line(
        2,
        s.phase1_violations == 0 && big == 0,
        format!(
            "phase-1 calls over 2n+1 (matrix) / 3n+1 (list): {} small, {big} large; worst I/n {:.3}",
            s.phase1_violations, s.worst_phase1_ratio
        ),
    );
}

fn criterion_3(rep: &mut Report, s: &VerifySummary, rows: &[experiments::Row]) {
    let big = rows
        .iter()
        .filter(|r| r.max_call_i_phase2 > experiments::phase2_cap(r.model, r.n))
        .count();
    rep.line(
        3,
        s.phase2_violations == 0 && big == 0,
        format!(
            "phase-2 calls over 4n (matrix) / 5n (list): {} small, {big} large; worst I/n {:.3}",
            s.phase2_violations, s.worst_phase2_ratio
        ),
    );
}

fn criterion_4(rep: &mut Report, s: &VerifySummary, rows: &[experiments::Row]) {
    let big = rows
        .iter()
        .filter(|r| r.t > experiments::depth_cap(r.model, r.n, r.m))
        .count();
    rep.line(
        4,
        s.depth_violations == 0 && big == 0,
        format!(
            "runs over n(n-1)/2 (matrix) / 2m+n (list) queries: {} small, {big} large",
            s.depth_violations
        ),
    );
}

fn criterion_5(rep: &mut Report, s: &VerifySummary, rows: &[experiments::Row]) {
    let frac = s.increasing_fraction();
    let big = rows.iter().filter(|r| r.phases > experiments::phase_cap(r.n)).count();
    let most = rows.iter().map(|r| r.phases).max().unwrap_or(0);
    rep.line(
        5,
        frac >= 0.95 && s.phase_violations == 0 && big == 0,
        format!(
            "shortest length grows every phase in {:.2}% of runs; phase cap 3*ceil(sqrt n) exceeded {} (n<=16) and {big} (n>=64) times, most phases {most}",
            100.0 * frac,
            s.phase_violations
        ),
    );
}

fn criterion_6(rep: &mut Report, rows: &[experiments::Row], took: Duration) {
    let mut ok = took < Duration::from_secs(600);
    let mut parts = Vec::new();
    for model in [QueryModel::Matrix, QueryModel::List] {
        let sub: Vec<_> = rows.iter().filter(|r| r.model == model).cloned().collect();
        match experiments::fit_scaling(&sub, Metric::I) {
            Ok(f) => {
                ok &= f.exponent <= 1.6;
                parts.push(format!("{model} I exponent {:.3}", f.exponent));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{model} I fit: {e}"));
            }
        }
        if model == QueryModel::Matrix {
            match experiments::fit_scaling(&sub, Metric::Bound) {
                Ok(f) => {
                    ok &= f.exponent <= 1.85;
                    parts.push(format!("matrix sqrt(T*I) exponent {:.3}", f.exponent));
                }
                Err(e) => {
                    ok = false;
                    parts.push(format!("matrix bound fit: {e}"));
                }
            }
        }
    }
    rep.line(
        6,
        ok,
        format!(
            "gnp(n,0.5), n in {SCALE_SIZES:?}, {SCALE_SEEDS} seeds: {}; {:.1}s",
            parts.join(", "),
            took.as_secs_f64()
        ),
    );
}

fn criterion_7(rep: &mut Report, s: &VerifySummary) {
    let matrix_runs = s.runs / 2;
    rep.line(
        7,
        s.identity_violations == 0,
        format!(
            "matrix I equals distinct present answers in {} of {matrix_runs} runs",
            matrix_runs - s.identity_violations
        ),
    );
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmatch"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary starts")
}

fn criterion_8(rep: &mut Report) {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let g = experiments::generate_graph(Family::Gnp { p: 0.3 }, 40, 11).expect("graph");
    fs::write(d.join("g.txt"), g.to_edge_list()).expect("write graph");
    fs::write(
        d.join("sweep.toml"),
        "sizes = [8, 12, 16, 20]\nseeds = 3\n\n[[families]]\nkind = \"gnp\"\np = 0.3\n\n[[families]]\nkind = \"cycle\"\n",
    )
    .expect("write config");

    let mut same = true;
    let mut checked = 0;
    for model in ["matrix", "list"] {
        let a = run(&["solve", "g.txt", "--model", model, "--seed", "7", "--json", "a.json"], d);
        let b = run(&["solve", "g.txt", "--model", model, "--seed", "7", "--json", "b.json"], d);
        let ja = fs::read(d.join("a.json")).unwrap_or_default();
        let jb = fs::read(d.join("b.json")).unwrap_or_default();
        same &= a.status.success() && b.status.success() && a.stdout == b.stdout && !ja.is_empty() && ja == jb;
        checked += 1;
    }
    let a = run(&["sweep", "--config", "sweep.toml", "--csv", "a.csv"], d);
    let b = run(&["sweep", "--config", "sweep.toml", "--csv", "b.csv"], d);
    let ca = fs::read(d.join("a.csv")).unwrap_or_default();
    let cb = fs::read(d.join("b.csv")).unwrap_or_default();
    same &= a.status.success() && b.status.success() && !ca.is_empty() && ca == cb;
    checked += 1;
    rep.line(
        8,
        same,
        format!("{checked} repeated invocations (solve matrix, solve list, sweep) byte-identical: {same}"),
    );
}
