//! Graph generators, batch runs, CSV rows, power-law fits and the
//! randomized cross-check against the exhaustive reference.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::matcher::{solve, MatchConfig, MatchResult};
use crate::oracle::{QueryModel, QueryOutcome};
use crate::reference::{brute_force_size, shortest_aug_path_length, MAX_BRUTE_N};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    Gnp { p: f64 },
    Gnm { m: usize },
    /// Random bipartite graph between the first `n / 2` vertices and the rest.
    Bipartite { p: f64 },
    Path,
    Cycle,
    Complete,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gnp { p } => write!(f, "gnp(p={p})"),
            Family::Gnm { m } => write!(f, "gnm(m={m})"),
            Family::Bipartite { p } => write!(f, "bipartite(p={p})"),
            Family::Path => write!(f, "path"),
            Family::Cycle => write!(f, "cycle"),
            Family::Complete => write!(f, "complete"),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("edge probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Deterministic in `(family, n, seed)`.
pub fn generate_graph(family: Family, n: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = || (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)));
    let edges: Vec<(usize, usize)> = match family {
        Family::Gnp { p } => {
            check_p(p)?;
            pairs().filter(|_| rng.gen_bool(p)).collect()
        }
        Family::Gnm { m } => {
            let all: Vec<_> = pairs().collect();
            if m > all.len() {
                return Err(Error::InvalidParams(format!(
                    "{m} edges requested, only {} pairs on {n} vertices",
                    all.len()
                )));
            }
            let mut chosen: Vec<_> = all.choose_multiple(&mut rng, m).copied().collect();
            chosen.sort();
            chosen
        }
        Family::Bipartite { p } => {
            check_p(p)?;
            let half = n / 2;
            (0..half)
                .flat_map(|u| (half..n).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(p))
                .collect()
        }
        Family::Path => (1..n).map(|v| (v - 1, v)).collect(),
        Family::Cycle => {
            if n < 3 {
                return Err(Error::InvalidParams(format!("cycle needs 3 vertices, got {n}")));
            }
            (0..n).map(|v| (v, (v + 1) % n)).collect()
        }
        Family::Complete => pairs().collect(),
    };
    Graph::from_edges(n, edges)
}

fn default_models() -> Vec<QueryModel> {
    vec![QueryModel::Matrix, QueryModel::List]
}

fn default_true() -> bool {
    true
}

/// A sweep: every model, family, size and seed combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_models")]
    pub models: Vec<QueryModel>,
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    /// Seeds `seed_start .. seed_start + seeds`.
    pub seeds: u64,
    #[serde(default)]
    pub seed_start: u64,
    /// Compare against the exhaustive optimum where the size allows it.
    #[serde(default = "default_true")]
    pub brute_force: bool,
    #[serde(default = "default_true")]
    pub complete_level: bool,
    pub output: Option<PathBuf>,
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub model: QueryModel,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub match_size: usize,
    pub brute_size: Option<usize>,
    pub phases: usize,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "I")]
    pub i: u64,
    pub bound: f64,
    pub grow: u64,
    pub blossom: u64,
    pub sap: u64,
    pub null: u64,
    pub dfs_grow_on_sap: u64,
    pub dfs_grow_off_sap: u64,
    pub dfs_sap_complete: u64,
    pub dfs_blossom: u64,
    pub max_call_i_phase1: u64,
    pub max_call_i_phase2: u64,
}

impl Row {
    pub fn from_result(family: Family, g: &Graph, seed: u64, r: &MatchResult, brute: Option<usize>) -> Self {
        let c = r.report.cases;
        let p1 = r.report.per_phase.iter().map(|p| p.phase1.incorrect).max().unwrap_or(0);
        let p2 = r
            .report
            .per_phase
            .iter()
            .filter_map(|p| p.phase2.as_ref().map(|t| t.incorrect))
            .max()
            .unwrap_or(0);
        Row {
            model: r.model,
            family: family.to_string(),
            n: g.vertex_count(),
            m: g.edge_count(),
            seed,
            match_size: r.size(),
            brute_size: brute,
            phases: r.phase_count,
            t: r.report.t,
            i: r.report.i,
            bound: r.report.bound,
            grow: c.grow,
            blossom: c.blossom,
            sap: c.sap,
            null: c.null,
            dfs_grow_on_sap: c.dfs_grow_on_sap,
            dfs_grow_off_sap: c.dfs_grow_off_sap,
            dfs_sap_complete: c.dfs_sap_complete,
            dfs_blossom: c.dfs_blossom,
            max_call_i_phase1: p1,
            max_call_i_phase2: p2,
        }
    }
}

/// Runs every point of `cfg`, in parallel, returning rows in config order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let mut points = Vec::new();
    for &model in &cfg.models {
        for &family in &cfg.families {
            for &n in &cfg.sizes {
                for seed in cfg.seed_start..cfg.seed_start + cfg.seeds {
                    points.push((model, family, n, seed));
                }
            }
        }
    }
    let match_cfg = MatchConfig {
        complete_level: cfg.complete_level,
        record_events: false,
    };
    points
        .into_par_iter()
        .map(|(model, family, n, seed)| {
            let g = generate_graph(family, n, seed)?;
            let r = solve(&g, model, seed, match_cfg)?;
            let brute = if cfg.brute_force && n <= MAX_BRUTE_N {
                Some(brute_force_size(&g)?)
            } else {
                None
            };
            Ok(Row::from_result(family, &g, seed, &r, brute))
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| Error::Io {
        context: "flushing csv".into(),
        source,
    })?;
    Ok(())
}

pub fn write_csv_file(rows: &[Row], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|source| Error::Io {
        context: format!("creating {}", path.display()),
        source,
    })?;
    write_csv(rows, f)
}

pub fn read_csv(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    I,
    Bound,
    T,
    Phases,
}

impl Metric {
    pub fn of(self, r: &Row) -> f64 {
        match self {
            Metric::I => r.i as f64,
            Metric::Bound => r.bound,
            Metric::T => r.t as f64,
            Metric::Phases => r.phases as f64,
        }
    }
}

/// `metric ~ constant * n^exponent` through per-size medians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root mean square residual in log space.
    pub residual: f64,
    pub medians: Vec<(usize, f64)>,
}

pub fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[k]
    } else {
        (xs[k - 1] + xs[k]) / 2.0
    })
}

/// Least squares on `(ln n, ln median)`.
pub fn fit_power_law(samples: &[(usize, f64)]) -> Result<ScalingFit> {
    let mut sizes: Vec<usize> = samples.iter().map(|s| s.0).collect();
    sizes.sort();
    sizes.dedup();
    if sizes.len() < 4 {
        return Err(Error::UndefinedFit(format!(
            "need at least 4 distinct sizes, got {}",
            sizes.len()
        )));
    }
    let mut medians = Vec::new();
    for &n in &sizes {
        let mut xs: Vec<f64> = samples.iter().filter(|s| s.0 == n).map(|s| s.1).collect();
        let med = median(&mut xs).expect("size present");
        if med.is_nan() || med <= 0.0 || n == 0 {
            return Err(Error::UndefinedFit(format!("median {med} at n = {n}")));
        }
        medians.push((n, med));
    }
    let pts: Vec<(f64, f64)> = medians.iter().map(|&(n, y)| ((n as f64).ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(ScalingFit {
        exponent,
        constant: intercept.exp(),
        residual,
        medians,
    })
}

pub fn fit_scaling(rows: &[Row], metric: Metric) -> Result<ScalingFit> {
    let samples: Vec<_> = rows.iter().map(|r| (r.n, metric.of(r))).collect();
    fit_power_law(&samples)
}

/// Per-call incorrect-guess caps.
pub fn phase1_cap(model: QueryModel, n: usize) -> u64 {
    match model {
        QueryModel::Matrix => 2 * n as u64 + 1,
        QueryModel::List => 3 * n as u64 + 1,
    }
}

pub fn phase2_cap(model: QueryModel, n: usize) -> u64 {
    match model {
        QueryModel::Matrix => 4 * n as u64,
        QueryModel::List => 5 * n as u64,
    }
}

/// Query-count ceiling for a whole run.
pub fn depth_cap(model: QueryModel, n: usize, m: usize) -> u64 {
    match model {
        QueryModel::Matrix => (n * n.saturating_sub(1) / 2) as u64,
        QueryModel::List => (2 * m + n) as u64,
    }
}

/// Phase-count ceiling checked by the harness.
pub fn phase_cap(n: usize) -> usize {
    3 * (n as f64).sqrt().ceil() as usize
}

/// The random instance `k` of a verification batch.
pub fn verify_instance(k: u64, n_max: usize) -> Result<(Family, usize, u64)> {
    if n_max < 3 {
        return Err(Error::InvalidParams(format!("n_max {n_max} below 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(k);
    let n = rng.gen_range(2..=n_max);
    let p = [0.1, 0.3, 0.5, 0.8][rng.gen_range(0..4)];
    let family = match rng.gen_range(0..5) {
        0 => Family::Gnp { p },
        1 => Family::Gnm {
            m: (p * (n * (n - 1) / 2) as f64).round() as usize,
        },
        2 => Family::Bipartite { p },
        3 => Family::Path,
        _ if n >= 3 => Family::Cycle,
        _ => Family::Gnp { p },
    };
    Ok((family, n, k))
}

/// What one run checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunCheck {
    pub model: QueryModel,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub match_size: usize,
    pub brute_size: usize,
    pub phases: usize,
    pub t: u64,
    pub i: u64,
    pub phase1_calls: Vec<u64>,
    pub phase2_calls: Vec<u64>,
    /// Matrix model only: ledger entries that came back present.
    pub present_queries: Option<u64>,
    /// Shortest augmenting path length before each phase; `None` once maximum.
    pub sap_lengths: Vec<Option<usize>>,
}

impl RunCheck {
    pub fn size_ok(&self) -> bool {
        self.match_size == self.brute_size
    }

    pub fn phase1_ok(&self) -> bool {
        let cap = phase1_cap(self.model, self.n);
        self.phase1_calls.iter().all(|&i| i <= cap)
    }

    pub fn phase2_ok(&self) -> bool {
        let cap = phase2_cap(self.model, self.n);
        self.phase2_calls.iter().all(|&i| i <= cap)
    }

    pub fn depth_ok(&self) -> bool {
        self.t <= depth_cap(self.model, self.n, self.m)
    }

    pub fn phases_ok(&self) -> bool {
        self.phases <= phase_cap(self.n).max(1)
    }

    pub fn identity_ok(&self) -> bool {
        self.present_queries.is_none_or(|p| p == self.i)
    }

    /// Shortest length strictly grows from phase to phase.
    pub fn lengths_increase(&self) -> bool {
        let ls: Vec<usize> = self.sap_lengths.iter().flatten().copied().collect();
        ls.windows(2).all(|w| w[0] < w[1])
    }
}

pub fn check_run(family: Family, n: usize, seed: u64, model: QueryModel) -> Result<RunCheck> {
    let g = generate_graph(family, n, seed)?;
    let mut oracle = crate::oracle::build_oracle(g.clone(), model, seed);
    let r = crate::matcher::maximum_matching(
        &mut oracle,
        MatchConfig {
            complete_level: true,
            record_events: false,
        },
    )?;
    if !crate::graph::validate_matching(&g, &r.matching) {
        return Err(Error::Inconsistent("returned edges do not form a matching of the graph".into()));
    }
    let present = match model {
        QueryModel::Matrix => Some(
            oracle
                .ledger()
                .entries()
                .iter()
                .filter(|e| e.outcome == QueryOutcome::Present)
                .count() as u64,
        ),
        QueryModel::List => None,
    };
    let mut sap_lengths = Vec::new();
    for p in &r.phases {
        let m = crate::graph::Matching::from_edges(p.matching_before.iter().copied())?;
        sap_lengths.push(shortest_aug_path_length(&g, &m)?);
    }
    Ok(RunCheck {
        model,
        family: family.to_string(),
        n,
        m: g.edge_count(),
        seed,
        match_size: r.size(),
        brute_size: brute_force_size(&g)?,
        phases: r.phase_count,
        t: r.report.t,
        i: r.report.i,
        phase1_calls: r.report.per_phase.iter().map(|p| p.phase1.incorrect).collect(),
        phase2_calls: r
            .report
            .per_phase
            .iter()
            .filter_map(|p| p.phase2.as_ref().map(|t| t.incorrect))
            .collect(),
        present_queries: present,
        sap_lengths,
    })
}

/// Totals over a verification batch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub runs: usize,
    pub size_mismatches: usize,
    pub phase1_violations: usize,
    pub phase2_violations: usize,
    pub depth_violations: usize,
    pub phase_violations: usize,
    pub identity_violations: usize,
    pub runs_with_increasing_lengths: usize,
    pub worst_phase1_ratio: f64,
    pub worst_phase2_ratio: f64,
    /// Up to ten failing runs for diagnosis.
    pub failures: Vec<RunCheck>,
}

impl VerifySummary {
    pub fn increasing_fraction(&self) -> f64 {
        if self.runs == 0 {
            return 1.0;
        }
        self.runs_with_increasing_lengths as f64 / self.runs as f64
    }

    /// All hard checks hold and lengths grow in at least 95% of runs.
    pub fn passed(&self) -> bool {
        self.size_mismatches == 0
            && self.phase1_violations == 0
            && self.phase2_violations == 0
            && self.depth_violations == 0
            && self.phase_violations == 0
            && self.identity_violations == 0
            && self.increasing_fraction() >= 0.95
    }

    pub fn absorb(&mut self, c: RunCheck) {
        self.runs += 1;
        let mut bad = false;
        for (ok, slot) in [
            (c.size_ok(), &mut self.size_mismatches),
            (c.phase1_ok(), &mut self.phase1_violations),
            (c.phase2_ok(), &mut self.phase2_violations),
            (c.depth_ok(), &mut self.depth_violations),
            (c.phases_ok(), &mut self.phase_violations),
            (c.identity_ok(), &mut self.identity_violations),
        ] {
            if !ok {
                *slot += 1;
                bad = true;
            }
        }
        if c.lengths_increase() {
            self.runs_with_increasing_lengths += 1;
        }
        let n = c.n.max(1) as f64;
        for &i in &c.phase1_calls {
            self.worst_phase1_ratio = self.worst_phase1_ratio.max(i as f64 / n);
        }
        for &i in &c.phase2_calls {
            self.worst_phase2_ratio = self.worst_phase2_ratio.max(i as f64 / n);
        }
        if bad && self.failures.len() < 10 {
            self.failures.push(c);
        }
    }
}

/// `trials` random instances with `2 <= n <= n_max`, each run in both models.
pub fn verify(n_max: usize, trials: u64) -> Result<VerifySummary> {
    if n_max > MAX_BRUTE_N {
        return Err(Error::TooLarge(format!("n_max {n_max} above {MAX_BRUTE_N}")));
    }
    let checks: Vec<RunCheck> = (0..trials * 2)
        .into_par_iter()
        .map(|j| {
            let (family, n, seed) = verify_instance(j / 2, n_max)?;
            let model = if j % 2 == 0 { QueryModel::Matrix } else { QueryModel::List };
            check_run(family, n, seed, model)
        })
        .collect::<Result<_>>()?;
    let mut s = VerifySummary::default();
    for c in checks {
        s.absorb(c);
    }
    Ok(s)
}

/// Edge list of `g` in the text format, handy for saving instances.
pub fn edge_list(g: &Graph) -> Vec<Edge> {
    g.edges().collect()
}
