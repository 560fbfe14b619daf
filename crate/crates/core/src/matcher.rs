//! The driver: phase 1, phase 2, augment, until phase 1 comes back empty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventLog;
use crate::graph::{augment_with, Edge, Graph, Matching, Vertex};
use crate::guessing::{InstrumentationReport, PhaseTally};
use crate::oracle::{build_oracle, Oracle, QueryModel};
use crate::phase1::{run_phase1, Phase1Options, Phase1Outcome};
use crate::phase2::run_phase2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// See [`Phase1Options::complete_level`].
    pub complete_level: bool,
    pub record_events: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            complete_level: true,
            record_events: true,
        }
    }
}

/// One iteration of the driver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseLog {
    pub matching_before: Vec<Edge>,
    pub phase1_outcome: Phase1Outcome,
    /// Dual adjustment rounds phase 1 needed.
    pub rounds: i64,
    pub h_edges: Option<usize>,
    pub paths: Vec<Vec<Vertex>>,
    pub phase1_events: EventLog,
    pub phase2_events: Option<EventLog>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchResult {
    pub model: QueryModel,
    pub n: usize,
    pub matching: Matching,
    pub phase_count: usize,
    pub report: InstrumentationReport,
    pub phases: Vec<PhaseLog>,
}

impl MatchResult {
    pub fn size(&self) -> usize {
        self.matching.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Largest number of phases a correct run can need on `n` vertices.
pub fn phase_limit(n: usize) -> usize {
    n / 2 + 1
}

/// Runs the driver against a fresh oracle.
pub fn maximum_matching(oracle: &mut Oracle, cfg: MatchConfig) -> Result<MatchResult> {
    let n = oracle.vertex_count();
    let model = oracle.model();
    let mut m = Matching::new();
    let mut phases = Vec::new();
    let mut tallies = Vec::new();
    let opts = Phase1Options {
        complete_level: cfg.complete_level,
        record_events: cfg.record_events,
    };

    loop {
        if phases.len() >= phase_limit(n) {
            return Err(Error::TooManyPhases {
                phases: phases.len() + 1,
                limit: phase_limit(n),
                n,
            });
        }
        let p1 = run_phase1(oracle, &m, opts)?;
        let mut log = PhaseLog {
            matching_before: m.edges().collect(),
            phase1_outcome: p1.outcome,
            rounds: p1.state.round(),
            h_edges: None,
            paths: Vec::new(),
            phase1_events: p1.events.clone(),
            phase2_events: None,
        };
        if p1.outcome == Phase1Outcome::NoAugmentingPath {
            tallies.push(PhaseTally {
                phase1: p1.tally,
                phase2: None,
            });
            phases.push(log);
            break;
        }
        let p2 = run_phase2(oracle, &p1, &m, cfg.record_events)?;
        m = augment_with(&m, &p2.paths, |a, b| m.contains(a, b) || oracle.confirmed_edge(a, b))?;
        log.h_edges = Some(p2.h_edges);
        log.paths = p2.paths.iter().map(|p| p.vertices().to_vec()).collect();
        log.phase2_events = Some(p2.events);
        tallies.push(PhaseTally {
            phase1: p1.tally,
            phase2: Some(p2.tally),
        });
        phases.push(log);
    }

    let report = InstrumentationReport::assemble(model, n, oracle.stats().t, tallies)?;
    Ok(MatchResult {
        model,
        n,
        matching: m,
        phase_count: phases.len(),
        report,
        phases,
    })
}

/// Builds the oracle for `g` and runs the driver.
pub fn solve(g: &Graph, model: QueryModel, seed: u64, cfg: MatchConfig) -> Result<MatchResult> {
    let mut oracle = build_oracle(g.clone(), model, seed);
    maximum_matching(&mut oracle, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_matching;

    fn petersen() -> Graph {
        let mut es = Vec::new();
        for i in 0..5 {
            es.push((i, (i + 1) % 5));
            es.push((i, i + 5));
            es.push((5 + i, 5 + (i + 2) % 5));
        }
        Graph::from_edges(10, es).unwrap()
    }

    #[test]
    fn edgeless_graph_single_phase() {
        let r = solve(&Graph::empty(5), QueryModel::Matrix, 0, MatchConfig::default()).unwrap();
        assert_eq!(r.size(), 0);
        assert_eq!(r.phase_count, 1);
        assert_eq!(r.report.i, 0);
        // Each list read ends in null at once, and null always counts. The
        // last list is never read.
        let r = solve(&Graph::empty(5), QueryModel::List, 0, MatchConfig::default()).unwrap();
        assert_eq!(r.phase_count, 1);
        assert_eq!(r.report.i, 4);
        assert_eq!(r.report.cases.null, 4);
    }

    #[test]
    fn k4_and_petersen_are_perfect() {
        let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        for model in [QueryModel::Matrix, QueryModel::List] {
            for seed in 0..5 {
                let r = solve(&k4, model, seed, MatchConfig::default()).unwrap();
                assert_eq!(r.size(), 2);
                let g = petersen();
                let r = solve(&g, model, seed, MatchConfig::default()).unwrap();
                assert_eq!(r.size(), 5);
                assert!(validate_matching(&g, &r.matching));
            }
        }
    }

    #[test]
    fn empty_vertex_set() {
        let r = solve(&Graph::empty(0), QueryModel::Matrix, 0, MatchConfig::default()).unwrap();
        assert_eq!(r.size(), 0);
        assert_eq!(r.report.t, 0);
    }

    #[test]
    fn reruns_are_identical() {
        let g = petersen();
        let a = solve(&g, QueryModel::List, 9, MatchConfig::default()).unwrap();
        let b = solve(&g, QueryModel::List, 9, MatchConfig::default()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
