//! Guess classification for oracle invocations and the resulting
//! `sqrt(T * I)` query estimate.
//!
//! Classification is pure: it looks at a read-only [`SearchView`] of the
//! search state at the instant of the query and at the outcome. The oracle
//! calls it exactly once per non-cached invocation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::oracle::{QueryModel, QueryOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    #[serde(rename = "phase1")]
    One,
    #[serde(rename = "phase2")]
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuessClass {
    Correct,
    Incorrect,
}

/// Which search step an incorrect guess belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuessCase {
    Grow,
    Blossom,
    Sap,
    Null,
    /// A phase-2 grow whose fate (on or off a found path) is settled when
    /// the phase-2 call finishes.
    DfsGrow,
    DfsGrowOnSap,
    DfsGrowOffSap,
    DfsSapComplete,
    DfsBlossom,
}

/// The predicates the guessing scheme needs, answered against the live
/// search state. Phase 1 answers `found` against the explored subgraph,
/// phase 2 against the per-root visited subgraph.
pub trait SearchView {
    fn phase(&self) -> Phase;
    fn tight(&self, u: Vertex, v: Vertex) -> bool;
    fn same_blossom(&self, u: Vertex, v: Vertex) -> bool;
    fn found(&self, v: Vertex) -> bool;
    fn is_outer(&self, v: Vertex) -> bool;
    fn same_tree(&self, u: Vertex, v: Vertex) -> bool;
    fn matched_pair(&self, u: Vertex, v: Vertex) -> bool;
    fn forms_blossom(&self, u: Vertex, v: Vertex) -> bool;
    fn is_free(&self, v: Vertex) -> bool;
}

/// The scored result of one oracle invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: GuessClass,
    pub case: Option<GuessCase>,
}

impl Verdict {
    fn correct() -> Self {
        Verdict {
            class: GuessClass::Correct,
            case: None,
        }
    }

    fn incorrect(case: GuessCase) -> Self {
        Verdict {
            class: GuessClass::Incorrect,
            case: Some(case),
        }
    }

    pub fn is_incorrect(&self) -> bool {
        self.class == GuessClass::Incorrect
    }
}

/// The matrix scheme always guesses "absent".
pub fn classify_matrix_guess(outcome: QueryOutcome) -> GuessClass {
    match outcome {
        QueryOutcome::Absent => GuessClass::Correct,
        _ => GuessClass::Incorrect,
    }
}

/// The list scheme: `null` is always incorrect; otherwise the guess is
/// that the revealed neighbor triggers no search step.
pub fn classify_list_guess(view: &dyn SearchView, u: Vertex, outcome: QueryOutcome) -> GuessClass {
    let v = match outcome {
        QueryOutcome::Neighbor(v) => v,
        _ => return GuessClass::Incorrect,
    };
    let triggers = match view.phase() {
        Phase::One => {
            view.tight(u, v) && !view.same_blossom(u, v) && (!view.found(v) || view.is_outer(v))
        }
        Phase::Two => {
            view.tight(u, v)
                && !view.matched_pair(u, v)
                && (!view.found(v) || view.forms_blossom(u, v))
        }
    };
    if triggers {
        GuessClass::Incorrect
    } else {
        GuessClass::Correct
    }
}

/// Assigns the case tag of an incorrect guess. Must be called before the
/// search acts on the outcome.
fn incorrect_case(view: &dyn SearchView, u: Vertex, v: Option<Vertex>) -> GuessCase {
    let Some(v) = v else {
        return GuessCase::Null;
    };
    match view.phase() {
        Phase::One if !view.found(v) => GuessCase::Grow,
        Phase::One if view.same_tree(u, v) => GuessCase::Blossom,
        Phase::One => GuessCase::Sap,
        Phase::Two if !view.found(v) && view.is_free(v) => GuessCase::DfsSapComplete,
        Phase::Two if !view.found(v) => GuessCase::DfsGrow,
        Phase::Two => GuessCase::DfsBlossom,
    }
}

/// List-model scoring used by the oracle hook.
pub fn classify_list(view: &dyn SearchView, u: Vertex, outcome: QueryOutcome) -> Verdict {
    match classify_list_guess(view, u, outcome) {
        GuessClass::Correct => Verdict::correct(),
        GuessClass::Incorrect => {
            let v = match outcome {
                QueryOutcome::Neighbor(v) => Some(v),
                _ => None,
            };
            Verdict::incorrect(incorrect_case(view, u, v))
        }
    }
}

/// Matrix-model scoring with the queried partner attached.
pub fn classify_matrix(view: &dyn SearchView, u: Vertex, v: Vertex, outcome: QueryOutcome) -> Verdict {
    match classify_matrix_guess(outcome) {
        GuessClass::Correct => Verdict::correct(),
        GuessClass::Incorrect => Verdict::incorrect(incorrect_case(view, u, Some(v))),
    }
}

/// `sqrt(t * i)` with constant 1. Rejects `i > t`.
pub fn quantum_bound(t: u64, i: u64) -> Result<f64> {
    if i > t {
        return Err(Error::BoundDomain {
            incorrect: i,
            queries: t,
        });
    }
    Ok(((t as f64) * (i as f64)).sqrt())
}

/// Incorrect-guess counts split by case.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    pub grow: u64,
    pub blossom: u64,
    pub sap: u64,
    pub null: u64,
    pub dfs_grow_on_sap: u64,
    pub dfs_grow_off_sap: u64,
    pub dfs_sap_complete: u64,
    pub dfs_blossom: u64,
    /// Phase-2 grows not yet settled as on/off a path. Zero in any
    /// finished report.
    #[serde(skip_serializing_if = "is_zero", default)]
    pub dfs_grow_pending: u64,
}

fn is_zero(x: &u64) -> bool {
    *x == 0
}

impl CaseCounts {
    pub fn record(&mut self, case: GuessCase) {
        let slot = match case {
            GuessCase::Grow => &mut self.grow,
            GuessCase::Blossom => &mut self.blossom,
            GuessCase::Sap => &mut self.sap,
            GuessCase::Null => &mut self.null,
            GuessCase::DfsGrow => &mut self.dfs_grow_pending,
            GuessCase::DfsGrowOnSap => &mut self.dfs_grow_on_sap,
            GuessCase::DfsGrowOffSap => &mut self.dfs_grow_off_sap,
            GuessCase::DfsSapComplete => &mut self.dfs_sap_complete,
            GuessCase::DfsBlossom => &mut self.dfs_blossom,
        };
        *slot += 1;
    }

    pub fn total(&self) -> u64 {
        self.grow
            + self.blossom
            + self.sap
            + self.null
            + self.dfs_grow_on_sap
            + self.dfs_grow_off_sap
            + self.dfs_sap_complete
            + self.dfs_blossom
            + self.dfs_grow_pending
    }

    pub fn add(&mut self, other: &CaseCounts) {
        self.grow += other.grow;
        self.blossom += other.blossom;
        self.sap += other.sap;
        self.null += other.null;
        self.dfs_grow_on_sap += other.dfs_grow_on_sap;
        self.dfs_grow_off_sap += other.dfs_grow_off_sap;
        self.dfs_sap_complete += other.dfs_sap_complete;
        self.dfs_blossom += other.dfs_blossom;
        self.dfs_grow_pending += other.dfs_grow_pending;
    }
}

/// What one phase-1 or phase-2 call cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallTally {
    pub phase: Phase,
    /// Non-cached oracle invocations.
    pub queries: u64,
    pub incorrect: u64,
    pub cases: CaseCounts,
    /// Vertices reached by incorrect phase-2 grow guesses, in order.
    #[serde(skip)]
    pub grow_targets: Vec<Vertex>,
}

impl CallTally {
    pub fn new(phase: Phase) -> Self {
        CallTally {
            phase,
            queries: 0,
            incorrect: 0,
            cases: CaseCounts::default(),
            grow_targets: Vec::new(),
        }
    }

    /// Splits pending phase-2 grows by whether their target ended up on
    /// one of the returned paths.
    pub fn settle_grows(&mut self, on_path: impl Fn(Vertex) -> bool) {
        for v in self.grow_targets.drain(..) {
            self.cases.dfs_grow_pending -= 1;
            if on_path(v) {
                self.cases.dfs_grow_on_sap += 1;
            } else {
                self.cases.dfs_grow_off_sap += 1;
            }
        }
    }
}

/// Per-phase slice of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTally {
    pub phase1: CallTally,
    pub phase2: Option<CallTally>,
}

/// Run totals: `t` distinct queries, `i` incorrect guesses, and the
/// `sqrt(t * i)` estimate with constant 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstrumentationReport {
    pub model: QueryModel,
    pub n: usize,
    pub t: u64,
    pub i: u64,
    pub cases: CaseCounts,
    pub phase_count: usize,
    pub bound: f64,
    pub per_phase: Vec<PhaseTally>,
}

impl InstrumentationReport {
    pub fn assemble(model: QueryModel, n: usize, t: u64, per_phase: Vec<PhaseTally>) -> Result<Self> {
        let mut cases = CaseCounts::default();
        for p in &per_phase {
            cases.add(&p.phase1.cases);
            if let Some(p2) = &p.phase2 {
                cases.add(&p2.cases);
            }
        }
        let i = cases.total();
        Ok(InstrumentationReport {
            model,
            n,
            t,
            i,
            cases,
            phase_count: per_phase.len(),
            bound: quantum_bound(t, i)?,
            per_phase,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A view with fixed answers, for exercising the rules directly.
    #[derive(Default)]
    struct Fixed {
        phase2: bool,
        tight: bool,
        same_blossom: bool,
        found: bool,
        outer: bool,
        same_tree: bool,
        matched: bool,
        blossom: bool,
        free: bool,
    }

    impl SearchView for Fixed {
        fn phase(&self) -> Phase {
            if self.phase2 {
                Phase::Two
            } else {
                Phase::One
            }
        }
        fn tight(&self, _: Vertex, _: Vertex) -> bool {
            self.tight
        }
        fn same_blossom(&self, _: Vertex, _: Vertex) -> bool {
            self.same_blossom
        }
        fn found(&self, _: Vertex) -> bool {
            self.found
        }
        fn is_outer(&self, _: Vertex) -> bool {
            self.outer
        }
        fn same_tree(&self, _: Vertex, _: Vertex) -> bool {
            self.same_tree
        }
        fn matched_pair(&self, _: Vertex, _: Vertex) -> bool {
            self.matched
        }
        fn forms_blossom(&self, _: Vertex, _: Vertex) -> bool {
            self.blossom
        }
        fn is_free(&self, _: Vertex) -> bool {
            self.free
        }
    }

    #[test]
    fn matrix_scheme_guesses_absent() {
        assert_eq!(classify_matrix_guess(QueryOutcome::Absent), GuessClass::Correct);
        assert_eq!(classify_matrix_guess(QueryOutcome::Present), GuessClass::Incorrect);
    }

    #[test]
    fn list_null_is_incorrect() {
        let view = Fixed::default();
        assert_eq!(classify_list_guess(&view, 0, QueryOutcome::Null), GuessClass::Incorrect);
        let v = classify_list(&view, 0, QueryOutcome::Null);
        assert_eq!(v.case, Some(GuessCase::Null));
    }

    #[test]
    fn list_phase1_rules() {
        let grow = Fixed {
            tight: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list_guess(&grow, 0, QueryOutcome::Neighbor(1)),
            GuessClass::Incorrect
        );
        assert_eq!(
            classify_list(&grow, 0, QueryOutcome::Neighbor(1)).case,
            Some(GuessCase::Grow)
        );
        let slack = Fixed::default();
        assert_eq!(
            classify_list_guess(&slack, 0, QueryOutcome::Neighbor(1)),
            GuessClass::Correct
        );
        let inner = Fixed {
            tight: true,
            found: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list_guess(&inner, 0, QueryOutcome::Neighbor(1)),
            GuessClass::Correct
        );
        let shared = Fixed {
            tight: true,
            found: true,
            outer: true,
            same_blossom: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list_guess(&shared, 0, QueryOutcome::Neighbor(1)),
            GuessClass::Correct
        );
        let sap = Fixed {
            tight: true,
            found: true,
            outer: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list(&sap, 0, QueryOutcome::Neighbor(1)).case,
            Some(GuessCase::Sap)
        );
    }

    #[test]
    fn list_phase2_rules() {
        let matched = Fixed {
            phase2: true,
            tight: true,
            matched: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list_guess(&matched, 0, QueryOutcome::Neighbor(1)),
            GuessClass::Correct
        );
        let complete = Fixed {
            phase2: true,
            tight: true,
            free: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list(&complete, 0, QueryOutcome::Neighbor(1)).case,
            Some(GuessCase::DfsSapComplete)
        );
        let blossom = Fixed {
            phase2: true,
            tight: true,
            found: true,
            blossom: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list(&blossom, 0, QueryOutcome::Neighbor(1)).case,
            Some(GuessCase::DfsBlossom)
        );
        let visited = Fixed {
            phase2: true,
            tight: true,
            found: true,
            ..Default::default()
        };
        assert_eq!(
            classify_list_guess(&visited, 0, QueryOutcome::Neighbor(1)),
            GuessClass::Correct
        );
    }

    #[test]
    fn bound_values() {
        assert_eq!(quantum_bound(4, 1).unwrap(), 2.0);
        assert_eq!(quantum_bound(0, 0).unwrap(), 0.0);
        assert!(quantum_bound(1, 2).is_err());
        // t = n^2, i = n^1.5 gives n^1.75.
        let n = 256u64;
        let i = 4096; // 256^1.5
        let b = quantum_bound(n * n, i).unwrap();
        assert!((b - (n as f64).powf(1.75)).abs() < 1e-6);
        // t = m, i = n^1.5 gives n^0.75 * sqrt(m).
        let m = 1000u64;
        let b = quantum_bound(m.max(i), i).unwrap();
        assert!((b - (n as f64).powf(0.75) * ((m.max(i)) as f64).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn settle_grows_splits_pending() {
        let mut t = CallTally::new(Phase::Two);
        for v in [3, 4, 5] {
            t.cases.record(GuessCase::DfsGrow);
            t.grow_targets.push(v);
        }
        t.settle_grows(|v| v == 4);
        assert_eq!(t.cases.dfs_grow_on_sap, 1);
        assert_eq!(t.cases.dfs_grow_off_sap, 2);
        assert_eq!(t.cases.dfs_grow_pending, 0);
        assert_eq!(t.cases.total(), 3);
    }
}
