//! The only gateway to the hidden graph.
//!
//! An [`Oracle`] answers adjacency-matrix queries `E_M(u, v)` or 1-indexed
//! adjacency-list queries `E_L(u, i)`, memoizes every answer in a
//! [`QueryLedger`], and scores each non-cached invocation through the
//! guessing hook.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};
use crate::guessing::{classify_list, classify_matrix, CallTally, Phase, SearchView, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryModel {
    Matrix,
    List,
}

impl QueryModel {
    pub fn name(self) -> &'static str {
        match self {
            QueryModel::Matrix => "matrix",
            QueryModel::List => "list",
        }
    }
}

impl fmt::Display for QueryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "matrix" => Ok(QueryModel::Matrix),
            "list" => Ok(QueryModel::List),
            other => Err(format!("unknown query model `{other}` (expected matrix|list)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "model")]
pub enum QueryKey {
    Matrix { u: Vertex, v: Vertex },
    List { u: Vertex, i: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryOutcome {
    Present,
    Absent,
    Neighbor(Vertex),
    Null,
}

/// Where in the search a query was issued.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardSite {
    /// Phase 1, matrix, target not yet explored.
    SearchGrow,
    /// Phase 1, matrix, target outer.
    SearchOuter,
    /// Phase 1, list scan position.
    SearchScan,
    /// Phase 2, matrix, target not yet visited.
    DfsGrow,
    /// Phase 2, matrix, edge closes a blossom.
    DfsBlossom,
    /// Phase 2, list scan position.
    DfsScan,
}

/// The hidden graph plus, for the list model, a fixed neighbor order per
/// vertex derived from a seed.
#[derive(Clone, Debug)]
pub struct HiddenGraph {
    graph: Graph,
    lists: Vec<Vec<Vertex>>,
}

impl HiddenGraph {
    pub fn new(graph: Graph, ordering_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(ordering_seed);
        let lists = (0..graph.vertex_count())
            .map(|v| {
                let mut l = graph.neighbors(v).to_vec();
                l.shuffle(&mut rng);
                l
            })
            .collect();
        HiddenGraph { graph, lists }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn list(&self, v: Vertex) -> &[Vertex] {
        &self.lists[v]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub key: QueryKey,
    pub outcome: QueryOutcome,
    pub site: GuardSite,
}

/// Memoized record of every issued query, in order of first issue.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct QueryLedger {
    entries: Vec<LedgerEntry>,
    #[serde(skip)]
    index: HashMap<QueryKey, usize>,
}

impl QueryLedger {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn get(&self, key: &QueryKey) -> Option<QueryOutcome> {
        self.index.get(key).map(|&i| self.entries[i].outcome)
    }

    fn insert(&mut self, key: QueryKey, outcome: QueryOutcome, site: GuardSite) {
        debug_assert!(!self.index.contains_key(&key));
        self.index.insert(key, self.entries.len());
        self.entries.push(LedgerEntry { key, outcome, site });
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.entries)?)
    }
}

/// Answer to one query call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryAnswer {
    pub outcome: QueryOutcome,
    /// Served from the ledger; not counted and not scored.
    pub cached: bool,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    /// Distinct queries issued so far.
    pub t: u64,
    pub present: u64,
    pub absent: u64,
    pub neighbors: u64,
    pub nulls: u64,
}

pub struct Oracle {
    hidden: HiddenGraph,
    model: QueryModel,
    ledger: QueryLedger,
    stats: OracleStats,
    tally: CallTally,
    /// Contiguous revealed prefix of each list.
    revealed: Vec<Vec<Vertex>>,
    closed: Vec<bool>,
    confirmed: HashSet<Edge>,
}

/// Wraps `g` in an oracle for `model`. The seed only matters for the list
/// model, where it fixes every neighbor order.
pub fn build_oracle(g: Graph, model: QueryModel, ordering_seed: u64) -> Oracle {
    Oracle::new(HiddenGraph::new(g, ordering_seed), model)
}

impl Oracle {
    pub fn new(hidden: HiddenGraph, model: QueryModel) -> Self {
        let n = hidden.graph.vertex_count();
        Oracle {
            revealed: vec![Vec::new(); n],
            closed: vec![false; n],
            confirmed: HashSet::new(),
            hidden,
            model,
            ledger: QueryLedger::default(),
            stats: OracleStats::default(),
            tally: CallTally::new(Phase::One),
        }
    }

    pub fn model(&self) -> QueryModel {
        self.model
    }

    pub fn vertex_count(&self) -> usize {
        self.hidden.graph.vertex_count()
    }

    /// Ground truth, for tests and reference checks only. Search code must
    /// not call this.
    pub fn hidden(&self) -> &HiddenGraph {
        &self.hidden
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    /// Starts scoring a fresh phase-1 or phase-2 call.
    pub fn begin_call(&mut self, phase: Phase) {
        self.tally = CallTally::new(phase);
    }

    pub fn take_tally(&mut self) -> CallTally {
        let phase = self.tally.phase;
        std::mem::replace(&mut self.tally, CallTally::new(phase))
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        let n = self.vertex_count();
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        Ok(())
    }

    /// Ledger lookup without issuing a query.
    pub fn known_matrix(&self, u: Vertex, v: Vertex) -> Option<bool> {
        if u == v {
            return None;
        }
        let e = Edge::new(u, v);
        self.ledger
            .get(&QueryKey::Matrix { u: e.lo(), v: e.hi() })
            .map(|o| o == QueryOutcome::Present)
    }

    pub fn known_list(&self, u: Vertex, i: usize) -> Option<QueryOutcome> {
        let prefix = &self.revealed[u];
        if i >= 1 && i <= prefix.len() {
            return Some(QueryOutcome::Neighbor(prefix[i - 1]));
        }
        if self.closed[u] && i == prefix.len() + 1 {
            return Some(QueryOutcome::Null);
        }
        self.ledger.get(&QueryKey::List { u, i })
    }

    /// Neighbors of `u` revealed by list queries at positions `1..=k`, for
    /// the largest such contiguous `k`.
    pub fn revealed(&self, u: Vertex) -> &[Vertex] {
        &self.revealed[u]
    }

    /// Whether the whole list of `u` is known, null included.
    pub fn list_closed(&self, u: Vertex) -> bool {
        self.closed[u]
    }

    /// Whether earlier queries have already shown `uv` to be an edge.
    pub fn confirmed_edge(&self, u: Vertex, v: Vertex) -> bool {
        match self.model {
            QueryModel::Matrix => self.known_matrix(u, v) == Some(true),
            QueryModel::List => self.confirmed.contains(&Edge::new(u, v)),
        }
    }

    /// Whether earlier queries have already ruled `uv` out.
    pub fn known_absent(&self, u: Vertex, v: Vertex) -> bool {
        match self.model {
            QueryModel::Matrix => self.known_matrix(u, v) == Some(false),
            QueryModel::List => {
                (self.closed[u] || self.closed[v]) && !self.confirmed.contains(&Edge::new(u, v))
            }
        }
    }

    /// `E_M(u, v)`.
    pub fn query_matrix(
        &mut self,
        u: Vertex,
        v: Vertex,
        site: GuardSite,
        view: &dyn SearchView,
    ) -> Result<QueryAnswer> {
        if self.model != QueryModel::Matrix {
            return Err(Error::WrongModel("matrix", self.model.name()));
        }
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::DiagonalQuery(u));
        }
        let e = Edge::new(u, v);
        let key = QueryKey::Matrix { u: e.lo(), v: e.hi() };
        if let Some(outcome) = self.ledger.get(&key) {
            return Ok(QueryAnswer {
                outcome,
                cached: true,
                verdict: None,
            });
        }
        let outcome = if self.hidden.graph.has_edge(u, v) {
            self.confirmed.insert(e);
            self.stats.present += 1;
            QueryOutcome::Present
        } else {
            self.stats.absent += 1;
            QueryOutcome::Absent
        };
        self.ledger.insert(key, outcome, site);
        self.stats.t += 1;
        let verdict = classify_matrix(view, u, v, outcome);
        self.score(verdict, v);
        Ok(QueryAnswer {
            outcome,
            cached: false,
            verdict: Some(verdict),
        })
    }

    /// `E_L(u, i)`, 1-indexed; `Null` once `i` exceeds the degree.
    pub fn query_list(
        &mut self,
        u: Vertex,
        i: usize,
        site: GuardSite,
        view: &dyn SearchView,
    ) -> Result<QueryAnswer> {
        if self.model != QueryModel::List {
            return Err(Error::WrongModel("list", self.model.name()));
        }
        self.check_vertex(u)?;
        if i == 0 {
            return Err(Error::ZeroListIndex);
        }
        let key = QueryKey::List { u, i };
        if let Some(outcome) = self.ledger.get(&key) {
            return Ok(QueryAnswer {
                outcome,
                cached: true,
                verdict: None,
            });
        }
        let outcome = match self.hidden.lists[u].get(i - 1) {
            Some(&v) => {
                self.stats.neighbors += 1;
                QueryOutcome::Neighbor(v)
            }
            None => {
                self.stats.nulls += 1;
                QueryOutcome::Null
            }
        };
        self.ledger.insert(key, outcome, site);
        self.stats.t += 1;
        if i == self.revealed[u].len() + 1 {
            match outcome {
                QueryOutcome::Neighbor(v) => self.revealed[u].push(v),
                _ => self.closed[u] = true,
            }
        }
        if let QueryOutcome::Neighbor(v) = outcome {
            self.confirmed.insert(Edge::new(u, v));
        }
        let verdict = classify_list(view, u, outcome);
        if let QueryOutcome::Neighbor(v) = outcome {
            self.score(verdict, v);
        } else {
            self.score(verdict, u);
        }
        Ok(QueryAnswer {
            outcome,
            cached: false,
            verdict: Some(verdict),
        })
    }

    fn score(&mut self, verdict: Verdict, target: Vertex) {
        self.tally.queries += 1;
        if let Some(case) = verdict.case {
            self.tally.incorrect += 1;
            self.tally.cases.record(case);
            if case == crate::guessing::GuessCase::DfsGrow {
                self.tally.grow_targets.push(target);
            }
        }
    }
}
