//! Breadth-first search with dual variables: grows alternating trees from
//! every free vertex and stops at the first edge joining two trees.
//!
//! Duals follow the weighted formulation of cardinality matching:
//! `w(u, v) = 2` on matched pairs and `0` otherwise, every vertex starts at
//! `y = 1` so matched pairs are tight and unmatched pairs have slack 2.
//! An adjustment of `delta` lowers outer duals, raises inner duals and
//! raises the dual of every maximal blossom by `2 * delta`. With these
//! rules an augmenting path of length `2k + 1` first becomes tight at
//! round `k + 1`, so the first tree-joining edge certifies the length of
//! the shortest augmenting paths.
//!
//! Oracle queries happen only at the two guard points: a tight pair whose
//! target is unexplored (grow) or outer (blossom or tree join). In the list
//! model every outer vertex scans its adjacency list in index order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventLog, SearchEvent};
use crate::graph::{Edge, Matching, Vertex, VertexRole};
use crate::guessing::{CallTally, Phase, SearchView};
use crate::oracle::{GuardSite, Oracle, QueryKey, QueryModel, QueryOutcome};
use crate::unionfind::UnionFind;

/// Initial dual value of every vertex.
pub const INITIAL_DUAL: i64 = 1;

/// `w(u, v)`: 2 on matched pairs, 0 elsewhere.
#[derive(Clone, Debug)]
pub struct WeightFn {
    mates: Vec<Option<Vertex>>,
}

impl WeightFn {
    pub fn from_matching(m: &Matching, n: usize) -> Self {
        WeightFn { mates: m.mates(n) }
    }

    pub fn weight(&self, u: Vertex, v: Vertex) -> i64 {
        if self.mates[u] == Some(v) {
            2
        } else {
            0
        }
    }

    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        self.mates[v]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualVector(Vec<i64>);

impl DualVector {
    pub fn new(n: usize) -> Self {
        DualVector(vec![INITIAL_DUAL; n])
    }

    pub fn get(&self, v: Vertex) -> i64 {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for DualVector {
    fn from(v: Vec<i64>) -> Self {
        DualVector(v)
    }
}

/// `y(u) + y(v) == w(u, v)`.
pub fn tight(u: Vertex, v: Vertex, y: &DualVector, w: &WeightFn) -> bool {
    y.get(u) + y.get(v) == w.weight(u, v)
}

/// A blossom formed during a search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlossomRecord {
    pub base: Vertex,
    pub members: Vec<Vertex>,
    /// Odd cycle through the merged sub-blossoms: `2k + 1` edges, `k` matched.
    pub cycle: Vec<Edge>,
    pub z: i64,
    /// Enclosing blossom, once this one has been merged into a larger one.
    pub parent: Option<usize>,
    pub round: i64,
}

/// Explored subgraph, duals, roles and blossom partition of one search.
#[derive(Clone, Debug)]
pub struct SearchState {
    n: usize,
    w: WeightFn,
    y: DualVector,
    role: Vec<VertexRole>,
    parent: Vec<Option<Vertex>>,
    root: Vec<Option<Vertex>>,
    entry_round: Vec<Option<i64>>,
    uf: UnionFind,
    base: Vec<Vertex>,
    frontier: Vec<Vertex>,
    edges: BTreeSet<Edge>,
    blossoms: Vec<BlossomRecord>,
    innermost: Vec<Option<usize>>,
    top: Vec<Option<usize>>,
    round: i64,
}

impl SearchState {
    /// Every free vertex starts outer, as the root of its own tree.
    pub fn new(n: usize, m: &Matching) -> Self {
        let w = WeightFn::from_matching(m, n);
        let mut s = SearchState {
            n,
            y: DualVector::new(n),
            role: vec![VertexRole::Unreached; n],
            parent: vec![None; n],
            root: vec![None; n],
            entry_round: vec![None; n],
            uf: UnionFind::new(n),
            base: (0..n).collect(),
            frontier: Vec::new(),
            edges: BTreeSet::new(),
            blossoms: Vec::new(),
            innermost: vec![None; n],
            top: vec![None; n],
            round: 0,
            w,
        };
        for v in 0..n {
            if s.w.mate(v).is_none() {
                s.role[v] = VertexRole::Outer;
                s.root[v] = Some(v);
                s.entry_round[v] = Some(0);
                s.frontier.push(v);
            }
        }
        s
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn duals(&self) -> &DualVector {
        &self.y
    }

    pub fn weights(&self) -> &WeightFn {
        &self.w
    }

    pub fn role(&self, v: Vertex) -> VertexRole {
        self.role[v]
    }

    pub fn in_search(&self, v: Vertex) -> bool {
        self.role[v] != VertexRole::Unreached
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n).filter(|&v| self.in_search(v))
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn blossoms(&self) -> &[BlossomRecord] {
        &self.blossoms
    }

    pub fn tree_root(&self, v: Vertex) -> Option<Vertex> {
        self.root[v]
    }

    pub fn entry_round(&self, v: Vertex) -> Option<i64> {
        self.entry_round[v]
    }

    pub fn round(&self) -> i64 {
        self.round
    }

    pub fn frontier(&self) -> &[Vertex] {
        &self.frontier
    }

    pub fn blossom_base(&self, v: Vertex) -> Vertex {
        self.base[self.uf.root(v)]
    }

    pub fn blossom_class_count(&self) -> usize {
        self.uf.class_count()
    }

    pub fn is_tight(&self, u: Vertex, v: Vertex) -> bool {
        tight(u, v, &self.y, &self.w)
    }

    /// Sum of blossom duals over blossoms containing both `u` and `v`.
    fn shared_blossom_dual(&self, u: Vertex, v: Vertex) -> i64 {
        let chain = |mut b: Option<usize>| {
            let mut out = Vec::new();
            while let Some(id) = b {
                out.push(id);
                b = self.blossoms[id].parent;
            }
            out
        };
        let vc = chain(self.innermost[v]);
        chain(self.innermost[u])
            .into_iter()
            .filter(|id| vc.contains(id))
            .map(|id| self.blossoms[id].z)
            .sum()
    }

    /// Reduced cost `y(u) + y(v) - w(u, v) + z(blossoms containing both)`.
    /// Zero exactly on the pairs that can lie on a shortest augmenting path.
    pub fn reduced_slack(&self, u: Vertex, v: Vertex) -> i64 {
        self.y.get(u) + self.y.get(v) - self.w.weight(u, v) + self.shared_blossom_dual(u, v)
    }

    /// A pair the search would act on if the edge exists.
    fn eligible(&self, u: Vertex, v: Vertex) -> bool {
        u != v
            && self.role[u] == VertexRole::Outer
            && !self.uf.same(u, v)
            && matches!(self.role[v], VertexRole::Unreached | VertexRole::Outer)
    }

    fn grow(&mut self, u: Vertex, v: Vertex) -> Result<SearchEvent> {
        let mate = self.w.mate(v).ok_or_else(|| {
            Error::Inconsistent(format!("grow target {v} has no matched partner"))
        })?;
        if self.role[mate] != VertexRole::Unreached {
            return Err(Error::Inconsistent(format!(
                "partner {mate} of grow target {v} is already explored"
            )));
        }
        self.role[v] = VertexRole::Inner;
        self.role[mate] = VertexRole::Outer;
        self.parent[v] = Some(u);
        self.root[v] = self.root[u];
        self.root[mate] = self.root[u];
        self.entry_round[v] = Some(self.round);
        self.entry_round[mate] = Some(self.round);
        self.edges.insert(Edge::new(u, v));
        self.edges.insert(Edge::new(v, mate));
        self.frontier.push(mate);
        Ok(SearchEvent::Grow {
            from: u,
            inner: v,
            outer: mate,
        })
    }

    /// Next sub-blossom base toward the root, or `None` at a root.
    fn step_up(&self, b: Vertex) -> Option<Vertex> {
        let inner = self.w.mate(b)?;
        let up = self.parent[inner].expect("inner vertex has a tree parent");
        Some(self.blossom_base(up))
    }

    /// Merges every blossom on the fundamental cycle of the outer-outer
    /// edge `uv` (both in the same tree).
    fn merge_blossom(&mut self, u: Vertex, v: Vertex) -> SearchEvent {
        let mut ancestors = Vec::new();
        let mut b = Some(self.blossom_base(u));
        while let Some(x) = b {
            ancestors.push(x);
            b = self.step_up(x);
        }
        let mut lca = self.blossom_base(v);
        while !ancestors.contains(&lca) {
            lca = self.step_up(lca).expect("both endpoints share a tree");
        }

        let u_side = self.walk_to(u, lca);
        let v_side = self.walk_to(v, lca);
        let mut cycle: Vec<Edge> = u_side.iter().rev().flat_map(|s| [s.1, s.0]).collect();
        cycle.push(Edge::new(u, v));
        cycle.extend(v_side.iter().flat_map(|s| [s.0, s.1]));

        let mut merged_tops = BTreeSet::new();
        let mut classes = vec![lca];
        for &(_, _, b, inner) in u_side.iter().chain(&v_side) {
            classes.push(b);
            classes.push(inner);
        }
        let reps: BTreeSet<_> = classes.iter().map(|&c| self.uf.find(c)).collect();
        for v in 0..self.n {
            if reps.contains(&self.uf.find(v)) {
                if let Some(t) = self.top[v] {
                    merged_tops.insert(t);
                }
            }
        }
        for &c in &classes {
            self.uf.union(c, lca);
        }
        let rep = self.uf.find(lca);
        self.base[rep] = lca;

        let id = self.blossoms.len();
        let mut members = Vec::new();
        for x in 0..self.n {
            if self.uf.find(x) == rep {
                members.push(x);
                self.top[x] = Some(id);
                if self.innermost[x].is_none() {
                    self.innermost[x] = Some(id);
                }
            }
        }
        for t in merged_tops {
            self.blossoms[t].parent = Some(id);
        }
        for &(_, _, _, inner) in u_side.iter().chain(&v_side) {
            self.role[inner] = VertexRole::Outer;
            self.frontier.push(inner);
        }
        self.edges.insert(Edge::new(u, v));
        self.blossoms.push(BlossomRecord {
            base: lca,
            members,
            cycle: cycle.clone(),
            z: 0,
            parent: None,
            round: self.round,
        });
        SearchEvent::Blossom { base: lca, cycle }
    }

    /// Steps from `x`'s blossom up to `lca`: (matched edge, tree edge,
    /// sub-blossom base, inner vertex) per step.
    fn walk_to(&self, x: Vertex, lca: Vertex) -> Vec<(Edge, Edge, Vertex, Vertex)> {
        let mut out = Vec::new();
        let mut b = self.blossom_base(x);
        while b != lca {
            let inner = self.w.mate(b).expect("non-root base is matched");
            let up = self.parent[inner].expect("inner vertex has a tree parent");
            out.push((Edge::new(b, inner), Edge::new(inner, up), b, inner));
            b = self.blossom_base(up);
        }
        out
    }

    /// Some pair at `u` that is not known to be absent is tight now.
    fn could_be_tight(&self, oracle: &Oracle, u: Vertex) -> bool {
        (0..self.n).any(|v| self.eligible(u, v) && self.is_tight(u, v) && !oracle.known_absent(u, v))
    }

    /// Applies `delta` unit adjustments.
    pub fn adjust(&mut self, delta: i64) {
        for v in 0..self.n {
            match self.role[v] {
                VertexRole::Outer => self.y.0[v] -= delta,
                VertexRole::Inner => self.y.0[v] += delta,
                _ => {}
            }
        }
        for b in &mut self.blossoms {
            if b.parent.is_none() {
                b.z += 2 * delta;
            }
        }
        self.round += delta;
    }

    /// Rounds until the next pending pair becomes tight, or `None` when no
    /// pending pair is left. `pending(u, v)` says whether the pair could
    /// still be an edge.
    fn next_delta(&self, mut pending: impl FnMut(Vertex) -> Vec<Vertex>) -> Result<Option<i64>> {
        let mut best: Option<i64> = None;
        for &u in &self.frontier {
            for v in pending(u) {
                if !self.eligible(u, v) {
                    continue;
                }
                let slack = self.y.get(u) + self.y.get(v) - self.w.weight(u, v);
                let delta = match self.role[v] {
                    VertexRole::Unreached => slack,
                    _ => {
                        if slack % 2 != 0 {
                            return Err(Error::Inconsistent(format!(
                                "odd slack {slack} on outer pair {u}-{v}"
                            )));
                        }
                        slack / 2
                    }
                };
                if delta <= 0 {
                    return Err(Error::Inconsistent(format!(
                        "pending pair {u}-{v} has slack {slack} before adjustment"
                    )));
                }
                best = Some(best.map_or(delta, |b| b.min(delta)));
            }
        }
        Ok(best)
    }
}

impl SearchView for SearchState {
    fn phase(&self) -> Phase {
        Phase::One
    }

    fn tight(&self, u: Vertex, v: Vertex) -> bool {
        self.is_tight(u, v)
    }

    fn same_blossom(&self, u: Vertex, v: Vertex) -> bool {
        self.uf.same(u, v)
    }

    fn found(&self, v: Vertex) -> bool {
        self.in_search(v)
    }

    fn is_outer(&self, v: Vertex) -> bool {
        self.role[v] == VertexRole::Outer
    }

    fn same_tree(&self, u: Vertex, v: Vertex) -> bool {
        self.root[u].is_some() && self.root[u] == self.root[v]
    }

    fn matched_pair(&self, u: Vertex, v: Vertex) -> bool {
        self.w.mate(u) == Some(v)
    }

    fn forms_blossom(&self, u: Vertex, v: Vertex) -> bool {
        self.is_outer(v) && !self.uf.same(u, v) && self.same_tree(u, v)
    }

    fn is_free(&self, v: Vertex) -> bool {
        self.w.mate(v).is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "outcome")]
pub enum Phase1Outcome {
    SapFound { u: Vertex, v: Vertex },
    NoAugmentingPath,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase1Options {
    /// After the first tree-joining edge, keep growing and merging at the
    /// current round (without querying further tree-joining pairs) so the
    /// explored subgraph holds every shortest augmenting path.
    pub complete_level: bool,
    pub record_events: bool,
}

impl Default for Phase1Options {
    fn default() -> Self {
        Phase1Options {
            complete_level: true,
            record_events: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Phase1Result {
    pub outcome: Phase1Outcome,
    pub state: SearchState,
    pub events: EventLog,
    pub tally: CallTally,
}

enum Step {
    Progress,
    Idle,
    Sap(Vertex, Vertex),
}

/// Runs one phase-1 search for matching `m`.
pub fn run_phase1(oracle: &mut Oracle, m: &Matching, opts: Phase1Options) -> Result<Phase1Result> {
    let n = oracle.vertex_count();
    oracle.begin_call(Phase::One);
    let mut state = SearchState::new(n, m);
    let mut log = EventLog::new(opts.record_events);

    // Fewer than two free vertices cannot carry an augmenting path.
    if state.frontier.len() < 2 {
        log.push(SearchEvent::Exhausted);
        return Ok(Phase1Result {
            outcome: Phase1Outcome::NoAugmentingPath,
            state,
            events: log,
            tally: oracle.take_tally(),
        });
    }

    let outcome = loop {
        let mut found = None;
        loop {
            match pass(oracle, &mut state, &mut log, false)? {
                Step::Progress => continue,
                Step::Idle => break,
                Step::Sap(u, v) => {
                    found = Some((u, v));
                    break;
                }
            }
        }
        if let Some((u, v)) = found {
            if opts.complete_level {
                while let Step::Progress = pass(oracle, &mut state, &mut log, true)? {}
            }
            break Phase1Outcome::SapFound { u, v };
        }
        let model = oracle.model();
        let delta = state.next_delta(|u| match model {
            QueryModel::Matrix => (0..n)
                .filter(|&v| v != u && oracle.known_matrix(u, v) != Some(false))
                .collect(),
            QueryModel::List if oracle.list_closed(u) => oracle.revealed(u).to_vec(),
            QueryModel::List => (0..n).filter(|&v| v != u && !oracle.known_absent(u, v)).collect(),
        })?;
        match delta {
            Some(d) => {
                state.adjust(d);
                log.push(SearchEvent::DualAdjust {
                    delta: d,
                    round: state.round,
                });
            }
            None => {
                log.push(SearchEvent::Exhausted);
                break Phase1Outcome::NoAugmentingPath;
            }
        }
    };

    Ok(Phase1Result {
        outcome,
        state,
        events: log,
        tally: oracle.take_tally(),
    })
}


/// One sweep over the outer vertices in discovery order. `locked` means a
/// tree-joining edge was already found this round: such pairs are skipped
/// and, in the list model, only already-revealed positions are visited.
fn pass(oracle: &mut Oracle, state: &mut SearchState, log: &mut EventLog, locked: bool) -> Result<Step> {
    let n = state.n;
    let mut progress = false;
    let mut idx = 0;
    while idx < state.frontier.len() {
        let u = state.frontier[idx];
        idx += 1;
        match oracle.model() {
            QueryModel::Matrix => {
                for v in 0..n {
                    if !state.eligible(u, v) || !state.is_tight(u, v) {
                        continue;
                    }
                    if oracle.known_matrix(u, v) == Some(false) {
                        continue;
                    }
                    let joins_trees = state.in_search(v) && !state.same_tree(u, v);
                    if locked && joins_trees {
                        continue;
                    }
                    let site = if state.in_search(v) {
                        GuardSite::SearchOuter
                    } else {
                        GuardSite::SearchGrow
                    };
                    let ans = oracle.query_matrix(u, v, site, state)?;
                    let e = Edge::new(u, v);
                    log.query(site, QueryKey::Matrix { u: e.lo(), v: e.hi() }, &ans);
                    if ans.outcome == QueryOutcome::Present {
                        if let Some(sap) = act(state, log, u, v)? {
                            return Ok(sap);
                        }
                        progress = true;
                    }
                }
            }
            QueryModel::List => {
                let fresh = !locked && state.could_be_tight(oracle, u);
                let mut i = 1;
                loop {
                    let outcome = if !fresh {
                        match oracle.known_list(u, i) {
                            Some(o) => o,
                            None => break,
                        }
                    } else {
                        let ans = oracle.query_list(u, i, GuardSite::SearchScan, state)?;
                        log.query(GuardSite::SearchScan, QueryKey::List { u, i }, &ans);
                        ans.outcome
                    };
                    i += 1;
                    let v = match outcome {
                        QueryOutcome::Neighbor(v) => v,
                        _ => break,
                    };
                    if !state.eligible(u, v) || !state.is_tight(u, v) {
                        continue;
                    }
                    if locked && state.in_search(v) && !state.same_tree(u, v) {
                        continue;
                    }
                    if let Some(sap) = act(state, log, u, v)? {
                        return Ok(sap);
                    }
                    progress = true;
                }
            }
        }
    }
    Ok(if progress { Step::Progress } else { Step::Idle })
}

/// Grow, blossom or tree join on the confirmed eligible edge `uv`.
fn act(state: &mut SearchState, log: &mut EventLog, u: Vertex, v: Vertex) -> Result<Option<Step>> {
    if !state.in_search(v) {
        let ev = state.grow(u, v)?;
        log.push(ev);
        Ok(None)
    } else if state.same_tree(u, v) {
        let ev = state.merge_blossom(u, v);
        log.push(ev);
        Ok(None)
    } else {
        log.push(SearchEvent::Sap { u, v });
        Ok(Some(Step::Sap(u, v)))
    }
}
