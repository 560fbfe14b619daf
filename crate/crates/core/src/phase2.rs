//! Depth-first extraction of vertex-disjoint augmenting paths from the
//! tight subgraph left by phase 1.
//!
//! `H` starts as every tight pair of explored vertices. Each free vertex in
//! turn roots a search `S'`. Outer vertices scan their `H` edges; the oracle
//! is consulted when the far end is unexplored (grow or path completion) or
//! closes an odd cycle (blossom). Absent pairs leave `H` at once, and so
//! does every vertex that a finished branch proved useless.
//!
//! An outer vertex `x` knows its even-length alternating path back to the
//! root through its label:
//! - `Root`: the path is `[x]`.
//! - `Grown(v)`: `x` is the mate of inner `v`, path is `x, v` then the path
//!   of `v`'s parent.
//! - `Bridge(a, b)`: `x` was inner and turned outer when edge `ab` closed a
//!   blossom; the path runs backwards along the path of `a` from `x` to `a`,
//!   crosses to `b` and follows the path of `b`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::events::{EventLog, SearchEvent};
use crate::graph::{is_augmenting_with, AlternatingPath, Edge, Matching, Vertex};
use crate::guessing::{CallTally, Phase, SearchView};
use crate::oracle::{GuardSite, Oracle, QueryKey, QueryModel, QueryOutcome};
use crate::phase1::{Phase1Outcome, Phase1Result};
use crate::unionfind::UnionFind;

/// Shrinking candidate graph for phase 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HGraph {
    adj: Vec<BTreeSet<Vertex>>,
    live: Vec<bool>,
    mates: Vec<Option<Vertex>>,
}

impl HGraph {
    /// Vertices outside `vertices` start removed. No pruning is done here.
    pub fn new(
        mates: Vec<Option<Vertex>>,
        vertices: impl IntoIterator<Item = Vertex>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        let n = mates.len();
        let mut h = HGraph {
            adj: vec![BTreeSet::new(); n],
            live: vec![false; n],
            mates,
        };
        for v in vertices {
            h.live[v] = true;
        }
        for e in edges {
            if h.live[e.lo()] && h.live[e.hi()] {
                h.adj[e.lo()].insert(e.hi());
                h.adj[e.hi()].insert(e.lo());
            }
        }
        h
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_live(&self, v: Vertex) -> bool {
        self.live[v]
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.adj.len()).filter(|&v| self.live[v])
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: Vertex) -> &BTreeSet<Vertex> {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (u, ns) in self.adj.iter().enumerate() {
            out.extend(ns.range(u + 1..).map(|&v| Edge::new(u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_free(&self, v: Vertex) -> bool {
        self.mates[v].is_none()
    }

    pub fn remove_edge(&mut self, u: Vertex, v: Vertex) -> bool {
        let hit = self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        hit
    }

    /// Drops `v` and its edges; returns the former neighbors.
    pub fn remove_vertex(&mut self, v: Vertex) -> Vec<Vertex> {
        let ns: Vec<_> = std::mem::take(&mut self.adj[v]).into_iter().collect();
        for &x in &ns {
            self.adj[x].remove(&v);
        }
        self.live[v] = false;
        ns
    }

    /// Repeatedly deletes every non-free vertex of degree at most one
    /// together with its edge. Returns the deleted vertices in order.
    pub fn remove_dangling(&mut self) -> Vec<Vertex> {
        let all: Vec<_> = self.live_vertices().collect();
        self.prune_from(all, false)
    }

    /// `remove_dangling`, also deleting matched vertices whose matched
    /// edge has left `H`: no alternating path can pass through them.
    pub fn prune(&mut self) -> Vec<Vertex> {
        let all: Vec<_> = self.live_vertices().collect();
        self.prune_from(all, true)
    }

    fn prune_from(&mut self, mut queue: Vec<Vertex>, mate_rule: bool) -> Vec<Vertex> {
        let mut removed = Vec::new();
        queue.reverse();
        while let Some(v) = queue.pop() {
            let Some(mate) = self.mates[v] else { continue };
            if !self.live[v] {
                continue;
            }
            let dead = self.adj[v].len() <= 1 || (mate_rule && !self.adj[v].contains(&mate));
            if dead {
                queue.extend(self.remove_vertex(v));
                removed.push(v);
            }
        }
        removed
    }
}

/// Tight pairs of explored vertices, minus pairs already known absent,
/// pruned.
pub fn build_h(p1: &Phase1Result, oracle: &Oracle) -> Result<HGraph> {
    if p1.outcome == Phase1Outcome::NoAugmentingPath {
        return Err(Error::InvalidParams(
            "phase 2 needs a phase-1 search that found an augmenting path".into(),
        ));
    }
    let st = &p1.state;
    let n = st.vertex_count();
    let mates: Vec<_> = (0..n).map(|v| st.weights().mate(v)).collect();
    let verts: Vec<_> = st.vertices().collect();
    let mut edges = Vec::new();
    for (a, &u) in verts.iter().enumerate() {
        for &v in &verts[a + 1..] {
            if st.reduced_slack(u, v) == 0 && !oracle.known_absent(u, v) {
                edges.push(Edge::new(u, v));
            }
        }
    }
    let mut h = HGraph::new(mates, verts, edges);
    h.prune();
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Label {
    Root,
    Grown(Vertex),
    Bridge(Vertex, Vertex),
}

/// `S'` for one root.
#[derive(Clone, Debug)]
struct DfsState {
    label: Vec<Option<Label>>,
    inner: Vec<bool>,
    parent: Vec<Option<Vertex>>,
    uf: UnionFind,
    base: Vec<Vertex>,
}

impl DfsState {
    fn new(n: usize, root: Vertex) -> Self {
        let mut label = vec![None; n];
        label[root] = Some(Label::Root);
        DfsState {
            label,
            inner: vec![false; n],
            parent: vec![None; n],
            uf: UnionFind::new(n),
            base: (0..n).collect(),
        }
    }

    fn found(&self, v: Vertex) -> bool {
        self.label[v].is_some() || self.inner[v]
    }

    fn is_outer(&self, v: Vertex) -> bool {
        self.label[v].is_some()
    }

    fn base_of(&self, v: Vertex) -> Vertex {
        self.base[self.uf.root(v)]
    }

    /// Even alternating path from outer `x` to the root, starting at `x`.
    fn path_from(&self, x: Vertex, mates: &[Option<Vertex>]) -> Vec<Vertex> {
        let mut out = Vec::new();
        self.extend_path(x, mates, &mut out);
        out
    }

    fn extend_path(&self, x: Vertex, mates: &[Option<Vertex>], out: &mut Vec<Vertex>) {
        match self.label[x].expect("path requested from an outer vertex") {
            Label::Root => out.push(x),
            Label::Grown(v) => {
                out.push(x);
                out.push(v);
                self.extend_path(self.parent[v].expect("inner vertex has a parent"), mates, out);
            }
            Label::Bridge(a, b) => {
                let pa = self.path_from(a, mates);
                let pos = pa
                    .iter()
                    .position(|&y| y == x)
                    .expect("bridge side path passes through the vertex");
                out.extend(pa[..=pos].iter().rev());
                self.extend_path(b, mates, out);
            }
        }
    }

    fn step_up(&self, b: Vertex, mates: &[Option<Vertex>]) -> Option<Vertex> {
        let inner = mates[b]?;
        Some(self.base_of(self.parent[inner]?))
    }

    /// Contracts the odd cycle closed by outer-outer edge `uv`; returns the
    /// blossom base, the cycle, and the vertices that turned outer.
    fn contract(&mut self, u: Vertex, v: Vertex, mates: &[Option<Vertex>]) -> (Vertex, Vec<Edge>, Vec<Vertex>) {
        let mut ancestors = Vec::new();
        let mut b = Some(self.base_of(u));
        while let Some(x) = b {
            ancestors.push(x);
            b = self.step_up(x, mates);
        }
        let mut lca = self.base_of(v);
        while !ancestors.contains(&lca) {
            lca = self.step_up(lca, mates).expect("one search tree");
        }

        let side = |s: &Self, from: Vertex| {
            let mut steps = Vec::new();
            let mut b = s.base_of(from);
            while b != lca {
                let inner = mates[b].expect("non-root base is matched");
                let up = s.parent[inner].expect("inner vertex has a parent");
                steps.push((b, inner, up));
                b = s.base_of(up);
            }
            steps
        };
        let u_side = side(self, u);
        let v_side = side(self, v);

        let mut cycle: Vec<Edge> = u_side
            .iter()
            .rev()
            .flat_map(|&(b, i, up)| [Edge::new(i, up), Edge::new(b, i)])
            .collect();
        cycle.push(Edge::new(u, v));
        cycle.extend(
            v_side
                .iter()
                .flat_map(|&(b, i, up)| [Edge::new(b, i), Edge::new(i, up)]),
        );

        let mut turned = Vec::new();
        for (steps, a, c) in [(&u_side, u, v), (&v_side, v, u)] {
            for &(b, inner, _) in steps.iter().rev() {
                self.label[inner] = Some(Label::Bridge(a, c));
                self.inner[inner] = false;
                turned.push(inner);
                self.uf.union(b, lca);
                self.uf.union(inner, lca);
            }
        }
        let rep = self.uf.find(lca);
        self.base[rep] = lca;
        (lca, cycle, turned)
    }
}

struct DfsView<'a> {
    h: &'a HGraph,
    s: &'a DfsState,
}

impl SearchView for DfsView<'_> {
    fn phase(&self) -> Phase {
        Phase::Two
    }

    fn tight(&self, u: Vertex, v: Vertex) -> bool {
        self.h.has_edge(u, v)
    }

    fn same_blossom(&self, u: Vertex, v: Vertex) -> bool {
        self.s.found(u) && self.s.found(v) && self.s.base_of(u) == self.s.base_of(v)
    }

    fn found(&self, v: Vertex) -> bool {
        self.s.found(v)
    }

    fn is_outer(&self, v: Vertex) -> bool {
        self.s.is_outer(v)
    }

    fn same_tree(&self, u: Vertex, v: Vertex) -> bool {
        self.s.found(u) && self.s.found(v)
    }

    fn matched_pair(&self, u: Vertex, v: Vertex) -> bool {
        self.h.mates[u] == Some(v)
    }

    fn forms_blossom(&self, u: Vertex, v: Vertex) -> bool {
        self.s.is_outer(v) && !self.same_blossom(u, v)
    }

    fn is_free(&self, v: Vertex) -> bool {
        self.h.is_free(v)
    }
}

#[derive(Clone, Copy, Debug)]
enum FrameKind {
    Root,
    /// Outer mate of the inner vertex that was grown into.
    Grow(Vertex),
    Blossom,
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    u: Vertex,
    cursor: usize,
    kind: FrameKind,
}

impl Frame {
    fn new(u: Vertex, model: QueryModel, kind: FrameKind) -> Self {
        let cursor = match model {
            QueryModel::Matrix => 0,
            QueryModel::List => 1,
        };
        Frame { u, cursor, kind }
    }
}

#[derive(Clone, Debug)]
pub struct Phase2Result {
    pub paths: Vec<AlternatingPath>,
    /// Edge count of `H` after its initial pruning.
    pub h_edges: usize,
    pub events: EventLog,
    pub tally: CallTally,
}

/// Runs phase 2 on the structure of a successful phase-1 search.
pub fn run_phase2(oracle: &mut Oracle, p1: &Phase1Result, m: &Matching, record_events: bool) -> Result<Phase2Result> {
    let mut h = build_h(p1, oracle)?;
    let h_edges = h.edge_count();
    let n = oracle.vertex_count();
    let model = oracle.model();
    let mates = m.mates(n);
    let mut log = EventLog::new(record_events);
    let mut paths: Vec<AlternatingPath> = Vec::new();
    oracle.begin_call(Phase::Two);

    for f in 0..n {
        if mates[f].is_some() || !h.is_live(f) || h.degree(f) == 0 {
            continue;
        }
        log.push(SearchEvent::Root { root: f });
        let mut s = DfsState::new(n, f);
        let mut stack = vec![Frame::new(f, model, FrameKind::Root)];

        while let Some(top) = stack.last_mut() {
            let u = top.u;
            let next = if !h.is_live(u) {
                None
            } else {
                match model {
                    QueryModel::Matrix => {
                        let next = h.neighbors(u).range(top.cursor..).copied().find(|&v| mates[u] != Some(v));
                        if let Some(v) = next {
                            top.cursor = v + 1;
                        }
                        next
                    }
                    QueryModel::List => loop {
                        let i = top.cursor;
                        top.cursor += 1;
                        let outcome = match oracle.known_list(u, i) {
                            Some(o) => o,
                            None => {
                                let view = DfsView { h: &h, s: &s };
                                let ans = oracle.query_list(u, i, GuardSite::DfsScan, &view)?;
                                log.query(GuardSite::DfsScan, QueryKey::List { u, i }, &ans);
                                ans.outcome
                            }
                        };
                        match outcome {
                            QueryOutcome::Neighbor(v) => {
                                if h.has_edge(u, v) && mates[u] != Some(v) {
                                    break Some(v);
                                }
                            }
                            _ => break None,
                        }
                    },
                }
            };

            let Some(v) = next else {
                let frame = stack.pop().expect("non-empty stack");
                if let FrameKind::Grow(inner) = frame.kind {
                    let mut gone = Vec::new();
                    for x in [inner, frame.u] {
                        if h.is_live(x) {
                            h.remove_vertex(x);
                            gone.push(x);
                        }
                    }
                    gone.extend(h.prune());
                    if !gone.is_empty() {
                        log.push(SearchEvent::RemoveVertices { vertices: gone });
                    }
                }
                continue;
            };

            if s.inner[v] || (s.is_outer(v) && s.base_of(u) == s.base_of(v)) {
                continue;
            }

            if model == QueryModel::Matrix {
                let site = if s.found(v) {
                    GuardSite::DfsBlossom
                } else {
                    GuardSite::DfsGrow
                };
                let view = DfsView { h: &h, s: &s };
                let ans = oracle.query_matrix(u, v, site, &view)?;
                let e = Edge::new(u, v);
                log.query(site, QueryKey::Matrix { u: e.lo(), v: e.hi() }, &ans);
                if ans.outcome != QueryOutcome::Present {
                    h.remove_edge(u, v);
                    log.push(SearchEvent::RemoveEdge { u: e.lo(), v: e.hi() });
                    let gone = h.prune();
                    if !gone.is_empty() {
                        log.push(SearchEvent::RemoveVertices { vertices: gone });
                    }
                    continue;
                }
            }

            if s.is_outer(v) {
                let (base, cycle, turned) = s.contract(u, v, &mates);
                log.push(SearchEvent::Blossom { base, cycle });
                for &x in turned.iter().rev() {
                    stack.push(Frame::new(x, model, FrameKind::Blossom));
                }
                continue;
            }

            match mates[v] {
                None => {
                    let mut walk = s.path_from(u, &mates);
                    walk.reverse();
                    walk.push(v);
                    let path = AlternatingPath::new(walk);
                    if !is_augmenting_with(m, &path, |a, b| m.contains(a, b) || oracle.confirmed_edge(a, b)) {
                        return Err(Error::Inconsistent(format!(
                            "extracted path {:?} is not augmenting",
                            path.vertices()
                        )));
                    }
                    log.push(SearchEvent::PathFound {
                        path: path.vertices().to_vec(),
                    });
                    let mut gone = Vec::new();
                    for &x in path.vertices() {
                        if !h.is_live(x) {
                            return Err(Error::Inconsistent(format!(
                                "path vertex {x} already left H"
                            )));
                        }
                        h.remove_vertex(x);
                        gone.push(x);
                    }
                    gone.extend(h.prune());
                    log.push(SearchEvent::RemoveVertices { vertices: gone });
                    paths.push(path);
                    stack.clear();
                }
                Some(w) => {
                    s.inner[v] = true;
                    s.parent[v] = Some(u);
                    s.label[w] = Some(Label::Grown(v));
                    log.push(SearchEvent::Grow {
                        from: u,
                        inner: v,
                        outer: w,
                    });
                    stack.push(Frame::new(w, model, FrameKind::Grow(v)));
                }
            }
        }
    }

    if paths.is_empty() {
        return Err(Error::Inconsistent(
            "phase 2 returned no augmenting path after phase 1 certified one".into(),
        ));
    }
    let mut tally = oracle.take_tally();
    let on_path: BTreeSet<Vertex> = paths.iter().flat_map(|p| p.vertices().iter().copied()).collect();
    tally.settle_grows(|v| on_path.contains(&v));
    Ok(Phase2Result {
        paths,
        h_edges,
        events: log,
        tally,
    })
}

/// Whether `paths` are pairwise vertex-disjoint.
pub fn vertex_disjoint(paths: &[AlternatingPath]) -> bool {
    let mut seen = BTreeSet::new();
    paths
        .iter()
        .flat_map(|p| p.vertices().iter())
        .all(|&v| seen.insert(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracle::build_oracle;
    use crate::phase1::{run_phase1, Phase1Options};

    fn matching(es: &[(usize, usize)]) -> Matching {
        Matching::from_edges(es.iter().map(|&(u, v)| Edge::new(u, v))).unwrap()
    }

    fn both_phases(g: &Graph, m: &Matching, model: QueryModel, seed: u64) -> (Phase1Result, Phase2Result, Oracle) {
        let mut o = build_oracle(g.clone(), model, seed);
        let p1 = run_phase1(&mut o, m, Phase1Options::default()).unwrap();
        let p2 = run_phase2(&mut o, &p1, m, true).unwrap();
        (p1, p2, o)
    }

    #[test]
    fn dangling_chain_is_deleted() {
        // f free, a-b matched.
        let mut h = HGraph::new(
            vec![None, Some(2), Some(1)],
            0..3,
            [Edge::new(0, 1), Edge::new(1, 2)],
        );
        let gone = h.remove_dangling();
        assert_eq!(gone.len(), 2);
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn free_pendant_edge_survives() {
        let mut h = HGraph::new(vec![None, None], 0..2, [Edge::new(0, 1)]);
        assert!(h.remove_dangling().is_empty());
        assert_eq!(h.edges(), vec![Edge::new(0, 1)]);
    }

    #[test]
    fn matched_triangle_survives_degree_rule() {
        let mates = vec![Some(3), Some(4), Some(5), Some(0), Some(1), Some(2)];
        let mut h = HGraph::new(mates, 0..3, [Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)]);
        assert!(h.remove_dangling().is_empty());
        assert_eq!(h.edge_count(), 3);
    }

    #[test]
    fn single_edge_gives_one_path() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        for model in [QueryModel::Matrix, QueryModel::List] {
            let (p1, p2, _) = both_phases(&g, &Matching::new(), model, 0);
            let h = build_h(&p1, &build_oracle(g.clone(), model, 0)).unwrap();
            assert_eq!(h.edges(), vec![Edge::new(0, 1)]);
            assert_eq!(p2.paths.len(), 1);
            assert_eq!(p2.paths[0].vertices(), &[0, 1]);
        }
    }

    #[test]
    fn path_of_four_threads_the_matched_edge() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = matching(&[(1, 2)]);
        for model in [QueryModel::Matrix, QueryModel::List] {
            let (p1, p2, o) = both_phases(&g, &m, model, 1);
            let h = build_h(&p1, &o).unwrap();
            for e in [Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 3)] {
                assert!(h.has_edge(e.lo(), e.hi()) || p2.paths.len() == 1);
            }
            assert_eq!(p2.paths.len(), 1);
            assert_eq!(p2.paths[0].vertices(), &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn two_components_give_two_paths() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        for model in [QueryModel::Matrix, QueryModel::List] {
            let (_, p2, _) = both_phases(&g, &Matching::new(), model, 2);
            assert_eq!(p2.paths.len(), 2);
            assert!(vertex_disjoint(&p2.paths));
        }
    }

    #[test]
    fn path_through_a_blossom_validates() {
        // Stem 0-1 into triangle 2-3-4, free pendant 5 on 3. Every
        // augmenting path crosses the triangle the long way.
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (2, 4), (3, 4), (3, 5)]).unwrap();
        let m = matching(&[(1, 2), (3, 4)]);
        for model in [QueryModel::Matrix, QueryModel::List] {
            for seed in 0..4 {
                let (_, p2, _) = both_phases(&g, &m, model, seed);
                assert_eq!(p2.paths.len(), 1);
                assert_eq!(p2.paths[0].vertices(), &[0, 1, 2, 4, 3, 5]);
                assert!(crate::graph::is_augmenting_path(&g, &m, &p2.paths[0]));
            }
        }
    }

    #[test]
    fn rejects_failed_phase1() {
        let g = Graph::empty(3);
        let mut o = build_oracle(g, QueryModel::Matrix, 0);
        let p1 = run_phase1(&mut o, &Matching::new(), Phase1Options::default()).unwrap();
        assert!(run_phase2(&mut o, &p1, &Matching::new(), false).is_err());
    }
}
