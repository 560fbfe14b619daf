//! Query-free graph, matching and alternating-path machinery.
//!
//! Vertices are dense labels `0..n`. Edges are stored normalized as
//! `(min, max)` so set membership and iteration order are deterministic.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// An undirected edge, normalized so that `lo() < hi()`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(Vertex, Vertex);

impl Edge {
    /// Builds a normalized edge. Self-loops are a caller bug.
    pub fn new(u: Vertex, v: Vertex) -> Self {
        debug_assert_ne!(u, v, "self-loop {u}-{v}");
        if u < v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn lo(&self) -> Vertex {
        self.0
    }

    pub fn hi(&self) -> Vertex {
        self.1
    }

    pub fn has(&self, v: Vertex) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint that is not `v`.
    pub fn other(&self, v: Vertex) -> Vertex {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// A simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<Edge>,
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range labels.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::VertexOutOfRange {
                vertex: u.max(v),
                n: self.n,
            });
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let e = Edge::new(u, v);
        if !self.edges.insert(e) {
            return Err(Error::DuplicateEdge(u, v));
        }
        let pos = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(pos, v);
        let pos = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pos, u);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u != v && u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Neighbors of `v` in ascending label order.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    /// Parses the edge-list text format: a header line `n m` followed by
    /// `m` lines `u v` with 0-based labels.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lineno, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, m) = parse_pair(header, lineno + 1)?;
        let mut g = Graph::empty(n);
        let mut seen = 0;
        for (lineno, line) in lines {
            let (u, v) = parse_pair(line, lineno + 1)?;
            g.add_edge(u, v)?;
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {seen}"),
            });
        }
        Ok(g)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            out.push_str(&format!("{} {}\n", e.lo(), e.hi()));
        }
        out
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Graph::parse_edge_list(s)
    }
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("{e}"),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line: lineno,
            msg: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Role of a vertex relative to one search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexRole {
    Free,
    Inner,
    Outer,
    Unreached,
}

/// A set of pairwise non-adjacent edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    edges: BTreeSet<Edge>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matching, rejecting edges that share an endpoint.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> Result<Self> {
        let mut m = Matching::new();
        let mut used = BTreeSet::new();
        for e in edges {
            if !used.insert(e.lo()) || !used.insert(e.hi()) {
                return Err(Error::NotAMatching(e));
            }
            m.edges.insert(e);
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains(&self, u: Vertex, v: Vertex) -> bool {
        u != v && self.edges.contains(&Edge::new(u, v))
    }

    /// Dense partner table: `mates[v] = Some(u)` iff `uv` is matched.
    pub fn mates(&self, n: usize) -> Vec<Option<Vertex>> {
        let mut mates = vec![None; n];
        for e in &self.edges {
            mates[e.lo()] = Some(e.hi());
            mates[e.hi()] = Some(e.lo());
        }
        mates
    }

    pub fn is_free(&self, v: Vertex) -> bool {
        !self.edges.iter().any(|e| e.has(v))
    }
}

/// A walk stored as its vertex sequence; edge parity is recomputed
/// against a matching when needed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlternatingPath {
    vertices: Vec<Vertex>,
}

impl AlternatingPath {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        AlternatingPath { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.vertices.windows(2).map(|w| Edge::new(w[0], w[1]))
    }

    pub fn endpoints(&self) -> Option<(Vertex, Vertex)> {
        Some((*self.vertices.first()?, *self.vertices.last()?))
    }
}

pub fn symmetric_difference(a: &BTreeSet<Edge>, b: &BTreeSet<Edge>) -> BTreeSet<Edge> {
    a.symmetric_difference(b).copied().collect()
}

/// True iff every matched edge is in `g` and no two share a vertex.
pub fn validate_matching(g: &Graph, m: &Matching) -> bool {
    let mut used = vec![false; g.vertex_count()];
    for e in m.edges() {
        if !g.has_edge(e.lo(), e.hi()) {
            return false;
        }
        for v in [e.lo(), e.hi()] {
            if used[v] {
                return false;
            }
            used[v] = true;
        }
    }
    true
}

/// Checks that `p` is a simple path of `g` between two free vertices whose
/// edges alternate unmatched/matched, starting and ending unmatched.
pub fn is_augmenting_path(g: &Graph, m: &Matching, p: &AlternatingPath) -> bool {
    is_augmenting_with(m, p, |u, v| g.has_edge(u, v))
}

/// [`is_augmenting_path`] against an arbitrary edge predicate, so callers
/// that only know part of the graph can validate against what they know.
pub fn is_augmenting_with<F>(m: &Matching, p: &AlternatingPath, mut has_edge: F) -> bool
where
    F: FnMut(Vertex, Vertex) -> bool,
{
    let vs = p.vertices();
    if vs.len() < 2 || !vs.len().is_multiple_of(2) {
        return false;
    }
    let mut seen = BTreeSet::new();
    if !vs.iter().all(|v| seen.insert(*v)) {
        return false;
    }
    let (a, b) = p.endpoints().unwrap();
    if !m.is_free(a) || !m.is_free(b) {
        return false;
    }
    vs.windows(2).enumerate().all(|(i, w)| {
        let matched = m.contains(w[0], w[1]);
        w[0] != w[1] && has_edge(w[0], w[1]) && matched == (i % 2 == 1)
    })
}

/// Flips `m` along each path. The paths must be vertex-disjoint augmenting
/// paths relative to `m`; anything else is rejected.
pub fn augment(g: &Graph, m: &Matching, saps: &[AlternatingPath]) -> Result<Matching> {
    augment_with(m, saps, |u, v| g.has_edge(u, v))
}

pub fn augment_with<F>(m: &Matching, saps: &[AlternatingPath], mut has_edge: F) -> Result<Matching>
where
    F: FnMut(Vertex, Vertex) -> bool,
{
    let mut used = BTreeSet::new();
    let mut union = BTreeSet::new();
    for p in saps {
        if !is_augmenting_with(m, p, &mut has_edge) {
            return Err(Error::NotAugmenting(p.vertices().to_vec()));
        }
        for &v in p.vertices() {
            if !used.insert(v) {
                return Err(Error::OverlappingPaths(v));
            }
        }
        union.extend(p.edges());
    }
    let edges = symmetric_difference(m.edge_set(), &union);
    let out = Matching { edges };
    debug_assert_eq!(out.len(), m.len() + saps.len());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(es: &[(usize, usize)]) -> BTreeSet<Edge> {
        es.iter().map(|&(u, v)| Edge::new(u, v)).collect()
    }

    fn path4() -> Graph {
        Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn symmetric_difference_cases() {
        assert_eq!(symmetric_difference(&set(&[(0, 1)]), &set(&[])), set(&[(0, 1)]));
        assert!(symmetric_difference(&set(&[(0, 1)]), &set(&[(0, 1)])).is_empty());
        let m = set(&[(1, 2)]);
        let p = set(&[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(symmetric_difference(&m, &p), set(&[(0, 1), (2, 3)]));
    }

    #[test]
    fn augment_cases() {
        let g = path4();
        let m = Matching::from_edges([Edge::new(1, 2)]).unwrap();
        let out = augment(&g, &m, &[AlternatingPath::new(vec![0, 1, 2, 3])]).unwrap();
        assert_eq!(out.edge_set(), &set(&[(0, 1), (2, 3)]));
        assert_eq!(out.len(), 2);

        assert!(augment(&g, &Matching::new(), &[]).unwrap().is_empty());

        let single = augment(&g, &Matching::new(), &[AlternatingPath::new(vec![0, 1])]).unwrap();
        assert_eq!(single.edge_set(), &set(&[(0, 1)]));
    }

    #[test]
    fn augment_rejects_bad_paths() {
        let g = path4();
        let m = Matching::new();
        let overlapping = [AlternatingPath::new(vec![0, 1]), AlternatingPath::new(vec![1, 2])];
        assert!(matches!(augment(&g, &m, &overlapping), Err(Error::OverlappingPaths(1))));
        let m = Matching::from_edges([Edge::new(1, 2)]).unwrap();
        assert!(matches!(
            augment(&g, &m, &[AlternatingPath::new(vec![1, 2])]),
            Err(Error::NotAugmenting(_))
        ));
    }

    #[test]
    fn validate_matching_cases() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(validate_matching(&tri, &Matching::from_edges([Edge::new(0, 1)]).unwrap()));
        // Matching::from_edges refuses shared vertices, so build the bad set by hand.
        let bad = Matching {
            edges: set(&[(0, 1), (1, 2)]),
        };
        assert!(!validate_matching(&tri, &bad));
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        assert!(!validate_matching(&g, &Matching::from_edges([Edge::new(2, 3)]).unwrap()));
    }

    #[test]
    fn augmenting_path_checks() {
        let m = Matching::from_edges([Edge::new(1, 2)]).unwrap();
        let g = path4();
        assert!(is_augmenting_path(&g, &m, &AlternatingPath::new(vec![0, 1, 2, 3])));

        // 0-1 and 1-3 are both unmatched.
        let g2 = Graph::from_edges(4, [(0, 1), (1, 3), (1, 2)]).unwrap();
        assert!(!is_augmenting_path(&g2, &Matching::new(), &AlternatingPath::new(vec![0, 1, 3])));

        // Endpoint 1 is matched.
        assert!(!is_augmenting_path(&g, &m, &AlternatingPath::new(vec![0, 1])));
    }

    #[test]
    fn graph_rejects_invalid_edges() {
        assert!(matches!(Graph::from_edges(3, [(1, 1)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, [(0, 4), (1, 2), (3, 1)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "5 3\n0 4\n1 2\n1 3\n");
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        assert!(Graph::parse_edge_list("3 2\n0 1\n").is_err());
        assert!(Graph::parse_edge_list("3 1\n0 x\n").is_err());
    }

    #[test]
    fn neighbor_lists_are_sorted() {
        let g = Graph::from_edges(4, [(0, 3), (0, 1), (0, 2)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.degree(3), 1);
    }
}
