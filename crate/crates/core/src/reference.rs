//! Exhaustive answers for small graphs, used to check the query-model
//! algorithm. Reads the whole graph directly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_augmenting_path, AlternatingPath, Edge, Graph, Matching, Vertex};

/// Largest vertex count the exhaustive routines accept.
pub const MAX_BRUTE_N: usize = 24;

fn guard(g: &Graph) -> Result<()> {
    if g.vertex_count() > MAX_BRUTE_N {
        return Err(Error::TooLarge(format!(
            "{} vertices, limit {MAX_BRUTE_N}",
            g.vertex_count()
        )));
    }
    Ok(())
}

/// A maximum matching found by memoized search over vertex subsets.
pub fn brute_force_matching(g: &Graph) -> Result<Matching> {
    guard(g)?;
    let mut full = 0u32;
    for v in 0..g.vertex_count() {
        if g.degree(v) > 0 {
            full |= 1 << v;
        }
    }
    let mut memo = HashMap::new();
    best(g, full, &mut memo);
    let mut edges = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let target = best(g, mask, &mut memo);
        if best(g, rest, &mut memo) == target {
            mask = rest;
            continue;
        }
        let u = g
            .neighbors(v)
            .iter()
            .copied()
            .find(|&u| rest & (1 << u) != 0 && 1 + best(g, rest & !(1 << u), &mut memo) == target)
            .expect("memo is consistent");
        edges.push(Edge::new(u, v));
        mask = rest & !(1 << u);
    }
    Matching::from_edges(edges)
}

fn best(g: &Graph, mask: u32, memo: &mut HashMap<u32, usize>) -> usize {
    if mask == 0 {
        return 0;
    }
    if let Some(&b) = memo.get(&mask) {
        return b;
    }
    let v = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << v);
    let mut out = best(g, rest, memo);
    for &u in g.neighbors(v) {
        if rest & (1 << u) != 0 {
            out = out.max(1 + best(g, rest & !(1 << u), memo));
        }
    }
    memo.insert(mask, out);
    out
}

pub fn brute_force_size(g: &Graph) -> Result<usize> {
    Ok(brute_force_matching(g)?.len())
}

/// Depth-first search for an augmenting path of exactly `len` edges that
/// avoids `blocked`.
fn find_path_of_len(g: &Graph, m: &Matching, len: usize, blocked: &[bool]) -> Option<Vec<Vertex>> {
    let n = g.vertex_count();
    let mates = m.mates(n);
    let mut on = blocked.to_vec();
    for s in 0..n {
        if mates[s].is_some() || on[s] {
            continue;
        }
        let mut path = vec![s];
        on[s] = true;
        if extend(g, &mates, len, &mut path, &mut on) {
            return Some(path);
        }
        on[s] = false;
    }
    None
}

fn extend(g: &Graph, mates: &[Option<Vertex>], len: usize, path: &mut Vec<Vertex>, on: &mut [bool]) -> bool {
    let x = *path.last().unwrap();
    let steps = path.len() - 1;
    if steps == len {
        return mates[x].is_none() && steps % 2 == 1;
    }
    let next: Vec<Vertex> = if steps % 2 == 1 {
        mates[x].into_iter().collect()
    } else {
        g.neighbors(x).iter().copied().filter(|&y| mates[x] != Some(y)).collect()
    };
    for y in next {
        if on[y] {
            continue;
        }
        // A free vertex can only end the path.
        if mates[y].is_none() && steps + 1 != len {
            continue;
        }
        on[y] = true;
        path.push(y);
        if extend(g, mates, len, path, on) {
            return true;
        }
        path.pop();
        on[y] = false;
    }
    false
}

/// Length in edges of a shortest augmenting path, or `None` when `m` is
/// maximum.
pub fn shortest_aug_path_length(g: &Graph, m: &Matching) -> Result<Option<usize>> {
    if brute_force_size(g)? == m.len() {
        return Ok(None);
    }
    let blocked = vec![false; g.vertex_count()];
    for len in (1..g.vertex_count()).step_by(2) {
        if find_path_of_len(g, m, len, &blocked).is_some() {
            return Ok(Some(len));
        }
    }
    Err(Error::Inconsistent(
        "matching is not maximum but no augmenting path exists".into(),
    ))
}

/// How a set of augmenting paths compares with the shortest ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SapCheck {
    /// Every path augments `m` in `g`.
    pub valid: bool,
    pub disjoint: bool,
    /// Every path has the shortest possible length.
    pub shortest: bool,
    /// No further shortest path avoids all of them.
    pub maximal: bool,
}

impl SapCheck {
    pub fn all(&self) -> bool {
        self.valid && self.disjoint && self.shortest && self.maximal
    }
}

pub fn check_sap_set(g: &Graph, m: &Matching, paths: &[AlternatingPath]) -> Result<SapCheck> {
    let valid = paths.iter().all(|p| is_augmenting_path(g, m, p));
    let mut blocked = vec![false; g.vertex_count()];
    let mut disjoint = true;
    for p in paths {
        for &v in p.vertices() {
            disjoint &= !blocked[v];
            blocked[v] = true;
        }
    }
    let (shortest, maximal) = match shortest_aug_path_length(g, m)? {
        None => (paths.is_empty(), true),
        Some(l) => (
            paths.iter().all(|p| p.len() == l),
            find_path_of_len(g, m, l, &blocked).is_none(),
        ),
    };
    Ok(SapCheck {
        valid,
        disjoint,
        shortest,
        maximal,
    })
}
