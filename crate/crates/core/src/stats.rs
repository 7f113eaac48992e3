//! Exact graph statistics: degree counts `D_j`, `k`-component counts `N_k`
//! and connected induced `k`-subgraph counts `H_k`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest `k` for which `H_k` is counted exactly.
pub const MAX_SUBGRAPH_ORDER: usize = 5;

/// `D_j(G)` for every degree present.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<usize, usize>,
    pub vertex_total: usize,
}

impl DegreeHistogram {
    pub fn from_degrees(degrees: impl IntoIterator<Item = usize>) -> Self {
        let mut h = DegreeHistogram::default();
        for d in degrees {
            *h.counts.entry(d).or_default() += 1;
            h.vertex_total += 1;
        }
        h
    }

    /// `D_j`.
    pub fn count(&self, j: usize) -> usize {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    /// `D_{<=j}`.
    pub fn at_most(&self, j: usize) -> usize {
        self.counts.range(..=j).map(|(_, c)| c).sum()
    }

    /// `sum_j j * D_j`, twice the edge count.
    pub fn degree_sum(&self) -> usize {
        self.counts.iter().map(|(d, c)| d * c).sum()
    }
}

/// `N_k(G)` for every component order present.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ComponentSummary {
    pub counts: BTreeMap<usize, usize>,
    pub component_total: usize,
}

impl ComponentSummary {
    /// `N_k`.
    pub fn count(&self, k: usize) -> usize {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// `sum_k k * N_k`, the vertex count.
    pub fn vertex_sum(&self) -> usize {
        self.counts.iter().map(|(k, c)| k * c).sum()
    }
}

pub fn degree_counts(g: &Graph) -> DegreeHistogram {
    DegreeHistogram::from_degrees((0..g.vertex_count()).map(|v| g.degree(v)))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

pub fn component_counts(g: &Graph) -> ComponentSummary {
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    for (u, v) in g.edges() {
        uf.union(u, v);
    }
    let mut summary = ComponentSummary::default();
    for v in 0..n {
        if uf.find(v) == v {
            *summary.counts.entry(uf.size_of(v)).or_default() += 1;
            summary.component_total += 1;
        }
    }
    summary
}

/// `H_k(G)`: number of `k`-subsets of vertices inducing a connected subgraph.
///
/// Uses the ESU extension scheme: each connected set is grown from its
/// smallest vertex, adding only vertices larger than that anchor that are
/// exclusive neighbours of the newest member.
pub fn connected_induced_count(g: &Graph, k: usize) -> Result<u64> {
    if k < 2 {
        return Err(Error::domain(format!("subgraph order must be >= 2, got {k}")));
    }
    if k > MAX_SUBGRAPH_ORDER {
        return Err(Error::capability(format!(
            "exact H_k supports k <= {MAX_SUBGRAPH_ORDER}, got {k}"
        )));
    }
    if k == 2 {
        return Ok(g.edge_count() as u64);
    }
    let mut total = 0u64;
    let mut sub = Vec::with_capacity(k);
    for v in 0..g.vertex_count() {
        let ext: Vec<u32> = g.neighbors(v).iter().copied().filter(|&u| u as usize > v).collect();
        sub.clear();
        sub.push(v);
        extend(g, k, &mut sub, ext, v, &mut total);
    }
    Ok(total)
}

fn extend(g: &Graph, k: usize, sub: &mut Vec<usize>, mut ext: Vec<u32>, anchor: usize, total: &mut u64) {
    if sub.len() == k {
        *total += 1;
        return;
    }
    while let Some(w) = ext.pop() {
        let w = w as usize;
        if sub.len() + 1 == k {
            *total += 1;
            continue;
        }
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            let ui = u as usize;
            if ui <= anchor || sub.contains(&ui) || next.contains(&u) {
                continue;
            }
            // Exclusive neighbour: not adjacent to any current member.
            if sub.iter().any(|&s| g.has_edge(s, ui)) {
                continue;
            }
            next.push(u);
        }
        sub.push(w);
        extend(g, k, sub, next, anchor, total);
        sub.pop();
    }
}
