//! Baseline attacks. Each one emits a [`RemovalPlan`] so node- and
//! edge-removal strategies are charged in the same unit: removed edges.
//!
//! Node strategies charge each edge once, to whichever endpoint is removed
//! first. Ties are always broken toward the smaller node id or the
//! lexicographically smaller edge.

mod betweenness;
mod ci;
mod corehd;
mod degree;
mod percolation;

pub use betweenness::{edge_betweenness, edge_betweenness_plan};
pub use ci::{collective_influence, ci_plan};
pub use corehd::{corehd_plan, CoreDegree};
pub use degree::{hd_plan, hda_plan};
pub use percolation::{bond_percolation_plan, site_percolation_plan};

pub use crate::plan::{Batch, Provenance, RemovalPlan};

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::{Edge, Graph};

/// Residual graph under node removal: removed nodes keep their adjacency
/// entries but are skipped, and residual degrees are kept current.
pub(crate) struct Residual<'g> {
    g: &'g Graph,
    removed: Vec<bool>,
    degree: Vec<usize>,
    edges_left: usize,
}

impl<'g> Residual<'g> {
    pub fn new(g: &'g Graph) -> Self {
        Residual {
            g,
            removed: vec![false; g.n()],
            degree: g.degrees(),
            edges_left: g.m(),
        }
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn is_removed(&self, v: usize) -> bool {
        self.removed[v]
    }

    pub fn edges_left(&self) -> usize {
        self.edges_left
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.g.neighbors(v).iter().copied().filter(move |&w| !self.removed[w])
    }

    /// Removes `v` and returns its surviving edges in ascending order.
    pub fn remove(&mut self, v: usize) -> Vec<Edge> {
        debug_assert!(!self.removed[v]);
        self.removed[v] = true;
        let mut batch = Vec::with_capacity(self.degree[v]);
        for &w in self.g.neighbors(v) {
            if !self.removed[w] {
                self.degree[w] -= 1;
                batch.push(Edge::new(v, w));
            }
        }
        batch.sort_unstable();
        self.degree[v] = 0;
        self.edges_left -= batch.len();
        batch
    }
}

/// Adaptive highest-degree removal on whatever remains of `residual`,
/// appending to `plan` until no edges are left.
pub(crate) fn finish_with_hda(residual: &mut Residual<'_>, plan: &mut RemovalPlan) {
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..residual.n())
        .filter(|&v| !residual.is_removed(v) && residual.degree(v) > 0)
        .map(|v| (residual.degree(v), Reverse(v)))
        .collect();
    while residual.edges_left() > 0 {
        let Some((d, Reverse(v))) = heap.pop() else { break };
        if residual.is_removed(v) || residual.degree(v) != d {
            continue;
        }
        let neighbors: Vec<usize> = residual.neighbors(v).collect();
        plan.push(residual.remove(v), Provenance::Node(v));
        for w in neighbors {
            if residual.degree(w) > 0 {
                heap.push((residual.degree(w), Reverse(w)));
            }
        }
    }
}
