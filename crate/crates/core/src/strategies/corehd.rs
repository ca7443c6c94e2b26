use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{finish_with_hda, Provenance, RemovalPlan, Residual};
use crate::graph::Graph;

/// Which degree ranks 2-core members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreDegree {
    /// Degree in the whole residual graph.
    #[default]
    Residual,
    /// Degree counted among 2-core members only.
    CoreInternal,
}

/// Repeatedly removes the highest-degree node of the residual 2-core; once
/// the core is empty the remaining forest is dismantled by adaptive high
/// degree.
pub fn corehd_plan(g: &Graph, rank_by: CoreDegree) -> RemovalPlan {
    let mut residual = Residual::new(g);
    let mut plan = RemovalPlan::new(g.m());
    let mut core = Core::new(&residual);
    let key = |core: &Core, residual: &Residual<'_>, v: usize| match rank_by {
        CoreDegree::Residual => residual.degree(v),
        CoreDegree::CoreInternal => core.degree[v],
    };
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..g.n())
        .filter(|&v| core.member[v])
        .map(|v| (key(&core, &residual, v), Reverse(v)))
        .collect();
    let mut touched = Vec::new();
    while let Some((k, Reverse(v))) = heap.pop() {
        if !core.member[v] || k != key(&core, &residual, v) {
            continue;
        }
        let neighbors: Vec<usize> = residual.neighbors(v).collect();
        plan.push(residual.remove(v), Provenance::Node(v));
        touched.clear();
        core.evict(&residual, v, &mut touched);
        touched.extend(neighbors);
        for &w in &touched {
            if core.member[w] {
                heap.push((key(&core, &residual, w), Reverse(w)));
            }
        }
    }
    finish_with_hda(&mut residual, &mut plan);
    plan
}

/// Incrementally maintained 2-core of the residual graph.
struct Core {
    member: Vec<bool>,
    /// Number of residual neighbors that are core members.
    degree: Vec<usize>,
}

impl Core {
    fn new(residual: &Residual<'_>) -> Self {
        let n = residual.n();
        let mut core = Core {
            member: vec![true; n],
            degree: (0..n).map(|v| residual.degree(v)).collect(),
        };
        let mut scratch = Vec::new();
        let start: Vec<usize> = (0..n).filter(|&v| core.degree[v] < 2).collect();
        for v in start {
            if core.member[v] {
                core.evict(residual, v, &mut scratch);
            }
        }
        core
    }

    /// Takes `v` out of the core and prunes whatever drops below degree 2.
    /// Every node whose core degree changed is appended to `touched`.
    fn evict(&mut self, residual: &Residual<'_>, v: usize, touched: &mut Vec<usize>) {
        if !self.member[v] {
            return;
        }
        self.member[v] = false;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            // `residual.neighbors` skips removed nodes; a just-removed `u`
            // still needs its former neighbors updated.
            for &w in residual.g.neighbors(u) {
                if self.member[w] && !residual.is_removed(w) {
                    self.degree[w] -= 1;
                    touched.push(w);
                    if self.degree[w] < 2 {
                        self.member[w] = false;
                        stack.push(w);
                    }
                }
            }
        }
    }
}
