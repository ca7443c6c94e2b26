use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{finish_with_hda, Provenance, RemovalPlan, Residual};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Collective influence `(k_i - 1) Σ_{j ∈ ∂Ball(i, l)} (k_j - 1)` of every
/// node, where the frontier holds the nodes at hop distance exactly `l`.
pub fn collective_influence(g: &Graph, radius: usize) -> Result<Vec<u64>> {
    check_radius(radius)?;
    let residual = Residual::new(g);
    let mut bfs = Bfs::new(g.n());
    Ok((0..g.n()).map(|v| bfs.ci(&residual, v, radius)).collect())
}

/// Adaptive CI attack: removes the node of largest CI on the residual graph
/// until every CI value is zero, then continues with adaptive high degree.
pub fn ci_plan(g: &Graph, radius: usize) -> Result<RemovalPlan> {
    check_radius(radius)?;
    let mut residual = Residual::new(g);
    let mut bfs = Bfs::new(g.n());
    let mut plan = RemovalPlan::new(g.m());
    let mut ci: Vec<u64> = (0..g.n()).map(|v| bfs.ci(&residual, v, radius)).collect();
    let mut heap: BinaryHeap<(u64, Reverse<usize>)> = ci
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(v, &c)| (c, Reverse(v)))
        .collect();
    let mut region = Vec::new();
    while let Some((value, Reverse(v))) = heap.pop() {
        if residual.is_removed(v) || ci[v] != value {
            continue;
        }
        // Only nodes within radius + 1 of `v` can see a different ball.
        bfs.ball(&residual, v, radius + 1, &mut region);
        plan.push(residual.remove(v), Provenance::Node(v));
        ci[v] = 0;
        for &w in &region[1..] {
            let updated = bfs.ci(&residual, w, radius);
            if updated != ci[w] {
                ci[w] = updated;
                if updated > 0 {
                    heap.push((updated, Reverse(w)));
                }
            }
        }
    }
    finish_with_hda(&mut residual, &mut plan);
    Ok(plan)
}

fn check_radius(radius: usize) -> Result<()> {
    if radius == 0 {
        Err(Error::InvalidParam("CI radius must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Depth-limited BFS with a generation stamp, so nothing is cleared
/// between searches.
struct Bfs {
    stamp: Vec<u32>,
    generation: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Bfs {
            stamp: vec![0; n],
            generation: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn start(&mut self, source: usize) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        self.stamp[source] = self.generation;
        self.frontier.clear();
        self.frontier.push(source);
    }

    /// Expands one layer; returns false when nothing new was reached.
    fn advance(&mut self, residual: &Residual<'_>) -> bool {
        self.next.clear();
        for &u in &self.frontier {
            for w in residual.neighbors(u) {
                if self.stamp[w] != self.generation {
                    self.stamp[w] = self.generation;
                    self.next.push(w);
                }
            }
        }
        std::mem::swap(&mut self.frontier, &mut self.next);
        !self.frontier.is_empty()
    }

    fn ci(&mut self, residual: &Residual<'_>, v: usize, radius: usize) -> u64 {
        let k = residual.degree(v);
        if residual.is_removed(v) || k <= 1 {
            return 0;
        }
        self.start(v);
        for _ in 0..radius {
            if !self.advance(residual) {
                return 0;
            }
        }
        let sum: u64 = self.frontier.iter().map(|&j| residual.degree(j) as u64 - 1).sum();
        (k as u64 - 1) * sum
    }

    /// All nodes within `radius` hops of `v`, starting with `v` itself.
    fn ball(&mut self, residual: &Residual<'_>, v: usize, radius: usize, out: &mut Vec<usize>) {
        out.clear();
        out.push(v);
        self.start(v);
        for _ in 0..radius {
            if !self.advance(residual) {
                break;
            }
            out.extend_from_slice(&self.frontier);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn ci_on_p4_radius_one() {
        assert_eq!(collective_influence(&path(4), 1).unwrap(), vec![0, 1, 1, 0]);
        let plan = ci_plan(&path(4), 1).unwrap();
        assert_eq!(plan.batches[0].provenance, Provenance::Node(1));
    }

    #[test]
    fn star_falls_back_to_hda() {
        assert_eq!(collective_influence(&star(4), 1).unwrap(), vec![0; 5]);
        let plan = ci_plan(&star(4), 1).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.batches[0].provenance, Provenance::Node(0));
    }

    #[test]
    fn leaves_have_zero_ci() {
        let g = Graph::from_edges(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (2, 6), (6, 7), (7, 1)]).unwrap();
        for radius in 1..4 {
            let ci = collective_influence(&g, radius).unwrap();
            assert_eq!(ci[0], 0);
            assert_eq!(ci[5], 0);
        }
    }

    #[test]
    fn frontier_is_exact_distance() {
        // P7 with radius 3 from the middle: frontier = {0, 6}, both leaves
        assert_eq!(collective_influence(&path(7), 3).unwrap()[3], 0);
        // from node 1: frontier = {4} (degree 2) -> (2-1)*(2-1)
        assert_eq!(collective_influence(&path(7), 3).unwrap()[1], 1);
    }

    #[test]
    fn radius_zero_rejected() {
        assert!(matches!(ci_plan(&path(3), 0), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn incremental_matches_full_recompute() {
        // brute force: recompute every CI on the residual graph before each pick
        let g = crate::generators::gen_er(60, 4.0, 5).unwrap();
        for radius in 1..=3 {
            let plan = ci_plan(&g, radius).unwrap();
            let mut h = g.clone();
            for batch in &plan.batches {
                let Provenance::Node(v) = batch.provenance else { panic!() };
                let ci = collective_influence(&h, radius).unwrap();
                let best = *ci.iter().max().unwrap();
                if best == 0 {
                    break;
                }
                let expected = ci.iter().position(|&c| c == best).unwrap();
                assert_eq!(v, expected, "radius {radius}");
                h.remove_node(v).unwrap();
            }
            assert_eq!(plan.removed_edges(), g.m());
        }
    }
}
