use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Provenance, RemovalPlan, Residual};
use crate::graph::Graph;

/// Nodes in uniformly random order; each batch holds the edges the node
/// still has at its turn, so later batches may be empty.
pub fn site_percolation_plan(g: &Graph, seed: u64) -> RemovalPlan {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut residual = Residual::new(g);
    let mut plan = RemovalPlan::new(g.m());
    for v in order {
        plan.push(residual.remove(v), Provenance::Node(v));
    }
    plan
}

/// Edges in uniformly random order, one per batch.
pub fn bond_percolation_plan(g: &Graph, seed: u64) -> RemovalPlan {
    let mut edges = g.edges();
    edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut plan = RemovalPlan::new(g.m());
    for e in edges {
        plan.push(vec![e], Provenance::Random);
    }
    plan
}
