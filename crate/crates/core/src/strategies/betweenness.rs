use std::cmp::Reverse;
use std::collections::VecDeque;

use rayon::prelude::*;

use super::{Provenance, RemovalPlan};
use crate::graph::{Edge, Graph};

/// Sources per work unit. Fixed so that partial sums are always combined in
/// the same order, whatever the thread count.
const SOURCE_CHUNK: usize = 128;

/// Edge betweenness of every edge of `g`, in `g.edges()` order: the number
/// of unordered node pairs whose shortest paths cross the edge, each path
/// weighted by its share of all shortest paths for that pair.
pub fn edge_betweenness(g: &Graph) -> Vec<f64> {
    let index = EdgeIndex::new(g);
    let sources: Vec<usize> = (0..g.n()).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; g.m()];
            let mut scratch = Scratch::new(g.n());
            for &s in chunk {
                accumulate(g, &index, s, &mut scratch, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; g.m()];
    for part in partials {
        total.iter_mut().zip(part).for_each(|(t, p)| *t += p);
    }
    // every pair was counted from both endpoints
    total.iter_mut().for_each(|t| *t /= 2.0);
    total
}

/// Edges by descending betweenness, one per batch. With
/// `recompute_interval = Some(r)`, scores are recomputed on the residual
/// graph after every `r` removals.
pub fn edge_betweenness_plan(g: &Graph, recompute_interval: Option<usize>) -> RemovalPlan {
    let mut plan = RemovalPlan::new(g.m());
    match recompute_interval {
        None | Some(0) => {
            for e in ranked(g) {
                plan.push(vec![e], Provenance::Edge);
            }
        }
        Some(r) => {
            let mut residual = g.clone();
            while residual.m() > 0 {
                let take: Vec<Edge> = ranked(&residual).into_iter().take(r).collect();
                residual.remove_edges(&take).expect("ranked edges exist");
                for e in take {
                    plan.push(vec![e], Provenance::Edge);
                }
            }
        }
    }
    plan
}

/// Edges sorted by betweenness, descending. Scores equal to ~1e-9 of the
/// maximum count as ties and fall back to lexicographic edge order.
fn ranked(g: &Graph) -> Vec<Edge> {
    let scores = edge_betweenness(g);
    let max = scores.iter().copied().fold(0.0, f64::max);
    let quantum = if max > 0.0 { max * 1e-9 } else { 1.0 };
    let mut order: Vec<(i64, Edge)> = g
        .edges()
        .into_iter()
        .zip(&scores)
        .map(|(e, &s)| ((s / quantum).round() as i64, e))
        .collect();
    order.sort_by_key(|&(q, e)| (Reverse(q), e));
    order.into_iter().map(|(_, e)| e).collect()
}

/// For each adjacency slot `(v, k)`, the index of that edge in `g.edges()`.
struct EdgeIndex {
    offsets: Vec<usize>,
    slots: Vec<usize>,
}

impl EdgeIndex {
    fn new(g: &Graph) -> Self {
        let mut offsets = vec![0];
        for v in 0..g.n() {
            offsets.push(offsets[v] + g.degree(v));
        }
        let mut slots = vec![usize::MAX; offsets[g.n()]];
        let mut next = 0;
        for u in 0..g.n() {
            for (k, &v) in g.neighbors(u).iter().enumerate() {
                if v > u {
                    slots[offsets[u] + k] = next;
                    next += 1;
                }
            }
        }
        for u in 0..g.n() {
            for (k, &v) in g.neighbors(u).iter().enumerate() {
                if v < u {
                    let pos = g.neighbors(v).binary_search(&u).expect("symmetric adjacency");
                    slots[offsets[u] + k] = slots[offsets[v] + pos];
                }
            }
        }
        EdgeIndex { offsets, slots }
    }

    fn id(&self, v: usize, k: usize) -> usize {
        self.slots[self.offsets[v] + k]
    }
}

struct Scratch {
    dist: Vec<usize>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            dist: vec![usize::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: VecDeque::new(),
        }
    }
}

/// One source of the single-source dependency accumulation.
fn accumulate(g: &Graph, index: &EdgeIndex, s: usize, sc: &mut Scratch, acc: &mut [f64]) {
    sc.order.clear();
    sc.dist[s] = 0;
    sc.sigma[s] = 1.0;
    sc.queue.push_back(s);
    while let Some(v) = sc.queue.pop_front() {
        sc.order.push(v);
        for &w in g.neighbors(v) {
            if sc.dist[w] == usize::MAX {
                sc.dist[w] = sc.dist[v] + 1;
                sc.queue.push_back(w);
            }
            if sc.dist[w] == sc.dist[v] + 1 {
                sc.sigma[w] += sc.sigma[v];
            }
        }
    }
    for &w in sc.order.iter().rev() {
        let coeff = (1.0 + sc.delta[w]) / sc.sigma[w];
        for (k, &v) in g.neighbors(w).iter().enumerate() {
            if sc.dist[v] != usize::MAX && sc.dist[v] + 1 == sc.dist[w] {
                let c = sc.sigma[v] * coeff;
                acc[index.id(w, k)] += c;
                sc.delta[v] += c;
            }
        }
    }
    for &v in &sc.order {
        sc.dist[v] = usize::MAX;
        sc.sigma[v] = 0.0;
        sc.delta[v] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    /// Pair-by-pair enumeration: for each pair (s, t), the fraction of
    /// shortest s-t paths through edge (a, b) is
    /// sigma(s,a) sigma(b,t) / sigma(s,t) when d(s,a) + 1 + d(b,t) = d(s,t).
    fn brute_force(g: &Graph) -> Vec<f64> {
        let n = g.n();
        let mut dist = vec![vec![usize::MAX; n]; n];
        let mut count = vec![vec![0.0; n]; n];
        for s in 0..n {
            dist[s][s] = 0;
            count[s][s] = 1.0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in g.neighbors(v) {
                    if dist[s][w] == usize::MAX {
                        dist[s][w] = dist[s][v] + 1;
                        queue.push_back(w);
                    }
                    if dist[s][w] == dist[s][v] + 1 {
                        count[s][w] += count[s][v];
                    }
                }
            }
        }
        g.edges()
            .iter()
            .map(|e| {
                let mut total = 0.0;
                for s in 0..n {
                    for t in s + 1..n {
                        if dist[s][t] == usize::MAX {
                            continue;
                        }
                        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                            if dist[s][a] != usize::MAX
                                && dist[b][t] != usize::MAX
                                && dist[s][a] + 1 + dist[b][t] == dist[s][t]
                            {
                                total += count[s][a] * count[b][t] / count[s][t];
                            }
                        }
                    }
                }
                total
            })
            .collect()
    }

    #[test]
    fn p3_edges_carry_two_pairs() {
        assert_eq!(edge_betweenness(&path(3)), vec![2.0, 2.0]);
    }

    #[test]
    fn barbell_bridge_is_first() {
        let g = barbell();
        let scores = edge_betweenness(&g);
        let bridge = g.edges().iter().position(|&e| e == Edge::new(2, 3)).unwrap();
        assert_eq!(scores[bridge], 9.0);
        assert!(scores.iter().enumerate().all(|(i, &s)| i == bridge || s < 9.0));
        let plan = edge_betweenness_plan(&g, None);
        assert_eq!(plan.batches[0].edges, vec![Edge::new(2, 3)]);
    }

    #[test]
    fn complete_graph_ties_are_lexicographic() {
        let g = complete(5);
        let plan = edge_betweenness_plan(&g, None);
        let order: Vec<Edge> = plan.edges().collect();
        assert_eq!(order, g.edges());
    }

    #[test]
    fn matches_pairwise_enumeration() {
        for seed in 0..5 {
            let g = crate::generators::gen_er(25, 3.0, seed).unwrap();
            let fast = edge_betweenness(&g);
            let slow = brute_force(&g);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn adaptive_mode_recomputes() {
        let g = barbell();
        let plan = edge_betweenness_plan(&g, Some(1));
        assert_eq!(plan.len(), g.m());
        assert_eq!(plan.batches[0].edges, vec![Edge::new(2, 3)]);
        plan.validate(&g).unwrap();
        // after the bridge, every triangle edge carries one pair: lexicographic
        let rest: Vec<Edge> = plan.edges().skip(1).take(1).collect();
        assert_eq!(rest, vec![Edge::new(0, 1)]);
    }
}
