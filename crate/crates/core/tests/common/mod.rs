//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use dismantle::Graph;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph: a random recursive tree plus each remaining pair with
/// probability `p`.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Any graph, connected or not.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn family(kind: &str, n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = match kind {
        "complete" => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        "path" => (1..n).map(|v| (v - 1, v)).collect(),
        "cycle" => (0..n).map(|v| (v, (v + 1) % n)).collect(),
        _ => panic!("unknown family {kind}"),
    };
    Graph::from_edges(n, edges).unwrap()
}

pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for e in g.edges() {
        w[(e.u, e.v)] = 1.0;
        w[(e.v, e.u)] = 1.0;
    }
    w
}

/// Eigenvalues of `D^{-1/2} (D - W) D^{-1/2}`, ascending.
pub fn normalized_laplacian_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let w = adjacency(g);
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let di = g.degree(i) as f64;
            let dj = g.degree(j) as f64;
            let delta = if i == j { 1.0 } else { 0.0 };
            l[(i, j)] = delta - w[(i, j)] / (di * dj).sqrt();
        }
    }
    let mut eig = SymmetricEigen::new(l).eigenvalues.as_slice().to_vec();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `x^T (D - W) x / x^T D x` for the indicator that is 1 on `side` and
/// `-assoc(A) / assoc(B)` elsewhere.
pub fn indicator_quotient(g: &Graph, side: &[bool]) -> f64 {
    let n = g.n();
    let w = adjacency(g);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, (0..n).map(|v| g.degree(v) as f64)));
    let assoc = |s: bool| (0..n).filter(|&v| side[v] == s).map(|v| g.degree(v) as f64).sum::<f64>();
    let ratio = assoc(true) / assoc(false);
    let x = nalgebra::DVector::from_iterator(n, (0..n).map(|v| if side[v] { 1.0 } else { -ratio }));
    let lap = &d - &w;
    (x.transpose() * lap * &x)[(0, 0)] / (x.transpose() * d * &x)[(0, 0)]
}

/// Minimum Ncut over all bipartitions with non-empty sides, by enumeration.
pub fn brute_force_min_ncut(g: &Graph) -> (f64, Vec<usize>) {
    let n = g.n();
    assert!(n <= 20);
    let mut best = (f64::INFINITY, Vec::new());
    // node n-1 always on the second side, so each split is seen once
    for mask in 1u32..(1 << (n - 1)) {
        let side: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if let Ok(value) = dismantle::spectral::ncut_value(g, &side) {
            if value < best.0 - 1e-12 {
                best = (value, side);
            }
        }
    }
    best
}

/// Largest component size by breadth-first search, ignoring `removed` nodes.
pub fn largest_component(g: &Graph, removed: &[bool]) -> usize {
    let n = g.n();
    let mut seen = removed.to_vec();
    let mut best = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        best = best.max(size);
    }
    best
}
