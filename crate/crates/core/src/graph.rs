//! Undirected simple graphs with the handful of structural queries every
//! attack strategy needs: components, degrees, edge deletion and the 2-core.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// Canonicalizes the endpoint order. Panics on a self-loop.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "self-loop {a}-{a} is not an edge of a simple graph");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

/// Undirected simple graph over nodes `0..n`.
///
/// Adjacency lists are kept sorted, which makes membership tests a binary
/// search and keeps every traversal order deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    m: usize,
    labels: Option<Vec<String>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            m: 0,
            labels: None,
        }
    }

    /// Builds a graph from arbitrary pairs. Self-loops are dropped and
    /// duplicates (in either direction) collapsed.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n {
                return Err(Error::UnknownNode(a));
            }
            if b >= n {
                return Err(Error::UnknownNode(b));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut twice = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Graph {
            adjacency,
            m: twice / 2,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Original identifier of a node, or its index when the graph was not
    /// loaded from a file.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            2.0 * self.m as f64 / self.n() as f64
        }
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        e.v < self.n() && self.adjacency[e.u].binary_search(&e.v).is_ok()
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.m);
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list.iter().filter(|&&v| v > u) {
                out.push(Edge { u, v });
            }
        }
        out
    }

    pub fn connected_components(&self) -> ComponentReport {
        ComponentReport::new(components_by_bfs(self), self.n())
    }

    /// Fraction of nodes in the largest component, relative to `n`.
    pub fn gcc_fraction(&self) -> f64 {
        self.connected_components().gcc_fraction
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.connected_components().components.len() == 1
    }

    /// Deletes every edge of `edges`. Fails without modifying the graph if
    /// any edge is absent or listed twice.
    pub fn remove_edges(&mut self, edges: &[Edge]) -> Result<()> {
        let unique: BTreeSet<Edge> = edges.iter().copied().collect();
        if let Some(&e) = edges.iter().find(|e| !self.has_edge(**e)) {
            return Err(Error::MissingEdge(e));
        }
        if unique.len() != edges.len() {
            let mut seen = BTreeSet::new();
            let dup = edges.iter().find(|e| !seen.insert(**e)).unwrap();
            return Err(Error::MissingEdge(*dup));
        }
        for e in &unique {
            self.unlink(*e);
        }
        Ok(())
    }

    /// Strips all edges of `v`, leaving it as an isolated vertex so that node
    /// fractions stay relative to the original node count.
    pub fn remove_node(&mut self, v: usize) -> Result<Vec<Edge>> {
        if v >= self.n() {
            return Err(Error::UnknownNode(v));
        }
        let neighbors = std::mem::take(&mut self.adjacency[v]);
        let mut removed = Vec::with_capacity(neighbors.len());
        for w in neighbors {
            let list = &mut self.adjacency[w];
            if let Ok(pos) = list.binary_search(&v) {
                list.remove(pos);
            }
            removed.push(Edge::new(v, w));
        }
        self.m -= removed.len();
        Ok(removed)
    }

    fn unlink(&mut self, e: Edge) {
        let a = &mut self.adjacency[e.u];
        let pos = a.binary_search(&e.v).expect("edge present");
        a.remove(pos);
        let b = &mut self.adjacency[e.v];
        let pos = b.binary_search(&e.u).expect("edge present");
        b.remove(pos);
        self.m -= 1;
    }

    /// Node set of the 2-core, by repeatedly pruning nodes of degree <= 1.
    pub fn two_core(&self) -> BTreeSet<usize> {
        self.k_core(2)
    }

    pub fn k_core(&self, k: usize) -> BTreeSet<usize> {
        let mut deg = self.degrees();
        let mut alive = vec![true; self.n()];
        let mut queue: Vec<usize> = (0..self.n()).filter(|&v| deg[v] < k).collect();
        for &v in &queue {
            alive[v] = false;
        }
        while let Some(v) = queue.pop() {
            for &w in &self.adjacency[v] {
                if alive[w] {
                    deg[w] -= 1;
                    if deg[w] < k {
                        alive[w] = false;
                        queue.push(w);
                    }
                }
            }
        }
        (0..self.n()).filter(|&v| alive[v]).collect()
    }

    /// Subgraph induced by `nodes` (sorted ascending), reindexed densely in
    /// that order. Labels are carried over.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = i;
        }
        let adjacency: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adjacency[v]
                    .iter()
                    .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        let m = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        let labels = self
            .labels
            .as_ref()
            .map(|l| nodes.iter().map(|&v| l[v].clone()).collect());
        Graph {
            adjacency,
            m,
            labels,
        }
    }

    /// Induced subgraph on the largest component. Ties go to the component
    /// holding the smallest node id.
    pub fn extract_gcc(&self) -> Graph {
        let report = self.connected_components();
        match report.components.first() {
            Some(gcc) => self.induced_subgraph(gcc),
            None => Graph::empty(0),
        }
    }
}

/// Connected components sorted by size descending; ties broken by the
/// smallest node id each component contains.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    /// Each component's nodes in ascending order.
    pub components: Vec<Vec<usize>>,
    pub gcc_fraction: f64,
}

impl ComponentReport {
    fn new(mut components: Vec<Vec<usize>>, n: usize) -> Self {
        for c in &mut components {
            c.sort_unstable();
        }
        components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let gcc_fraction = match components.first() {
            Some(c) if n > 0 => c.len() as f64 / n as f64,
            _ => 0.0,
        };
        ComponentReport {
            components,
            gcc_fraction,
        }
    }

    pub fn largest(&self) -> Option<&[usize]> {
        self.components.first().map(Vec::as_slice)
    }
}

fn components_by_bfs(g: &Graph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        out.push(comp);
    }
    out
}
