use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Where a batch of removed edges came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    /// All surviving edges of one node.
    Node(usize),
    /// A ranked or computed edge selection.
    Edge,
    /// A uniformly random edge.
    Random,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Node(v) => write!(f, "node:{v}"),
            Provenance::Edge => f.write_str("edge"),
            Provenance::Random => f.write_str("random"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "edge" => Ok(Provenance::Edge),
            "random" => Ok(Provenance::Random),
            _ => s
                .strip_prefix("node:")
                .and_then(|v| v.parse().ok())
                .map(Provenance::Node)
                .ok_or_else(|| format!("unknown provenance `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub edges: Vec<Edge>,
    pub provenance: Provenance,
}

/// Ordered removal events, the common output of every attack strategy.
/// Cost after batch `i` is the cumulative edge count over `total_edges`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RemovalPlan {
    pub batches: Vec<Batch>,
    pub total_edges: usize,
}

impl RemovalPlan {
    pub fn new(total_edges: usize) -> Self {
        RemovalPlan {
            batches: Vec::new(),
            total_edges,
        }
    }

    pub fn push(&mut self, edges: Vec<Edge>, provenance: Provenance) {
        self.batches.push(Batch { edges, provenance });
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn removed_edges(&self) -> usize {
        self.batches.iter().map(|b| b.edges.len()).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.batches.iter().flat_map(|b| b.edges.iter().copied())
    }

    /// Cumulative cost fraction after each batch.
    pub fn cumulative_costs(&self) -> Vec<f64> {
        let mut acc = 0;
        self.batches
            .iter()
            .map(|b| {
                acc += b.edges.len();
                cost_fraction(acc, self.total_edges)
            })
            .collect()
    }

    /// Keeps the longest prefix of whole batches whose cost stays within
    /// `budget` (a fraction of `total_edges`).
    pub fn truncated(&self, budget: f64) -> RemovalPlan {
        let limit = budget * self.total_edges as f64;
        let mut acc = 0;
        let batches = self
            .batches
            .iter()
            .take_while(|b| {
                acc += b.edges.len();
                acc as f64 <= limit + 1e-9
            })
            .cloned()
            .collect();
        RemovalPlan {
            batches,
            total_edges: self.total_edges,
        }
    }

    /// Exactly `floor(budget * total_edges)` edges in plan order, splitting
    /// the batch that crosses the budget.
    pub fn edge_prefix(&self, budget: f64) -> Vec<Edge> {
        let count = (budget * self.total_edges as f64 + 1e-9).floor() as usize;
        self.edges().take(count).collect()
    }

    /// Checks that every edge exists in `g` and appears in at most one batch.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.removed_edges());
        for (i, batch) in self.batches.iter().enumerate() {
            for &e in &batch.edges {
                if !g.has_edge(e) || !seen.insert(e) {
                    return Err(Error::PlanMismatch { batch: i, edge: e });
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn cost_fraction(removed: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        removed as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> RemovalPlan {
        let mut p = RemovalPlan::new(5);
        p.push(vec![Edge::new(0, 1), Edge::new(1, 2)], Provenance::Node(1));
        p.push(vec![], Provenance::Node(0));
        p.push(vec![Edge::new(2, 3), Edge::new(3, 4), Edge::new(4, 5)], Provenance::Node(3));
        p
    }

    #[test]
    fn costs_and_truncation() {
        let p = plan();
        assert_eq!(p.cumulative_costs(), vec![0.4, 0.4, 1.0]);
        assert_eq!(p.truncated(0.5).len(), 2);
        assert_eq!(p.truncated(0.0).len(), 0);
        assert_eq!(p.truncated(1.0), p);
        assert_eq!(p.edge_prefix(0.6).len(), 3);
        assert_eq!(p.edge_prefix(0.0).len(), 0);
    }

    #[test]
    fn provenance_round_trip() {
        for p in [Provenance::Node(17), Provenance::Edge, Provenance::Random] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
        assert!("node:x".parse::<Provenance>().is_err());
    }

    #[test]
    fn validation_catches_duplicates() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut p = RemovalPlan::new(2);
        p.push(vec![Edge::new(0, 1)], Provenance::Edge);
        assert!(p.validate(&g).is_ok());
        p.push(vec![Edge::new(0, 1)], Provenance::Edge);
        assert!(matches!(p.validate(&g), Err(Error::PlanMismatch { batch: 1, .. })));
    }
}
