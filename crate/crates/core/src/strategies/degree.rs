use std::cmp::Reverse;

use super::{finish_with_hda, Provenance, RemovalPlan, Residual};
use crate::graph::Graph;

/// High-degree attack: nodes by initial degree, descending.
pub fn hd_plan(g: &Graph) -> RemovalPlan {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| (Reverse(g.degree(v)), v));
    let mut residual = Residual::new(g);
    let mut plan = RemovalPlan::new(g.m());
    for v in order {
        plan.push(residual.remove(v), Provenance::Node(v));
    }
    plan
}

/// High-degree adaptive attack: the node of largest residual degree is
/// removed next. Stops once no edges are left.
pub fn hda_plan(g: &Graph) -> RemovalPlan {
    let mut residual = Residual::new(g);
    let mut plan = RemovalPlan::new(g.m());
    finish_with_hda(&mut residual, &mut plan);
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn star_center_first() {
        for plan in [hd_plan(&star(4)), hda_plan(&star(4))] {
            assert_eq!(plan.batches[0].provenance, Provenance::Node(0));
            assert_eq!(plan.batches[0].edges.len(), 4);
        }
    }

    #[test]
    fn hda_on_p4() {
        let plan = hda_plan(&path(4));
        let picks: Vec<_> = plan.batches.iter().map(|b| b.provenance).collect();
        assert_eq!(picks, vec![Provenance::Node(1), Provenance::Node(2)]);
        let sizes: Vec<_> = plan.batches.iter().map(|b| b.edges.len()).collect();
        assert_eq!(sizes, vec![2, 1]);
    }

    #[test]
    fn hd_on_regular_graph_is_id_order() {
        let plan = hd_plan(&cycle(7));
        let picks: Vec<_> = plan.batches.iter().map(|b| b.provenance).collect();
        assert_eq!(picks, (0..7).map(Provenance::Node).collect::<Vec<_>>());
    }

    #[test]
    fn hd_and_hda_charge_every_edge() {
        // 0, 1 and 2 all start at degree 3
        let g = Graph::from_edges(7, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 5), (1, 6), (2, 3)]).unwrap();
        let hd = hd_plan(&g);
        let hda = hda_plan(&g);
        assert_eq!(hd.removed_edges(), g.m());
        assert_eq!(hda.removed_edges(), g.m());
        assert_eq!(hd.batches[0].provenance, Provenance::Node(0));
        assert_eq!(hda.batches[0].provenance, Provenance::Node(0));
        // after 0 goes, residual degrees are 1:3, 2:2 so HDA takes 1 next
        assert_eq!(hda.batches[1].provenance, Provenance::Node(1));
        assert_eq!(hd.batches[1].provenance, Provenance::Node(1));
    }
}
