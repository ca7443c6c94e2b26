//! GCC-versus-cost curves and the area under them.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::plan::{cost_fraction, RemovalPlan};
use crate::unionfind::UnionFind;

pub const DEFAULT_THRESHOLD: f64 = 0.01;

/// Right-continuous step function from cumulative cost to GCC node
/// fraction. The first breakpoint is at cost 0; the last value holds up to
/// cost 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GccCurve {
    pub breakpoints: Vec<(f64, f64)>,
}

impl GccCurve {
    /// A curve that never drops: nothing was removed.
    pub fn flat(f: f64) -> Self {
        GccCurve {
            breakpoints: vec![(0.0, f)],
        }
    }

    /// Value at cost `x`.
    pub fn at(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&(bx, _)| bx <= x);
        self.breakpoints[idx.saturating_sub(1)].1
    }

    pub fn final_value(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |p| p.1)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,f")?;
        for (x, f) in &self.breakpoints {
            writeln!(w, "{x},{f}")?;
        }
        Ok(())
    }
}

/// Applies the batches of `plan` in order and records the GCC fraction
/// (relative to `g.n()`) after each non-empty batch, stopping once it falls
/// below `threshold`.
pub fn execute_plan(g: &Graph, plan: &RemovalPlan, threshold: f64) -> Result<GccCurve> {
    plan.validate(g)?;
    let n = g.n();
    if n == 0 {
        return Ok(GccCurve::flat(0.0));
    }
    // Replay in reverse: start from the fully attacked graph and add batches
    // back, so each state costs only a few union operations.
    let mut uf = UnionFind::new(n);
    let planned: std::collections::HashSet<_> = plan.edges().collect();
    for e in g.edges() {
        if !planned.contains(&e) {
            uf.union(e.u, e.v);
        }
    }
    let mut gcc_after = vec![0; plan.len() + 1];
    gcc_after[plan.len()] = uf.largest();
    for (i, batch) in plan.batches.iter().enumerate().rev() {
        for e in &batch.edges {
            uf.union(e.u, e.v);
        }
        gcc_after[i] = uf.largest();
    }

    let mut breakpoints = vec![(0.0, gcc_after[0] as f64 / n as f64)];
    let mut removed = 0;
    for (i, batch) in plan.batches.iter().enumerate() {
        if breakpoints.last().expect("non-empty").1 < threshold {
            break;
        }
        if batch.edges.is_empty() {
            continue;
        }
        removed += batch.edges.len();
        breakpoints.push((cost_fraction(removed, plan.total_edges), gcc_after[i + 1] as f64 / n as f64));
    }
    Ok(GccCurve { breakpoints })
}

/// Cost-fragmentation effectiveness: the exact integral of the step curve
/// over `[0, 1]`, holding the final value up to cost 1.
pub fn cfe(curve: &GccCurve) -> f64 {
    let pts = &curve.breakpoints;
    pts.iter()
        .enumerate()
        .map(|(i, &(x, f))| {
            let end = pts.get(i + 1).map_or(1.0, |p| p.0);
            f * (end - x).max(0.0)
        })
        .sum()
}

/// Relative improvement `(f_star - f_d) / f_star` over a baseline CFE.
pub fn improvement(f_star: f64, f_d: f64) -> Result<f64> {
    if f_star.is_nan() || f_star <= 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((f_star - f_d) / f_star)
}

/// Pointwise mean and standard deviation of step curves over the union of
/// their breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedCurve {
    /// `(x, mean, std)` triples.
    pub points: Vec<(f64, f64, f64)>,
    pub runs: usize,
}

impl AveragedCurve {
    pub fn mean_curve(&self) -> GccCurve {
        GccCurve {
            breakpoints: self.points.iter().map(|&(x, f, _)| (x, f)).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,f_mean,f_std")?;
        for (x, f, s) in &self.points {
            writeln!(w, "{x},{f},{s}")?;
        }
        Ok(())
    }
}

pub fn average_curves(curves: &[GccCurve]) -> Result<AveragedCurve> {
    if curves.is_empty() {
        return Err(Error::InvalidParam("cannot average zero curves".into()));
    }
    // (x, curve, new value) for every breakpoint after the first
    let mut events: Vec<(f64, usize, f64)> = curves
        .iter()
        .enumerate()
        .flat_map(|(c, curve)| curve.breakpoints.iter().skip(1).map(move |&(x, f)| (x, c, f)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut current: Vec<f64> = curves.iter().map(|c| c.breakpoints[0].1).collect();
    let (mean, std) = mean_std(&current);
    let mut points = vec![(0.0, mean, std)];
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            let (_, c, f) = events[i];
            current[c] = f;
            i += 1;
        }
        let (mean, std) = mean_std(&current);
        points.push((x, mean, std));
    }
    Ok(AveragedCurve {
        points,
        runs: curves.len(),
    })
}

/// Exact for identical inputs, so averaging copies of a curve returns it.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return (first, 0.0);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::Edge;
    use crate::plan::Provenance;
    use crate::spectral::{hpi_ncut, SpectralConfig};
    use crate::strategies::{bond_percolation_plan, hd_plan};
    use proptest::prelude::*;

    fn curve(points: &[(f64, f64)]) -> GccCurve {
        GccCurve {
            breakpoints: points.to_vec(),
        }
    }

    #[test]
    fn empty_plan_is_flat() {
        let c = execute_plan(&barbell(), &RemovalPlan::new(7), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(c, GccCurve::flat(1.0));
        assert_eq!(cfe(&c), 1.0);
    }

    #[test]
    fn star_hd_curve() {
        let c = execute_plan(&star(4), &hd_plan(&star(4)), DEFAULT_THRESHOLD).unwrap();
        assert_eq!(c.breakpoints, vec![(0.0, 1.0), (1.0, 0.2)]);
    }

    #[test]
    fn barbell_hpi_curve() {
        let cfg = SpectralConfig {
            gcc_threshold: 0.6,
            eta_override: Some(1000),
            ..Default::default()
        };
        let (_, plan) = hpi_ncut(&barbell(), &cfg).unwrap();
        let c = execute_plan(&barbell(), &plan, 0.6).unwrap();
        assert_eq!(c.breakpoints, vec![(0.0, 1.0), (1.0 / 7.0, 0.5)]);
    }

    #[test]
    fn execution_stops_below_threshold() {
        let g = path(10);
        let mut plan = RemovalPlan::new(9);
        for e in g.edges() {
            plan.push(vec![e], Provenance::Edge);
        }
        // removing 0-1 leaves GCC 9/10; threshold 0.95 stops right there
        let c = execute_plan(&g, &plan, 0.95).unwrap();
        assert_eq!(c.breakpoints.len(), 2);
        let full = execute_plan(&g, &plan, 0.0).unwrap();
        assert_eq!(full.breakpoints.len(), 10);
        assert_eq!(full.final_value(), 0.1);
    }

    #[test]
    fn k3_bond_percolation_steps() {
        for seed in 0..10 {
            let c = execute_plan(&complete(3), &bond_percolation_plan(&complete(3), seed), 0.0).unwrap();
            let fs: Vec<f64> = c.breakpoints.iter().map(|p| p.1).collect();
            assert_eq!(fs, vec![1.0, 1.0, 2.0 / 3.0, 1.0 / 3.0]);
        }
    }

    #[test]
    fn plan_mismatch_is_reported() {
        let mut plan = RemovalPlan::new(7);
        plan.push(vec![Edge::new(0, 5)], Provenance::Edge);
        let err = execute_plan(&barbell(), &plan, DEFAULT_THRESHOLD).unwrap_err();
        assert!(matches!(err, Error::PlanMismatch { batch: 0, .. }));
    }

    #[test]
    fn cfe_of_two_steps() {
        assert!((cfe(&curve(&[(0.0, 1.0), (0.5, 0.2)])) - 0.6).abs() < 1e-15);
        assert_eq!(curve(&[(0.0, 1.0), (0.5, 0.2)]).at(0.49), 1.0);
        assert_eq!(curve(&[(0.0, 1.0), (0.5, 0.2)]).at(0.5), 0.2);
    }

    #[test]
    fn improvement_examples() {
        assert_eq!((improvement(0.638, 0.278).unwrap() * 100.0).round(), 56.0);
        assert_eq!((improvement(0.371, 0.260).unwrap() * 100.0).round(), 30.0);
        assert_eq!(improvement(0.4, 0.4).unwrap(), 0.0);
        assert!(matches!(improvement(0.0, 0.1), Err(Error::ZeroBaseline)));
    }

    #[test]
    fn averaging() {
        let a = curve(&[(0.0, 1.0), (0.3, 0.5)]);
        let avg = average_curves(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(avg.mean_curve(), a);
        assert!(avg.points.iter().all(|p| p.2 < 1e-12));

        let avg = average_curves(&[curve(&[(0.0, 1.0)]), curve(&[(0.0, 1.0), (0.5, 0.0)])]).unwrap();
        assert_eq!(avg.points, vec![(0.0, 1.0, 0.0), (0.5, 0.5, 0.5)]);
        assert!(average_curves(&[]).is_err());
    }

    fn arb_curve() -> impl Strategy<Value = GccCurve> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..12).prop_map(|mut raw| {
            let mut xs: Vec<f64> = raw.iter().map(|p| p.0).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let mut fs: Vec<f64> = raw.drain(..).map(|p| p.1).collect();
            fs.sort_by(|a, b| b.total_cmp(a));
            let mut points = vec![(0.0, 1.0)];
            points.extend(xs.into_iter().filter(|&x| x > 0.0).zip(fs));
            GccCurve { breakpoints: points }
        })
    }

    proptest! {
        #[test]
        fn cfe_is_bounded_and_monotone(a in arb_curve(), b in arb_curve()) {
            let fa = cfe(&a);
            prop_assert!((0.0..=1.0).contains(&fa));
            // pointwise minimum is dominated by both
            let avg = average_curves(&[a.clone(), b.clone()]).unwrap();
            let lower = GccCurve {
                breakpoints: avg.points.iter().map(|&(x, _, _)| (x, a.at(x).min(b.at(x)))).collect(),
            };
            prop_assert!(cfe(&lower) <= fa + 1e-12);
            prop_assert!(cfe(&lower) <= cfe(&b) + 1e-12);
            // the mean curve integrates to the mean CFE
            prop_assert!((cfe(&avg.mean_curve()) - (fa + cfe(&b)) / 2.0).abs() < 1e-9);
        }

        #[test]
        fn single_curve_average_is_identity(a in arb_curve()) {
            prop_assert_eq!(average_curves(std::slice::from_ref(&a)).unwrap().mean_curve(), a);
        }

        #[test]
        fn executed_curves_never_increase(seed in 0u64..1000) {
            let g = crate::generators::gen_er(40, 3.0, seed).unwrap();
            let c = execute_plan(&g, &bond_percolation_plan(&g, seed), 0.0).unwrap();
            for w in c.breakpoints.windows(2) {
                prop_assert!(w[1].0 > w[0].0);
                prop_assert!(w[1].1 <= w[0].1);
            }
        }
    }
}
