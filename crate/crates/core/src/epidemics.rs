//! Discrete-time SIR spreading.
//!
//! One step: every node infectious at time `t` tries to infect each
//! susceptible neighbor with probability `beta`, then recovers with
//! probability `gamma`. Nodes infected during the step are infectious from
//! `t + 1` and cannot recover before step `t + 1 -> t + 2`.
//!
//! The run is simulated event by event. A node infected at `T_i` stays
//! infectious for `tau_i ~ Geometric(gamma)` steps, and its `k`-th step
//! reaches neighbor `j` first with `k = t_ij ~ Geometric(beta)`; `j` is then
//! infected at `min_i (T_i + t_ij)` over neighbors with `t_ij <= tau_i`. This
//! has the same law as flipping coins every step, and because each `tau_i`
//! and `t_ij` is drawn from a stream addressed by node and neighbor id, two
//! runs with the same seed on graphs that differ only by removed edges share
//! all their randomness: removing edges can only shrink the set of nodes
//! ever infected.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seeds::derive_seed;

/// Never reached.
const NEVER: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialInfected {
    /// This many distinct nodes drawn uniformly per run.
    Random(usize),
    Nodes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    pub beta: f64,
    pub gamma: f64,
    pub initial_infected: InitialInfected,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for SirParams {
    fn default() -> Self {
        SirParams {
            beta: 0.10,
            gamma: 0.02,
            initial_infected: InitialInfected::Random(1),
            max_steps: 1000,
            seed: 0,
        }
    }
}

impl SirParams {
    /// `beta / gamma`, infinite when nobody recovers.
    pub fn reproduction_number(&self) -> f64 {
        self.beta / self.gamma
    }

    fn validate(&self, n: usize) -> Result<()> {
        for (name, p) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParam(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        match &self.initial_infected {
            InitialInfected::Random(k) if *k > n => Err(Error::InvalidParam(format!(
                "cannot infect {k} of {n} nodes"
            ))),
            InitialInfected::Nodes(nodes) => match nodes.iter().find(|&&v| v >= n) {
                Some(&v) => Err(Error::UnknownNode(v)),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// S, I and R counts at `t = 0, 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirTrace {
    pub s: Vec<usize>,
    pub i: Vec<usize>,
    pub r: Vec<usize>,
}

impl SirTrace {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Nodes ever infected by the end of the trace.
    pub fn attack_size(&self) -> usize {
        match (self.i.last(), self.r.last()) {
            (Some(i), Some(r)) => i + r,
            _ => 0,
        }
    }
}

/// Result of one run: the trace plus each node's infection time.
#[derive(Debug, Clone, PartialEq)]
pub struct SirOutcome {
    pub trace: SirTrace,
    /// Step at which each node became infectious, if it ever did.
    pub infected_at: Vec<Option<usize>>,
}

impl SirOutcome {
    pub fn ever_infected(&self) -> Vec<usize> {
        (0..self.infected_at.len())
            .filter(|&v| self.infected_at[v].is_some())
            .collect()
    }
}

pub fn sir_run(g: &Graph, params: &SirParams) -> Result<SirTrace> {
    sir_outcome(g, params).map(|o| o.trace)
}

pub fn sir_outcome(g: &Graph, params: &SirParams) -> Result<SirOutcome> {
    params.validate(g.n())?;
    let n = g.n();
    let draws = Draws::new(params);
    let initial = draws.initial(n, &params.initial_infected);
    let horizon = params.max_steps as u64;

    // Dijkstra over integer times; `pending` maps time -> nodes.
    let mut infected_at = vec![NEVER; n];
    let mut pending: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &v in &initial {
        infected_at[v] = 0;
    }
    pending.insert(0, initial.clone());
    let mut recovered_at = vec![NEVER; n];
    while let Some((t, nodes)) = pending.pop_first() {
        for v in nodes {
            if infected_at[v] != t || recovered_at[v] != NEVER {
                continue;
            }
            let tau = draws.infectious_period(v, params.gamma);
            recovered_at[v] = t.saturating_add(tau);
            for &w in g.neighbors(v) {
                let delay = draws.transmission_delay(v, w, params.beta);
                if delay > tau {
                    continue;
                }
                let at = t + delay;
                if at <= horizon && at < infected_at[w] {
                    infected_at[w] = at;
                    pending.entry(at).or_default().push(w);
                }
            }
        }
    }

    // Last step with anyone infectious, capped at the horizon.
    let end = (0..n)
        .filter(|&v| infected_at[v] != NEVER)
        .map(|v| recovered_at[v])
        .max()
        .map_or(0, |r| r.min(horizon));
    let len = end as usize + 1;
    let mut newly_infected = vec![0i64; len + 1];
    let mut newly_recovered = vec![0i64; len + 1];
    for v in 0..n {
        if infected_at[v] != NEVER {
            newly_infected[infected_at[v] as usize] += 1;
            if recovered_at[v] <= end {
                newly_recovered[recovered_at[v] as usize] += 1;
            }
        }
    }
    let mut trace = SirTrace {
        s: Vec::with_capacity(len),
        i: Vec::with_capacity(len),
        r: Vec::with_capacity(len),
    };
    let (mut ever, mut rec) = (0i64, 0i64);
    for t in 0..len {
        ever += newly_infected[t];
        rec += newly_recovered[t];
        trace.s.push((n as i64 - ever) as usize);
        trace.i.push((ever - rec) as usize);
        trace.r.push(rec as usize);
    }
    let infected_at = infected_at
        .into_iter()
        .map(|t| (t != NEVER).then_some(t as usize))
        .collect();
    Ok(SirOutcome { trace, infected_at })
}

/// Counter-addressed random draws: node `v` owns ChaCha stream `v`, its
/// infectious period sits at word 0 and its delay toward neighbor `w` at
/// word `2 (w + 1)`.
struct Draws {
    seed: u64,
}

impl Draws {
    fn new(params: &SirParams) -> Self {
        Draws { seed: params.seed }
    }

    fn uniform(&self, stream: u64, slot: u128) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.set_word_pos(2 * slot);
        // 53 random bits in (0, 1]
        ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
    }

    /// Steps until the first success of a per-step Bernoulli(p), >= 1.
    fn geometric(&self, stream: u64, slot: u128, p: f64) -> u64 {
        if p >= 1.0 {
            return 1;
        }
        if p <= 0.0 {
            return NEVER;
        }
        let u = self.uniform(stream, slot);
        let k = (u.ln() / (1.0 - p).ln()).ceil();
        if k >= (NEVER / 4) as f64 {
            NEVER / 4
        } else {
            (k as u64).max(1)
        }
    }

    fn infectious_period(&self, v: usize, gamma: f64) -> u64 {
        self.geometric(v as u64, 0, gamma)
    }

    fn transmission_delay(&self, v: usize, w: usize, beta: f64) -> u64 {
        self.geometric(v as u64, w as u128 + 1, beta)
    }

    fn initial(&self, n: usize, spec: &InitialInfected) -> Vec<usize> {
        match spec {
            InitialInfected::Nodes(nodes) => {
                let mut v = nodes.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            InitialInfected::Random(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "sir-initial", 0));
                let mut v = rand::seq::index::sample(&mut rng, n, *k).into_vec();
                v.sort_unstable();
                v
            }
        }
    }
}

/// Ensemble mean of S, I, R with pointwise standard deviations of I and R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSirTrace {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub i_std: Vec<f64>,
    pub r_std: Vec<f64>,
    pub runs: usize,
}

impl MeanSirTrace {
    /// Time step of the largest mean infected count (first one on ties).
    pub fn peak_time(&self) -> usize {
        let mut best = 0;
        for t in 1..self.i.len() {
            if self.i[t] > self.i[best] {
                best = t;
            }
        }
        best
    }

    pub fn final_attack_size(&self) -> f64 {
        match (self.i.last(), self.r.last()) {
            (Some(i), Some(r)) => i + r,
            _ => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,S_mean,I_mean,R_mean,I_std,R_std")?;
        for t in 0..self.s.len() {
            writeln!(
                w,
                "{t},{},{},{},{},{}",
                self.s[t], self.i[t], self.r[t], self.i_std[t], self.r_std[t]
            )?;
        }
        Ok(())
    }
}

/// Seed of run `index` of an ensemble with master seed `seed`.
pub fn run_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, "sir-run", index as u64)
}

/// Averages `runs` independent runs. Shorter traces are extended with their
/// absorbing final state. A single run reproduces [`sir_run`] exactly.
pub fn sir_ensemble(g: &Graph, params: &SirParams, runs: usize) -> Result<MeanSirTrace> {
    if runs == 0 {
        return Err(Error::InvalidParam("ensemble needs at least one run".into()));
    }
    let traces: Vec<SirTrace> = if runs == 1 {
        vec![sir_run(g, params)?]
    } else {
        use rayon::prelude::*;
        (0..runs)
            .into_par_iter()
            .map(|k| {
                let p = SirParams {
                    seed: run_seed(params.seed, k),
                    ..params.clone()
                };
                sir_run(g, &p)
            })
            .collect::<Result<_>>()?
    };
    let len = traces.iter().map(SirTrace::len).max().unwrap_or(0);
    let k = runs as f64;
    let at = |v: &[usize], t: usize| v[t.min(v.len() - 1)] as f64;
    let mut mean = MeanSirTrace {
        s: Vec::with_capacity(len),
        i: Vec::with_capacity(len),
        r: Vec::with_capacity(len),
        i_std: Vec::with_capacity(len),
        r_std: Vec::with_capacity(len),
        runs,
    };
    for t in 0..len {
        let s: f64 = traces.iter().map(|tr| at(&tr.s, t)).sum::<f64>() / k;
        let i: f64 = traces.iter().map(|tr| at(&tr.i, t)).sum::<f64>() / k;
        let r: f64 = traces.iter().map(|tr| at(&tr.r, t)).sum::<f64>() / k;
        let var = |m: f64, f: &dyn Fn(&SirTrace) -> f64| traces.iter().map(|tr| (f(tr) - m).powi(2)).sum::<f64>() / k;
        mean.i_std.push(var(i, &|tr| at(&tr.i, t)).sqrt());
        mean.r_std.push(var(r, &|tr| at(&tr.r, t)).sqrt());
        mean.s.push(s);
        mean.i.push(i);
        mean.r.push(r);
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn params(beta: f64, gamma: f64, seed: u64) -> SirParams {
        SirParams {
            beta,
            gamma,
            initial_infected: InitialInfected::Random(1),
            max_steps: 10_000,
            seed,
        }
    }

    #[test]
    fn conservation_and_monotonicity() {
        let g = crate::generators::gen_er(300, 4.0, 1).unwrap();
        for seed in 0..20 {
            let tr = sir_run(&g, &params(0.1, 0.05, seed)).unwrap();
            for t in 0..tr.len() {
                assert_eq!(tr.s[t] + tr.i[t] + tr.r[t], g.n());
            }
            assert!(tr.s.windows(2).all(|w| w[1] <= w[0]));
            assert!(tr.r.windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(*tr.i.last().unwrap(), 0);
        }
    }

    #[test]
    fn no_transmission_decays_geometrically() {
        let g = complete(10);
        let p = SirParams {
            beta: 0.0,
            gamma: 0.2,
            initial_infected: InitialInfected::Nodes((0..10).collect()),
            max_steps: 50,
            seed: 3,
        };
        let runs = 2000;
        let mean = sir_ensemble(&g, &p, runs).unwrap();
        for t in 0..8 {
            let expected = 10.0 * 0.8f64.powi(t as i32);
            // binomial standard error of the ensemble mean, 5 sigma
            let q = 0.8f64.powi(t as i32);
            let se = (10.0 * q * (1.0 - q) / runs as f64).sqrt();
            assert!((mean.i[t] - expected).abs() <= 5.0 * se + 1e-12, "t={t}: {} vs {expected}", mean.i[t]);
        }
        assert!(mean.s.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn certain_transmission_floods_within_diameter() {
        let g = path(9);
        let p = SirParams {
            beta: 1.0,
            gamma: 0.0,
            initial_infected: InitialInfected::Nodes(vec![0]),
            max_steps: 100,
            seed: 0,
        };
        let out = sir_outcome(&g, &p).unwrap();
        assert_eq!(out.infected_at, (0..9).map(Some).collect::<Vec<_>>());
        let tr = out.trace;
        assert_eq!(tr.s[8], 0);
        // nobody recovers, so the run lasts to the horizon
        assert_eq!(tr.len(), 101);
        assert_eq!(tr.i[100], 9);
    }

    #[test]
    fn edgeless_graph_ignores_beta() {
        let g = Graph::empty(20);
        let a = sir_run(&g, &params(0.0, 0.3, 9)).unwrap();
        let b = sir_run(&g, &params(1.0, 0.3, 9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.attack_size(), 1);
    }

    #[test]
    fn new_infections_do_not_recover_in_their_first_step() {
        // gamma = 1: the seed is infectious for exactly one step.
        let g = path(3);
        let p = SirParams {
            beta: 1.0,
            gamma: 1.0,
            initial_infected: InitialInfected::Nodes(vec![0]),
            max_steps: 10,
            seed: 0,
        };
        let tr = sir_run(&g, &p).unwrap();
        assert_eq!(tr.i, vec![1, 1, 1, 0]);
        assert_eq!(tr.r, vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_run_ensemble_equals_run() {
        let g = crate::generators::gen_er(100, 3.0, 2).unwrap();
        let p = params(0.2, 0.1, 5);
        let tr = sir_run(&g, &p).unwrap();
        let mean = sir_ensemble(&g, &p, 1).unwrap();
        assert_eq!(mean.s, tr.s.iter().map(|&x| x as f64).collect::<Vec<_>>());
        assert_eq!(mean.i, tr.i.iter().map(|&x| x as f64).collect::<Vec<_>>());
        assert_eq!(mean.r, tr.r.iter().map(|&x| x as f64).collect::<Vec<_>>());
    }

    #[test]
    fn ensemble_conserves_population() {
        let g = crate::generators::gen_er(100, 3.0, 2).unwrap();
        let mean = sir_ensemble(&g, &params(0.2, 0.1, 5), 30).unwrap();
        for t in 0..mean.s.len() {
            assert!((mean.s[t] + mean.i[t] + mean.r[t] - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_params() {
        let g = path(3);
        assert!(sir_run(&g, &params(1.5, 0.1, 0)).is_err());
        assert!(sir_run(&g, &params(0.1, -0.1, 0)).is_err());
        let p = SirParams {
            initial_infected: InitialInfected::Nodes(vec![5]),
            ..params(0.1, 0.1, 0)
        };
        assert!(matches!(sir_run(&g, &p), Err(Error::UnknownNode(5))));
        let p = SirParams {
            initial_infected: InitialInfected::Random(4),
            ..params(0.1, 0.1, 0)
        };
        assert!(sir_run(&g, &p).is_err());
        assert!(sir_ensemble(&g, &params(0.1, 0.1, 0), 0).is_err());
    }

    #[test]
    fn reproduction_number_of_reference_rates() {
        assert!((SirParams::default().reproduction_number() - 5.0).abs() < 1e-12);
    }
}
