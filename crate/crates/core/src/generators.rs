//! Seedable synthetic networks: Erdős–Rényi G(n, p), configuration-model
//! scale-free graphs and stochastic block models.
//!
//! Every generator is a pure function of its parameters and seed, so the
//! same [`GenSpec`] always produces the same graph.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Resampling attempts for the scale-free degree sequence.
const SF_MAX_RESAMPLES: usize = 200;
/// Relative tolerance on the scale-free sample mean degree.
const SF_MEAN_TOLERANCE: f64 = 0.05;
/// Default p_in / p_out ratio for block models tuned by mean degree.
pub const DEFAULT_SBM_RATIO: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenSpec {
    Er {
        n: usize,
        mean_degree: f64,
        seed: u64,
    },
    Sf {
        n: usize,
        gamma: f64,
        mean_degree: f64,
        seed: u64,
    },
    Sbm {
        block_sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
        seed: u64,
    },
    /// Equal-size blocks with `p_in = ratio * p_out`, solved for an expected
    /// mean degree. Resolves to [`GenSpec::Sbm`].
    SbmTuned {
        n: usize,
        blocks: usize,
        mean_degree: f64,
        #[serde(default = "default_ratio")]
        ratio: f64,
        seed: u64,
    },
}

fn default_ratio() -> f64 {
    DEFAULT_SBM_RATIO
}

impl GenSpec {
    pub fn seed(&self) -> u64 {
        match self {
            GenSpec::Er { seed, .. }
            | GenSpec::Sf { seed, .. }
            | GenSpec::Sbm { seed, .. }
            | GenSpec::SbmTuned { seed, .. } => *seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            GenSpec::Er { seed, .. }
            | GenSpec::Sf { seed, .. }
            | GenSpec::Sbm { seed, .. }
            | GenSpec::SbmTuned { seed, .. } => *seed = new_seed,
        }
        self
    }

    /// Replaces a tuned block model by its explicit probabilities.
    pub fn resolve(&self) -> Result<GenSpec> {
        match self {
            GenSpec::SbmTuned {
                n,
                blocks,
                mean_degree,
                ratio,
                seed,
            } => sbm_tuned(*n, *blocks, *mean_degree, *ratio, *seed),
            other => Ok(other.clone()),
        }
    }

    pub fn generate(&self) -> Result<Graph> {
        match self.resolve()? {
            GenSpec::Er {
                n,
                mean_degree,
                seed,
            } => gen_er(n, mean_degree, seed),
            GenSpec::Sf {
                n,
                gamma,
                mean_degree,
                seed,
            } => gen_sf(n, gamma, mean_degree, seed),
            GenSpec::Sbm {
                block_sizes,
                p_in,
                p_out,
                seed,
            } => gen_sbm(&block_sizes, p_in, p_out, seed),
            GenSpec::SbmTuned { .. } => unreachable!("resolved above"),
        }
    }
}

/// G(n, p) with `p = mean_degree / (n - 1)`.
pub fn gen_er(n: usize, mean_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("ER needs n >= 2, got {n}")));
    }
    if !(mean_degree > 0.0 && mean_degree <= (n - 1) as f64) {
        return Err(Error::InvalidParam(format!(
            "ER mean degree must lie in (0, {}], got {mean_degree}",
            n - 1
        )));
    }
    let p = mean_degree / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    sample_within(0, n, p, &mut rng, &mut edges);
    Graph::from_edges(n, edges)
}

/// Bernoulli(p) on every pair `lo <= w < v < hi`, by geometric skipping so
/// the cost is proportional to the number of edges drawn.
fn sample_within(lo: usize, hi: usize, p: f64, rng: &mut impl Rng, out: &mut Vec<(usize, usize)>) {
    let size = hi - lo;
    if p <= 0.0 || size < 2 {
        return;
    }
    if p >= 1.0 {
        for v in 1..size {
            out.extend((0..v).map(|w| (lo + w, lo + v)));
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < size {
        w += 1 + skip(rng, log_q);
        while w >= v as i64 && v < size {
            w -= v as i64;
            v += 1;
        }
        if v < size {
            out.push((lo + w as usize, lo + v));
        }
    }
}

/// Bernoulli(p) on every pair of the grid `[a0, a1) x [b0, b1)`.
fn sample_between(
    (a0, a1): (usize, usize),
    (b0, b1): (usize, usize),
    p: f64,
    rng: &mut impl Rng,
    out: &mut Vec<(usize, usize)>,
) {
    let cols = (b1 - b0) as i64;
    let total = (a1 - a0) as i64 * cols;
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        for a in a0..a1 {
            out.extend((b0..b1).map(|b| (a, b)));
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut idx = -1i64;
    loop {
        idx += 1 + skip(rng, log_q);
        if idx >= total {
            break;
        }
        out.push((a0 + (idx / cols) as usize, b0 + (idx % cols) as usize));
    }
}

fn skip(rng: &mut impl Rng, log_q: f64) -> i64 {
    let r: f64 = rng.gen();
    let s = ((1.0 - r).ln() / log_q).floor();
    if s >= i64::MAX as f64 / 4.0 {
        i64::MAX / 4
    } else {
        s as i64
    }
}

/// Degree distribution `P(k) ∝ k^-gamma` on `[1, k_max]` with the mass of
/// its lowest supported degree adjusted so the mean equals the target.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawDegrees {
    /// Probability weights for degrees `1..=k_max` (index 0 is degree 1).
    pub weights: Vec<f64>,
    pub k_min: usize,
    pub k_max: usize,
}

impl PowerLawDegrees {
    pub fn new(gamma: f64, mean_degree: f64, k_max: usize) -> Result<Self> {
        if gamma.is_nan() || gamma <= 2.0 {
            return Err(Error::InvalidParam(format!("SF exponent must exceed 2, got {gamma}")));
        }
        if k_max < 2 {
            return Err(Error::InvalidParam("SF degree cutoff must be at least 2".into()));
        }
        let base: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(-gamma)).collect();
        if !(mean_degree > 1.0 && mean_degree < k_max as f64) {
            return Err(Error::InvalidParam(format!(
                "SF mean degree must lie in (1, {k_max}), got {mean_degree}"
            )));
        }
        // Tail sums over degrees > k0, for each k0.
        let mut tail_w = vec![0.0; k_max + 1];
        let mut tail_kw = vec![0.0; k_max + 1];
        for k in (1..k_max).rev() {
            tail_w[k] = tail_w[k + 1] + base[k];
            tail_kw[k] = tail_kw[k + 1] + (k + 1) as f64 * base[k];
        }
        // Lowering the weight on k0 from 1 to 0 raises the mean from the
        // full-support mean to the mean supported on (k0, k_max].
        let mean_above = |k0: usize| tail_kw[k0] / tail_w[k0];
        let mut k0 = 1;
        while k0 < k_max - 1 && mean_above(k0) <= mean_degree {
            k0 += 1;
        }
        let w0 = base[k0 - 1];
        let scale = (tail_kw[k0] - mean_degree * tail_w[k0]) / (w0 * (mean_degree - k0 as f64));
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParam(format!(
                "cannot reach mean degree {mean_degree} with exponent {gamma} and cutoff {k_max}"
            )));
        }
        let mut weights = vec![0.0; k_max];
        weights[k0 - 1] = scale * w0;
        weights[k0..].copy_from_slice(&base[k0..]);
        Ok(PowerLawDegrees {
            weights,
            k_min: k0,
            k_max,
        })
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i + 1) as f64 * w)
            .sum::<f64>()
            / total
    }
}

/// Configuration-model scale-free graph with cutoff `k_max = floor(sqrt(n))`.
/// Self-loops and multi-edges produced by stub matching are discarded.
pub fn gen_sf(n: usize, gamma: f64, mean_degree: f64, seed: u64) -> Result<Graph> {
    if n < 4 {
        return Err(Error::InvalidParam(format!("SF needs n >= 4, got {n}")));
    }
    let k_max = (n as f64).sqrt().floor() as usize;
    let dist = PowerLawDegrees::new(gamma, mean_degree, k_max)?;
    let sampler = WeightedIndex::new(&dist.weights)
        .map_err(|e| Error::InvalidParam(format!("degree weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SF_MAX_RESAMPLES {
        let degrees: Vec<usize> = (0..n).map(|_| sampler.sample(&mut rng) + 1).collect();
        let total: usize = degrees.iter().sum();
        let mean = total as f64 / n as f64;
        if total % 2 == 1 || (mean - mean_degree).abs() > SF_MEAN_TOLERANCE * mean_degree {
            continue;
        }
        let mut stubs: Vec<usize> = degrees
            .iter()
            .enumerate()
            .flat_map(|(v, &k)| std::iter::repeat_n(v, k))
            .collect();
        stubs.shuffle(&mut rng);
        let pairs = stubs.chunks_exact(2).map(|c| (c[0], c[1]));
        return Graph::from_edges(n, pairs);
    }
    Err(Error::GenerationFailure(format!(
        "no degree sequence within {}% of mean {mean_degree} after {SF_MAX_RESAMPLES} draws",
        SF_MEAN_TOLERANCE * 100.0
    )))
}

/// Stochastic block model with contiguous blocks: node ids of block `b`
/// follow those of block `b - 1`.
pub fn gen_sbm(block_sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    validate_sbm(block_sizes, p_in, p_out)?;
    let n: usize = block_sizes.iter().sum();
    let bounds = block_bounds(block_sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for (a, &(a0, a1)) in bounds.iter().enumerate() {
        sample_within(a0, a1, p_in, &mut rng, &mut edges);
        for &(b0, b1) in &bounds[a + 1..] {
            sample_between((a0, a1), (b0, b1), p_out, &mut rng, &mut edges);
        }
    }
    Graph::from_edges(n, edges)
}

fn validate_sbm(block_sizes: &[usize], p_in: f64, p_out: f64) -> Result<()> {
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(Error::InvalidParam("SBM blocks must be non-empty".into()));
    }
    if block_sizes.iter().sum::<usize>() < 2 {
        return Err(Error::InvalidParam("SBM needs n >= 2".into()));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParam(format!("{name} must lie in [0, 1], got {p}")));
        }
    }
    Ok(())
}

fn block_bounds(block_sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut start = 0;
    block_sizes
        .iter()
        .map(|&s| {
            start += s;
            (start - s, start)
        })
        .collect()
}

/// Block label of every node for contiguous blocks.
pub fn block_labels(block_sizes: &[usize]) -> Vec<usize> {
    block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect()
}

/// Sizes of `blocks` near-equal blocks summing to `n`; larger blocks first.
pub fn equal_blocks(n: usize, blocks: usize) -> Vec<usize> {
    (0..blocks)
        .map(|b| n / blocks + usize::from(b < n % blocks))
        .collect()
}

/// Solves for `p_out` (with `p_in = ratio * p_out`) so the expected mean
/// degree over equal blocks is `mean_degree`.
pub fn sbm_tuned(n: usize, blocks: usize, mean_degree: f64, ratio: f64, seed: u64) -> Result<GenSpec> {
    if blocks == 0 || blocks > n {
        return Err(Error::InvalidParam(format!("cannot split {n} nodes into {blocks} blocks")));
    }
    if !(ratio > 0.0 && mean_degree > 0.0) {
        return Err(Error::InvalidParam("SBM ratio and mean degree must be positive".into()));
    }
    let block_sizes = equal_blocks(n, blocks);
    let (intra, inter) = block_sizes.iter().fold((0.0, 0.0), |(i, o), &s| {
        let s = s as f64;
        (i + s * (s - 1.0), o + s * (n as f64 - s))
    });
    let p_out = mean_degree * n as f64 / (ratio * intra + inter);
    let p_in = ratio * p_out;
    if p_in > 1.0 {
        return Err(Error::InvalidParam(format!(
            "mean degree {mean_degree} needs p_in = {p_in:.3} > 1"
        )));
    }
    Ok(GenSpec::Sbm {
        block_sizes,
        p_in,
        p_out,
        seed,
    })
}
