//! Hierarchical spectral edge removal.
//!
//! The second eigenvector of the normalized Laplacian
//! `L_w = D^{-1/2} (D - W) D^{-1/2}` is approximated by power iteration on
//! the complement `2I - L_w = I + D^{-1/2} W D^{-1/2}`, which shares its
//! eigenvectors but turns the second-smallest eigenvalue of `L_w` into the
//! largest one once the null direction `D^{1/2} 1` is projected out. The
//! operator is applied straight from adjacency lists.
//!
//! Splitting nodes by the sign of that vector minimizes a relaxation of the
//! normalized cut `cut(A, Ā) (1/assoc(A) + 1/assoc(Ā))`. Repeating the split
//! on the current largest component yields a removal plan in which every
//! earlier separator stays removed.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::plan::{Provenance, RemovalPlan};
use crate::seeds::derive_seed;

const MAX_RESTARTS: usize = 5;

/// Vector the iterate is deflated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deflation {
    /// The exact null vector `d^{1/2} / |d^{1/2}|`, re-applied every iteration.
    #[default]
    DegreeWeighted,
    /// The constant vector `1/sqrt(n)`, applied once before iterating. Only
    /// a null vector for regular graphs.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Iterations are `ceil(ln(n)^(1 + eta_exponent))` for a component of `n` nodes.
    pub eta_exponent: f64,
    /// Fixed iteration count, ignoring `eta_exponent`.
    pub eta_override: Option<usize>,
    /// Stop once the largest component is below this fraction of all nodes.
    pub gcc_threshold: f64,
    /// Stop once this fraction of edges has been removed.
    pub budget: Option<f64>,
    /// Pieces each hierarchical step aims to cut a component into.
    pub k_per_level: usize,
    /// Split at the median entry instead of at zero.
    pub balanced: bool,
    pub deflation: Deflation,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            eta_exponent: 0.1,
            eta_override: None,
            gcc_threshold: 0.01,
            budget: None,
            k_per_level: 2,
            balanced: false,
            deflation: Deflation::DegreeWeighted,
            seed: 0,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta_exponent.is_nan() || self.eta_exponent <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "eta exponent must be positive, got {}",
                self.eta_exponent
            )));
        }
        if !(self.gcc_threshold > 0.0 && self.gcc_threshold <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "GCC threshold must lie in (0, 1], got {}",
                self.gcc_threshold
            )));
        }
        if self.k_per_level < 2 {
            return Err(Error::InvalidParam("k_per_level must be at least 2".into()));
        }
        if let Some(b) = self.budget {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidParam(format!("budget must lie in [0, 1], got {b}")));
            }
        }
        if self.eta_override == Some(0) {
            return Err(Error::InvalidParam("eta override must be at least 1".into()));
        }
        Ok(())
    }

    /// Power-iteration count for a component of `n` nodes.
    pub fn eta(&self, n: usize) -> usize {
        if let Some(eta) = self.eta_override {
            return eta;
        }
        let ln = (n.max(2) as f64).ln();
        (ln.powf(1.0 + self.eta_exponent).ceil() as usize).max(1)
    }
}

/// Unit-norm approximation of the second eigenvector of `L_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    pub values: Vec<f64>,
    /// `vᵀ L_w v / vᵀ v`.
    pub rayleigh: f64,
    pub iterations: usize,
    pub restarts: usize,
}

/// Normalized Laplacian of a connected graph held as compressed adjacency.
pub struct NormalizedLaplacian {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    inv_sqrt_deg: Vec<f64>,
    /// `d^{1/2}` scaled to unit length.
    null: Vec<f64>,
}

impl NormalizedLaplacian {
    pub fn new(g: &Graph) -> Result<Self> {
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut targets = Vec::with_capacity(2 * g.m());
        offsets.push(0);
        for v in 0..g.n() {
            targets.extend_from_slice(g.neighbors(v));
            offsets.push(targets.len());
        }
        Self::from_csr(offsets, targets)
    }

    fn from_csr(offsets: Vec<usize>, targets: Vec<usize>) -> Result<Self> {
        let n = offsets.len() - 1;
        let mut inv_sqrt_deg = Vec::with_capacity(n);
        let mut null = Vec::with_capacity(n);
        for v in 0..n {
            let d = (offsets[v + 1] - offsets[v]) as f64;
            if d == 0.0 {
                return Err(Error::DegreeZero(v));
            }
            inv_sqrt_deg.push(1.0 / d.sqrt());
            null.push(d.sqrt());
        }
        normalize(&mut null);
        Ok(NormalizedLaplacian {
            offsets,
            targets,
            inv_sqrt_deg,
            null,
        })
    }

    pub fn n(&self) -> usize {
        self.inv_sqrt_deg.len()
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Unit null vector of `L_w`.
    pub fn null_vector(&self) -> &[f64] {
        &self.null
    }

    /// `out = (2I - L_w) v`, i.e. `out_i = v_i + Σ_{j ~ i} v_j / sqrt(d_i d_j)`.
    pub fn complement_apply(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n() {
            let acc: f64 = self
                .neighbors(i)
                .iter()
                .map(|&j| v[j] * self.inv_sqrt_deg[j])
                .sum();
            out[i] = v[i] + self.inv_sqrt_deg[i] * acc;
        }
    }

    /// `vᵀ L_w v / vᵀ v`, summed edge by edge so the result is never negative.
    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut num = 0.0;
        for i in 0..self.n() {
            let xi = v[i] * self.inv_sqrt_deg[i];
            for &j in self.neighbors(i).iter().filter(|&&j| j > i) {
                let diff = xi - v[j] * self.inv_sqrt_deg[j];
                num += diff * diff;
            }
        }
        let den: f64 = v.iter().map(|x| x * x).sum();
        num / den
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn deflate(v: &mut [f64], u: &[f64]) {
    let c = dot(v, u);
    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
}

/// `(2I - L_w) v` for a connected graph without isolated nodes.
pub fn laplacian_complement_apply(g: &Graph, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != g.n() {
        return Err(Error::InvalidParam(format!(
            "vector has {} entries for {} nodes",
            v.len(),
            g.n()
        )));
    }
    let op = NormalizedLaplacian::new(g)?;
    let mut out = vec![0.0; g.n()];
    op.complement_apply(v, &mut out);
    Ok(out)
}

/// Power iteration for the second eigenvector of `L_w` on a connected graph.
pub fn power_iteration(g: &Graph, cfg: &SpectralConfig) -> Result<SpectralVector> {
    let op = checked_operator(g, cfg)?;
    iterate(&op, cfg, cfg.seed, None)
}

/// Like [`power_iteration`], also returning the Rayleigh quotient of the
/// starting vector followed by that after each iteration.
pub fn power_iteration_traced(g: &Graph, cfg: &SpectralConfig) -> Result<(SpectralVector, Vec<f64>)> {
    let op = checked_operator(g, cfg)?;
    let mut trace = Vec::new();
    let v = iterate(&op, cfg, cfg.seed, Some(&mut trace))?;
    Ok((v, trace))
}

fn checked_operator(g: &Graph, cfg: &SpectralConfig) -> Result<NormalizedLaplacian> {
    cfg.validate()?;
    if g.n() < 2 {
        return Err(Error::InvalidParam("power iteration needs at least 2 nodes".into()));
    }
    let op = NormalizedLaplacian::new(g)?;
    if !g.is_connected() {
        return Err(Error::InvalidParam("power iteration needs a connected graph".into()));
    }
    Ok(op)
}

fn iterate(
    op: &NormalizedLaplacian,
    cfg: &SpectralConfig,
    seed: u64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<SpectralVector> {
    let n = op.n();
    let eta = cfg.eta(n);
    if n == 2 {
        // The complement of the null direction is one-dimensional.
        let null = op.null_vector();
        let values = vec![null[1], -null[0]];
        let rayleigh = op.rayleigh(&values);
        if let Some(t) = trace.as_deref_mut() {
            t.push(rayleigh);
        }
        return Ok(SpectralVector {
            values,
            rayleigh,
            iterations: 0,
            restarts: 0,
        });
    }
    let uniform: Vec<f64>;
    let deflator: &[f64] = match cfg.deflation {
        Deflation::DegreeWeighted => op.null_vector(),
        Deflation::Uniform => {
            uniform = vec![1.0 / (n as f64).sqrt(); n];
            &uniform
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = vec![0.0; n];
    'restart: for restarts in 0..=MAX_RESTARTS {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        normalize(&mut v);
        deflate(&mut v, deflator);
        if normalize(&mut v) <= f64::EPSILON {
            continue;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.clear();
            t.push(op.rayleigh(&v));
        }
        for _ in 0..eta {
            op.complement_apply(&v, &mut next);
            if cfg.deflation == Deflation::DegreeWeighted {
                deflate(&mut next, deflator);
            }
            let norm = normalize(&mut next);
            if norm.is_nan() || norm <= f64::MIN_POSITIVE {
                continue 'restart;
            }
            std::mem::swap(&mut v, &mut next);
            if let Some(t) = trace.as_deref_mut() {
                t.push(op.rayleigh(&v));
            }
        }
        let rayleigh = op.rayleigh(&v);
        return Ok(SpectralVector {
            values: v,
            rayleigh,
            iterations: eta,
            restarts,
        });
    }
    Err(Error::NumericalFailure(format!(
        "power iteration collapsed to zero after {MAX_RESTARTS} restarts"
    )))
}

/// A two-way split of a connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    /// Nodes on the positive side, ascending.
    pub side: Vec<usize>,
    /// Edges crossing the split, ascending.
    pub separator: Vec<Edge>,
    /// The sign split left one side empty and the median split was used.
    pub fallback: bool,
    pub vector: SpectralVector,
}

/// Sign-based spectral bisection of a connected graph with at least two nodes.
pub fn spectral_bisection(g: &Graph, cfg: &SpectralConfig) -> Result<Bisection> {
    let op = checked_operator(g, cfg)?;
    let vector = iterate(&op, cfg, cfg.seed, None)?;
    let (in_side, fallback) = split(&vector.values, cfg.balanced);
    let side = (0..g.n()).filter(|&v| in_side[v]).collect();
    let separator = g
        .edges()
        .into_iter()
        .filter(|e| in_side[e.u] != in_side[e.v])
        .collect();
    Ok(Bisection {
        side,
        separator,
        fallback,
        vector,
    })
}

/// Membership of the first part: positive entries, or the top `ceil(n/2)`
/// entries in balanced mode and whenever the sign split is one-sided.
fn split(values: &[f64], balanced: bool) -> (Vec<bool>, bool) {
    let n = values.len();
    if !balanced {
        let side: Vec<bool> = values.iter().map(|&x| x > 0.0).collect();
        let positives = side.iter().filter(|&&b| b).count();
        if positives > 0 && positives < n {
            return (side, false);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut side = vec![false; n];
    for &v in &order[..n.div_ceil(2)] {
        side[v] = true;
    }
    (side, !balanced)
}

/// `cut(A, Ā) (1/assoc(A) + 1/assoc(Ā))` with `assoc(S)` the degree sum of `S`.
pub fn ncut_value(g: &Graph, side: &[usize]) -> Result<f64> {
    let mut in_side = vec![false; g.n()];
    for &v in side {
        if v >= g.n() {
            return Err(Error::UnknownNode(v));
        }
        in_side[v] = true;
    }
    let count = in_side.iter().filter(|&&b| b).count();
    if count == 0 || count == g.n() {
        return Err(Error::EmptySide);
    }
    let (mut assoc_a, mut assoc_b, mut cut) = (0usize, 0usize, 0usize);
    for v in 0..g.n() {
        let d = g.degree(v);
        if in_side[v] {
            assoc_a += d;
            cut += g.neighbors(v).iter().filter(|&&w| !in_side[w]).count();
        } else {
            assoc_b += d;
        }
    }
    if assoc_a == 0 || assoc_b == 0 {
        return Err(Error::ZeroAssoc);
    }
    Ok(cut as f64 * (1.0 / assoc_a as f64 + 1.0 / assoc_b as f64))
}

/// One component in the hierarchy and the cut applied to it, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub depth: usize,
    /// Member nodes, ascending.
    pub nodes: Vec<usize>,
    /// Edges removed to split this component; empty for leaves.
    pub separator: Vec<Edge>,
    pub children: Vec<usize>,
    /// Number of bisections in this step that used the median fallback.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTree {
    /// Index 0 is the root, holding every node of the input graph.
    pub nodes: Vec<TreeNode>,
    /// Tree nodes in the order their separators were removed.
    pub removal_order: Vec<usize>,
}

impl PartitionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|t| t.depth).max().unwrap_or(0)
    }

    /// Every separator edge cut at tree depth `<= depth`.
    pub fn separators_through_depth(&self, depth: usize) -> BTreeSet<Edge> {
        self.nodes
            .iter()
            .filter(|t| t.depth <= depth)
            .flat_map(|t| t.separator.iter().copied())
            .collect()
    }

    pub fn fallbacks(&self) -> usize {
        self.nodes.iter().map(|t| t.fallbacks).sum()
    }

    /// One line per tree node in pre-order:
    /// `depth<TAB>size<TAB>separator size<TAB>u-v,u-v,...`.
    pub fn write_records<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            let t = &self.nodes[i];
            let edges: Vec<String> = t.separator.iter().map(Edge::to_string).collect();
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                t.depth,
                t.nodes.len(),
                t.separator.len(),
                edges.join(",")
            )?;
            stack.extend(t.children.iter().rev());
        }
        Ok(())
    }
}

/// Pending component, ordered largest first, then shallowest, then by
/// smallest member id.
#[derive(PartialEq, Eq)]
struct Pending {
    size: usize,
    depth: Reverse<usize>,
    first: Reverse<usize>,
    index: usize,
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.size, self.depth, self.first).cmp(&(other.size, other.depth, other.first))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Hierarchical spectral edge removal.
///
/// Repeatedly bisects the current largest component (`k_per_level - 1`
/// bisections per step, the later ones on the largest piece produced so far)
/// and appends the step's separator edges as one batch. Stops when the
/// largest component falls below the GCC threshold, when only singletons
/// remain, or once the removed fraction has reached the budget.
pub fn hpi_ncut(g: &Graph, cfg: &SpectralConfig) -> Result<(PartitionTree, RemovalPlan)> {
    cfg.validate()?;
    if g.n() == 0 {
        return Err(Error::InvalidParam("graph has no nodes".into()));
    }
    let n = g.n();
    let mut work = Workspace::new(g);
    let mut tree = PartitionTree {
        nodes: vec![TreeNode {
            depth: 0,
            nodes: (0..n).collect(),
            separator: Vec::new(),
            children: Vec::new(),
            fallbacks: 0,
        }],
        removal_order: Vec::new(),
    };
    let mut plan = RemovalPlan::new(g.m());
    let mut heap = BinaryHeap::new();

    let components = g.connected_components().components;
    if components.len() == 1 {
        heap.push(pending(&tree, 0));
    } else {
        for comp in components {
            let idx = tree.nodes.len();
            tree.nodes.push(TreeNode {
                depth: 1,
                nodes: comp,
                separator: Vec::new(),
                children: Vec::new(),
                fallbacks: 0,
            });
            tree.nodes[0].children.push(idx);
            heap.push(pending(&tree, idx));
        }
    }

    let budget_edges = cfg.budget.map(|b| b * g.m() as f64);
    let mut removed = 0usize;
    while let Some(top) = heap.peek() {
        if (top.size as f64) < cfg.gcc_threshold * n as f64 || top.size < 2 {
            break;
        }
        if budget_edges.is_some_and(|b| removed as f64 >= b - 1e-9) {
            break;
        }
        let idx = heap.pop().expect("peeked").index;
        let depth = tree.nodes[idx].depth;
        let (pieces, separator, fallbacks) = work.split_component(&tree.nodes[idx].nodes, cfg)?;
        removed += separator.len();
        for piece in pieces {
            let child = tree.nodes.len();
            tree.nodes.push(TreeNode {
                depth: depth + 1,
                nodes: piece,
                separator: Vec::new(),
                children: Vec::new(),
                fallbacks: 0,
            });
            tree.nodes[idx].children.push(child);
            heap.push(pending(&tree, child));
        }
        plan.push(separator.clone(), Provenance::Edge);
        let node = &mut tree.nodes[idx];
        node.separator = separator;
        node.fallbacks = fallbacks;
        tree.removal_order.push(idx);
    }
    Ok((tree, plan))
}

fn pending(tree: &PartitionTree, index: usize) -> Pending {
    let t = &tree.nodes[index];
    Pending {
        size: t.nodes.len(),
        depth: Reverse(t.depth),
        first: Reverse(t.nodes[0]),
        index,
    }
}

/// Scratch space for building per-component operators without touching the
/// rest of the graph.
struct Workspace<'g> {
    g: &'g Graph,
    /// Global id -> local id, `usize::MAX` outside the current component.
    local: Vec<usize>,
    queue: VecDeque<usize>,
}

impl<'g> Workspace<'g> {
    fn new(g: &'g Graph) -> Self {
        Workspace {
            g,
            local: vec![usize::MAX; g.n()],
            queue: VecDeque::new(),
        }
    }

    /// Cuts a connected component into up to `k_per_level` pieces. Returns
    /// the connected pieces (each ascending, ordered by smallest member),
    /// the sorted separator and the number of median fallbacks.
    fn split_component(
        &mut self,
        component: &[usize],
        cfg: &SpectralConfig,
    ) -> Result<(Vec<Vec<usize>>, Vec<Edge>, usize)> {
        let mut pieces = vec![component.to_vec()];
        let mut separator = Vec::new();
        let mut fallbacks = 0;
        for _ in 1..cfg.k_per_level {
            let Some(target) = largest_piece(&pieces) else { break };
            let piece = pieces.swap_remove(target);
            let (parts, cut, fallback) = self.bisect(&piece, cfg)?;
            separator.extend(cut);
            fallbacks += usize::from(fallback);
            pieces.extend(parts);
        }
        pieces.sort_by_key(|p| p[0]);
        separator.sort_unstable();
        Ok((pieces, separator, fallbacks))
    }

    fn bisect(&mut self, nodes: &[usize], cfg: &SpectralConfig) -> Result<(Vec<Vec<usize>>, Vec<Edge>, bool)> {
        for (i, &v) in nodes.iter().enumerate() {
            self.local[v] = i;
        }
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &v in nodes {
            targets.extend(
                self.g
                    .neighbors(v)
                    .iter()
                    .map(|&w| self.local[w])
                    .filter(|&w| w != usize::MAX),
            );
            offsets.push(targets.len());
        }
        let result = NormalizedLaplacian::from_csr(offsets, targets).and_then(|op| {
            let seed = derive_seed(cfg.seed, "bisection", ((nodes[0] as u64) << 32) ^ nodes.len() as u64);
            let vector = iterate(&op, cfg, seed, None)?;
            Ok((op, vector))
        });
        let (op, vector) = match result {
            Ok(r) => r,
            Err(e) => {
                self.reset(nodes);
                return Err(match e {
                    Error::DegreeZero(v) => Error::DegreeZero(nodes[v]),
                    other => other,
                });
            }
        };
        let (in_side, fallback) = split(&vector.values, cfg.balanced);

        let mut cut = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            for &j in op.neighbors(i).iter().filter(|&&j| j > i) {
                if in_side[i] != in_side[j] {
                    cut.push(Edge::new(v, nodes[j]));
                }
            }
        }
        let parts = self.side_components(nodes, &op, &in_side);
        self.reset(nodes);
        Ok((parts, cut, fallback))
    }

    /// Connected pieces of each side once the crossing edges are gone.
    fn side_components(&mut self, nodes: &[usize], op: &NormalizedLaplacian, in_side: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; nodes.len()];
        let mut parts = Vec::new();
        for s in 0..nodes.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            self.queue.push_back(s);
            let mut part = Vec::new();
            while let Some(i) = self.queue.pop_front() {
                part.push(nodes[i]);
                for &j in op.neighbors(i) {
                    if !seen[j] && in_side[j] == in_side[i] {
                        seen[j] = true;
                        self.queue.push_back(j);
                    }
                }
            }
            part.sort_unstable();
            parts.push(part);
        }
        parts
    }

    fn reset(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.local[v] = usize::MAX;
        }
    }
}

fn largest_piece(pieces: &[Vec<usize>]) -> Option<usize> {
    pieces
        .iter()
        .enumerate()
        .filter(|(_, p)| p.len() >= 2)
        .max_by(|(_, a), (_, b)| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .map(|(i, _)| i)
}
