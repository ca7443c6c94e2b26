use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dismantle::bench::{build_attack, StrategySpec, DEFAULT_CI_RADIUS};
use dismantle::epidemics::{sir_ensemble, InitialInfected, SirParams};
use dismantle::generators::{GenSpec, DEFAULT_SBM_RATIO};
use dismantle::io::{load_edge_list, load_plan, save_edge_list, save_plan};
use dismantle::spectral::{self, SpectralConfig};
use dismantle::strategies::CoreDegree;
use dismantle::{Edge, Error, GccCurve, Graph, RemovalPlan};

fn to_py(e: Error) -> PyErr {
    let message = e.to_string();
    match e.root() {
        Error::InvalidParam(_) | Error::Config(_) => PyValueError::new_err(message),
        Error::Io(_) => PyOSError::new_err(message),
        Error::NumericalFailure(_) | Error::GenerationFailure(_) | Error::ZeroBaseline => {
            PyRuntimeError::new_err(message)
        }
        _ => PyValueError::new_err(message),
    }
}

fn edge_pairs(edges: impl IntoIterator<Item = Edge>) -> Vec<(usize, usize)> {
    edges.into_iter().map(|e| (e.u, e.v)).collect()
}

/// Undirected simple graph on nodes `0..n`.
#[pyclass(name = "Graph", module = "dismantle")]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = Graph::from_edges(n, edges).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    /// Reads a whitespace-separated edge list; `%` and `#` start comments.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (inner, _) = load_edge_list(&path).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_edge_list(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        edge_pairs(self.inner.edges())
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn mean_degree(&self) -> f64 {
        self.inner.mean_degree()
    }

    fn gcc_fraction(&self) -> f64 {
        self.inner.gcc_fraction()
    }

    fn extract_gcc(&self) -> Self {
        PyGraph {
            inner: self.inner.extract_gcc(),
        }
    }

    /// Returns a copy without the given edges.
    fn without_edges(&self, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        let edges: Vec<Edge> = edges.into_iter().map(|(u, v)| Edge::new(u, v)).collect();
        inner.remove_edges(&edges).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Ordered batches of removed edges.
#[pyclass(name = "Plan", module = "dismantle")]
struct PyPlan {
    inner: RemovalPlan,
}

#[pymethods]
impl PyPlan {
    #[staticmethod]
    fn load(path: PathBuf, graph: &PyGraph) -> PyResult<Self> {
        let inner = load_plan(&path, graph.inner.m()).map_err(to_py)?;
        Ok(PyPlan { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_plan(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn total_edges(&self) -> usize {
        self.inner.total_edges
    }

    /// `(provenance, edges)` pairs in removal order.
    fn batches(&self) -> Vec<(String, Vec<(usize, usize)>)> {
        self.inner
            .batches
            .iter()
            .map(|b| (b.provenance.to_string(), edge_pairs(b.edges.iter().copied())))
            .collect()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        edge_pairs(self.inner.edges())
    }

    /// The first `round(budget * total_edges)` edges in plan order.
    fn edge_prefix(&self, budget: f64) -> Vec<(usize, usize)> {
        edge_pairs(self.inner.edge_prefix(budget))
    }

    fn cumulative_costs(&self) -> Vec<f64> {
        self.inner.cumulative_costs()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Plan(batches={}, removed={}, total_edges={})",
            self.inner.len(),
            self.inner.removed_edges(),
            self.inner.total_edges
        )
    }
}

fn generated(spec: GenSpec) -> PyResult<PyGraph> {
    let inner = spec.resolve().and_then(|s| s.generate()).map_err(to_py)?;
    Ok(PyGraph { inner })
}

#[pyfunction]
#[pyo3(signature = (n, mean_degree, seed=0))]
fn er(n: usize, mean_degree: f64, seed: u64) -> PyResult<PyGraph> {
    generated(GenSpec::Er { n, mean_degree, seed })
}

#[pyfunction]
#[pyo3(signature = (n, gamma, mean_degree, seed=0))]
fn sf(n: usize, gamma: f64, mean_degree: f64, seed: u64) -> PyResult<PyGraph> {
    generated(GenSpec::Sf {
        n,
        gamma,
        mean_degree,
        seed,
    })
}

#[pyfunction]
#[pyo3(signature = (block_sizes, p_in, p_out, seed=0))]
fn sbm(block_sizes: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> PyResult<PyGraph> {
    generated(GenSpec::Sbm {
        block_sizes,
        p_in,
        p_out,
        seed,
    })
}

/// Equal blocks with `p_in = ratio * p_out`, tuned to a mean degree.
#[pyfunction]
#[pyo3(signature = (n, blocks, mean_degree, ratio=DEFAULT_SBM_RATIO, seed=0))]
fn sbm_tuned(n: usize, blocks: usize, mean_degree: f64, ratio: f64, seed: u64) -> PyResult<PyGraph> {
    generated(GenSpec::SbmTuned {
        n,
        blocks,
        mean_degree,
        ratio,
        seed,
    })
}

fn spectral_config(threshold: f64, budget: Option<f64>, eta: Option<usize>, balanced: bool, seed: u64) -> SpectralConfig {
    SpectralConfig {
        eta_override: eta,
        gcc_threshold: threshold,
        budget,
        balanced,
        seed,
        ..Default::default()
    }
}

/// Baseline attacks: site, bond, hd, hda, ci, corehd, betweenness.
#[pyfunction]
#[pyo3(signature = (graph, strategy, seed=0, radius=DEFAULT_CI_RADIUS, recompute_interval=None))]
fn attack(
    graph: &PyGraph,
    strategy: &str,
    seed: u64,
    radius: usize,
    recompute_interval: Option<usize>,
) -> PyResult<PyPlan> {
    let spec = match strategy {
        "site" => StrategySpec::Site { runs: 1 },
        "bond" => StrategySpec::Bond { runs: 1 },
        "hd" => StrategySpec::Hd,
        "hda" => StrategySpec::Hda,
        "ci" => StrategySpec::Ci { radius },
        "corehd" => StrategySpec::Corehd {
            rank_by: CoreDegree::Residual,
        },
        "betweenness" => StrategySpec::Betweenness { recompute_interval },
        other => return Err(PyValueError::new_err(format!("unknown strategy `{other}`"))),
    };
    let attack = build_attack(&graph.inner, &spec, seed, 0.01, None).map_err(to_py)?;
    Ok(PyPlan { inner: attack.plan })
}

#[pyfunction]
#[pyo3(signature = (graph, threshold=0.01, budget=None, eta=None, balanced=false, seed=0))]
fn hpi_ncut(
    graph: &PyGraph,
    threshold: f64,
    budget: Option<f64>,
    eta: Option<usize>,
    balanced: bool,
    seed: u64,
) -> PyResult<PyPlan> {
    let cfg = spectral_config(threshold, budget, eta, balanced, seed);
    let (_, plan) = spectral::hpi_ncut(&graph.inner, &cfg).map_err(to_py)?;
    Ok(PyPlan { inner: plan })
}

/// Approximate Fiedler vector of a connected graph and its Rayleigh quotient.
#[pyfunction]
#[pyo3(signature = (graph, eta=None, seed=0))]
fn power_iteration(graph: &PyGraph, eta: Option<usize>, seed: u64) -> PyResult<(Vec<f64>, f64)> {
    let cfg = spectral_config(0.01, None, eta, false, seed);
    let v = spectral::power_iteration(&graph.inner, &cfg).map_err(to_py)?;
    Ok((v.values, v.rayleigh))
}

#[pyfunction]
fn ncut_value(graph: &PyGraph, side: Vec<usize>) -> PyResult<f64> {
    spectral::ncut_value(&graph.inner, &side).map_err(to_py)
}

/// Breakpoints `(cost, gcc_fraction)` of the curve produced by a plan.
#[pyfunction]
#[pyo3(signature = (graph, plan, threshold=0.01))]
fn gcc_curve(graph: &PyGraph, plan: &PyPlan, threshold: f64) -> PyResult<Vec<(f64, f64)>> {
    let curve = dismantle::execute_plan(&graph.inner, &plan.inner, threshold).map_err(to_py)?;
    Ok(curve.breakpoints)
}

/// Area under a step curve given as `(cost, gcc_fraction)` breakpoints.
#[pyfunction]
fn cfe(points: Vec<(f64, f64)>) -> PyResult<f64> {
    if points.first().map(|p| p.0) != Some(0.0) {
        return Err(PyValueError::new_err("curve must start at cost 0"));
    }
    Ok(dismantle::cfe(&GccCurve { breakpoints: points }))
}

#[pyfunction]
fn improvement(f_star: f64, f: f64) -> PyResult<f64> {
    dismantle::improvement(f_star, f).map_err(to_py)
}

/// Mean SIR trace over `runs` seeded runs, as a dict of lists.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (graph, beta=0.10, gamma=0.02, runs=100, infected=1, max_steps=1000, seed=0))]
fn sir(
    py: Python<'_>,
    graph: &PyGraph,
    beta: f64,
    gamma: f64,
    runs: usize,
    infected: usize,
    max_steps: usize,
    seed: u64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let params = SirParams {
        beta,
        gamma,
        initial_infected: InitialInfected::Random(infected),
        max_steps,
        seed,
    };
    let mean = sir_ensemble(&graph.inner, &params, runs).map_err(to_py)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("s", mean.s)?;
    out.set_item("i", mean.i)?;
    out.set_item("r", mean.r)?;
    out.set_item("i_std", mean.i_std)?;
    out.set_item("r_std", mean.r_std)?;
    Ok(out.unbind())
}

#[pymodule]
#[pyo3(name = "dismantle")]
fn dismantle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(er, m)?)?;
    m.add_function(wrap_pyfunction!(sf, m)?)?;
    m.add_function(wrap_pyfunction!(sbm, m)?)?;
    m.add_function(wrap_pyfunction!(sbm_tuned, m)?)?;
    m.add_function(wrap_pyfunction!(attack, m)?)?;
    m.add_function(wrap_pyfunction!(hpi_ncut, m)?)?;
    m.add_function(wrap_pyfunction!(power_iteration, m)?)?;
    m.add_function(wrap_pyfunction!(ncut_value, m)?)?;
    m.add_function(wrap_pyfunction!(gcc_curve, m)?)?;
    m.add_function(wrap_pyfunction!(cfe, m)?)?;
    m.add_function(wrap_pyfunction!(improvement, m)?)?;
    m.add_function(wrap_pyfunction!(sir, m)?)?;
    Ok(())
}
