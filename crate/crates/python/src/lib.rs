//! Python bindings: `import trickle_fairness`.

use pyo3::exceptions::{PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trickle_core::metrics::{self, Source};
use trickle_core::model::{self, ModelError, ModelSolution, SolverConfig, TimingModel};
use trickle_core::redundancy::{self, KAssignment, Policy, DEFAULT_OFFSET, DEFAULT_STEP};
use trickle_core::simulator::{
    self, CounterRule, SimulationError, SimulationResult, TrickleParams,
};
use trickle_core::topology::{self, Topology, TopologyError};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn topology_err(e: TopologyError) -> PyErr {
    match e {
        TopologyError::Io(_) => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::Io(_) => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn sim_err(e: SimulationError) -> PyErr {
    match e {
        SimulationError::Io(_) => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

fn parse_timing(name: &str) -> PyResult<TimingModel> {
    match name {
        "mean_instant" => Ok(TimingModel::MeanInstant),
        "marginal" => Ok(TimingModel::Marginal),
        _ => Err(value_err(format!(
            "unknown timing {name:?}; expected 'mean_instant' or 'marginal'"
        ))),
    }
}

fn parse_counter(name: &str) -> PyResult<CounterRule> {
    match name {
        "distinct_senders" => Ok(CounterRule::DistinctSenders),
        "every_message" => Ok(CounterRule::EveryMessage),
        _ => Err(value_err(format!(
            "unknown counter {name:?}; expected 'distinct_senders' or 'every_message'"
        ))),
    }
}

fn policy(fixed_k: Option<u32>, step: Option<u32>, offset: Option<u32>) -> PyResult<Policy> {
    match fixed_k {
        Some(_) if step.is_some() || offset.is_some() => {
            Err(value_err("step and offset apply only without fixed_k"))
        }
        Some(k) => Ok(Policy::Fixed { k }),
        None => Ok(Policy::Heuristic {
            step: step.unwrap_or(DEFAULT_STEP),
            offset: offset.unwrap_or(DEFAULT_OFFSET),
        }),
    }
}

fn assignment(
    t: &Topology,
    fixed_k: Option<u32>,
    step: Option<u32>,
    offset: Option<u32>,
) -> PyResult<KAssignment> {
    redundancy::assign_k(t, policy(fixed_k, step, offset)?).map_err(value_err)
}

#[pyclass(name = "Topology", module = "trickle_fairness", frozen)]
struct PyTopology {
    inner: Topology,
}

#[pymethods]
impl PyTopology {
    /// Rectangular lattice; nodes within `range` of each other are neighbors.
    #[staticmethod]
    #[pyo3(signature = (rows = 7, cols = 7, spacing = 1.0, range = std::f64::consts::SQRT_2))]
    fn grid(rows: usize, cols: usize, spacing: f64, range: f64) -> PyResult<Self> {
        Ok(Self {
            inner: topology::generate_grid(rows, cols, spacing, range).map_err(topology_err)?,
        })
    }

    /// `n` nodes uniform in a `side` x `side` square.
    #[staticmethod]
    #[pyo3(signature = (n, side, range, seed = 1))]
    fn random_udg(n: usize, side: f64, range: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: topology::generate_random_udg(n, side, range, seed).map_err(topology_err)?,
        })
    }

    /// The bundled 49-node random topology.
    #[staticmethod]
    fn bundled_random() -> Self {
        Self {
            inner: topology::bundled_random_topology(),
        }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: topology::load_topology(path).map_err(topology_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: Topology::from_json(text).map_err(topology_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        topology::save_topology(&self.inner, path).map_err(topology_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(topology_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Topology(nodes={}, edges={})",
            self.inner.len(),
            self.inner.edge_count()
        )
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn neighbors(&self, node: usize) -> PyResult<Vec<usize>> {
        if node >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("node {node} out of range")));
        }
        Ok(self.inner.neighbors(node).to_vec())
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    /// `(x, y)` per node, or `None` for nodes without a position.
    fn positions(&self) -> Vec<Option<(f64, f64)>> {
        self.inner
            .nodes()
            .iter()
            .map(|n| n.position.map(|p| (p.x, p.y)))
            .collect()
    }

    #[getter]
    fn range(&self) -> Option<f64> {
        self.inner.range()
    }

    #[getter]
    fn mean_degree(&self) -> f64 {
        self.inner.mean_degree()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }
}

#[pyclass(name = "FairnessReport", module = "trickle_fairness", frozen, get_all)]
struct PyFairnessReport {
    source: String,
    nodes: usize,
    max_p: f64,
    min_p: f64,
    mean_p: f64,
    variance: f64,
    sample_variance: Option<f64>,
    message_count: f64,
}

#[pymethods]
impl PyFairnessReport {
    fn __repr__(&self) -> String {
        format!(
            "FairnessReport(source={:?}, max_p={:.4}, min_p={:.4}, variance={:.5}, message_count={:.3})",
            self.source, self.max_p, self.min_p, self.variance, self.message_count
        )
    }
}

impl From<metrics::FairnessReport> for PyFairnessReport {
    fn from(r: metrics::FairnessReport) -> Self {
        Self {
            source: match r.source {
                Source::Model => "model".into(),
                Source::Simulation => "simulation".into(),
            },
            nodes: r.nodes,
            max_p: r.max_p,
            min_p: r.min_p,
            mean_p: r.mean_p,
            variance: r.variance,
            sample_variance: r.sample_variance,
            message_count: r.message_count,
        }
    }
}

#[pyclass(name = "Solution", module = "trickle_fairness", frozen)]
struct PySolution {
    inner: ModelSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn p_tx(&self) -> Vec<f64> {
        self.inner.p_tx()
    }

    #[getter]
    fn p_f(&self) -> Vec<f64> {
        self.inner.nodes.iter().map(|n| n.p_f).collect()
    }

    #[getter]
    fn p_lo(&self) -> Vec<f64> {
        self.inner.nodes.iter().map(|n| n.p_lo).collect()
    }

    #[getter]
    fn k(&self) -> Vec<u32> {
        self.inner.nodes.iter().map(|n| n.k).collect()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn message_count(&self) -> f64 {
        model::expected_message_count(&self.inner)
    }

    fn fairness(&self) -> PyResult<PyFairnessReport> {
        Ok(metrics::fairness(&self.inner.p_tx(), Source::Model)
            .map_err(value_err)?
            .into())
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_json(path).map_err(model_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(policy={}, nodes={}, converged={}, iterations={})",
            self.inner.policy,
            self.inner.len(),
            self.inner.converged,
            self.inner.iterations
        )
    }
}

#[pyclass(name = "Simulation", module = "trickle_fairness", frozen)]
struct PySimulation {
    inner: SimulationResult,
}

#[pymethods]
impl PySimulation {
    #[getter]
    fn mean_p(&self) -> Vec<f64> {
        self.inner.mean_p()
    }

    /// Half-width of the 95% confidence interval per node; `None` with one run.
    #[getter]
    fn ci95(&self) -> Vec<Option<f64>> {
        self.inner.per_node.iter().map(|n| n.ci95).collect()
    }

    #[getter]
    fn counts(&self) -> Vec<Vec<u32>> {
        self.inner
            .per_node
            .iter()
            .map(|n| n.counts_per_run.clone())
            .collect()
    }

    fn fairness(&self) -> PyResult<PyFairnessReport> {
        Ok(metrics::fairness(&self.inner.mean_p(), Source::Simulation)
            .map_err(value_err)?
            .into())
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_json(path).map_err(sim_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.params;
        format!(
            "Simulation(policy={}, nodes={}, runs={}, intervals={})",
            self.inner.policy,
            self.inner.len(),
            p.runs,
            p.measured_intervals
        )
    }
}

/// Redundancy constant for a node with `num_neighbors` neighbors.
#[pyfunction]
#[pyo3(signature = (num_neighbors, step = DEFAULT_STEP, offset = DEFAULT_OFFSET))]
fn calculate_k(num_neighbors: usize, step: u32, offset: u32) -> PyResult<u32> {
    redundancy::calculate_k(num_neighbors, step, offset).map_err(value_err)
}

/// Per-node K: `fixed_k` everywhere, or the heuristic with `step`/`offset`.
#[pyfunction]
#[pyo3(signature = (topology, fixed_k = None, step = None, offset = None))]
fn assign_k(
    topology: PyRef<'_, PyTopology>,
    fixed_k: Option<u32>,
    step: Option<u32>,
    offset: Option<u32>,
) -> PyResult<Vec<u32>> {
    Ok(assignment(&topology.inner, fixed_k, step, offset)?.k)
}

/// `P(Y_T = n)` for `n = 0..=y`.
#[pyfunction]
#[pyo3(signature = (y, timing = "marginal"))]
fn yt_pmf(y: usize, timing: &str) -> PyResult<Vec<f64>> {
    let d = model::YtDistribution::new(y, parse_timing(timing)?).map_err(model_err)?;
    Ok(d.pmf)
}

/// Solves the per-node transmission probability fixed point.
#[pyfunction]
#[pyo3(signature = (
    topology, fixed_k = None, step = None, offset = None, timing = "mean_instant",
    tolerance = 1e-10, max_iterations = 10_000, damping = 1.0,
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    topology: PyRef<'_, PyTopology>,
    fixed_k: Option<u32>,
    step: Option<u32>,
    offset: Option<u32>,
    timing: &str,
    tolerance: f64,
    max_iterations: usize,
    damping: f64,
) -> PyResult<PySolution> {
    let t = &topology.inner;
    let k = assignment(t, fixed_k, step, offset)?;
    let config = SolverConfig {
        tolerance,
        max_iterations,
        damping,
        timing: parse_timing(timing)?,
        ..SolverConfig::default()
    };
    let inner = py
        .detach(|| model::solve_fixed_point(t, &k, &config))
        .map_err(model_err)?;
    Ok(PySolution { inner })
}

/// Runs the steady-state Trickle simulator.
#[pyfunction]
#[pyo3(signature = (
    topology, fixed_k = None, step = None, offset = None, intervals = 10, runs = 30,
    interval_length = 16.0, warmup = 2, seed = 1, counter = "distinct_senders",
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    topology: PyRef<'_, PyTopology>,
    fixed_k: Option<u32>,
    step: Option<u32>,
    offset: Option<u32>,
    intervals: usize,
    runs: usize,
    interval_length: f64,
    warmup: usize,
    seed: u64,
    counter: &str,
) -> PyResult<PySimulation> {
    let t = &topology.inner;
    let k = assignment(t, fixed_k, step, offset)?;
    let params = TrickleParams {
        interval_length,
        measured_intervals: intervals,
        warmup_intervals: warmup,
        runs,
        base_seed: seed,
        counter: parse_counter(counter)?,
    };
    let inner = py
        .detach(|| simulator::run_steady_state(t, &k, &params))
        .map_err(sim_err)?;
    Ok(PySimulation { inner })
}

/// Fairness statistics over a list of per-node probabilities.
#[pyfunction]
#[pyo3(signature = (probabilities, source = "model"))]
fn fairness(probabilities: Vec<f64>, source: &str) -> PyResult<PyFairnessReport> {
    let source = match source {
        "model" => Source::Model,
        "simulation" => Source::Simulation,
        _ => return Err(value_err(format!("unknown source {source:?}"))),
    };
    Ok(metrics::fairness(&probabilities, source)
        .map_err(value_err)?
        .into())
}

/// Per-node model/simulation differences: `{"abs_diff": [...], "max_abs_diff": x}`.
#[pyfunction]
fn compare<'py>(
    py: Python<'py>,
    solution: PyRef<'_, PySolution>,
    simulation: PyRef<'_, PySimulation>,
) -> PyResult<Bound<'py, PyDict>> {
    let c = metrics::compare(&solution.inner, &simulation.inner).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item(
        "abs_diff",
        c.rows.iter().map(|r| r.abs_diff).collect::<Vec<_>>(),
    )?;
    d.set_item("max_abs_diff", c.max_abs_diff)?;
    Ok(d)
}

#[pymodule]
pub fn trickle_fairness(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTopology>()?;
    m.add_class::<PyFairnessReport>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(calculate_k, m)?)?;
    m.add_function(wrap_pyfunction!(assign_k, m)?)?;
    m.add_function(wrap_pyfunction!(yt_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fairness, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
