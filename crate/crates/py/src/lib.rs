//! Python bindings. Bitstrings cross the boundary as `"0101"` strings or
//! sequences of 0/1; QUBO terms as dicts keyed by index or index pair.

use std::collections::BTreeMap;

use posiform_core as core;
use posiform_core::metrics::TimeSource;
use posiform_core::planting::{PlantedInstance, PlantingConfig};
use posiform_core::samplers::{SampleSet, SamplerParams};
use posiform_core::topology::EdgeSet;
use posiform_core::twosat::{Clause, TwoSatFormula};
use posiform_core::{Bitstring, Literal, Posiform, Qubo};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn bits_arg(obj: &Bound<'_, PyAny>) -> PyResult<Bitstring> {
    if let Ok(s) = obj.extract::<String>() {
        return s.parse().py();
    }
    let v: Vec<i64> = obj.extract()?;
    v.into_iter()
        .map(|b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(PyValueError::new_err(format!("bit value {other} is not 0 or 1"))),
        })
        .collect::<PyResult<Vec<bool>>>()
        .map(Bitstring::new)
}

/// DIMACS-style literal: `v + 1` for `x_v`, `-(v + 1)` for its complement.
fn literal_arg(l: i64) -> PyResult<Literal> {
    match l {
        0 => Err(PyValueError::new_err("literal 0 is not allowed")),
        l if l > 0 => Ok(Literal::pos(l as usize - 1)),
        l => Ok(Literal::neg((-l) as usize - 1)),
    }
}

fn literal_out(l: Literal) -> i64 {
    let v = l.var as i64 + 1;
    if l.negated {
        -v
    } else {
        v
    }
}

fn formula_arg(num_vars: usize, clauses: Vec<(i64, i64)>) -> PyResult<TwoSatFormula> {
    let cs = clauses
        .into_iter()
        .map(|(a, b)| Ok(Clause::new(literal_arg(a)?, literal_arg(b)?)))
        .collect::<PyResult<Vec<_>>>()?;
    TwoSatFormula::with_clauses(num_vars, cs).py()
}

#[pyclass(name = "Qubo", module = "posiform", from_py_object)]
#[derive(Clone)]
struct PyQubo {
    inner: Qubo,
}

#[pymethods]
impl PyQubo {
    #[new]
    #[pyo3(signature = (num_vars, linear=None, quadratic=None, offset=0.0))]
    fn new(
        num_vars: usize,
        linear: Option<BTreeMap<usize, f64>>,
        quadratic: Option<BTreeMap<(usize, usize), f64>>,
        offset: f64,
    ) -> PyResult<Self> {
        let inner = Qubo::from_terms(
            num_vars,
            linear.unwrap_or_default(),
            quadratic.unwrap_or_default().into_iter().map(|((i, j), c)| (i, j, c)),
            offset,
        )
        .py()?;
        Ok(PyQubo { inner })
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    #[getter]
    fn linear(&self) -> BTreeMap<usize, f64> {
        self.inner.linear().clone()
    }

    #[getter]
    fn quadratic(&self) -> BTreeMap<(usize, usize), f64> {
        self.inner.quadratic().clone()
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.inner.offset()
    }

    /// Energy at `bits`, offset included.
    fn energy(&self, bits: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.inner.energy(&bits_arg(bits)?).py()
    }

    /// Posiform with the same values, complementing the lower index of each
    /// negative coupler.
    fn to_posiform(&self) -> PyPosiform {
        PyPosiform {
            inner: self.inner.to_posiform(Default::default()),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyQubo { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Qubo({})", self.inner)
    }
}

#[pyclass(name = "Posiform", module = "posiform", from_py_object)]
#[derive(Clone)]
struct PyPosiform {
    inner: Posiform,
}

#[pymethods]
impl PyPosiform {
    /// `{(var, negated): coefficient}`.
    #[getter]
    fn linear(&self) -> BTreeMap<(usize, bool), f64> {
        self.inner
            .linear()
            .iter()
            .map(|(l, &c)| ((l.var, l.negated), c))
            .collect()
    }

    /// `{((var, negated), (var, negated)): coefficient}`.
    #[getter]
    fn quadratic(&self) -> BTreeMap<((usize, bool), (usize, bool)), f64> {
        self.inner
            .quadratic()
            .iter()
            .map(|((a, b), &c)| (((a.var, a.negated), (b.var, b.negated)), c))
            .collect()
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.inner.offset()
    }

    fn value(&self, bits: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.inner.value(&bits_arg(bits)?).py()
    }

    fn to_qubo(&self) -> PyQubo {
        PyQubo {
            inner: self.inner.to_qubo(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Posiform(num_vars={}, terms={}, offset={})",
            self.inner.num_vars(),
            self.inner.linear().len() + self.inner.quadratic().len(),
            self.inner.offset()
        )
    }
}

#[pyclass(name = "EdgeSet", module = "posiform", from_py_object)]
#[derive(Clone)]
struct PyEdgeSet {
    inner: EdgeSet,
}

#[pymethods]
impl PyEdgeSet {
    #[new]
    #[pyo3(signature = (num_vars, edges, label="custom"))]
    fn new(num_vars: usize, edges: Vec<(usize, usize)>, label: &str) -> PyResult<Self> {
        EdgeSet::from_edges(num_vars, edges, label)
            .py()
            .map(|inner| PyEdgeSet { inner })
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn active_nodes(&self) -> usize {
        self.inner.active_nodes()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_owned()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Drops isolated and dead nodes; returns the new graph and the original
    /// index of each remaining node.
    fn compact(&self) -> (PyEdgeSet, Vec<usize>) {
        let (inner, map) = self.inner.compact();
        (PyEdgeSet { inner }, map)
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    #[staticmethod]
    #[pyo3(signature = (text, label="edge-list"))]
    fn from_edge_list(text: &str, label: &str) -> PyResult<Self> {
        EdgeSet::from_edge_list(text, label)
            .py()
            .map(|inner| PyEdgeSet { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "EdgeSet({}, nodes={}, active={}, edges={})",
            self.inner.label(),
            self.inner.num_vars(),
            self.inner.active_nodes(),
            self.inner.num_edges()
        )
    }
}

#[pyclass(name = "PlantedInstance", module = "posiform")]
struct PyPlantedInstance {
    inner: PlantedInstance,
}

#[pymethods]
impl PyPlantedInstance {
    #[getter]
    fn qubo(&self) -> PyQubo {
        PyQubo {
            inner: self.inner.qubo.clone(),
        }
    }

    #[getter]
    fn posiform(&self) -> PyPosiform {
        PyPosiform {
            inner: self.inner.posiform.clone(),
        }
    }

    #[getter]
    fn planted(&self) -> String {
        self.inner.planted.to_string()
    }

    #[getter]
    fn planted_energy(&self) -> f64 {
        self.inner.planted_energy
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    #[getter]
    fn clause_count(&self) -> usize {
        self.inner.clause_count()
    }

    /// Sampled clauses as DIMACS-style literal pairs.
    fn clauses(&self) -> Vec<(i64, i64)> {
        self.inner
            .formula
            .clauses()
            .iter()
            .map(|c| (literal_out(c.first), literal_out(c.second)))
            .collect()
    }

    /// The instance file document.
    fn to_json(&self) -> String {
        core::io::InstanceFile::from_instance(&self.inner).to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "PlantedInstance(num_vars={}, clauses={}, planted={})",
            self.inner.num_vars(),
            self.inner.clause_count(),
            self.inner.planted
        )
    }
}

#[pyclass(name = "SampleSet", module = "posiform")]
struct PySampleSet {
    inner: SampleSet,
}

#[pymethods]
impl PySampleSet {
    #[getter]
    fn sampler(&self) -> String {
        self.inner.sampler.clone()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.energy).collect()
    }

    #[getter]
    fn samples(&self) -> Vec<String> {
        self.inner.records.iter().map(|r| r.bits.to_string()).collect()
    }

    #[getter]
    fn wall_time_s(&self) -> f64 {
        self.inner.wall_time_s
    }

    #[getter]
    fn work(&self) -> u64 {
        self.inner.work
    }

    fn best_energy(&self) -> Option<f64> {
        self.inner.best_energy()
    }

    fn gsp(&self, ground_energy: f64) -> PyResult<f64> {
        core::metrics::gsp(&self.inner, ground_energy).py()
    }

    /// TTS99 of this run from wall time or from the deterministic work count.
    #[pyo3(signature = (ground_energy, time_source="wall"))]
    fn tts99(&self, ground_energy: f64, time_source: &str) -> PyResult<Option<f64>> {
        let ts: TimeSource = time_source.parse().py()?;
        core::metrics::RunReport::new("python", &self.inner, ground_energy, ts)
            .py()
            .map(|r| r.tts_99)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SampleSet({}, reads={}, best={:?})",
            self.inner.sampler,
            self.inner.len(),
            self.inner.best_energy()
        )
    }
}

/// Plants a unique optimum at `planted` (a bitstring, or an int for a random
/// one of that length).
#[pyfunction]
#[pyo3(signature = (planted, seed=0, edge_set=None, batch_size=None, coefficients=None, max_clauses=None))]
fn plant(
    py: Python<'_>,
    planted: &Bound<'_, PyAny>,
    seed: u64,
    edge_set: Option<PyEdgeSet>,
    batch_size: Option<usize>,
    coefficients: Option<Vec<f64>>,
    max_clauses: Option<usize>,
) -> PyResult<PyPlantedInstance> {
    let bits = match planted.extract::<usize>() {
        Ok(n) => core::planting::random_planted(n, core::rng::derive_seed(seed, 1)),
        Err(_) => bits_arg(planted)?,
    };
    let mut cfg = PlantingConfig::new(bits, seed);
    if let Some(e) = edge_set {
        cfg = cfg.with_edge_set(e.inner);
    }
    if let Some(b) = batch_size {
        cfg = cfg.with_batch_size(b);
    }
    if let Some(c) = coefficients {
        cfg = cfg.with_coefficients(c);
    }
    if let Some(m) = max_clauses {
        cfg = cfg.with_max_clauses(m);
    }
    let inner = py.detach(|| core::planting::plant(&cfg)).py()?;
    Ok(PyPlantedInstance { inner })
}

/// Reads an instance file and returns its QUBO and planted bitstring.
#[pyfunction]
fn read_instance(path: std::path::PathBuf) -> PyResult<(PyQubo, String, f64)> {
    let f = core::io::InstanceFile::read(&path).py()?;
    let inner = f.qubo().py()?;
    Ok((PyQubo { inner }, f.planted.to_string(), f.planted_energy))
}

/// `(min_energy, minimizers)` by exhaustive enumeration.
#[pyfunction]
#[pyo3(signature = (qubo, cap=core::model::DEFAULT_EXHAUSTIVE_CAP))]
fn brute_force(py: Python<'_>, qubo: &PyQubo, cap: usize) -> PyResult<(f64, Vec<String>)> {
    let bf = py
        .detach(|| core::model::brute_force_with_cap(&qubo.inner, cap))
        .py()?;
    Ok((bf.min_energy, bf.minimizers.iter().map(|b| b.to_string()).collect()))
}

#[pyfunction]
#[pyo3(signature = (qubo, num_reads=800, sweeps=1000, seed=0, beta_range=None))]
fn simulated_annealing(
    py: Python<'_>,
    qubo: &PyQubo,
    num_reads: usize,
    sweeps: usize,
    seed: u64,
    beta_range: Option<(f64, f64)>,
) -> PyResult<PySampleSet> {
    let p = SamplerParams {
        num_reads,
        sweeps,
        beta_range,
        seed,
    };
    let inner = py
        .detach(|| core::samplers::simulated_annealing(&qubo.inner, &p))
        .py()?;
    Ok(PySampleSet { inner })
}

#[pyfunction]
#[pyo3(signature = (qubo, num_reads=800, seed=0))]
fn steepest_descent(py: Python<'_>, qubo: &PyQubo, num_reads: usize, seed: u64) -> PyResult<PySampleSet> {
    let p = SamplerParams {
        num_reads,
        seed,
        ..SamplerParams::default()
    };
    let inner = py
        .detach(|| core::samplers::steepest_descent(&qubo.inner, &p))
        .py()?;
    Ok(PySampleSet { inner })
}

#[pyfunction]
#[pyo3(signature = (qubo, cap=core::model::DEFAULT_EXHAUSTIVE_CAP))]
fn exhaustive(py: Python<'_>, qubo: &PyQubo, cap: usize) -> PyResult<PySampleSet> {
    let inner = py
        .detach(|| core::samplers::exhaustive_with_cap(&qubo.inner, cap))
        .py()?;
    Ok(PySampleSet { inner })
}

/// `None` when `p` is zero.
#[pyfunction]
fn tts99(total_time_s: f64, reads: usize, p: f64) -> PyResult<Option<f64>> {
    core::metrics::tts99(total_time_s, reads, p).py()
}

/// A satisfying assignment of a 2-SAT formula, or `None`.
#[pyfunction]
fn solve_2sat(num_vars: usize, clauses: Vec<(i64, i64)>) -> PyResult<Option<String>> {
    Ok(formula_arg(num_vars, clauses)?.solve().map(|b| b.to_string()))
}

#[pyfunction]
fn is_uniquely_satisfiable(num_vars: usize, clauses: Vec<(i64, i64)>, witness: &Bound<'_, PyAny>) -> PyResult<bool> {
    formula_arg(num_vars, clauses)?
        .is_uniquely_satisfiable(&bits_arg(witness)?)
        .py()
}

#[pyfunction]
#[pyo3(signature = (m, t=4))]
fn chimera(m: usize, t: usize) -> PyResult<PyEdgeSet> {
    core::topology::chimera_graph(m, m, t)
        .py()
        .map(|inner| PyEdgeSet { inner })
}

#[pyfunction]
fn pegasus(m: usize) -> PyResult<PyEdgeSet> {
    core::topology::pegasus(m).py().map(|inner| PyEdgeSet { inner })
}

#[pyfunction]
#[pyo3(signature = (m, t=4))]
fn zephyr(m: usize, t: usize) -> PyResult<PyEdgeSet> {
    core::topology::zephyr(m, t).py().map(|inner| PyEdgeSet { inner })
}

#[pyfunction]
fn complete(n: usize) -> PyEdgeSet {
    PyEdgeSet {
        inner: core::topology::complete(n),
    }
}

#[pyfunction]
#[pyo3(signature = (n, density, seed=0))]
fn random_graph(n: usize, density: f64, seed: u64) -> PyResult<PyEdgeSet> {
    core::topology::random_graph(n, density, seed)
        .py()
        .map(|inner| PyEdgeSet { inner })
}

/// A catalogued annealer's graph with random defects matching its counts.
#[pyfunction]
#[pyo3(signature = (chip, seed=0))]
fn hardware_graph(chip: &str, seed: u64) -> PyResult<PyEdgeSet> {
    let profile = core::topology::hardware_profile(chip)
        .ok_or_else(|| PyValueError::new_err(format!("unknown chip {chip:?}")))?;
    profile.graph(seed).py().map(|inner| PyEdgeSet { inner })
}

#[pyfunction]
#[pyo3(signature = (edge_set, node_defects, edge_defects=0, seed=0))]
fn apply_defects(edge_set: &PyEdgeSet, node_defects: usize, edge_defects: usize, seed: u64) -> PyResult<PyEdgeSet> {
    core::topology::apply_defects(&edge_set.inner, node_defects, edge_defects, seed)
        .py()
        .map(|inner| PyEdgeSet { inner })
}

#[pymodule(name = "posiform")]
fn posiform_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyQubo>()?;
    m.add_class::<PyPosiform>()?;
    m.add_class::<PyEdgeSet>()?;
    m.add_class::<PyPlantedInstance>()?;
    m.add_class::<PySampleSet>()?;
    for f in [
        wrap_pyfunction!(plant, m)?,
        wrap_pyfunction!(read_instance, m)?,
        wrap_pyfunction!(brute_force, m)?,
        wrap_pyfunction!(simulated_annealing, m)?,
        wrap_pyfunction!(steepest_descent, m)?,
        wrap_pyfunction!(exhaustive, m)?,
        wrap_pyfunction!(tts99, m)?,
        wrap_pyfunction!(solve_2sat, m)?,
        wrap_pyfunction!(is_uniquely_satisfiable, m)?,
        wrap_pyfunction!(chimera, m)?,
        wrap_pyfunction!(pegasus, m)?,
        wrap_pyfunction!(zephyr, m)?,
        wrap_pyfunction!(complete, m)?,
        wrap_pyfunction!(random_graph, m)?,
        wrap_pyfunction!(hardware_graph, m)?,
        wrap_pyfunction!(apply_defects, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
