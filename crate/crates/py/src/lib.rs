//! Python module `perclab`: graphs, Monte Carlo estimates, exact
//! polynomials and the closed-form bounds.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use perclab::analytic;
use perclab::estimate::{self as est, McConfig, MCEstimate, PcMethod, StatisticSpec, SurvivalTarget};
use perclab::graphs::{self, Distance, Family, HalfMode, LampElement, TreeAddress, Truncation};
use perclab::oracle;
use perclab::perc::{self, Constraint, EdgeSampler, ProfileMode, DEFAULT_BUDGET};
use perclab::suite::{Suite, SuiteConfig, CRITERIA};

fn err(e: perclab::Error) -> PyErr {
    if e.is_resource_limit() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Vertex", module = "perclab", frozen, eq, hash, ord, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PyVertex(graphs::Vertex);

#[pymethods]
impl PyVertex {
    /// Tree vertex reached from the root by the given child digits.
    #[staticmethod]
    fn tree(path: Vec<u8>) -> Self {
        PyVertex(path.iter().fold(TreeAddress::root(), |t, &c| t.child(c)).into())
    }

    /// Lamplighter element `(pos, lamps)`.
    #[staticmethod]
    #[pyo3(signature = (pos, lamps = Vec::new()))]
    fn lamp(pos: i64, lamps: Vec<i64>) -> Self {
        PyVertex(LampElement::new(pos, lamps).into())
    }

    #[staticmethod]
    fn decode(data: &[u8]) -> PyResult<Self> {
        graphs::Vertex::decode(data).map(PyVertex).map_err(err)
    }

    fn encode<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.encode())
    }

    #[getter]
    fn level(&self) -> i64 {
        self.0.level()
    }

    fn __repr__(&self) -> String {
        format!("Vertex({})", self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "Kernel", module = "perclab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel(graphs::Kernel);

#[pymethods]
impl PyKernel {
    #[new]
    #[pyo3(signature = (family, half_mode = "none"))]
    fn new(family: &str, half_mode: &str) -> PyResult<Self> {
        let family: Family = family.parse().map_err(err)?;
        let half: HalfMode = half_mode.parse().map_err(err)?;
        graphs::Kernel::new(family, half).map(PyKernel).map_err(err)
    }

    #[getter]
    fn family(&self) -> String {
        self.0.family.to_string()
    }

    #[getter]
    fn half_mode(&self) -> &'static str {
        self.0.half.name()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.family.degree()
    }

    fn origin(&self) -> PyVertex {
        PyVertex(self.0.origin())
    }

    fn neighbors(&self, v: &PyVertex) -> PyResult<Vec<PyVertex>> {
        Ok(self.0.neighbors(&v.0).map_err(err)?.into_iter().map(PyVertex).collect())
    }

    fn contains(&self, v: &PyVertex) -> PyResult<bool> {
        self.0.in_half(&v.0).map_err(err)
    }

    /// Number of vertices within distance `radius` of the origin.
    fn ball_size(&self, radius: u32) -> PyResult<usize> {
        Ok(graphs::ball(&self.0, &self.0.origin(), radius).map_err(err)?.num_vertices())
    }

    /// Graph distance, or None when it exceeds `cap`.
    #[pyo3(signature = (x, y, cap = 12))]
    fn distance(&self, x: &PyVertex, y: &PyVertex, cap: u32) -> PyResult<Option<u32>> {
        Ok(match graphs::graph_distance(&self.0, &x.0, &y.0, cap).map_err(err)? {
            Distance::Exact(d) => Some(d),
            Distance::Censored => None,
        })
    }

    /// The vertex used as the distance-`d` target of connection statistics.
    fn distance_target(&self, d: u32) -> PyResult<PyVertex> {
        est::distance_target(&self.0, d).map(PyVertex).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.0)
    }
}

#[pyclass(name = "Estimate", module = "perclab", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEstimate {
    mean: f64,
    stderr: f64,
    n: u64,
    n_censored: u64,
}

impl From<MCEstimate> for PyEstimate {
    fn from(e: MCEstimate) -> Self {
        Self { mean: e.mean, stderr: e.stderr, n: e.n, n_censored: e.n_censored }
    }
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!("Estimate(mean={}, stderr={}, n={}, n_censored={})", self.mean, self.stderr, self.n, self.n_censored)
    }
}

#[pyclass(name = "ExactPoly", module = "perclab", frozen)]
struct PyExactPoly(oracle::ExactPoly);

#[pymethods]
impl PyExactPoly {
    /// Coefficients as exact fractions, lowest degree first.
    #[getter]
    fn coeffs(&self) -> Vec<String> {
        self.0.coeffs().iter().map(|c| c.to_string()).collect()
    }

    fn __call__(&self, p: f64) -> PyResult<f64> {
        if !p.is_finite() {
            return Err(PyValueError::new_err("p must be finite"));
        }
        Ok(self.0.eval_f64(p))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ExactPoly({})", self.0)
    }
}

fn mc(replicas: u64, seed: u64, budget: u64, workers: Option<usize>) -> McConfig {
    let cfg = McConfig::new(replicas, seed).with_budget(budget);
    match workers {
        Some(w) => cfg.with_workers(w),
        None => cfg,
    }
}

fn profile_mode(mode: &str) -> PyResult<ProfileMode> {
    Ok(match mode {
        "forward" => ProfileMode::Forward,
        "upward_window" => ProfileMode::UpwardWindow,
        "upward_free" => ProfileMode::UpwardFree,
        "full_cluster" => ProfileMode::FullCluster,
        other => return Err(PyValueError::new_err(format!("unknown profile mode {other:?}"))),
    })
}

/// Monte Carlo estimate of a statistic such as `e_3`, `a_0` or `tau_2`.
#[pyfunction]
#[pyo3(signature = (kernel, statistic, p, replicas = 10_000, seed = 1, budget = DEFAULT_BUDGET, workers = None))]
fn estimate(
    py: Python<'_>,
    kernel: &PyKernel,
    statistic: &str,
    p: f64,
    replicas: u64,
    seed: u64,
    budget: u64,
    workers: Option<usize>,
) -> PyResult<PyEstimate> {
    let spec: StatisticSpec = statistic.parse().map_err(err)?;
    let stat = spec.resolve(&kernel.0).map_err(err)?;
    let cfg = mc(replicas, seed, budget, workers);
    let k = kernel.0;
    py.detach(|| est::estimate_statistic(&k, &stat, p, &cfg)).map(Into::into).map_err(err)
}

/// Level profile `k = 0..=max_k` from one sweep per replica.
#[pyfunction]
#[pyo3(signature = (kernel, mode, max_k, p, replicas = 10_000, seed = 1, budget = DEFAULT_BUDGET, workers = None))]
#[allow(clippy::too_many_arguments)]
fn profile(
    py: Python<'_>,
    kernel: &PyKernel,
    mode: &str,
    max_k: u32,
    p: f64,
    replicas: u64,
    seed: u64,
    budget: u64,
    workers: Option<usize>,
) -> PyResult<Vec<PyEstimate>> {
    let mode = profile_mode(mode)?;
    let cfg = mc(replicas, seed, budget, workers);
    let k = kernel.0;
    let values = py.detach(|| est::estimate_profile(&k, mode, max_k, p, &cfg)).map_err(err)?;
    Ok(values.into_iter().map(Into::into).collect())
}

/// Critical-point estimate by bisection: `method` is `"survival"` (halving
/// rule unless `threshold` is given) or `"crossing"` (`e_k0 = 1`).
#[pyfunction]
#[pyo3(signature = (
    kernel, method = "survival", k0 = 1, depth = 10, threshold = None, tol = 2e-3,
    replicas = 20_000, seed = 1, budget = DEFAULT_BUDGET, workers = None
))]
#[allow(clippy::too_many_arguments)]
fn critical_point<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    method: &str,
    k0: u32,
    depth: u32,
    threshold: Option<f64>,
    tol: f64,
    replicas: u64,
    seed: u64,
    budget: u64,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = mc(replicas, seed, budget, workers);
    let k = kernel.0;
    let est = match method {
        "crossing" => py.detach(|| est::pc_crossing(&k, k0, tol, &cfg)),
        "survival" => {
            let target = threshold.map_or(SurvivalTarget::Halving, SurvivalTarget::Level);
            py.detach(|| est::pc_survival(&k, depth, target, tol, &cfg))
        }
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p_hat", est.p_hat)?;
    d.set_item("stderr", est.stderr)?;
    d.set_item("bracket", est.bracket)?;
    d.set_item("replicas", est.replicas)?;
    d.set_item("probes", est.probes.len())?;
    d.set_item("label", est.label)?;
    match est.method {
        PcMethod::Crossing { k0 } => d.set_item("k0", k0)?,
        PcMethod::Survival { depth, .. } => d.set_item("depth", depth)?,
    }
    Ok(d)
}

/// One cluster exploration from the origin inside the relative level
/// window `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (kernel, p, seed = 1, lo = None, hi = None, budget = DEFAULT_BUDGET))]
fn explore<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    p: f64,
    seed: u64,
    lo: Option<i64>,
    hi: Option<i64>,
    budget: u64,
) -> PyResult<Bound<'py, PyDict>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PyValueError::new_err(format!("p must lie in [0, 1], got {p}")));
    }
    let o = kernel.0.origin();
    let report = perc::explore(&kernel.0, &mut EdgeSampler::new(seed, p), &o, &Constraint::window(lo, hi), budget)
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("size", report.visited.len())?;
    d.set_item("exhausted", report.is_exhausted())?;
    d.set_item("edges_examined", report.edges_examined)?;
    let levels = PyDict::new(py);
    for (level, count) in &report.per_level {
        levels.set_item(level - o.level(), count)?;
    }
    d.set_item("per_level", levels)?;
    Ok(d)
}

/// Exact expectation polynomial of a statistic on a truncation of radius
/// `radius` inside the relative level window `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (kernel, statistic, radius = 2, lo = None, hi = None))]
fn exact(kernel: &PyKernel, statistic: &str, radius: u32, lo: Option<i64>, hi: Option<i64>) -> PyResult<PyExactPoly> {
    let g = Truncation::new(radius, lo, hi).build(&kernel.0, &kernel.0.origin()).map_err(err)?;
    let spec: StatisticSpec = statistic.parse().map_err(err)?;
    let stat = spec.resolve(&g.to_lattice()).map_err(err)?;
    oracle::exact_statistic_poly(&g, &stat).map(PyExactPoly).map_err(err)
}

/// Uniform attached to the edge `{u, v}` under `seed`.
#[pyfunction]
fn edge_uniform(seed: u64, u: &PyVertex, v: &PyVertex) -> f64 {
    perc::edge_uniform_between(seed, &u.0, &v.0)
}

#[pyfunction]
fn bound_ledger(py: Python<'_>, alpha: u32, beta: u32) -> PyResult<Bound<'_, PyDict>> {
    if alpha < 2 || beta < 2 {
        return Err(PyValueError::new_err("alpha and beta must be at least 2"));
    }
    let l = analytic::bound_ledger(alpha, beta);
    let d = PyDict::new(py);
    d.set_item("alpha", l.alpha)?;
    d.set_item("beta", l.beta)?;
    d.set_item("swapped", l.swapped)?;
    d.set_item("pc_lower", l.pc_lower)?;
    d.set_item("pc_upper", l.pc_upper)?;
    d.set_item("pu_lower", l.pu_lower)?;
    d.set_item("pu_upper", l.pu_upper)?;
    d.set_item("gamma", l.gamma)?;
    d.set_item("sufficient", l.sufficient)?;
    Ok(d)
}

/// Partitions of `n` into distinct parts.
#[pyfunction]
fn q_distinct(n: usize) -> BigUint {
    analytic::q_distinct(n)
}

/// Partitions of `n` into odd parts.
#[pyfunction]
fn q_odd(n: usize) -> BigUint {
    analytic::q_odd(n)
}

/// Runs acceptance criteria; returns `(id, title, passed, failed checks)`.
#[pyfunction]
#[pyo3(signature = (criteria = None, seed = 1, workers = None))]
fn run_suite(
    py: Python<'_>,
    criteria: Option<Vec<u8>>,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Vec<(u8, &'static str, bool, Vec<String>)>> {
    let ids = criteria.unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(PyValueError::new_err(format!("unknown criterion {bad}")));
    }
    let mut cfg = SuiteConfig { seed, ..SuiteConfig::default() };
    if let Some(w) = workers {
        cfg.workers = w.max(1);
    }
    let reports = py.detach(|| Suite::new(cfg).run_all(&ids));
    Ok(reports
        .into_iter()
        .map(|r| {
            let failed = r.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect();
            (r.id, r.title, r.pass(), failed)
        })
        .collect())
}

#[pymodule(name = "perclab")]
fn perclab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVertex>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyExactPoly>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(critical_point, m)?)?;
    m.add_function(wrap_pyfunction!(explore, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(edge_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(bound_ledger, m)?)?;
    m.add_function(wrap_pyfunction!(q_distinct, m)?)?;
    m.add_function(wrap_pyfunction!(q_odd, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
