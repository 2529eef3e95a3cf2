//! Python bindings: models, the solver, Monte Carlo paths, convergence
//! studies and the closed-form equilibria.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pdp_core::analytic;
use pdp_core::harness::{self, HarnessError};
use pdp_core::model::{self, Domain, IntervalDistribution, TransitionMatrix, VectorField};
use pdp_core::montecarlo::{self, McConfig};
use pdp_core::solver::{self, QuadratureRule, SolveOptions, SolverError};
use pdp_core::{PdpModel, Scenario};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solver_err(e: SolverError) -> PyErr {
    match e {
        SolverError::Instability { .. } => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn harness_err(e: HarnessError) -> PyErr {
    match e.exit_code() {
        harness::EXIT_INSTABILITY => PyArithmeticError::new_err(e.to_string()),
        harness::EXIT_IO => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A piecewise deterministic process on `[omega_a, omega_b]` up to `t_end`.
#[pyclass(name = "Model", module = "pdp", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: PdpModel,
}

#[pymethods]
impl PyModel {
    /// `fields` holds `(gamma, drift)` pairs for `A(x) = drift - gamma x`;
    /// `intervals` holds specs such as `"exponential:0.2"`, `"mcfadden"` or
    /// `"gamma:0.5"`; `q[to][from]` is column-stochastic.
    #[new]
    #[pyo3(signature = (fields, intervals, q, omega_a, omega_b, t_end))]
    fn new(
        fields: Vec<(f64, f64)>,
        intervals: Vec<String>,
        q: Vec<Vec<f64>>,
        omega_a: f64,
        omega_b: f64,
        t_end: f64,
    ) -> PyResult<Self> {
        if fields.len() != intervals.len() {
            return Err(PyValueError::new_err("fields and intervals differ in length"));
        }
        let mut states = Vec::with_capacity(fields.len());
        for ((gamma, drift), spec) in fields.into_iter().zip(intervals) {
            let dist: IntervalDistribution = spec.parse().map_err(value_err)?;
            states.push((VectorField::affine(gamma, drift), dist));
        }
        let q = TransitionMatrix::new(q).map_err(value_err)?;
        let domain = Domain::new(omega_a, omega_b, t_end).map_err(value_err)?;
        let inner = PdpModel::from_parts(states, q, domain).map_err(value_err)?;
        Ok(PyModel { inner })
    }

    /// One of `poisson-rc4`, `mcfadden`, `gamma`.
    #[staticmethod]
    fn scenario(name: &str) -> PyResult<Self> {
        let s: Scenario = name.parse().map_err(value_err)?;
        Ok(PyModel { inner: model::builtin_scenario(s) })
    }

    fn with_horizon(&self, t_end: f64) -> PyResult<Self> {
        let inner = self.inner.clone().with_horizon(t_end).map_err(value_err)?;
        Ok(PyModel { inner })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn domain(&self) -> (f64, f64, f64) {
        let d = self.inner.domain;
        (d.omega_a, d.omega_b, d.t_end)
    }

    /// Raises `ValueError` on an invalid model; returns confinement warnings.
    fn validate(&self) -> PyResult<Vec<String>> {
        let report = model::validate_model(&self.inner).map_err(value_err)?;
        Ok(report.confinement_warnings)
    }

    fn __repr__(&self) -> String {
        let d = self.inner.domain;
        format!("Model(states={}, omega=[{}, {}], t_end={})", self.inner.num_states(), d.omega_a, d.omega_b, d.t_end)
    }
}

/// Marginal distributions on every time level of a solve.
#[pyclass(name = "Solution", module = "pdp")]
struct PySolution {
    inner: solver::Solution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.marginals.nodes()
    }

    #[getter]
    fn last_level(&self) -> usize {
        self.inner.marginals.last_level()
    }

    fn time(&self, n: usize) -> f64 {
        self.inner.marginals.time(n)
    }

    /// Total CDF on level `n` (default: the last one).
    #[pyo3(signature = (n=None))]
    fn cdf(&self, n: Option<usize>) -> PyResult<Vec<f64>> {
        let n = self.level(n)?;
        Ok(self.inner.marginals.total_cdf(n).to_vec())
    }

    #[pyo3(signature = (n=None))]
    fn density(&self, n: Option<usize>) -> PyResult<Vec<f64>> {
        let n = self.level(n)?;
        Ok(self.inner.marginals.density(n).to_vec())
    }

    #[pyo3(signature = (s, n=None))]
    fn state_cdf(&self, s: usize, n: Option<usize>) -> PyResult<Vec<f64>> {
        let n = self.level(n)?;
        if s >= self.inner.marginals.num_states {
            return Err(PyValueError::new_err(format!("no state {s}")));
        }
        Ok(self.inner.marginals.state_cdf_row(s, n).to_vec())
    }

    #[getter]
    fn drift(&self) -> (f64, f64) {
        (self.inner.marginals.max_drift_left(), self.inner.marginals.max_drift_right())
    }

    #[getter]
    fn ops(&self) -> u64 {
        self.inner.diagnostics.ops.total()
    }

    #[getter]
    fn invariant_violations(&self) -> u64 {
        self.inner.diagnostics.invariants.violations()
    }

    #[getter]
    fn runtime_secs(&self) -> f64 {
        self.inner.diagnostics.runtime_secs
    }
}

impl PySolution {
    fn level(&self, n: Option<usize>) -> PyResult<usize> {
        let last = self.inner.marginals.last_level();
        match n {
            None => Ok(last),
            Some(n) if n <= last => Ok(n),
            Some(n) => Err(PyValueError::new_err(format!("level {n} beyond the last level {last}"))),
        }
    }
}

/// Solves `model` up to its horizon with spatial step close to `dx`.
#[pyfunction]
#[pyo3(signature = (model, dx, safety=0.9))]
fn solve(py: Python<'_>, model: &PyModel, dx: f64, safety: f64) -> PyResult<PySolution> {
    let m = model.inner.clone();
    py.detach(move || {
        let mesh = solver::Mesh::build(&m, dx, safety)?;
        solver::solve(&m, mesh, QuadratureRule::Rectangle, SolveOptions::default())
    })
    .map(|inner| PySolution { inner })
    .map_err(solver_err)
}

/// Empirical CDF of `n_paths` simulated paths at `t_end` on `grid`. Returns
/// `(values, per_state)`.
#[pyfunction]
#[pyo3(signature = (model, t_end, grid, n_paths, seed=2024))]
fn run_paths(
    py: Python<'_>,
    model: &PyModel,
    t_end: f64,
    grid: Vec<f64>,
    n_paths: usize,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = model.inner.clone();
    let emp = py
        .detach(move || montecarlo::run_paths(&m, t_end, &grid, McConfig::new(n_paths, seed)))
        .map_err(value_err)?;
    Ok((emp.values, emp.per_state))
}

/// Runs a convergence study of a built-in scenario with a closed-form
/// equilibrium. Returns `(rows, slope, restricted_slope)` where each row is
/// `(dx, sup_error, restricted_error)`.
#[pyfunction]
#[pyo3(signature = (scenario, dx_list, t_end=20.0, safety=0.9, restrict=(-0.9, 0.9)))]
fn convergence_study(
    py: Python<'_>,
    scenario: &str,
    dx_list: Vec<f64>,
    t_end: f64,
    safety: f64,
    restrict: (f64, f64),
) -> PyResult<(Vec<(f64, f64, f64)>, f64, f64)> {
    let s: Scenario = scenario.parse().map_err(value_err)?;
    let oracle = harness::scenario_oracle(s)
        .ok_or_else(|| PyValueError::new_err(format!("{scenario} has no closed-form equilibrium")))?;
    let m = model::builtin_scenario(s).with_horizon(t_end).map_err(value_err)?;
    let report = py
        .detach(move || harness::convergence_study(&m, &dx_list, safety, oracle, Some(restrict)))
        .map_err(harness_err)?;
    let rows = report.rows.iter().map(|r| (r.dx, r.sup_norm, r.restricted_sup)).collect();
    Ok((rows, report.slope, report.slope_restricted))
}

#[pyfunction]
fn mcfadden_cdf(x: f64) -> PyResult<f64> {
    analytic::mcfadden_cdf(x).map_err(value_err)
}

#[pyfunction]
fn gamma_equilibrium_cdf(x: f64) -> PyResult<f64> {
    analytic::gamma_equilibrium_cdf(x).map_err(value_err)
}

#[pyfunction]
fn complex_gamma(z: Complex64) -> PyResult<Complex64> {
    analytic::complex_gamma(z).map_err(value_err)
}

/// `₂F₁(r, r̄; 1/2; z)`, real for real `z < 1`.
#[pyfunction]
fn hyp2f1_conjugate(r: Complex64, z: f64) -> PyResult<f64> {
    analytic::hyp2f1_conjugate(r, z).map_err(value_err)
}

#[pymodule]
fn pdp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_paths, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    m.add_function(wrap_pyfunction!(mcfadden_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_equilibrium_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(complex_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(hyp2f1_conjugate, m)?)?;
    Ok(())
}
