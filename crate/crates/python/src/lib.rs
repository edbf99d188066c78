//! Python module `replab`. Structured results come back as plain dicts;
//! automata travel as their JSON text.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use replab_core::bounds::outside_option_bound;
use replab_core::fei::{binary_threshold as threshold, check_fei, uniform_failure_horizon};
use replab_core::simulate::{analytic_long_run_effort, simulate as run_simulation, SimulationConfig};
use replab_core::verifier::verify as run_verify;
use replab_core::{
    construct_full_effort, construct_non_efe, EquilibriumAutomaton, ModelConfig, NonEfeOptions, SignalSpec,
    ValidationLevel,
};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Validated model parameters with either binary or explicit signals.
#[pyclass(module = "replab", frozen)]
struct Model {
    config: ModelConfig,
    inner: replab_core::Model,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (kappa, delta, pi0 = 0.5, c = 0.0, binary_precision = None, signals = None, strict = true))]
    fn new(
        kappa: f64,
        delta: f64,
        pi0: f64,
        c: f64,
        binary_precision: Option<f64>,
        signals: Option<Vec<(String, f64, f64)>>,
        strict: bool,
    ) -> PyResult<Self> {
        let config = ModelConfig {
            kappa,
            delta,
            pi0,
            c,
            binary_precision,
            signals: signals.map(|s| s.into_iter().map(|(name, f0, f1)| SignalSpec { name, f0, f1 }).collect()),
        };
        let level = if strict { ValidationLevel::Strict } else { ValidationLevel::Relaxed };
        let inner = config.to_model(level).map_err(value_err)?;
        Ok(Self { config, inner })
    }

    /// Parse a TOML or JSON model document.
    #[staticmethod]
    #[pyo3(signature = (text, strict = true))]
    fn from_config(text: &str, strict: bool) -> PyResult<Self> {
        let config = ModelConfig::parse(text).map_err(value_err)?;
        let level = if strict { ValidationLevel::Strict } else { ValidationLevel::Relaxed };
        let inner = config.to_model(level).map_err(value_err)?;
        Ok(Self { config, inner })
    }

    fn check_fei<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_fei(&self.inner))
    }

    fn horizon<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &uniform_failure_horizon(&self.inner).map_err(value_err)?)
    }

    fn outside_option_bound<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &outside_option_bound(&self.inner).map_err(value_err)?)
    }

    /// Automaton JSON for `kind` in {"fe", "non-efe"}.
    #[pyo3(signature = (kind, a0 = None, depth = 200))]
    fn construct(&self, kind: &str, a0: Option<f64>, depth: usize) -> PyResult<String> {
        let a = match kind {
            "fe" => construct_full_effort(&self.inner).map_err(value_err)?,
            "non-efe" | "non_efe" => {
                let options = NonEfeOptions { a0_override: a0, depth, ..Default::default() };
                construct_non_efe(&self.inner, options).map_err(value_err)?.0
            }
            other => return Err(value_err(format!("unknown kind {other:?}"))),
        };
        Ok(a.with_params_echo(self.config.clone()).to_json())
    }

    /// Closed-form quantities of the non-EFE construction.
    fn non_efe_parameters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let (_, q) = construct_non_efe(&self.inner, NonEfeOptions::default()).map_err(value_err)?;
        to_py(py, &q)
    }

    fn __repr__(&self) -> String {
        format!("Model({})", serde_json::to_string(&self.config).unwrap_or_default())
    }
}

fn load(automaton: &str, model: Option<&Model>) -> PyResult<(EquilibriumAutomaton, replab_core::Model)> {
    let a = EquilibriumAutomaton::from_json(automaton).map_err(value_err)?;
    let m = match model {
        Some(m) => m.inner.clone(),
        None => {
            let echo = a.params_echo().ok_or_else(|| value_err("automaton has no params_echo; pass model="))?;
            echo.to_model(ValidationLevel::Strict).map_err(value_err)?
        }
    };
    Ok((a, m))
}

#[pyfunction]
fn binary_threshold(p: f64, kappa: f64) -> PyResult<f64> {
    threshold(p, kappa).map_err(value_err)
}

/// Verification report for an automaton given as JSON text.
#[pyfunction]
#[pyo3(signature = (automaton, model = None, tol = 1e-8, depth = 200))]
fn verify<'py>(py: Python<'py>, automaton: &str, model: Option<&Model>, tol: f64, depth: usize) -> PyResult<Bound<'py, PyAny>> {
    let (a, m) = load(automaton, model)?;
    let report = py.detach(|| run_verify(&a, &m, tol, depth)).map_err(runtime_err)?;
    to_py(py, &report)
}

/// Simulation statistics for an automaton given as JSON text.
#[pyfunction]
#[pyo3(signature = (automaton, paths, horizon, seed, model = None))]
fn simulate<'py>(
    py: Python<'py>,
    automaton: &str,
    paths: usize,
    horizon: usize,
    seed: u64,
    model: Option<&Model>,
) -> PyResult<Bound<'py, PyAny>> {
    let (a, m) = load(automaton, model)?;
    let config = SimulationConfig::new(horizon, paths, seed);
    let stats = py.detach(|| run_simulation(&a, &m, &config)).map_err(runtime_err)?;
    to_py(py, &stats)
}

#[pyfunction]
#[pyo3(signature = (automaton, model = None))]
fn analytic_effort<'py>(py: Python<'py>, automaton: &str, model: Option<&Model>) -> PyResult<Bound<'py, PyAny>> {
    let (a, m) = load(automaton, model)?;
    to_py(py, &analytic_long_run_effort(&a, &m))
}

#[pymodule]
fn replab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(binary_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_effort, m)?)?;
    m.add("__version__", replab_core::VERSION)?;
    Ok(())
}
