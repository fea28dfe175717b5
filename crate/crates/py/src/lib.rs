//! Python bindings. Structured results cross the boundary as tuples, lists
//! or JSON text so the Python side needs nothing beyond the standard library.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use zeno_cli::manifest::ExperimentManifest;
use zeno_cli::run::execute;
use zeno_cli::verify::{report, Suite, VerifyOptions};
use zeno_core::paths::GapModel;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Suite by its command-line name, e.g. `"lemma15"` or `"mc-vs-ode"`.
pub fn suite_named(name: &str) -> Option<Suite> {
    Suite::EACH.into_iter().chain([Suite::All]).find(|s| s.name() == name)
}

/// Window size `(n, exact, bound)` for stop-band edge `delta` and target `epsilon`.
#[pyfunction]
fn window_size(delta: f64, epsilon: f64) -> PyResult<(usize, f64, f64)> {
    let s = zeno_core::filter::window_size(delta, epsilon).map_err(value_error)?;
    Ok((s.n, s.exact, s.bound))
}

/// Designed window as `(n, taps, realised_ripple)`; taps run from `-n` to `n`.
#[pyfunction]
fn design_window(delta: f64, epsilon: f64) -> PyResult<(usize, Vec<f64>, f64)> {
    let w = zeno_core::filter::design_window(delta, epsilon).map_err(value_error)?;
    Ok((w.n, w.coefficients, w.realised_ripple))
}

#[pyfunction]
fn grover_gap(n: usize, m: usize, s: f64) -> PyResult<f64> {
    if m == 0 || m >= n {
        return Err(value_error("need 1 <= m < n"));
    }
    Ok(GapModel::grover(n, m).delta(s))
}

#[pyfunction]
fn qlsp_gap(kappa: f64, s: f64) -> PyResult<f64> {
    if !(kappa >= 1.0) {
        return Err(value_error("kappa must be at least 1"));
    }
    Ok(GapModel::qlsp(kappa).delta(s))
}

/// Runs a manifest given as JSON text and returns the run report as JSON.
/// Nothing is written to disk.
#[pyfunction]
fn run_manifest(py: Python<'_>, manifest_json: &str) -> PyResult<String> {
    let m: ExperimentManifest = serde_json::from_str(manifest_json).map_err(value_error)?;
    let art = py.detach(|| execute(&m, None)).map_err(value_error)?;
    serde_json::to_string(&art.report).map_err(value_error)
}

/// Runs a verification suite; returns `(failed_checks, report_json)`.
#[pyfunction]
#[pyo3(signature = (suite, seed = 2024, trajectories = 500))]
fn verify(py: Python<'_>, suite: &str, seed: u64, trajectories: usize) -> PyResult<(usize, String)> {
    let s = suite_named(suite).ok_or_else(|| value_error(format!("unknown suite `{suite}`")))?;
    let opts = VerifyOptions { seed, trajectories };
    let rep = py.detach(|| report(s, &opts)).map_err(value_error)?;
    let text = serde_json::to_string(&rep).map_err(value_error)?;
    Ok((rep.failed, text))
}

#[pymodule]
fn zeno_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(window_size, m)?)?;
    m.add_function(wrap_pyfunction!(design_window, m)?)?;
    m.add_function(wrap_pyfunction!(grover_gap, m)?)?;
    m.add_function(wrap_pyfunction!(qlsp_gap, m)?)?;
    m.add_function(wrap_pyfunction!(run_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
