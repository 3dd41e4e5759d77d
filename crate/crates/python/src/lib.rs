//! Python bindings. Tensors cross the boundary as `(dims, data)` with
//! row-major data; reports come back as JSON strings. Mode indices are
//! 0-based, as in the Rust library.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use symortho::cases::{self, CaseId};
use symortho::norms;
use symortho::orthogonality::decomposition_check;
use symortho::solvers::{self, grid_oracle, ApproxProblem, OracleConfig, SolverConfig};
use symortho::{Decomposition, DenseTensor, Notion};

fn err(e: symortho::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tensor(dims: Vec<usize>, data: Vec<f64>) -> PyResult<DenseTensor<f64>> {
    DenseTensor::new(dims, data).map_err(err)
}

fn parts(t: &DenseTensor<f64>) -> (Vec<usize>, Vec<f64>) {
    (t.dims().to_vec(), t.data().to_vec())
}

fn notion(name: &str, modes: Option<Vec<usize>>) -> PyResult<Notion> {
    match (name.to_ascii_lowercase().as_str(), modes) {
        ("on", None) => Ok(Notion::On),
        ("son", None) => Ok(Notion::Son),
        ("con", None) => Ok(Notion::Con),
        ("on" | "son" | "con", Some(_)) => Err(PyValueError::new_err("modes apply to pcon only")),
        ("pcon", Some(m)) => Notion::pcon(m).map_err(err),
        ("pcon", None) => Err(PyValueError::new_err("pcon needs modes")),
        _ => Err(PyValueError::new_err(format!("unknown notion `{name}`"))),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

/// Main tensor of a library case as `(dims, data)`.
#[pyfunction]
fn case_tensor(case: &str) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let id: CaseId = case.parse().map_err(err)?;
    Ok(parts(cases::build_case(id).tensor()))
}

/// Random symmetric tensor in `S^d(R^n)`.
#[pyfunction]
#[pyo3(signature = (n, d, seed=0))]
fn random_symmetric(n: usize, d: usize, seed: u64) -> PyResult<(Vec<usize>, Vec<f64>)> {
    if n == 0 || d == 0 {
        return Err(PyValueError::new_err("n and d must be positive"));
    }
    Ok(parts(&cases::random_symmetric(n, d, seed)))
}

/// Best rank-`rank` approximation; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (dims, data, notion_name, rank, modes=None, symmetric=false, structured=false, starts=64, seed=0))]
#[allow(clippy::too_many_arguments)]
fn approx(
    py: Python<'_>,
    dims: Vec<usize>,
    data: Vec<f64>,
    notion_name: &str,
    rank: usize,
    modes: Option<Vec<usize>>,
    symmetric: bool,
    structured: bool,
    starts: usize,
    seed: u64,
) -> PyResult<String> {
    let problem = ApproxProblem::new(tensor(dims, data)?, notion(notion_name, modes)?, rank)
        .symmetric(symmetric)
        .structured(structured)
        .with_config(SolverConfig::default().with_starts(starts.max(1)).with_seed(seed));
    let res = py.detach(|| solvers::solve(&problem)).map_err(err)?;
    Ok(to_json(&res))
}

/// Certified bracket `(lo, hi)` on the optimal objective `Σ σ_k²`.
#[pyfunction]
#[pyo3(signature = (dims, data, notion_name, rank, modes=None, symmetric=false, structured=false, tol=1e-7))]
#[allow(clippy::too_many_arguments)]
fn oracle(
    py: Python<'_>,
    dims: Vec<usize>,
    data: Vec<f64>,
    notion_name: &str,
    rank: usize,
    modes: Option<Vec<usize>>,
    symmetric: bool,
    structured: bool,
    tol: f64,
) -> PyResult<(f64, f64)> {
    let problem = ApproxProblem::new(tensor(dims, data)?, notion(notion_name, modes)?, rank)
        .symmetric(symmetric)
        .structured(structured);
    let config = OracleConfig {
        tol,
        ..OracleConfig::default()
    };
    let rep = py.detach(|| grid_oracle(&problem, &config)).map_err(err)?;
    Ok((rep.lo, rep.hi))
}

#[pyfunction]
#[pyo3(signature = (dims, data, starts=64, seed=0))]
fn spectral_norm(py: Python<'_>, dims: Vec<usize>, data: Vec<f64>, starts: usize, seed: u64) -> PyResult<f64> {
    let t = tensor(dims, data)?;
    let config = SolverConfig::default().with_starts(starts.max(1)).with_seed(seed);
    py.detach(|| norms::spectral_norm(&t, &config)).map(|s| s.value).map_err(err)
}

/// Whether a decomposition (JSON, as found under `"decomposition"` in an
/// `approx` report) satisfies the notion.
#[pyfunction]
#[pyo3(signature = (decomposition, notion_name, modes=None, tol=symortho::ORTHO_TOL))]
fn check(decomposition: &str, notion_name: &str, modes: Option<Vec<usize>>, tol: f64) -> PyResult<bool> {
    let d: Decomposition<f64> = serde_json::from_str(decomposition).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = Decomposition::new(d.dims().to_vec(), d.into_terms()).map_err(err)?;
    let cert = decomposition_check(&d, &notion(notion_name, modes)?, tol).map_err(err)?;
    Ok(cert.valid)
}

/// Runs a library case; returns `(passed, report JSON)`.
#[pyfunction]
#[pyo3(signature = (case, starts=64, seed=0))]
fn verify_case(py: Python<'_>, case: &str, starts: usize, seed: u64) -> PyResult<(bool, String)> {
    let id: CaseId = case.parse().map_err(err)?;
    let config = SolverConfig::default().with_starts(starts.max(1)).with_seed(seed);
    let rep = py
        .detach(|| cases::verify_case(id, &config, &OracleConfig::default()))
        .map_err(err)?;
    Ok((rep.passed, to_json(&rep)))
}

#[pyfunction]
fn case_ids() -> Vec<&'static str> {
    CaseId::ALL.iter().map(|c| c.as_str()).collect()
}

#[pymodule]
#[pyo3(name = "symortho")]
fn symortho_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(case_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(case_ids, m)?)?;
    m.add_function(wrap_pyfunction!(random_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(approx, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_norm, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(verify_case, m)?)?;
    Ok(())
}
