//! Python bindings for `syl_core`.
//!
//! Structured values cross the boundary as plain dicts (via `json`), so the
//! Python side sees the same field names as the CLI reports.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use syl_core::expansion::{self, log_grid, ExpansionInput, ExpansionResult};
use syl_core::radial::{self, AnnulusProblem, RadialSolution, Side, SolverOptions};
use syl_core::singular::{self, SurfacePointData};
use syl_core::symmetric::{self, Lambda, DEFAULT_CONE_TOL};
use syl_core::{io, Error};

create_exception!(syl, SylError, PyException);
create_exception!(syl, DomainError, SylError);
create_exception!(syl, ComputationError, SylError);
create_exception!(syl, InconsistencyError, SylError);

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        2 => DomainError::new_err(msg),
        4 => InconsistencyError::new_err(msg),
        _ => ComputationError::new_err(msg),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| SylError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| DomainError::new_err(format!("invalid input: {e}")))
}

fn side(name: &str) -> PyResult<Side> {
    name.parse().map_err(err)
}

/// `σ_k(λ)`.
#[pyfunction]
fn sigma(lam: Vec<f64>, k: usize) -> PyResult<f64> {
    symmetric::sigma(&Lambda::new(lam).map_err(err)?, k).map_err(err)
}

/// Position of `λ` relative to `Γ_k^+` as `{label, witness, sigma_values}`.
#[pyfunction]
#[pyo3(signature = (lam, k, tol = DEFAULT_CONE_TOL))]
fn classify_cone<'py>(py: Python<'py>, lam: Vec<f64>, k: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let c = symmetric::classify_cone(&Lambda::new(lam).map_err(err)?, k, tol).map_err(err)?;
    to_py(py, &c)
}

/// Radial solution on the annulus `a < r < b`.
#[pyclass(name = "AnnulusSolution", frozen)]
struct PySolution {
    inner: RadialSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn problem<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.problem)
    }

    /// `{r_star, w0, dnu_w_plus, dnu_w_minus}`, or `None` for `k = 1`.
    #[getter]
    fn junction<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.junction)
    }

    /// Grid columns of one side as a dict of lists, ascending in `r`.
    #[pyo3(signature = (side_name = "outer"))]
    fn grid<'py>(&self, py: Python<'py>, side_name: &str) -> PyResult<Bound<'py, PyAny>> {
        let pts = self.inner.side(side(side_name)?);
        let col = |f: fn(&radial::GridPoint) -> f64| pts.iter().map(f).collect::<Vec<f64>>();
        let d = serde_json::json!({
            "r": col(|p| p.r),
            "w": col(|p| p.w),
            "wp": col(|p| p.wp),
            "wpp": col(|p| p.wpp),
            "mu_r": col(|p| p.mu_r),
            "mu_t": col(|p| p.mu_t),
            "residual": col(|p| p.residual),
        });
        to_py(py, &d)
    }

    fn max_abs_residual(&self) -> f64 {
        self.inner.max_abs_residual()
    }

    fn invariants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.check_invariants())
    }

    fn invariants_hold(&self) -> bool {
        self.inner.invariants_hold()
    }

    /// Hölder fit of `w'` at the junction: `{side, gamma, stderr, r2, ...}`.
    #[pyo3(signature = (side_name = "outer"))]
    fn fit_holder_exponent<'py>(&self, py: Python<'py>, side_name: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &radial::fit_holder_exponent(&self.inner, side(side_name)?).map_err(err)?)
    }

    /// Surface data at the junction sphere.
    fn junction_point<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &SurfacePointData::from_junction(&self.inner).map_err(err)?)
    }

    /// Expansion input on one side of the junction sphere (`k = 2`).
    #[pyo3(signature = (side_name = "outer"))]
    fn expansion_input<'py>(&self, py: Python<'py>, side_name: &str) -> PyResult<Bound<'py, PyAny>> {
        let input = match side(side_name)? {
            Side::Outer => ExpansionInput::annulus_outer(&self.inner),
            Side::Inner => ExpansionInput::annulus_inner(&self.inner),
        }
        .map_err(err)?;
        to_py(py, &input)
    }

    /// Writes `<prefix>.csv` and `<prefix>.json`; returns both paths.
    fn save(&self, prefix: PathBuf) -> PyResult<(PathBuf, PathBuf)> {
        io::save_solution(&self.inner, &prefix).map_err(err)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.problem;
        match &self.inner.junction {
            Some(j) => format!(
                "AnnulusSolution(a={}, b={}, n={}, k={}, r_star={}, w0={})",
                p.a, p.b, p.n, p.k, j.r_star, j.w0
            ),
            None => format!("AnnulusSolution(a={}, b={}, n={}, k={})", p.a, p.b, p.n, p.k),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (a, b, n, k, tol = 1e-8, eps0 = None))]
fn solve_annulus(py: Python<'_>, a: f64, b: f64, n: usize, k: usize, tol: f64, eps0: Option<f64>) -> PyResult<PySolution> {
    let problem = AnnulusProblem::new(a, b, n, k).map_err(err)?;
    let opts = SolverOptions {
        ode_tol: tol,
        eps0,
        ..SolverOptions::default()
    };
    let sol = py.detach(|| radial::solve_annulus(&problem, &opts)).map_err(err)?;
    Ok(PySolution { inner: sol })
}

#[pyfunction]
fn load_solution(prefix: PathBuf) -> PyResult<PySolution> {
    Ok(PySolution {
        inner: io::load_solution(&prefix).map_err(err)?,
    })
}

/// The admissible roots `{alpha_plus, alpha_minus, all_roots, degenerate}`.
#[pyfunction]
fn singular_alpha_roots<'py>(point: &Bound<'py, PyAny>, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let data: SurfacePointData = from_py(point)?;
    data.validate().map_err(err)?;
    to_py(point.py(), &singular::singular_alpha_roots(&data, k).map_err(err)?)
}

/// `σ_k(λ(g⁻¹T_α)) − 1` with the eigenvalues and the cone flag.
#[pyfunction]
fn theorem_a_residual<'py>(point: &Bound<'py, PyAny>, alpha: f64, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let data: SurfacePointData = from_py(point)?;
    data.validate().map_err(err)?;
    to_py(point.py(), &singular::theorem_a_residual(&data, alpha, k).map_err(err)?)
}

/// Closed-form coefficient `{p, w_star, numerator, denom}`.
#[pyfunction]
fn expansion_coefficient<'py>(input: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let data: ExpansionInput = from_py(input)?;
    to_py(input.py(), &expansion::expansion_coefficient(&data).map_err(err)?)
}

/// Finite-difference check of the expansion on a log grid of distances.
#[pyfunction]
#[pyo3(signature = (input, p = 1.5, dmax = 1e-2, dmin = 1e-7, points = 11))]
fn verify_limit<'py>(input: &Bound<'py, PyAny>, p: f64, dmax: f64, dmin: f64, points: usize) -> PyResult<Bound<'py, PyAny>> {
    let data: ExpansionInput = from_py(input)?;
    let coeff = expansion::expansion_coefficient(&data).map_err(err)?;
    let grid = log_grid(dmax, dmin, points).map_err(err)?;
    let check = input
        .py()
        .detach(|| expansion::verify_limit(&data, &ExpansionResult { p, ..coeff }, &grid))
        .map_err(err)?;
    to_py(input.py(), &check)
}

#[pymodule]
fn syl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SylError", m.py().get_type::<SylError>())?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("ComputationError", m.py().get_type::<ComputationError>())?;
    m.add("InconsistencyError", m.py().get_type::<InconsistencyError>())?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(classify_cone, m)?)?;
    m.add_function(wrap_pyfunction!(solve_annulus, m)?)?;
    m.add_function(wrap_pyfunction!(load_solution, m)?)?;
    m.add_function(wrap_pyfunction!(singular_alpha_roots, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_a_residual, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(verify_limit, m)?)?;
    Ok(())
}
