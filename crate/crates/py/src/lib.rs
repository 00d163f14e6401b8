use pll_lockin_core as core;
use pll_lockin_core::LockInError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: LockInError) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

#[pyclass(name = "LoopParams", module = "pll_lockin", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyLoopParams {
    inner: core::LoopParams,
}

#[pymethods]
impl PyLoopParams {
    #[new]
    fn new(tau1: f64, tau2: f64, k_vco: f64, k: f64) -> PyResult<Self> {
        let inner = core::LoopParams::new(tau1, tau2, k_vco, k).map_err(to_py)?;
        Ok(PyLoopParams { inner })
    }

    #[getter]
    fn tau1(&self) -> f64 {
        self.inner.tau1
    }

    #[getter]
    fn tau2(&self) -> f64 {
        self.inner.tau2
    }

    #[getter]
    fn k_vco(&self) -> f64 {
        self.inner.k_vco
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }

    fn coeffs(&self) -> PyDerivedCoeffs {
        PyDerivedCoeffs { inner: self.inner.coeffs() }
    }

    /// Reduced coordinate `y` of a state `(x, theta_e)`.
    #[allow(clippy::wrong_self_convention)]
    fn to_reduced(&self, x: f64, theta_e: f64, omega_e_free: f64) -> (f64, f64) {
        let r = self.inner.to_reduced(core::State::new(x, theta_e), omega_e_free);
        (r.y, r.theta_e)
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_reduced(&self, y: f64, theta_e: f64, omega_e_free: f64) -> (f64, f64) {
        let s = self.inner.from_reduced(core::ReducedState::new(y, theta_e), omega_e_free);
        (s.x, s.theta_e)
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!("LoopParams(tau1={}, tau2={}, k_vco={}, k={})", p.tau1, p.tau2, p.k_vco, p.k)
    }
}

#[pyclass(name = "DerivedCoeffs", module = "pll_lockin", frozen)]
pub struct PyDerivedCoeffs {
    inner: core::DerivedCoeffs,
}

#[pymethods]
impl PyDerivedCoeffs {
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }

    #[getter]
    fn case(&self) -> String {
        self.inner.case.to_string()
    }

    fn __repr__(&self) -> String {
        let c = self.inner;
        format!("DerivedCoeffs(a={}, b={}, c={}, k={}, case='{}')", c.a, c.b, c.c, c.k, c.case)
    }
}

#[pyclass(name = "LockInResult", module = "pll_lockin", frozen, get_all)]
pub struct PyLockInResult {
    omega_l: f64,
    omega_l_c: f64,
    case: String,
    d: f64,
    y_l: f64,
    y_l_c: f64,
}

#[pymethods]
impl PyLockInResult {
    fn __repr__(&self) -> String {
        format!(
            "LockInResult(omega_l={}, omega_l_c={}, case='{}', d={}, y_l={}, y_l_c={})",
            self.omega_l, self.omega_l_c, self.case, self.d, self.y_l, self.y_l_c
        )
    }
}

#[pyclass(name = "Trajectory", module = "pll_lockin", frozen, get_all)]
pub struct PyTrajectory {
    t: Vec<f64>,
    x: Vec<f64>,
    theta_e: Vec<f64>,
    sup_deviation: f64,
    limsup_deviation: f64,
    /// Phase of the equilibrium the run locked to, if any.
    locked_theta: Option<f64>,
    slipped_sup: bool,
    slipped_limsup: Option<bool>,
}

#[pyfunction]
fn pd_characteristic(theta_e: f64, k: f64) -> PyResult<f64> {
    core::pd_characteristic(theta_e, k).map_err(to_py)
}

#[pyfunction]
fn pd_derivative(theta_e: f64, k: f64) -> PyResult<f64> {
    core::pd_derivative(theta_e, k).map_err(to_py)
}

#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    core::lambert_w0(x).map_err(to_py)
}

#[pyfunction]
fn lock_in_ranges(params: PyLoopParams) -> PyResult<PyLockInResult> {
    let r = core::lock_in_ranges(&params.inner).map_err(to_py)?;
    Ok(PyLockInResult {
        omega_l: r.omega_l,
        omega_l_c: r.omega_l_c,
        case: r.case.to_string(),
        d: r.d,
        y_l: r.y_l,
        y_l_c: r.y_l_c,
    })
}

#[pyfunction]
fn lock_in_frequency(params: PyLoopParams) -> PyResult<f64> {
    Ok(core::lock_in_frequency(&params.inner).map_err(to_py)?.omega_l)
}

#[pyfunction]
fn conservative_lock_in(params: PyLoopParams) -> PyResult<f64> {
    Ok(core::conservative_lock_in(&params.inner).map_err(to_py)?.omega_l_c)
}

#[pyfunction]
fn gardner_estimate(params: PyLoopParams) -> f64 {
    core::gardner_estimate(&params.inner)
}

#[pyfunction]
fn best_estimate(params: PyLoopParams) -> f64 {
    core::best_estimate(&params.inner)
}

/// Raises `ValueError` outside the formula's validity region.
#[pyfunction]
fn huque_stensby_pull_out(params: PyLoopParams) -> PyResult<f64> {
    core::huque_stensby_pull_out(&params.inner).map_err(to_py)
}

/// Analytic upper separatrix as a list of `(theta_e, y, domain)`.
#[pyfunction]
#[pyo3(signature = (params, n_samples = 256))]
fn separatrix(params: PyLoopParams, n_samples: usize) -> PyResult<Vec<(f64, f64, String)>> {
    let curve = core::build_curve(&params.inner, n_samples).map_err(to_py)?;
    Ok(curve
        .samples
        .iter()
        .map(|s| (s.theta_e, s.y, s.domain.to_string()))
        .collect())
}

fn options(rel_tol: f64) -> core::IntegratorOptions {
    core::IntegratorOptions { rel_tol, ..Default::default() }
}

#[pyfunction]
#[pyo3(signature = (params, bisect_tol = 1e-3, rel_tol = 1e-9))]
fn lock_in_numeric(py: Python<'_>, params: PyLoopParams, bisect_tol: f64, rel_tol: f64) -> PyResult<f64> {
    py.detach(|| core::lock_in_numeric(&params.inner, &options(rel_tol), bisect_tol))
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, bisect_tol = 1e-3, rel_tol = 1e-9))]
fn conservative_lock_in_numeric(py: Python<'_>, params: PyLoopParams, bisect_tol: f64, rel_tol: f64) -> PyResult<f64> {
    py.detach(|| core::conservative_lock_in_numeric(&params.inner, &options(rel_tol), bisect_tol))
        .map_err(to_py)
}

/// Frequency step `omega_before -> omega` with the loop at the chosen
/// pre-step equilibrium (`"stable"` or `"saddle"`).
#[pyfunction]
#[pyo3(signature = (params, omega, omega_before = None, start = "stable"))]
fn simulate_step(
    py: Python<'_>,
    params: PyLoopParams,
    omega: f64,
    omega_before: Option<f64>,
    start: &str,
) -> PyResult<PyTrajectory> {
    let start_at = match start {
        "stable" => core::StartPoint::Stable,
        "saddle" => core::StartPoint::Saddle,
        other => return Err(PyValueError::new_err(format!("start must be 'stable' or 'saddle', got {other:?}"))),
    };
    let scenario = core::StepScenario {
        omega_before: omega_before.unwrap_or(-omega),
        omega_after: omega,
        start_at,
    };
    let traj = py
        .detach(|| scenario.run(&params.inner, &core::IntegratorOptions::default()))
        .map_err(to_py)?;
    let verdict = core::detect_slip(&traj);
    Ok(PyTrajectory {
        t: traj.points.iter().map(|p| p.t).collect(),
        x: traj.points.iter().map(|p| p.state.x).collect(),
        theta_e: traj.points.iter().map(|p| p.state.theta_e).collect(),
        sup_deviation: traj.sup_deviation,
        limsup_deviation: traj.limsup_deviation,
        locked_theta: traj.converged_to.map(|e| e.theta_eq),
        slipped_sup: verdict.slipped_sup,
        slipped_limsup: verdict.slipped_limsup,
    })
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLoopParams>()?;
    m.add_class::<PyDerivedCoeffs>()?;
    m.add_class::<PyLockInResult>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(pd_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(pd_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(lock_in_ranges, m)?)?;
    m.add_function(wrap_pyfunction!(lock_in_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(conservative_lock_in, m)?)?;
    m.add_function(wrap_pyfunction!(gardner_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(best_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(huque_stensby_pull_out, m)?)?;
    m.add_function(wrap_pyfunction!(separatrix, m)?)?;
    m.add_function(wrap_pyfunction!(lock_in_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(conservative_lock_in_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_step, m)?)?;
    Ok(())
}

#[pymodule]
fn pll_lockin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
