use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "pll_lockin").unwrap();
        pll_lockin::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("pll", m).unwrap();
        f(py, &globals);
    });
}

fn eval<'py>(py: Python<'py>, globals: &Bound<'py, PyDict>, code: &str) -> PyResult<Bound<'py, PyAny>> {
    let code = std::ffi::CString::new(code).unwrap();
    py.eval(&code, Some(globals), None)
}

#[test]
fn fig3_through_python() {
    with_module(|py, g| {
        py.run(
            c"p = pll.LoopParams(0.0633, 0.0225, 250.0, 0.6366197723675814)",
            Some(g),
            None,
        )
        .unwrap();
        let wl: f64 = eval(py, g, "pll.lock_in_ranges(p).omega_l").unwrap().extract().unwrap();
        assert!((wl - 85.27).abs() < 0.01);
        let case: String = eval(py, g, "p.coeffs().case").unwrap().extract().unwrap();
        assert_eq!(case, "focus");
        let po: f64 = eval(py, g, "pll.huque_stensby_pull_out(p)").unwrap().extract().unwrap();
        assert!((po / 2.0 - wl).abs() < 1e-9 * wl);
        let n: usize = eval(py, g, "len(pll.separatrix(p, 64))").unwrap().extract().unwrap();
        assert_eq!(n, 64);
        let slipped: bool = eval(py, g, "pll.simulate_step(p, 86.0).slipped_sup").unwrap().extract().unwrap();
        assert!(slipped);
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(|py, g| {
        let err = eval(py, g, "pll.LoopParams(0.0633, 0.0225, 250.0, 0.2)").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = eval(py, g, "pll.lambert_w0(-1.0)").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = eval(py, g, "pll.simulate_step(pll.LoopParams(0.1, 0.01, 100.0, 1.0), 1.0, start='middle')").unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}
