//! Python bindings. Structured results come back as plain dicts and lists
//! (decoded from the same JSON the CLI prints); networks, fields and
//! matrices are wrapped as classes.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use lnc_core::code::{self, CodeAssignment, ScalarCode};
use lnc_core::solvability::ConditionTuple;
use lnc_core::{constructions, network, report, search, solvability, Budget};

create_exception!(lnc_py, BudgetExceeded, PyException);

fn err(e: lnc_core::Error) -> PyErr {
    if e.is_budget() {
        BudgetExceeded::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn budget(time_ms: Option<u64>) -> Budget {
    let mut b = Budget::from_env();
    if time_ms.is_some() {
        b.time_ms = time_ms;
    }
    b
}

fn to_py(py: Python<'_>, value: &impl Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Accepts a JSON string or any object `json.dumps` understands.
fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A vector code, or a scalar code (recognized by its `field` key) lifted through phi.
fn code_from_py(obj: &Bound<'_, PyAny>) -> PyResult<CodeAssignment> {
    let raw: serde_json::Value = from_py(obj)?;
    if raw.get("field").is_some() {
        let scalar: ScalarCode = serde_json::from_value(raw).map_err(|e| PyValueError::new_err(e.to_string()))?;
        return code::lift_scalar(&scalar).map_err(err);
    }
    serde_json::from_value(raw).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyclass(name = "Field", frozen)]
struct PyField(Arc<lnc_core::Field>);

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (p, k = 1))]
    fn new(p: u64, k: u32) -> PyResult<Self> {
        lnc_core::Field::gf(p, k).map(PyField).map_err(err)
    }

    #[getter]
    fn order(&self) -> u64 {
        self.0.order()
    }

    /// Primitive polynomial, low-degree coefficient first.
    #[getter]
    fn poly(&self) -> Vec<u64> {
        self.0.spec().poly.clone()
    }

    #[getter]
    fn gamma(&self) -> Vec<u64> {
        self.0.coeffs(self.0.gamma())
    }

    fn add(&self, a: Vec<u64>, b: Vec<u64>) -> PyResult<Vec<u64>> {
        let f = &self.0;
        Ok(f.coeffs(f.add(f.from_coeffs(&a).map_err(err)?, f.from_coeffs(&b).map_err(err)?)))
    }

    fn mul(&self, a: Vec<u64>, b: Vec<u64>) -> PyResult<Vec<u64>> {
        let f = &self.0;
        Ok(f.coeffs(f.mul(f.from_coeffs(&a).map_err(err)?, f.from_coeffs(&b).map_err(err)?)))
    }

    fn inv(&self, a: Vec<u64>) -> PyResult<Vec<u64>> {
        let f = &self.0;
        Ok(f.coeffs(f.inv(f.from_coeffs(&a).map_err(err)?).map_err(err)?))
    }

    fn pow(&self, a: Vec<u64>, e: u64) -> PyResult<Vec<u64>> {
        let f = &self.0;
        Ok(f.coeffs(f.pow(f.from_coeffs(&a).map_err(err)?, e)))
    }

    /// The k x k matrix over GF(p) representing multiplication by `a`.
    fn phi(&self, a: Vec<u64>) -> PyResult<PyMatrix> {
        Ok(PyMatrix(self.0.phi(self.0.from_coeffs(&a).map_err(err)?)))
    }

    fn companion(&self) -> PyMatrix {
        PyMatrix(self.0.companion())
    }

    fn __repr__(&self) -> String {
        format!("Field(p={}, k={})", self.0.p(), self.0.k())
    }
}

#[pyclass(name = "Matrix", frozen)]
struct PyMatrix(lnc_core::MatF);

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(p: u32, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        lnc_core::MatF::from_rows(p, &rows).map(PyMatrix).map_err(err)
    }

    #[staticmethod]
    fn identity(p: u32, n: usize) -> Self {
        PyMatrix(lnc_core::MatF::identity(p, n))
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.p()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn rows(&self) -> Vec<Vec<u32>> {
        self.0.row_iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect()
    }

    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn det(&self) -> PyResult<u32> {
        self.0.det().map_err(err)
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(PyMatrix).map_err(err)
    }

    fn pow(&self, e: u64) -> Self {
        PyMatrix(self.0.pow(e))
    }

    fn __mul__(&self, other: &PyMatrix) -> PyResult<Self> {
        self.0.try_mul(&other.0).map(PyMatrix).map_err(err)
    }

    fn __add__(&self, other: &PyMatrix) -> PyResult<Self> {
        if self.shape() != other.shape() || self.0.p() != other.0.p() {
            return Err(PyValueError::new_err("matrices differ in shape or field"));
        }
        Ok(PyMatrix(self.0.add(&other.0)))
    }

    fn __sub__(&self, other: &PyMatrix) -> PyResult<Self> {
        if self.shape() != other.shape() || self.0.p() != other.0.p() {
            return Err(PyValueError::new_err("matrices differ in shape or field"));
        }
        Ok(PyMatrix(self.0.sub(&other.0)))
    }

    fn __eq__(&self, other: &PyMatrix) -> bool {
        self.0 == other.0
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("matrices serialize")
    }

    fn __repr__(&self) -> String {
        format!("Matrix(p={}, rows={:?})", self.0.p(), self.rows())
    }
}

#[pyclass(name = "Network", frozen)]
struct PyNetwork(network::Network);

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn swirl(omega: usize) -> PyResult<Self> {
        network::gen_swirl(omega, &budget(None)).map(PyNetwork).map_err(err)
    }

    #[staticmethod]
    fn n_omega_d(d: Vec<usize>) -> PyResult<Self> {
        network::gen_n_omega_d(d.len(), &d, &budget(None)).map(PyNetwork).map_err(err)
    }

    /// Combination network with `middle` middle nodes and a receiver per pair.
    #[staticmethod]
    fn combination(middle: usize) -> PyResult<Self> {
        network::gen_combination(middle).map(PyNetwork).map_err(err)
    }

    #[staticmethod]
    fn from_json(obj: &Bound<'_, PyAny>) -> PyResult<Self> {
        from_py(obj).map(PyNetwork)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("networks serialize")
    }

    #[getter]
    fn omega(&self) -> usize {
        self.0.omega()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.0.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.0.num_edges()
    }

    #[getter]
    fn receivers(&self) -> Vec<usize> {
        self.0.receivers().to_vec()
    }

    /// Scalar solvability over GF(q): closed form when known, else search.
    #[pyo3(signature = (q, brute = false, time_ms = None))]
    fn check_scalar(&self, py: Python<'_>, q: u64, brute: bool, time_ms: Option<u64>) -> PyResult<Py<PyAny>> {
        let b = budget(time_ms);
        let verdict = if brute {
            solvability::brute_force_scalar(&self.0, q, &b)
        } else {
            solvability::decide_scalar(&self.0, q, &b)
        };
        to_py(py, &verdict.map_err(err)?)
    }

    fn is_solution(&self, py: Python<'_>, code: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        to_py(py, &code::is_solution(&self.0, &code_from_py(code)?).map_err(err)?)
    }

    /// Direct sum of codes over one prime field, as a JSON-ready dict.
    fn direct_sum(&self, py: Python<'_>, codes: Vec<Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
        let codes = codes.iter().map(code_from_py).collect::<PyResult<Vec<_>>>()?;
        to_py(py, &code::direct_sum(&self.0, &codes).map_err(err)?)
    }

    #[pyo3(signature = (code, trials = 100, seed = 0))]
    fn simulate(&self, py: Python<'_>, code: &Bound<'_, PyAny>, trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
        let code = code_from_py(code)?;
        to_py(py, &code::simulate_decode(&self.0, &code, trials, seed).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(omega={}, nodes={}, edges={}, receivers={})",
            self.0.omega(),
            self.0.num_nodes(),
            self.0.num_edges(),
            self.0.receivers().len()
        )
    }
}

#[pyfunction]
fn lift_scalar(py: Python<'_>, code: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let scalar: ScalarCode = from_py(code)?;
    to_py(py, &code::lift_scalar(&scalar).map_err(err)?)
}

#[pyfunction]
fn theorem1_scalar(py: Python<'_>, d: Vec<usize>, q: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &solvability::theorem1_scalar(d.len(), &d, q).map_err(err)?)
}

#[pyfunction]
fn corollary1_swirl(py: Python<'_>, omega: usize, q: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &solvability::corollary1_swirl(omega, q).map_err(err)?)
}

/// Rank conditions of a matrix tuple in either lemma form.
#[pyfunction]
fn check_conditions(py: Python<'_>, tuple: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let t: ConditionTuple = from_py(tuple)?;
    to_py(py, &solvability::check_conditions(&t, &budget(None)).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (omega, dim, time_ms = None))]
fn swirl_search(py: Python<'_>, omega: usize, dim: usize, time_ms: Option<u64>) -> PyResult<Py<PyAny>> {
    let b = budget(time_ms);
    let outcome = py.detach(|| search::swirl_full_search(omega, dim, &b, None)).map_err(err)?;
    to_py(py, &outcome)
}

/// Number of complete tuples for a small omega.
#[pyfunction]
fn swirl_prefix_count(py: Python<'_>, omega: usize, dim: usize) -> PyResult<usize> {
    let b = budget(None);
    let (_, tuples) = py.detach(|| search::swirl_prefix_search(omega, dim, &b)).map_err(err)?;
    Ok(tuples.len())
}

#[pyfunction]
fn gl5_prune(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let b = budget(None);
    let cert = py.detach(|| search::gl5_prune(&b)).map_err(err)?;
    to_py(py, &cert)
}

#[pyfunction]
#[pyo3(signature = (l = 3, omega = 484, samples = 1000, seed = 0))]
fn prop4_certificate(py: Python<'_>, l: u32, omega: u64, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let build = constructions::prop4_build(l, omega).map_err(err)?;
    let spot = constructions::prop4_spotcheck(&build, samples.min(100), samples, seed);
    to_py(
        py,
        &serde_json::json!({
            "params": build.params.summary(),
            "certificate": build.certificate,
            "spotcheck": spot,
        }),
    )
}

#[pyfunction]
#[pyo3(signature = (p, l = 1))]
fn thm5_params(py: Python<'_>, p: u64, l: u64) -> PyResult<Py<PyAny>> {
    let params = constructions::thm5_params(p).map_err(err)?;
    let inv = constructions::thm5_invariants(&params, l);
    to_py(py, &serde_json::json!({ "params": params, "invariants": inv }))
}

#[pyfunction]
fn mersenne_report(py: Python<'_>, exponents: Vec<u32>) -> PyResult<Py<PyAny>> {
    to_py(py, &constructions::mersenne_report(&exponents))
}

/// One acceptance criterion (1..=12) with its pass flag and details.
#[pyfunction]
fn run_criterion(py: Python<'_>, id: u8) -> PyResult<Py<PyAny>> {
    let b = budget(None);
    let row = py.detach(|| report::run_criterion(id, &b)).map_err(err)?;
    to_py(py, &row)
}

#[pymodule]
fn lnc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyNetwork>()?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    m.add_function(wrap_pyfunction!(lift_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(corollary1_swirl, m)?)?;
    m.add_function(wrap_pyfunction!(check_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(swirl_search, m)?)?;
    m.add_function(wrap_pyfunction!(swirl_prefix_count, m)?)?;
    m.add_function(wrap_pyfunction!(gl5_prune, m)?)?;
    m.add_function(wrap_pyfunction!(prop4_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(thm5_params, m)?)?;
    m.add_function(wrap_pyfunction!(mersenne_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
