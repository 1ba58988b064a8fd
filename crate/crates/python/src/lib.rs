//! Python bindings: `import dboson`.

use std::sync::Arc;

use dboson_core::aso::{AsoElement, SigmaCoeffs};
use dboson_core::classical::{self, ClassicalFunction};
use dboson_core::deformation::{build_ladder_table, DeformationSpec, LadderTable, DEFAULT_LEVEL_CAP};
use dboson_core::eigenstate::{self, EigenElement, Generator};
use dboson_core::equivalence::{build_map, EquivalenceMap};
use dboson_core::phase_space::{self, DensitySpec, PhaseGrid, DEFAULT_GRID_POINTS, DEFAULT_HALF_WIDTH_FACTOR};
use dboson_core::verify::{self, Mode};
use dboson_core::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(dboson, DbosonError, PyValueError);

fn err(e: dboson_core::Error) -> PyErr {
    DbosonError::new_err(e.to_string())
}

type Rows = Vec<Vec<Complex64>>;

fn rows(m: &nalgebra::DMatrix<Complex64>) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "DeformationSpec", module = "dboson", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpec {
    inner: DeformationSpec,
}

#[pymethods]
impl PySpec {
    #[staticmethod]
    #[pyo3(signature = (hbar = 1.0, level_cap = DEFAULT_LEVEL_CAP))]
    fn standard(hbar: f64, level_cap: usize) -> PyResult<Self> {
        Ok(Self { inner: DeformationSpec::standard(hbar, level_cap).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (q, hbar = 1.0, level_cap = DEFAULT_LEVEL_CAP))]
    fn q_symmetric(q: f64, hbar: f64, level_cap: usize) -> PyResult<Self> {
        Ok(Self { inner: DeformationSpec::q_symmetric(hbar, q, level_cap).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (q, p, hbar = 1.0, level_cap = DEFAULT_LEVEL_CAP))]
    fn qp(q: f64, p: f64, hbar: f64, level_cap: usize) -> PyResult<Self> {
        Ok(Self { inner: DeformationSpec::qp(hbar, q, p, level_cap).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (coeffs, hbar = 1.0, level_cap = DEFAULT_LEVEL_CAP))]
    fn series(coeffs: Vec<f64>, hbar: f64, level_cap: usize) -> PyResult<Self> {
        Ok(Self { inner: DeformationSpec::series(hbar, coeffs, level_cap).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (values, hbar = 1.0))]
    fn table(values: Vec<f64>, hbar: f64) -> PyResult<Self> {
        Ok(Self { inner: DeformationSpec::table(hbar, values).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: DeformationSpec::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn with_level_cap(&self, level_cap: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_level_cap(level_cap).map_err(err)? })
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn level_cap(&self) -> usize {
        self.inner.level_cap()
    }

    fn ladder_table(&self) -> PyTable {
        PyTable { inner: Arc::new(build_ladder_table(&self.inner)) }
    }

    fn __repr__(&self) -> String {
        format!("DeformationSpec({})", self.inner.to_json())
    }
}

#[pyclass(name = "LadderTable", module = "dboson", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTable {
    inner: Arc<LadderTable>,
}

#[pymethods]
impl PyTable {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar()
    }

    /// `f(0..D)`.
    #[getter]
    fn f(&self) -> Vec<f64> {
        self.inner.f().to_vec()
    }

    /// `F(0..=D)`.
    #[getter]
    fn ladder(&self) -> Vec<f64> {
        self.inner.ladder().to_vec()
    }

    #[getter]
    fn ladder_fact(&self) -> Vec<f64> {
        self.inner.ladder_fact().to_vec()
    }

    #[getter]
    fn spectrum(&self) -> Vec<f64> {
        self.inner.spectrum().to_vec()
    }

    fn first_degenerate_level(&self) -> Option<usize> {
        self.inner.first_degenerate_level()
    }

    /// Eigenstate-basis image of `A`, `A+`, `N`, `H` or `E`.
    fn generator(&self, which: &str) -> PyResult<PyEigen> {
        let g: Generator = which.parse().map_err(err)?;
        Ok(PyEigen { inner: eigenstate::generator(g, &self.inner) })
    }

    fn basis(&self, n: usize, m: usize) -> PyResult<PyEigen> {
        Ok(PyEigen { inner: EigenElement::basis(&self.inner, n, m).map_err(err)? })
    }

    fn identity(&self) -> PyEigen {
        PyEigen { inner: EigenElement::identity(&self.inner) }
    }

    fn zero(&self) -> PyEigen {
        PyEigen { inner: EigenElement::zero(&self.inner) }
    }

    /// ASO monomial `A+^n * A^m`.
    fn monomial(&self, n: usize, m: usize) -> PyResult<PyAso> {
        Ok(PyAso { inner: AsoElement::monomial(&self.inner, n, m).map_err(err)? })
    }

    fn element_from_json(&self, text: &str) -> PyResult<PyEigen> {
        Ok(PyEigen { inner: EigenElement::from_json(&self.inner, text).map_err(err)? })
    }
}

#[pyclass(name = "EigenElement", module = "dboson", skip_from_py_object)]
#[derive(Clone)]
struct PyEigen {
    inner: EigenElement,
}

#[pymethods]
impl PyEigen {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn add_term(&mut self, n: usize, m: usize, c: Complex64) -> PyResult<()> {
        self.inner.add_term(n, m, c).map_err(err)
    }

    fn get(&self, n: usize, m: usize) -> Complex64 {
        self.inner.get(n, m)
    }

    fn terms(&self) -> Vec<(usize, usize, Complex64)> {
        self.inner.terms().collect()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn scale(&self, c: Complex64) -> Self {
        Self { inner: self.inner.scale(c) }
    }

    fn star(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: eigenstate::star(&self.inner, &other.inner).map_err(err)? })
    }

    fn commutator(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: eigenstate::commutator(&self.inner, &other.inner).map_err(err)? })
    }

    fn conjugate(&self) -> Self {
        Self { inner: eigenstate::conjugate(&self.inner) }
    }

    fn inner_product(&self, other: &Self) -> PyResult<Complex64> {
        eigenstate::inner_product(&self.inner, &other.inner).map_err(err)
    }

    /// Dense matrix `π(x)` as nested lists.
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(eigenstate::pi_matrix(&self.inner).entries())
    }

    fn sigma_inverse(&self) -> PyResult<PyAso> {
        let coeffs = SigmaCoeffs::new(self.inner.table());
        Ok(PyAso { inner: coeffs.sigma_inverse(&self.inner).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.star(other)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("EigenElement(dim={}, terms={})", self.inner.dim(), self.inner.len())
    }
}

#[pyclass(name = "AsoElement", module = "dboson", skip_from_py_object)]
#[derive(Clone)]
struct PyAso {
    inner: AsoElement,
}

#[pymethods]
impl PyAso {
    fn terms(&self) -> Vec<(usize, usize, Complex64)> {
        self.inner.terms().collect()
    }

    fn get(&self, n: usize, m: usize) -> Complex64 {
        self.inner.get(n, m)
    }

    fn add_term(&mut self, n: usize, m: usize, c: Complex64) -> PyResult<()> {
        self.inner.add_term(n, m, c).map_err(err)
    }

    fn sigma(&self) -> PyResult<PyEigen> {
        let coeffs = SigmaCoeffs::new(self.inner.table());
        Ok(PyEigen { inner: coeffs.sigma(&self.inner).map_err(err)? })
    }

    /// Bullet product, computed through the eigenstate basis.
    fn bullet(&self, other: &Self) -> PyResult<Self> {
        let coeffs = SigmaCoeffs::new(self.inner.table());
        Ok(Self { inner: coeffs.bullet(&self.inner, &other.inner).map_err(err)? })
    }

    fn restrict(&self, window: usize) -> Self {
        Self { inner: self.inner.restrict(window) }
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("AsoElement(terms={})", self.inner.len())
    }
}

#[pyclass(name = "EquivalenceMap", module = "dboson", frozen, skip_from_py_object)]
struct PyMap {
    inner: EquivalenceMap,
}

#[pymethods]
impl PyMap {
    #[new]
    fn new(source: &PyTable, target: &PyTable) -> PyResult<Self> {
        Ok(Self { inner: build_map(&source.inner, &target.inner).map_err(err)? })
    }

    #[getter]
    fn k_values(&self) -> Vec<f64> {
        self.inner.k_values().to_vec()
    }

    #[getter]
    fn invertible(&self) -> bool {
        self.inner.invertible()
    }

    #[getter]
    fn first_defect(&self) -> Option<usize> {
        self.inner.first_defect()
    }

    /// `(K(N) B, B+ K(N))` as nested lists.
    fn transform_generators(&self) -> PyResult<(Rows, Rows)> {
        let (a, ad) = self.inner.transform_generators().map_err(err)?;
        Ok((rows(a.entries()), rows(ad.entries())))
    }
}

#[pyclass(name = "DensitySpec", module = "dboson", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensity {
    inner: DensitySpec,
}

#[pymethods]
impl PyDensity {
    #[new]
    fn new(element: &PyEigen) -> PyResult<Self> {
        Ok(Self { inner: DensitySpec::from_element(&element.inner).map_err(err)? })
    }

    fn evolve(&self, t: f64) -> Self {
        Self { inner: phase_space::evolve_density(&self.inner, t) }
    }

    fn expectation(&self, observable: &PyEigen) -> PyResult<Complex64> {
        phase_space::expectation(&observable.inner, &self.inner).map_err(err)
    }

    fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn coefficients(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.coeffs())
    }

    fn element(&self) -> PyEigen {
        PyEigen { inner: self.inner.to_element() }
    }
}

#[pyfunction]
fn omega_at(n: usize, m: usize, q: f64, p: f64, hbar: f64) -> Complex64 {
    phase_space::omega_at(n, m, q, p, hbar)
}

/// Samples of `Ω_nm` on the square grid, row `i` at `q_i`, column `j` at `p_j`.
#[pyfunction]
#[pyo3(signature = (n, m, hbar = 1.0, half_width = None, points = DEFAULT_GRID_POINTS))]
fn eval_omega(n: usize, m: usize, hbar: f64, half_width: Option<f64>, points: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let grid =
        PhaseGrid::new(half_width.unwrap_or(DEFAULT_HALF_WIDTH_FACTOR * hbar.sqrt()), points).map_err(err)?;
    let field = phase_space::eval_omega(n, m, &grid, hbar);
    Ok((0..points).map(|i| (0..points).map(|j| field.at(i, j)).collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (n, m, k, l, hbar = 1.0, half_width = None, points = DEFAULT_GRID_POINTS))]
fn quadrature_ip(
    n: usize,
    m: usize,
    k: usize,
    l: usize,
    hbar: f64,
    half_width: Option<f64>,
    points: usize,
) -> PyResult<Complex64> {
    let grid =
        PhaseGrid::new(half_width.unwrap_or(DEFAULT_HALF_WIDTH_FACTOR * hbar.sqrt()), points).map_err(err)?;
    let x = phase_space::eval_omega(n, m, &grid, hbar);
    let y = phase_space::eval_omega(k, l, &grid, hbar);
    phase_space::quadrature_ip(&x, &y).map_err(err)
}

/// Invariant report as a dict, as written by `dboson verify`.
#[pyfunction]
#[pyo3(signature = (spec, dim, mode = "float"))]
fn run_verify<'py>(py: Python<'py>, spec: &PySpec, dim: usize, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let mode: Mode = mode.parse().map_err(err)?;
    let report = verify::run(&spec.inner, dim, mode).map_err(err)?;
    json_to_py(py, &serde_json::to_string(&report).expect("report serialises"))
}

type OrderPair = (Option<f64>, Vec<(f64, f64)>);

/// `(slope, [(hbar, residual)])`; the slope is `None` when every residual
/// vanishes.
#[pyfunction]
fn commutator_order_check(coeffs: Vec<f64>, h0: f64, hbars: Vec<f64>) -> PyResult<OrderPair> {
    let rep = classical::commutator_order_check(&ClassicalFunction::Polynomial(coeffs), h0, &hbars).map_err(err)?;
    Ok((rep.slope, rep.residuals))
}

/// `(integral, expansion)` for the polynomial weight `theta`.
#[pyfunction]
fn quantize_bracket(theta: Vec<f64>, h0: f64, hbar: f64) -> PyResult<(f64, f64)> {
    classical::quantize_bracket(&ClassicalFunction::Polynomial(theta), h0, hbar).map_err(err)
}

#[pymodule]
fn dboson(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DbosonError", m.py().get_type::<DbosonError>())?;
    m.add_class::<PySpec>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyEigen>()?;
    m.add_class::<PyAso>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(omega_at, m)?)?;
    m.add_function(wrap_pyfunction!(eval_omega, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_ip, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_order_check, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_bracket, m)?)?;
    Ok(())
}
