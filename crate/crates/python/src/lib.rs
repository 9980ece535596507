//! Python bindings: meshes, discrete operators, rational approximations and
//! the two time-stepping schemes. Vectors cross the boundary as lists of
//! floats.

use std::sync::Arc;

use fracpow::cli::{converge_rows, ConvergeParams, InitialData};
use fracpow::exact::{self, ExactSolutionSpec};
use fracpow::fem::{self, DiscreteOperator, ProblemCoefficients};
use fracpow::geometry::{self, Mesh};
use fracpow::quadrature::{self, QuadratureRule};
use fracpow::rational::{self, RationalApprox};
use fracpow::stepper::{self, SchemeConfig, SchemeKind, Source};
use fracpow::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::ParameterDomain(_)
        | Error::DimensionMismatch { .. }
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::Io { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_kind(scheme: &str) -> PyResult<SchemeKind> {
    match scheme {
        "explicit" => Ok(SchemeKind::Explicit),
        "implicit" => Ok(SchemeKind::ImplicitWeighted),
        other => Err(PyValueError::new_err(format!(
            "scheme must be 'explicit' or 'implicit', got '{other}'"
        ))),
    }
}

/// Triangulation of the quarter disk.
#[pyclass(name = "Mesh", module = "fracpow_py", frozen)]
struct PyMesh {
    inner: Arc<Mesh>,
}

#[pymethods]
impl PyMesh {
    /// Generated mesh of refinement level 1, 2 or 3.
    #[staticmethod]
    fn quarter_disk(level: u32) -> PyResult<Self> {
        let inner = geometry::quarter_disk_mesh(level).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = Mesh::from_text(text).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let inner = geometry::read_mesh(path).map_err(to_py)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        geometry::write_mesh(&self.inner, path).map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn cell_count(&self) -> usize {
        self.inner.cell_count()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices().iter().map(|p| (p[0], p[1])).collect()
    }

    fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.inner.triangles().iter().map(|t| (t[0], t[1], t[2])).collect()
    }

    fn total_area(&self) -> f64 {
        self.inner.total_area()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(vertices={}, cells={})",
            self.inner.vertex_count(),
            self.inner.cell_count()
        )
    }
}

/// Stiffness and mass matrices of `-Δu` with the Robin condition `∂u/∂n + g u = 0`
/// on the arc.
#[pyclass(name = "Operator", module = "fracpow_py", frozen)]
struct PyOperator {
    inner: DiscreteOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(mesh: &PyMesh, g: f64) -> PyResult<Self> {
        let coeff = ProblemCoefficients::laplace_robin(g).map_err(to_py)?;
        let inner = fem::assemble_shared(mesh.inner.clone(), &coeff).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `(lower, upper)` estimates of the extreme generalized eigenvalues.
    fn bounds(&self) -> PyResult<(f64, f64)> {
        let b = self.inner.bounds().map_err(to_py)?;
        Ok((b.lower, b.upper))
    }

    fn mass_norm(&self, v: Vec<f64>) -> PyResult<f64> {
        if v.len() != self.inner.dim() {
            return Err(to_py(Error::DimensionMismatch {
                expected: self.inner.dim(),
                got: v.len(),
            }));
        }
        Ok(self.inner.mass_norm(&v))
    }

    fn apply_stiffness(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        if v.len() != self.inner.dim() {
            return Err(to_py(Error::DimensionMismatch {
                expected: self.inner.dim(),
                got: v.len(),
            }));
        }
        Ok(self.inner.stiff().mul(&v))
    }
}

/// Sum of shifted inverses `Σ d_m (c_m + z)^(−1)`.
#[pyclass(name = "RationalApprox", module = "fracpow_py", frozen)]
struct PyRational {
    inner: RationalApprox,
}

#[pymethods]
impl PyRational {
    /// Approximation of `z^(−beta)` with `m` poles, exact at `z = mu`.
    #[staticmethod]
    fn negative_power(beta: f64, mu: f64, m: usize) -> PyResult<Self> {
        let inner = rational::build_negative_power(beta, mu, m).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Approximation of `(nu + z^alpha)^(−1)`.
    #[staticmethod]
    fn resolvent(alpha: f64, nu: f64, mu: f64, m: usize) -> PyResult<Self> {
        let inner = rational::build_resolvent(alpha, nu, mu, m).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __call__(&self, z: f64) -> PyResult<f64> {
        self.inner.eval_scalar(z).map_err(to_py)
    }

    fn target(&self, z: f64) -> f64 {
        self.inner.target(z)
    }

    #[getter]
    fn gamma_bar(&self) -> f64 {
        self.inner.gamma_bar().value()
    }

    #[getter]
    fn step_limit(&self) -> f64 {
        self.inner.gamma_bar().step_limit()
    }

    #[getter]
    fn shifts(&self) -> Vec<f64> {
        self.inner.shifts().to_vec()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    /// `R(A) v` for the operator `A = mass^(−1) stiff`.
    fn apply(&self, op: &PyOperator, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply(&op.inner, &v).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.order()
    }
}

fn rule_parts(r: QuadratureRule) -> (Vec<f64>, Vec<f64>) {
    (r.nodes().to_vec(), r.weights().to_vec())
}

/// Gauss rule for the weight `(1−η)^a (1+η)^b`, as `(nodes, weights)`.
#[pyfunction]
fn gauss_jacobi(m: usize, a: f64, b: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    quadrature::gauss_jacobi(m, a, b).map(rule_parts).map_err(to_py)
}

/// Gauss rule for the resolvent weight, as `(nodes, weights)`.
#[pyfunction]
fn gauss_custom(m: usize, nu: f64, alpha: f64, mu: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    quadrature::gauss_custom(m, nu, alpha, mu)
        .map(rule_parts)
        .map_err(to_py)
}

/// First `count` positive roots of `ν J₁(ν) = g J₀(ν)`.
#[pyfunction]
fn robin_roots(g: f64, count: usize) -> PyResult<Vec<f64>> {
    exact::robin_roots(g, count).map(|r| r.roots().to_vec()).map_err(to_py)
}

#[pyfunction]
fn bessel_j0(x: f64) -> f64 {
    exact::bessel_j0(x)
}

#[pyfunction]
fn bessel_j1(x: f64) -> f64 {
    exact::bessel_j1(x)
}

/// Nodal interpolant of the two-mode initial data on `mesh`.
#[pyfunction]
#[pyo3(signature = (mesh, g = 10.0, alpha = 0.5))]
fn initial_data(mesh: &PyMesh, g: f64, alpha: f64) -> PyResult<Vec<f64>> {
    let spec = ExactSolutionSpec::new(g, alpha, 1.0).map_err(to_py)?;
    Ok(fem::interpolate(|p| spec.initial(p), &mesh.inner))
}

/// Exact two-mode solution at radius `r` and time `t`.
#[pyfunction]
#[pyo3(signature = (r, t, g = 10.0, alpha = 0.5))]
fn exact_solution(r: f64, t: f64, g: f64, alpha: f64) -> PyResult<f64> {
    let spec = ExactSolutionSpec::new(g, alpha, t.max(f64::MIN_POSITIVE)).map_err(to_py)?;
    Ok(exact::exact_solution(&spec, r, t))
}

/// Runs a scheme with `ψ = 0` (or a constant source) and returns a dict with
/// `final_state`, `norms`, `certificate` and `stable`.
#[pyfunction]
#[pyo3(signature = (op, w0, scheme, t_final, steps, m, alpha, sigma = 1.0, mu = None, source = None))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    op: &PyOperator,
    w0: Vec<f64>,
    scheme: &str,
    t_final: f64,
    steps: usize,
    m: usize,
    alpha: f64,
    sigma: f64,
    mu: Option<f64>,
    source: Option<Vec<f64>>,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    use pyo3::types::PyDict;
    let cfg = SchemeConfig::new(parse_kind(scheme)?, t_final, steps, sigma, m, alpha, mu).map_err(to_py)?;
    let psi = source.map_or(Source::Zero, Source::Constant);
    let r = py.detach(|| stepper::run(&op.inner, &w0, &psi, &cfg)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("final_state", r.final_state.clone())?;
    d.set_item("norms", r.norms.clone())?;
    d.set_item("certificate", r.certificate.summary())?;
    d.set_item("stable", r.certificate.satisfied())?;
    d.set_item("warnings", r.warnings.clone())?;
    Ok(d)
}

/// `exp(−t A^alpha) w0` by the dense eigendecomposition, one vector per time.
#[pyfunction]
fn spectral_reference(
    py: Python<'_>,
    op: &PyOperator,
    w0: Vec<f64>,
    alpha: f64,
    times: Vec<f64>,
) -> PyResult<Vec<Vec<f64>>> {
    py.detach(|| stepper::spectral_reference(&op.inner, &w0, &Source::Zero, alpha, &times))
        .map_err(to_py)
}

/// Convergence study on the two-mode problem; rows `(M, N, eps2, eps_inf)`.
#[pyfunction]
#[pyo3(signature = (scheme, level, ms, ns, alpha = 0.5, g = 10.0, sigma = 1.0, mu = None, t_final = 0.25, init = "interp"))]
#[allow(clippy::too_many_arguments)]
fn converge(
    py: Python<'_>,
    scheme: &str,
    level: u32,
    ms: Vec<usize>,
    ns: Vec<usize>,
    alpha: f64,
    g: f64,
    sigma: f64,
    mu: Option<f64>,
    t_final: f64,
    init: &str,
) -> PyResult<Vec<(usize, usize, f64, f64)>> {
    let init: InitialData = init.parse().map_err(PyValueError::new_err)?;
    let cp = ConvergeParams {
        kind: parse_kind(scheme)?,
        alpha,
        g,
        level,
        ms,
        ns,
        sigma,
        mu,
        t_final,
        init,
    };
    let rows = py.detach(|| converge_rows(&cp)).map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.m, r.n, r.eps2, r.eps_inf)).collect())
}

#[pymodule]
fn fracpow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    fracpow::cli::configure_threads().map_err(|e| PyValueError::new_err(e.to_string()))?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyRational>()?;
    m.add_function(wrap_pyfunction!(gauss_jacobi, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_custom, m)?)?;
    m.add_function(wrap_pyfunction!(robin_roots, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j1, m)?)?;
    m.add_function(wrap_pyfunction!(initial_data, m)?)?;
    m.add_function(wrap_pyfunction!(exact_solution, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_reference, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    Ok(())
}
