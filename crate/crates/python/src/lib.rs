//! Python bindings: maps, exponent ranges, the eigenvalue bound and the
//! finite element oracle. Structured results come back as dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyList, PyString};
use serde_json::Value;

use qcbound::bounds::{self, BoundsError};
use qcbound::oracle::{self, DescentOptions, OracleError};
use qcbound::regularity::{self, RegularityError};
use qcbound::{ExponentContext, Mode, Point2, QuadratureRule, Theorem};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bounds_error(e: BoundsError) -> PyErr {
    match e {
        BoundsError::DivergentIntegral { .. } | BoundsError::EmptyFeasibleSet { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => value_error(e),
    }
}

fn oracle_error(e: OracleError) -> PyErr {
    match e {
        OracleError::InvalidInput(_) | OracleError::Map(_) => value_error(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn regularity_error(e: RegularityError) -> PyErr {
    value_error(e)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => PyFloat::new(py, n.as_f64().unwrap_or(f64::NAN)).into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(m) => {
            let dict = PyDict::new(py);
            for (k, x) in m {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, t: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(t).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(regularity_error)
}

fn context(k: f64, alpha: f64, beta0: f64, mode: &str) -> PyResult<ExponentContext> {
    Ok(ExponentContext::new(k, alpha)
        .and_then(|c| c.with_beta0(beta0))
        .map_err(regularity_error)?
        .with_mode(parse_mode(mode)?))
}

/// A quasiconformal map from the unit disc or the centered square.
#[pyclass(name = "QcMap", module = "pyqcbound", frozen)]
struct PyQcMap {
    inner: qcbound::QcMap,
}

#[pymethods]
impl PyQcMap {
    /// Parses `identity`, `ellipse:A,B`, `cardioid:k` or `star:k`.
    #[new]
    fn new(descriptor: &str) -> PyResult<Self> {
        Ok(Self {
            inner: descriptor.parse().map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn identity() -> Self {
        Self {
            inner: qcbound::QcMap::identity(),
        }
    }

    #[staticmethod]
    fn ellipse(a: f64, b: f64) -> PyResult<Self> {
        Ok(Self {
            inner: qcbound::QcMap::ellipse(a, b).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn cardioid(k: f64) -> PyResult<Self> {
        Ok(Self {
            inner: qcbound::QcMap::cardioid(k).map_err(value_error)?,
        })
    }

    #[staticmethod]
    fn star(k: f64) -> PyResult<Self> {
        Ok(Self {
            inner: qcbound::QcMap::star(k).map_err(value_error)?,
        })
    }

    #[getter]
    fn descriptor(&self) -> Option<String> {
        self.inner.descriptor()
    }

    #[getter]
    fn source_domain(&self) -> &'static str {
        match self.inner.source_domain() {
            qcbound::SourceDomain::UnitDisc => "unit_disc",
            qcbound::SourceDomain::CenteredSquare => "centered_square",
        }
    }

    fn evaluate(&self, x: f64, y: f64) -> PyResult<(f64, f64)> {
        let w = self.inner.evaluate(Point2::new(x, y)).map_err(value_error)?;
        Ok((w.x, w.y))
    }

    /// `{"opnorm": |Dw|, "jac": J}` at one point.
    fn wirtinger<'py>(&self, py: Python<'py>, x: f64, y: f64) -> PyResult<Bound<'py, PyDict>> {
        let d = self.inner.wirtinger(Point2::new(x, y)).map_err(value_error)?;
        let out = PyDict::new(py);
        out.set_item("wz", (d.wz.re, d.wz.im))?;
        out.set_item("wzbar", (d.wzbar.re, d.wzbar.im))?;
        out.set_item("opnorm", d.opnorm)?;
        out.set_item("jac", d.jac)?;
        Ok(out)
    }

    fn distortion(&self) -> PyResult<f64> {
        self.inner.distortion().map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("QcMap({:?})", self.inner.descriptor().unwrap_or_else(|| "custom".into()))
    }
}

/// A triangulated image domain.
#[pyclass(name = "Mesh", module = "pyqcbound", frozen)]
struct PyMesh {
    inner: oracle::Mesh,
}

#[pymethods]
impl PyMesh {
    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn triangle_count(&self) -> usize {
        self.inner.triangles.len()
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn is_convex(&self) -> bool {
        self.inner.is_convex()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

#[pyfunction]
#[pyo3(signature = (k, alpha, beta0 = regularity::PROVED_BETA0, mode = "proved"))]
fn brennan_range(k: f64, alpha: f64, beta0: f64, mode: &str) -> PyResult<(f64, f64)> {
    let iv = regularity::brennan_range(&context(k, alpha, beta0, mode)?);
    Ok((iv.lo, iv.hi))
}

/// Open `p` interval of `theorem`: `composition`, `general_poincare`,
/// `eigenvalue` (mode-dependent).
#[pyfunction]
#[pyo3(signature = (k, alpha, theorem = "eigenvalue", beta0 = regularity::PROVED_BETA0, mode = "proved"))]
fn admissible_p(k: f64, alpha: f64, theorem: &str, beta0: f64, mode: &str) -> PyResult<(f64, f64)> {
    let ctx = context(k, alpha, beta0, mode)?;
    let theorem = match theorem {
        "composition" => Theorem::CompositionOperator,
        "general_poincare" => Theorem::GeneralPoincare,
        "eigenvalue" => ctx.mode.eigenvalue_theorem(),
        other => return Err(value_error(format!("unknown theorem `{other}`"))),
    };
    let iv = regularity::admissible_p(&ctx, theorem).map_err(regularity_error)?;
    Ok((iv.lo, iv.hi))
}

/// `(exact_hi, weak_hi)`; both intervals start at 1.
#[pyfunction]
#[pyo3(signature = (k, p, beta0 = regularity::PROVED_BETA0))]
fn q_interval(k: f64, p: f64, beta0: f64) -> PyResult<(f64, f64)> {
    let q = regularity::q_interval(&context(k, 4.0, beta0, "proved")?, p).map_err(regularity_error)?;
    Ok((q.exact.hi, q.weak.hi))
}

#[pyfunction]
fn disc_poincare_constant(r: f64, q: f64) -> PyResult<f64> {
    bounds::disc_poincare_constant(r, q).map_err(bounds_error)
}

/// The full bound report as a dict; `K` defaults to the map's distortion.
#[pyfunction]
#[pyo3(signature = (map, p, alpha, k = None, beta0 = regularity::PROVED_BETA0, mode = "proved", angular_order = None))]
fn eigenvalue_lower_bound<'py>(
    py: Python<'py>,
    map: &PyQcMap,
    p: f64,
    alpha: f64,
    k: Option<f64>,
    beta0: f64,
    mode: &str,
    angular_order: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let k = match k {
        Some(k) => k,
        None => map.inner.distortion().map_err(value_error)?,
    };
    let ctx = context(k, alpha, beta0, mode)?;
    let mut rule = QuadratureRule::new(map.inner.source_domain());
    if let Some(n) = angular_order {
        rule = rule.with_orders(rule.radial_order, n, rule.annuli);
    }
    let report = bounds::eigenvalue_lower_bound(&map.inner, p, alpha, &ctx, &rule).map_err(bounds_error)?;
    serialize(py, &report)
}

#[pyfunction]
#[pyo3(signature = (a, b, p, alpha, q))]
fn ellipse_closed_form(a: f64, b: f64, p: f64, alpha: f64, q: f64) -> PyResult<f64> {
    bounds::ellipse_closed_form(a, b, p, alpha, q).map_err(bounds_error)
}

#[pyfunction]
fn build_mesh(map: &PyQcMap, resolution: usize) -> PyResult<PyMesh> {
    Ok(PyMesh {
        inner: oracle::build_mesh(&map.inner, resolution).map_err(oracle_error)?,
    })
}

#[pyfunction]
fn neumann_eigen_p2(mesh: &PyMesh) -> PyResult<f64> {
    oracle::neumann_eigen_p2(&mesh.inner).map_err(oracle_error)
}

/// Descent summary (value, residual, starts, spread) as a dict.
#[pyfunction]
#[pyo3(signature = (mesh, p, seed = oracle::plaplace::DEFAULT_SEED, random_starts = 8))]
fn neumann_eigen_p<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    p: f64,
    seed: u64,
    random_starts: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = DescentOptions {
        seed,
        random_starts,
        ..Default::default()
    };
    let e = py
        .detach(|| oracle::neumann_eigen_p_full(&mesh.inner, p, &opts))
        .map_err(oracle_error)?;
    serialize(py, &e)
}

#[pyfunction]
#[pyo3(signature = (mesh, mu2, slack = oracle::CLASSICAL_SLACK))]
fn classical_checks<'py>(py: Python<'py>, mesh: &PyMesh, mu2: f64, slack: f64) -> PyResult<Bound<'py, PyAny>> {
    let checks = oracle::evaluate_classical_checks(&mesh.inner, mu2, slack).map_err(oracle_error)?;
    serialize(py, &checks)
}

/// Runs the command-line interface in-process and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    qcbound::cli::run(std::iter::once("qcbound".to_string()).chain(args))
}

#[pymodule]
fn pyqcbound(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQcMap>()?;
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(brennan_range, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_p, m)?)?;
    m.add_function(wrap_pyfunction!(q_interval, m)?)?;
    m.add_function(wrap_pyfunction!(disc_poincare_constant, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalue_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(ellipse_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(build_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(neumann_eigen_p2, m)?)?;
    m.add_function(wrap_pyfunction!(neumann_eigen_p, m)?)?;
    m.add_function(wrap_pyfunction!(classical_checks, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("PROVED_BETA0", regularity::PROVED_BETA0)?;
    Ok(())
}
