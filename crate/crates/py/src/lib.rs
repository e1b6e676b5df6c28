//! Python bindings: one-dimensional spaces and their checks, quantile
//! interpolation, and the discrete localization pipeline.
//!
//! Interval sets are lists of `(a, b)` pairs with `float("inf")` for open
//! ends. Reports come back as plain dicts.

use needlekit_core::density1d::{self as d1, Attainment, IntervalSet, PLConcave, Rigidity};
use needlekit_core::interpolate1d::{self as i1, Density1D};
use needlekit_core::localize::{self as loc, SplitOptions};
use needlekit_core::models::{self, ModelSpec};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serialize through JSON into Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn set(parts: Vec<(f64, f64)>) -> PyResult<IntervalSet> {
    IntervalSet::new(parts).map_err(err)
}

type Pairs = Vec<(f64, f64)>;

fn pairs(s: &IntervalSet) -> Pairs {
    s.intervals().to_vec()
}

/// Piecewise-linear concave log-density `W` on an interval of the line.
#[pyclass(name = "Space", frozen)]
struct PySpace {
    inner: PLConcave,
}

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (domain, breakpoints, values, end_slopes = (None, None)))]
    fn new(
        domain: (f64, f64),
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        end_slopes: (Option<f64>, Option<f64>),
    ) -> PyResult<Self> {
        let inner = PLConcave::new(domain, breakpoints, values, [end_slopes.0, end_slopes.1]).map_err(err)?;
        Ok(PySpace { inner })
    }

    /// Space from its JSON definition.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySpace { inner: serde_json::from_str(text).map_err(err)? })
    }

    /// One-dimensional model from a spec such as `{"kind": "log_linear", "h": 1}` (JSON text).
    #[staticmethod]
    fn model(spec: &str) -> PyResult<Self> {
        let spec: ModelSpec = serde_json::from_str(spec).map_err(err)?;
        Ok(PySpace { inner: models::build_1d(&spec).map_err(err)?.space })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }

    fn w(&self, t: f64) -> f64 {
        self.inner.w(t)
    }

    /// `m(set)`, possibly `inf`.
    fn mass(&self, intervals: Vec<(f64, f64)>) -> PyResult<f64> {
        Ok(self.inner.log_mass(&set(intervals)?).exp())
    }

    fn log_mass(&self, intervals: Vec<(f64, f64)>) -> PyResult<f64> {
        Ok(self.inner.log_mass(&set(intervals)?))
    }

    /// Minkowski content `m⁺(set)`.
    fn boundary(&self, intervals: Vec<(f64, f64)>) -> PyResult<f64> {
        Ok(d1::minkowski_content(&self.inner, &set(intervals)?))
    }

    fn __repr__(&self) -> String {
        let (lo, hi) = self.inner.domain();
        format!("Space(domain=({lo}, {hi}), breakpoints={:?})", self.inner.breakpoints())
    }
}

/// Returns `(mu, minimizer)` with `minimizer` `None` when the infimum is not attained.
#[pyfunction]
fn cheeger_constant(space: &PySpace) -> PyResult<(f64, Option<Pairs>)> {
    let c = d1::cheeger_constant(&space.inner).map_err(err)?;
    let minimizer = match &c.attainment {
        Attainment::Attained(s) => Some(pairs(s)),
        Attainment::NotAttained => None,
    };
    Ok((c.mu, minimizer))
}

#[pyfunction]
#[pyo3(signature = (space, x0 = None))]
fn volume_entropy(py: Python<'_>, space: &PySpace, x0: Option<f64>) -> PyResult<Py<PyAny>> {
    let x0 = x0.unwrap_or(space.inner.breakpoints()[0]);
    to_py(py, &d1::volume_entropy(&space.inner, x0).map_err(err)?)
}

/// Returns `(value, minimizer)`.
#[pyfunction]
fn isoperimetric_profile(space: &PySpace, v: f64) -> PyResult<(f64, Pairs)> {
    let p = d1::isoperimetric_profile(&space.inner, v).map_err(err)?;
    Ok((p.value, pairs(&p.minimizer)))
}

#[pyfunction]
fn milman_profile(d: f64, v: f64) -> PyResult<f64> {
    d1::milman_profile(d, v).map_err(err)
}

#[pyfunction]
fn lemma_1dim_check(py: Python<'_>, space: &PySpace, omega: Vec<(f64, f64)>, h: f64, r: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &d1::lemma_1dim_check(&space.inner, &set(omega)?, h, r).map_err(err)?)
}

#[pyfunction]
fn quantitative_rigidity_check(
    py: Python<'_>,
    space: &PySpace,
    omega: Vec<(f64, f64)>,
    h: f64,
    eps: f64,
    l: f64,
    r: f64,
) -> PyResult<Py<PyAny>> {
    to_py(py, &d1::quantitative_rigidity_check(&space.inner, &set(omega)?, h, eps, l, r).map_err(err)?)
}

/// `(True, b, h)` when `(-inf, b]` attains the Cheeger constant `h`, else `(False, None, None)`.
#[pyfunction]
fn rigidity_1d(space: &PySpace) -> PyResult<(bool, Option<f64>, Option<f64>)> {
    Ok(match d1::rigidity_1d(&space.inner).map_err(err)? {
        Rigidity::Rigid { b, h } => (true, Some(b), Some(h)),
        Rigidity::NotRigid => (false, None, None),
    })
}

#[pyfunction]
fn neighborhood_growth_check(py: Python<'_>, space: &PySpace, omega: Vec<(f64, f64)>, sigma: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &d1::neighborhood_growth_check(&space.inner, &set(omega)?, sigma).map_err(err)?)
}

#[pyfunction]
fn entropy_growth_inequality_check(
    py: Python<'_>,
    space: &PySpace,
    x0: f64,
    r: f64,
    delta: f64,
    eps: f64,
) -> PyResult<Py<PyAny>> {
    to_py(py, &d1::entropy_growth_inequality_check(&space.inner, x0, r, delta, eps).map_err(err)?)
}

fn density(space: &PySpace, edges: Vec<f64>, rho: Vec<f64>) -> PyResult<Density1D> {
    Density1D::normalized(space.inner.clone(), edges, rho).map_err(err)
}

/// Entropy along the quantile geodesic between two piecewise-constant
/// densities (`rho` is rescaled to unit mass).
#[pyfunction]
#[pyo3(signature = (space, edges0, rho0, edges1, rho1, t_grid = None, quantiles = i1::DEFAULT_QUANTILES))]
#[allow(clippy::too_many_arguments)]
fn displacement_convexity_check(
    py: Python<'_>,
    space: &PySpace,
    edges0: Vec<f64>,
    rho0: Vec<f64>,
    edges1: Vec<f64>,
    rho1: Vec<f64>,
    t_grid: Option<Vec<f64>>,
    quantiles: usize,
) -> PyResult<Py<PyAny>> {
    let (mu0, mu1) = (density(space, edges0, rho0)?, density(space, edges1, rho1)?);
    let grid = t_grid.unwrap_or_else(i1::default_t_grid);
    to_py(py, &i1::displacement_convexity_check(&space.inner, &mu0, &mu1, &grid, quantiles).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (space, omega, target, t_grid = None))]
fn brunn_minkowski_check(
    py: Python<'_>,
    space: &PySpace,
    omega: Vec<(f64, f64)>,
    target: Vec<(f64, f64)>,
    t_grid: Option<Vec<f64>>,
) -> PyResult<Py<PyAny>> {
    let grid = t_grid.unwrap_or_else(i1::default_t_grid);
    to_py(py, &i1::brunn_minkowski_check(&space.inner, &set(omega)?, &set(target)?, &grid).map_err(err)?)
}

/// Weighted points with Euclidean coordinates or an explicit distance matrix.
#[pyclass(name = "DiscreteSpace", frozen)]
struct PyDiscreteSpace {
    inner: loc::DiscreteSpace,
}

#[pymethods]
impl PyDiscreteSpace {
    #[new]
    #[pyo3(signature = (weights, coords = None, dist = None))]
    fn new(weights: Vec<f64>, coords: Option<Vec<Vec<f64>>>, dist: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let inner = match (coords, dist) {
            (Some(c), None) => loc::DiscreteSpace::from_coords(c, weights),
            (None, Some(d)) => loc::DiscreteSpace::from_distances(d, weights),
            _ => return Err(PyValueError::new_err("give exactly one of coords or dist")),
        }
        .map_err(err)?;
        Ok(PyDiscreteSpace { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDiscreteSpace { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn distance(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.len();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index out of range for {n} points")));
        }
        Ok(self.inner.d(i, j))
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }
}

/// Product strip model: `(space, info)` with `info` holding rows, the
/// half-strip mask, a center and a radius.
#[pyfunction]
fn product_strip(py: Python<'_>, h: f64, n_rows: usize, n_cols: usize, spacing: f64) -> PyResult<(PyDiscreteSpace, Py<PyAny>)> {
    let strip = models::build_strip(&ModelSpec::ProductStrip { h, n_rows, n_cols, spacing }).map_err(err)?;
    #[derive(Serialize)]
    struct Info<'a> {
        rows: &'a [Vec<usize>],
        omega_mask: &'a [bool],
        e: f64,
        cell_boundary: f64,
        center: usize,
        radius: f64,
    }
    let info = to_py(
        py,
        &Info {
            rows: &strip.rows,
            omega_mask: &strip.omega_mask,
            e: strip.e,
            cell_boundary: strip.cell_boundary,
            center: strip.center,
            radius: strip.radius,
        },
    )?;
    Ok((PyDiscreteSpace { inner: strip.space }, info))
}

/// Balanced function, optimal L1 transport and needles of a set inside a ball.
///
/// Returns a dict with `g`, `flow`, `phi`, `total_cost`, `pivots`, `needles`
/// (each with its diagnostics) and `branch_points`.
#[pyfunction]
fn localize(py: Python<'_>, space: &PyDiscreteSpace, omega: Vec<bool>, center: usize, radius: f64) -> PyResult<Py<PyAny>> {
    let s = &space.inner;
    let g = loc::balanced_function(s, &omega, center, radius).map_err(err)?;
    let sol = loc::solve_l1(s, &g).map_err(err)?;
    let rep = loc::extract_needles(s, &g, &sol);
    let diagnostics: Vec<Option<loc::NeedleDiagnostics>> =
        rep.needles.iter().map(|q| loc::needle_diagnostics(q).ok()).collect();
    #[derive(Serialize)]
    struct Result<'a> {
        g: &'a [f64],
        flow: &'a [loc::FlowArc],
        phi: &'a [f64],
        total_cost: f64,
        pivots: usize,
        needles: &'a [loc::Needle],
        diagnostics: Vec<Option<loc::NeedleDiagnostics>>,
        branch_points: &'a [usize],
        truncated: bool,
        lipschitz_excess: f64,
        slackness_gap: f64,
    }
    to_py(
        py,
        &Result {
            g: &g.g,
            flow: &sol.flow,
            phi: &sol.phi,
            total_cost: sol.total_cost,
            pivots: sol.pivots,
            needles: &rep.needles,
            diagnostics,
            branch_points: &rep.branch_points,
            truncated: rep.truncated,
            lipschitz_excess: sol.lipschitz_excess(s),
            slackness_gap: sol.slackness_gap(),
        },
    )
}

/// Localize and run the product-splitting detector on the resulting needles.
#[pyfunction]
#[pyo3(signature = (space, omega, center, radius, h_tol = 0.05, dir_tol = 1e-9, boundary_tol = None))]
#[allow(clippy::too_many_arguments)]
fn splitting_detector(
    py: Python<'_>,
    space: &PyDiscreteSpace,
    omega: Vec<bool>,
    center: usize,
    radius: f64,
    h_tol: f64,
    dir_tol: f64,
    boundary_tol: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let s = &space.inner;
    let g = loc::balanced_function(s, &omega, center, radius).map_err(err)?;
    let sol = loc::solve_l1(s, &g).map_err(err)?;
    let rep = loc::extract_needles(s, &g, &sol);
    let opts = SplitOptions { h_tol, dir_tol, boundary_tol };
    to_py(py, &loc::splitting_detector(s, &rep.needles, &omega, opts).map_err(err)?)
}

#[pymodule]
fn needlekit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyDiscreteSpace>()?;
    m.add_function(wrap_pyfunction!(cheeger_constant, m)?)?;
    m.add_function(wrap_pyfunction!(volume_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(isoperimetric_profile, m)?)?;
    m.add_function(wrap_pyfunction!(milman_profile, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_1dim_check, m)?)?;
    m.add_function(wrap_pyfunction!(quantitative_rigidity_check, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_1d, m)?)?;
    m.add_function(wrap_pyfunction!(neighborhood_growth_check, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_growth_inequality_check, m)?)?;
    m.add_function(wrap_pyfunction!(displacement_convexity_check, m)?)?;
    m.add_function(wrap_pyfunction!(brunn_minkowski_check, m)?)?;
    m.add_function(wrap_pyfunction!(product_strip, m)?)?;
    m.add_function(wrap_pyfunction!(localize, m)?)?;
    m.add_function(wrap_pyfunction!(splitting_detector, m)?)?;
    Ok(())
}
