//! Python module `randers`: metrics, spectra, lengths and the
//! hyperbolic-plane checks of `randers-core`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use randers_core::config::{parse_config, FormChoice, SweepConfig};
use randers_core::curved::{self, Ball, HyperbolicSample, RadialBump};
use randers_core::geodesics::{self, GeodesicState, HomotopyClass};
use randers_core::sweep;
use randers_core::{
    assemble, build_symbol_field, holmes_thompson_density, symbol_at, AngleQuadrature, Covector, Error,
    PeriodicGrid, Point, RandersMetric, Vector,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotConverged { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Randers metric `F = |v| + tβ(v)` on the flat torus.
#[pyclass(name = "Metric", frozen)]
struct PyMetric {
    inner: RandersMetric,
}

#[pymethods]
impl PyMetric {
    /// `form` is one of `h_eps`, `closed_irrational`, `constant` or `zero`.
    #[new]
    #[pyo3(signature = (form, t, eps = 0.05, rho = 1.0, amplitude = 0.5))]
    fn new(form: &str, t: f64, eps: f64, rho: f64, amplitude: f64) -> PyResult<Self> {
        let choice = match form {
            "h_eps" => FormChoice::HEps,
            "closed_irrational" => FormChoice::ClosedIrrational,
            "constant" => FormChoice::Constant,
            "zero" => FormChoice::Zero,
            other => return Err(PyValueError::new_err(format!("unknown form `{other}`"))),
        };
        let cfg = SweepConfig {
            form: choice,
            rho,
            amplitude,
            ..SweepConfig::default()
        };
        let inner = RandersMetric::flat(cfg.build_form(eps).map_err(py_err)?, t).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t()
    }

    fn norm(&self, x: f64, y: f64, vx: f64, vy: f64) -> f64 {
        self.inner.eval_f(Point::new(x, y), Vector::new(vx, vy))
    }

    fn dual_norm(&self, x: f64, y: f64, a1: f64, a2: f64) -> f64 {
        self.inner.dual_norm(Point::new(x, y), Covector::new(a1, a2))
    }

    /// `(s11, s12, s22)` at `(x, y)`.
    #[pyo3(signature = (x, y, quad_q = 256))]
    fn symbol(&self, x: f64, y: f64, quad_q: usize) -> PyResult<(f64, f64, f64)> {
        let q = AngleQuadrature::new(quad_q).map_err(py_err)?;
        let s = symbol_at(&self.inner, Point::new(x, y), &q).map_err(py_err)?;
        Ok((s.s11, s.s12, s.s22))
    }

    #[pyo3(signature = (x, y, quad_q = 256))]
    fn volume_density(&self, x: f64, y: f64, quad_q: usize) -> PyResult<f64> {
        let q = AngleQuadrature::new(quad_q).map_err(py_err)?;
        Ok(holmes_thompson_density(&self.inner, Point::new(x, y), &q))
    }

    /// F-length of the straight closed geodesic in class `(p, q)`.
    fn class_length(&self, p: i64, q: i64) -> PyResult<f64> {
        let c = HomotopyClass::new(p, q).map_err(py_err)?;
        geodesics::class_length(&self.inner, c).map_err(py_err)
    }

    /// Lifted `(t, x, y)` samples of the unit-speed geodesic.
    #[pyo3(signature = (x, y, phi, total_time, dt = 0.01))]
    fn geodesic(&self, x: f64, y: f64, phi: f64, total_time: f64, dt: f64) -> PyResult<Vec<(f64, f64, f64)>> {
        let tr = geodesics::integrate_geodesic(&self.inner, GeodesicState::new(x, y, phi), total_time, dt)
            .map_err(py_err)?;
        Ok(tr.states.iter().map(|s| (s.time, s.x, s.y)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Metric({:?}, t={})", self.inner.form(), self.inner.t())
    }
}

/// Result of [`spectrum`].
#[pyclass(name = "Spectrum", frozen, get_all)]
struct PySpectrum {
    eigenvalues: Vec<f64>,
    relative_residuals: Vec<f64>,
    iterations: usize,
}

#[pymethods]
impl PySpectrum {
    fn __repr__(&self) -> String {
        format!("Spectrum(eigenvalues={:?}, iterations={})", self.eigenvalues, self.iterations)
    }
}

/// `λ₀ … λ_k` of the discretized operator on an `n × n` periodic grid.
#[pyfunction]
#[pyo3(signature = (metric, grid_n = 64, k = 5, tol = 1e-8, quad_q = 256))]
fn spectrum(py: Python<'_>, metric: &PyMetric, grid_n: usize, k: usize, tol: f64, quad_q: usize) -> PyResult<PySpectrum> {
    let m = metric.inner.clone();
    let res = py
        .detach(move || -> Result<_, Error> {
            let grid = PeriodicGrid::new(grid_n)?;
            let field = build_symbol_field(&m, &grid, &AngleQuadrature::new(quad_q)?)?;
            let pair = assemble(&field, &grid)?;
            randers_core::smallest_eigenpairs(&pair, k, tol)
        })
        .map_err(py_err)?;
    Ok(PySpectrum {
        eigenvalues: res.eigenvalues,
        relative_residuals: res.relative_residuals,
        iterations: res.iterations,
    })
}

/// Runs a sweep described by configuration text and returns the CSV table.
#[pyfunction]
fn run_sweep(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = parse_config(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let rows = py.detach(|| sweep::run_sweep(&cfg));
    let mut out = Vec::new();
    sweep::write_sweep_csv(&mut out, &rows, cfg.eigen_k).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    String::from_utf8(out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// `(lhs, rhs, margin)` of the pointwise symbol bound.
#[pyfunction]
#[pyo3(signature = (dh_norm, df_norm, psi, quad_q = 256))]
fn symbol_lower_bound_check(dh_norm: f64, df_norm: f64, psi: f64, quad_q: usize) -> PyResult<(f64, f64, f64)> {
    let s = HyperbolicSample::new(dh_norm, df_norm, psi).map_err(py_err)?;
    let b = curved::symbol_lower_bound_check(&s, &AngleQuadrature::new(quad_q).map_err(py_err)?);
    Ok((b.lhs, b.rhs, b.margin))
}

/// Rayleigh quotient of `e^{−sρ}` on the hyperbolic plane; `bump` is an
/// optional `(amplitude, inner, outer)` radial profile of `h'`.
#[pyfunction]
#[pyo3(signature = (s, bump = None, r_max = None))]
fn radial_test_rayleigh(s: f64, bump: Option<(f64, f64, f64)>, r_max: Option<f64>) -> PyResult<f64> {
    let profile = bump.map(|(a, r0, r1)| RadialBump::new(a, r0, r1)).transpose().map_err(py_err)?;
    let r_max = r_max.unwrap_or_else(|| curved::tail_radius(s));
    curved::radial_test_rayleigh(s, 2, r_max, profile.as_ref()).map_err(py_err)
}

/// Ball-growth slope on the hyperbolic plane, optionally perturbed by
/// `h = amplitude · cos φ · tanh(0.9 r)`.
#[pyfunction]
#[pyo3(signature = (radii, amplitude = 0.0, backward = false))]
fn ball_growth_entropy(radii: Vec<f64>, amplitude: f64, backward: bool) -> PyResult<f64> {
    let h = move |r: f64, phi: f64| amplitude * phi.cos() * (0.9 * r).tanh();
    let ball = if backward { Ball::Backward } else { Ball::Forward };
    Ok(curved::ball_growth_entropy(2, &radii, Some(h), ball).map_err(py_err)?.slope)
}

#[pymodule]
fn randers(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetric>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_lower_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(radial_test_rayleigh, m)?)?;
    m.add_function(wrap_pyfunction!(ball_growth_entropy, m)?)?;
    Ok(())
}
