//! Python bindings over the solver core: launch shots, the two scheme
//! quotients, the root solve for the sharp constant, quotient evaluation on
//! sampled functions, and the verification oracles.

use oscimin_core as oc;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn ode_err(e: oc::OdeError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn func_err(e: oc::FunctionalError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn shoot_err(e: oc::ShootError) -> PyErr {
    use oc::ShootError::*;
    match &e {
        ParameterDomain(_) | BracketInvalid { .. } | Ode(_) | Functional(_) => {
            PyValueError::new_err(e.to_string())
        }
        NoAdmissibleShot { .. } | InnerShotFailure { .. } | MethodDisagreement { .. }
        | ShotNotFound { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

fn oracle_err(e: oc::OracleError) -> PyErr {
    use oc::OracleError::*;
    match e {
        InvalidParameter(_) | ShotNotFound => PyValueError::new_err(e.to_string()),
        ConstructionFailed { .. } => PyRuntimeError::new_err(e.to_string()),
        Shoot(inner) => shoot_err(inner),
        Functional(inner) => func_err(inner),
        Ode(inner) => ode_err(inner),
    }
}

/// Controls for the adaptive integrator.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Config {
    inner: oc::IntegratorConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (rel_tol=1e-10, abs_tol=1e-12, max_step=0.5, x_max=50.0, blowup_threshold=1e8))]
    fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_step: f64,
        x_max: f64,
        blowup_threshold: f64,
    ) -> PyResult<Self> {
        let inner = oc::IntegratorConfig {
            rel_tol,
            abs_tol,
            max_step,
            x_max,
            blowup_threshold,
        };
        inner.validate().map_err(ode_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn rel_tol(&self) -> f64 {
        self.inner.rel_tol
    }

    #[getter]
    fn abs_tol(&self) -> f64 {
        self.inner.abs_tol
    }

    #[getter]
    fn max_step(&self) -> f64 {
        self.inner.max_step
    }

    #[getter]
    fn x_max(&self) -> f64 {
        self.inner.x_max
    }

    #[getter]
    fn blowup_threshold(&self) -> f64 {
        self.inner.blowup_threshold
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "Config(rel_tol={:e}, abs_tol={:e}, max_step={}, x_max={}, blowup_threshold={:e})",
            c.rel_tol, c.abs_tol, c.max_step, c.x_max, c.blowup_threshold
        )
    }
}

fn unwrap_cfg(config: Option<Config>) -> oc::IntegratorConfig {
    config.map(|c| c.inner).unwrap_or_default()
}

/// The quotient integrals over an interval and the quotient derived from
/// them: `q = (a - b) / c`.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Breakdown {
    inner: oc::FunctionalBreakdown,
}

#[pymethods]
impl Breakdown {
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
    fn q(&self) -> f64 {
        self.inner.q
    }

    #[getter]
    fn interval(&self) -> (f64, f64) {
        self.inner.interval
    }

    fn __repr__(&self) -> String {
        let b = &self.inner;
        format!(
            "Breakdown(a={:.12e}, b={:.12e}, c={:.12e}, q={:.12e})",
            b.a, b.b, b.c, b.q
        )
    }
}

/// Outcome of a single launch: parameters, status, half period, and the
/// quotient breakdown when a critical point was found.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Shot {
    inner: oc::ShotResult,
}

#[pymethods]
impl Shot {
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn t(&self) -> Option<f64> {
        self.inner.t
    }

    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    #[getter]
    fn found(&self) -> bool {
        self.inner.is_found()
    }

    #[getter]
    fn breakdown(&self) -> Option<Breakdown> {
        self.inner.breakdown.map(|inner| Breakdown { inner })
    }

    #[getter]
    fn q(&self) -> Option<f64> {
        self.inner.q()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        match s.t {
            Some(t) => format!(
                "Shot(a={:.12}, lambda_={:.12}, status=\"{}\", t={:.12})",
                s.a,
                s.lambda,
                s.status.as_str(),
                t
            ),
            None => format!(
                "Shot(a={:.12}, lambda_={:.12}, status=\"{}\")",
                s.a,
                s.lambda,
                s.status.as_str()
            ),
        }
    }
}

/// Result of the root solve for the sharp constant.
#[pyclass(name = "InfimumResult", skip_from_py_object)]
#[derive(Clone)]
struct Infimum {
    inner: oc::InfimumResult,
}

#[pymethods]
impl Infimum {
    /// The sharp constant, `-lambda_root`.
    #[getter(I)]
    fn i_value(&self) -> f64 {
        self.inner.i_value
    }

    #[getter]
    fn lambda_root(&self) -> f64 {
        self.inner.lambda_root
    }

    #[getter]
    fn a_star(&self) -> f64 {
        self.inner.a_star
    }

    #[getter]
    fn j(&self) -> f64 {
        self.inner.j_value
    }

    #[getter]
    fn method_gap(&self) -> f64 {
        self.inner.method_gap
    }

    #[getter]
    fn t(&self) -> Option<f64> {
        self.inner.shot.t
    }

    #[getter]
    fn shot(&self) -> Shot {
        Shot {
            inner: self.inner.shot.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "InfimumResult(I={:.12}, lambda_root={:.12}, method_gap={:.3e})",
            self.inner.i_value, self.inner.lambda_root, self.inner.method_gap
        )
    }
}

/// One named pass/fail verification with its observed value.
#[pyclass(name = "OracleReport", skip_from_py_object)]
#[derive(Clone)]
struct Report {
    inner: oc::OracleReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn check(&self) -> String {
        self.inner.check.describe()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.check.kind()
    }

    #[getter]
    fn observed(&self) -> f64 {
        self.inner.observed
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "OracleReport({}: {} observed {:.6e}, {})",
            r.name,
            r.check.describe(),
            r.observed,
            if r.passed { "passed" } else { "FAILED" }
        )
    }
}

/// Launch with curvature `a` at multiplier `lambda_` and evaluate the
/// quotient up to the first critical point.
#[pyfunction]
#[pyo3(signature = (a, lambda_, config=None))]
fn shoot(a: f64, lambda_: f64, config: Option<Config>) -> PyResult<Shot> {
    oc::shooting::shoot(a, lambda_, &unwrap_cfg(config))
        .map(|inner| Shot { inner })
        .map_err(shoot_err)
}

/// The balanced scheme: launch with `a = sqrt(lambda_)`.
#[pyfunction]
#[pyo3(signature = (lambda_, config=None))]
fn j_tilde(lambda_: f64, config: Option<Config>) -> PyResult<Shot> {
    oc::shooting::j_tilde(lambda_, &unwrap_cfg(config))
        .map(|inner| Shot { inner })
        .map_err(shoot_err)
}

/// Scheme one: minimize the quotient over the launch curvature at a fixed
/// multiplier. Returns `(a_star, minimizing_shot)`; the quotient is the
/// shot's `q`.
#[pyfunction]
#[pyo3(signature = (lambda_, config=None))]
fn j_of_lambda(lambda_: f64, config: Option<Config>) -> PyResult<(f64, Shot)> {
    oc::shooting::j_of_lambda(lambda_, &unwrap_cfg(config))
        .map(|(j, inner)| (j, Shot { inner }))
        .map_err(shoot_err)
}

/// Solve for the multiplier at which the balanced scheme closes and return
/// the sharp constant with its cross-validation data.
#[pyfunction]
#[pyo3(signature = (config=None, bracket=(0.141, 0.249), root_tol=1e-6))]
fn find_infimum(config: Option<Config>, bracket: (f64, f64), root_tol: f64) -> PyResult<Infimum> {
    oc::shooting::find_infimum(&unwrap_cfg(config), bracket, root_tol)
        .map(|inner| Infimum { inner })
        .map_err(shoot_err)
}

/// Sample a found shot over its full period. Returns a dict with scalars
/// `I`, `T`, `a` and columns `x`, `u`, `du`, `d2u`, `d3u`, `h_residual`.
#[pyfunction]
#[pyo3(signature = (shot, samples=2001))]
fn minimizer_profile<'py>(
    py: Python<'py>,
    shot: &Shot,
    samples: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = oc::shooting::minimizer_profile(&shot.inner, samples).map_err(shoot_err)?;
    let d = PyDict::new(py);
    d.set_item("I", p.i_value)?;
    d.set_item("T", p.t)?;
    d.set_item("a", p.a)?;
    d.set_item("x", p.rows.iter().map(|r| r.x).collect::<Vec<_>>())?;
    d.set_item("u", p.rows.iter().map(|r| r.u).collect::<Vec<_>>())?;
    d.set_item("du", p.rows.iter().map(|r| r.du).collect::<Vec<_>>())?;
    d.set_item("d2u", p.rows.iter().map(|r| r.d2u).collect::<Vec<_>>())?;
    d.set_item("d3u", p.rows.iter().map(|r| r.d3u).collect::<Vec<_>>())?;
    d.set_item(
        "h_residual",
        p.rows.iter().map(|r| r.h_residual).collect::<Vec<_>>(),
    )?;
    Ok(d)
}

/// Quotient integrals of samples on a uniform grid. Second derivatives are
/// estimated by five-point stencils unless supplied as `d2u`.
#[pyfunction]
#[pyo3(signature = (x, u, d2u=None, periodic=false))]
fn q_of_sampled(
    x: Vec<f64>,
    u: Vec<f64>,
    d2u: Option<Vec<f64>>,
    periodic: bool,
) -> PyResult<Breakdown> {
    let f = oc::SampledFunction::new(x, u, d2u).map_err(func_err)?;
    oc::functionals::q_of_sampled(&f, periodic)
        .map(|inner| Breakdown { inner })
        .map_err(func_err)
}

/// Residual of the integration-by-parts identity for samples with
/// vanishing boundary terms.
#[pyfunction]
#[pyo3(signature = (x, u, d2u=None, periodic=false))]
fn parts_identity_residual(
    x: Vec<f64>,
    u: Vec<f64>,
    d2u: Option<Vec<f64>>,
    periodic: bool,
) -> PyResult<f64> {
    let f = oc::SampledFunction::new(x, u, d2u).map_err(func_err)?;
    oc::functionals::parts_identity_residual(&f, periodic).map_err(func_err)
}

/// Compact-support comparison function whose quotient is `-9/64` for every
/// `y0 < 0`. Returns a dict with columns `x`, `u` and the support edge `x1`.
#[pyfunction]
#[pyo3(signature = (y0, config=None, samples=8192))]
fn bar_u<'py>(
    py: Python<'py>,
    y0: f64,
    config: Option<Config>,
    samples: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let bar =
        oc::oracles::bar_u_construction(y0, &unwrap_cfg(config), samples).map_err(oracle_err)?;
    let d = PyDict::new(py);
    d.set_item("x", bar.sample.grid().to_vec())?;
    d.set_item("u", bar.sample.values().to_vec())?;
    d.set_item("x1", bar.x1)?;
    Ok(d)
}

/// The three integral identities a found shot satisfies at the root, as
/// residuals `[r1, r2, r3]` over the full period.
#[pyfunction]
fn infimum_identities(shot: &Shot) -> PyResult<[f64; 3]> {
    oc::oracles::infimum_identities(&shot.inner).map_err(oracle_err)
}

/// Value of the conserved first integral at one phase point, with `i_value`
/// the constant of the inequality. Vanishes on balanced launches.
#[pyfunction]
fn first_integral_residual(u: f64, du: f64, d2u: f64, d3u: f64, i_value: f64) -> f64 {
    let s = oc::PhaseState::new(0.0, u, du, d2u, d3u);
    oc::oracles::first_integral_residual(&s, i_value)
}

/// Run the full verification suite and return one report per check.
#[pyfunction]
#[pyo3(signature = (config=None, bracket=(0.141, 0.249), root_tol=1e-6))]
fn verify(config: Option<Config>, bracket: (f64, f64), root_tol: f64) -> PyResult<Vec<Report>> {
    oc::oracles::verification_suite(&unwrap_cfg(config), bracket, root_tol)
        .map(|v| v.into_iter().map(|inner| Report { inner }).collect())
        .map_err(oracle_err)
}

#[pymodule]
fn oscimin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<Breakdown>()?;
    m.add_class::<Shot>()?;
    m.add_class::<Infimum>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    m.add_function(wrap_pyfunction!(j_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(j_of_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(find_infimum, m)?)?;
    m.add_function(wrap_pyfunction!(minimizer_profile, m)?)?;
    m.add_function(wrap_pyfunction!(q_of_sampled, m)?)?;
    m.add_function(wrap_pyfunction!(parts_identity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(bar_u, m)?)?;
    m.add_function(wrap_pyfunction!(infimum_identities, m)?)?;
    m.add_function(wrap_pyfunction!(first_integral_residual, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
