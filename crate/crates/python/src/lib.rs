//! Python module `pyheavytraffic`: jump laws, norming sequences, simulated
//! maxima and the limit laws they converge to.

use heavytraffic::limits::{self, LimitLaw, MittagLefflerTable, QuadratureWindow, TabulatedMittagLeffler};
use heavytraffic::spitzer::{self, SpitzerConfig};
use heavytraffic::stats::{self, Cdf};
use heavytraffic::walksim::{self, Horizon, WalkConfig};
use heavytraffic::{normalize, EmpiricalDistribution, Error, Skew};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::collections::BTreeMap;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::NotCentered
        | Error::StepBudget { .. }
        | Error::NoCrossing { .. }
        | Error::DegenerateLevelSet { .. }
        | Error::InsufficientSpan(_)
        | Error::TooFewPoints { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn skew(name: &str) -> PyResult<Skew> {
    Skew::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown skew '{name}'")))
}

fn distribution(samples: Vec<f64>) -> PyResult<EmpiricalDistribution> {
    EmpiricalDistribution::new(samples, "python samples").map_err(to_py)
}

/// A jump law of the random walk.
#[pyclass(name = "JumpSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyJumpSpec {
    inner: heavytraffic::JumpSpec,
}

#[pymethods]
impl PyJumpSpec {
    /// Builds a spec from the `key = value` pairs of a configuration block.
    #[new]
    fn new(pairs: BTreeMap<String, String>) -> PyResult<Self> {
        let pairs: Vec<(String, String)> = pairs.into_iter().collect();
        let inner = heavytraffic::JumpSpec::from_kv(&pairs).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn gaussian(sigma: f64) -> PyResult<Self> {
        wrap(heavytraffic::JumpSpec::gaussian(sigma))
    }

    #[staticmethod]
    fn exp_difference(beta: f64) -> PyResult<Self> {
        wrap(heavytraffic::JumpSpec::exp_difference(beta))
    }

    #[staticmethod]
    fn two_sided_pareto(alpha: f64, xmin: f64) -> PyResult<Self> {
        wrap(heavytraffic::JumpSpec::two_sided_pareto(alpha, xmin))
    }

    #[staticmethod]
    fn one_sided_pareto_centered(alpha: f64, xmin: f64) -> PyResult<Self> {
        wrap(heavytraffic::JumpSpec::one_sided_pareto_centered(alpha, xmin))
    }

    #[staticmethod]
    fn rademacher() -> Self {
        Self {
            inner: heavytraffic::JumpSpec::rademacher(),
        }
    }

    #[staticmethod]
    fn symmetric_stable(alpha: f64, scale: f64) -> PyResult<Self> {
        wrap(heavytraffic::JumpSpec::symmetric_stable(alpha, scale))
    }

    #[staticmethod]
    fn service_minus_shifted_arrival(beta: f64, shift: f64) -> PyResult<Self> {
        wrap(heavytraffic::JumpSpec::service_minus_shifted_arrival(beta, shift))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn centered(&self) -> bool {
        self.inner.is_centered()
    }

    fn to_kv(&self) -> Vec<(String, String)> {
        self.inner.to_kv()
    }

    /// `V(x) = E(X^2; |X| <= x)`.
    fn truncated_second_moment(&self, x: f64) -> PyResult<f64> {
        self.inner.truncated_second_moment(x).map_err(to_py)
    }

    fn tail_probability(&self, x: f64) -> PyResult<f64> {
        self.inner.tail_probability(x).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let fields: Vec<String> = self
            .inner
            .to_kv()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("JumpSpec({})", fields.join(", "))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn wrap(r: heavytraffic::Result<heavytraffic::JumpSpec>) -> PyResult<PyJumpSpec> {
    r.map(|inner| PyJumpSpec { inner }).map_err(to_py)
}

/// `c_n = sup{u : V(u)/u^2 > 1/n}`.
#[pyfunction]
fn c_of_n(spec: &PyJumpSpec, n: u64) -> PyResult<f64> {
    normalize::c_of_n(&spec.inner, n).map_err(to_py)
}

/// `n(a) = min{n : c_n <= a n}`.
#[pyfunction]
fn n_of_a(spec: &PyJumpSpec, a: f64) -> PyResult<u64> {
    normalize::n_of_a(&spec.inner, a).map_err(to_py)
}

/// Simulated maxima `max_{k <= T n(a)} (S_k - k a)`. Pass `steps` instead of
/// `t` to fix the horizon in steps (required when `a = 0`).
#[pyfunction]
#[pyo3(signature = (spec, a, trials, seed, t = 20.0, steps = None, max_steps = None))]
#[allow(clippy::too_many_arguments)]
fn simulate_max<'py>(
    py: Python<'py>,
    spec: &PyJumpSpec,
    a: f64,
    trials: u64,
    seed: u64,
    t: f64,
    steps: Option<u64>,
    max_steps: Option<u128>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = WalkConfig::new(spec.inner, a, t, trials, seed);
    if let Some(k) = steps {
        cfg = cfg.with_horizon(Horizon::Steps(k));
    }
    if let Some(b) = max_steps {
        cfg = cfg.with_budget(b);
    }
    let batch = py.detach(|| walksim::simulate_max_batch(&cfg)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("scaled", batch.scaled_samples())?;
    out.set_item("samples", batch.samples)?;
    out.set_item("n_a", batch.n_a)?;
    out.set_item("c_n", batch.c_n)?;
    out.set_item("steps", batch.k)?;
    out.set_item("truncation_certificate", batch.truncation_certificate)?;
    Ok(out)
}

/// `P(M > x)` for the GI/M/1 walk `Exp(beta) - (shift + Exp(beta))`.
#[pyfunction]
fn gim1_tail(beta: f64, shift: f64, x: f64) -> PyResult<f64> {
    walksim::exact_gim1_tail(beta, shift, x).map_err(to_py)
}

/// `E_beta(z)`.
#[pyfunction]
fn mittag_leffler_e(beta: f64, z: f64) -> PyResult<f64> {
    limits::mittag_leffler_e(beta, z).map_err(to_py)
}

/// `P(M* > x) = E_{alpha-1}(-c x^(alpha-1))`.
#[pyfunction]
#[pyo3(signature = (x, alpha, c = None))]
fn mstar_tail(x: f64, alpha: f64, c: Option<f64>) -> PyResult<f64> {
    let c = c.unwrap_or_else(|| limits::analytic_ml_scale(alpha));
    limits::mstar_tail_spectrally_positive(x, alpha, c).map_err(to_py)
}

#[pyfunction]
fn analytic_ml_scale(alpha: f64) -> f64 {
    limits::analytic_ml_scale(alpha)
}

/// Exact samples of `sup_{t <= T}(xi_t - t)` for the limit stable process.
#[pyfunction]
#[pyo3(signature = (alpha, skew, trials, seed, t = 1e8))]
fn mstar_sup_exact(py: Python<'_>, alpha: f64, skew: &str, trials: u64, seed: u64, t: f64) -> PyResult<Vec<f64>> {
    let skew = self::skew(skew)?;
    let d = py
        .detach(|| limits::mstar_sup_exact(alpha, skew, t, trials, seed))
        .map_err(to_py)?;
    Ok(d.samples().to_vec())
}

/// Grid samples of `sup_{t <= T}(xi_t - t)`.
#[pyfunction]
fn mstar_sup_mc(
    py: Python<'_>,
    alpha: f64,
    skew: &str,
    t: f64,
    grid_steps: u64,
    trials: u64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let skew = self::skew(skew)?;
    let d = py
        .detach(|| limits::mstar_sup_mc(alpha, skew, t, grid_steps, trials, seed, u128::MAX))
        .map_err(to_py)?;
    Ok(d.samples().to_vec())
}

/// Monte Carlo `E exp(-mu M*)` over the window `[eps, t]`.
#[pyfunction]
#[pyo3(signature = (mu, alpha, skew, seed, eps = 1e-4, t = 400.0, nodes = 257, samples = 20_000))]
#[allow(clippy::too_many_arguments)]
fn mstar_laplace<'py>(
    py: Python<'py>,
    mu: f64,
    alpha: f64,
    skew: &str,
    seed: u64,
    eps: f64,
    t: f64,
    nodes: usize,
    samples: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let skew = self::skew(skew)?;
    let window = QuadratureWindow::new(eps, t, nodes, samples).map_err(to_py)?;
    let est = py
        .detach(|| limits::mstar_laplace_mc(mu, alpha, skew, &window, seed, None))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("estimate", est.estimate)?;
    out.set_item("stderr", est.stderr)?;
    out.set_item("eps_bound", est.eps_bound)?;
    out.set_item("t_bound", est.t_bound)?;
    Ok(out)
}

/// `(c, ks, analytic_c)`: the Mittag-Leffler scale minimising KS against `samples`.
#[pyfunction]
fn calibrate_ml_scale(samples: Vec<f64>, alpha: f64) -> PyResult<(f64, f64, f64)> {
    let cal = limits::calibrate_ml_scale(&distribution(samples)?, alpha).map_err(to_py)?;
    Ok((cal.c, cal.ks, cal.analytic_c))
}

/// KS distance to `1 - exp(-2x/sigma2)`.
#[pyfunction]
#[pyo3(signature = (samples, sigma2 = 1.0))]
fn ks_exponential(samples: Vec<f64>, sigma2: f64) -> PyResult<f64> {
    let law = LimitLaw::Exponential { sigma2 };
    law.validate().map_err(to_py)?;
    Ok(stats::ks_distance(&distribution(samples)?, &law))
}

/// KS distance to `1 - E_{alpha-1}(-c x^(alpha-1))`.
#[pyfunction]
fn ks_mittag_leffler(samples: Vec<f64>, alpha: f64, c: f64) -> PyResult<f64> {
    let table = MittagLefflerTable::new(alpha - 1.0).map_err(to_py)?;
    let law = TabulatedMittagLeffler { table: &table, c };
    Ok(stats::ks_distance(&distribution(samples)?, &law))
}

#[pyfunction]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    Ok(stats::ks_two_sample(&distribution(a)?, &distribution(b)?))
}

#[pyfunction]
fn dkw_epsilon(n: u64, delta: f64) -> PyResult<f64> {
    stats::dkw_epsilon(n, delta).map_err(to_py)
}

/// Kingman law `1 - exp(-2x/sigma2)`.
#[pyfunction]
fn kingman_cdf(x: f64, sigma2: f64) -> f64 {
    LimitLaw::Exponential { sigma2 }.cdf(x)
}

/// Spitzer series against simulated maxima at each `mu`.
#[pyfunction]
#[pyo3(signature = (spec, a, mu_grid, trials, seed, eps = 0.01, t = 20.0))]
#[allow(clippy::too_many_arguments)]
fn wiener_hopf<'py>(
    py: Python<'py>,
    spec: &PyJumpSpec,
    a: f64,
    mu_grid: Vec<f64>,
    trials: u64,
    seed: u64,
    eps: f64,
    t: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SpitzerConfig::new(spec.inner, a, mu_grid, eps, t, trials, seed);
    cfg.validate().map_err(to_py)?;
    let report = py.detach(|| spitzer::wiener_hopf_consistency(&cfg)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("mu", report.rows.iter().map(|r| r.mu).collect::<Vec<_>>())?;
    out.set_item("spitzer", report.rows.iter().map(|r| r.spitzer).collect::<Vec<_>>())?;
    out.set_item("empirical", report.rows.iter().map(|r| r.empirical).collect::<Vec<_>>())?;
    out.set_item("allowance", report.rows.iter().map(|r| r.allowance).collect::<Vec<_>>())?;
    out.set_item("sigma3_bound", report.sigma3_bound)?;
    out.set_item("certificate", report.certificate)?;
    out.set_item("passed", report.pass)?;
    Ok(out)
}

#[pymodule]
pub fn pyheavytraffic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyJumpSpec>()?;
    m.add_function(wrap_pyfunction!(c_of_n, m)?)?;
    m.add_function(wrap_pyfunction!(n_of_a, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_max, m)?)?;
    m.add_function(wrap_pyfunction!(gim1_tail, m)?)?;
    m.add_function(wrap_pyfunction!(mittag_leffler_e, m)?)?;
    m.add_function(wrap_pyfunction!(mstar_tail, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_ml_scale, m)?)?;
    m.add_function(wrap_pyfunction!(mstar_sup_exact, m)?)?;
    m.add_function(wrap_pyfunction!(mstar_sup_mc, m)?)?;
    m.add_function(wrap_pyfunction!(mstar_laplace, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_ml_scale, m)?)?;
    m.add_function(wrap_pyfunction!(ks_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(ks_mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(dkw_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(kingman_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(wiener_hopf, m)?)?;
    Ok(())
}
