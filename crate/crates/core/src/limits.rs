//! The limit law of `M* = sup_t (xi_t - t)` for the stable process `xi`
//! that arises under V-normalisation: closed forms where known, Monte Carlo
//! otherwise, and the Mittag-Leffler function that describes the
//! spectrally positive case.

use crate::error::{invalid, Error, Result};
use crate::jumps::JumpSpec;
use crate::quad::{integrate, integrate_to_infinity, Tolerance};
use crate::rng::{check_budget, domain, map_chunks, trial_rng};
use crate::stable::{spectrally_positive_laplace_constant, Skew, StableLaw};
use crate::stats::{ks_distance, Cdf, EmpiricalDistribution};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

/// `1 - exp(-2x/sigma2)`.
pub fn kingman_cdf(x: f64, sigma2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    -(-2.0 * x / sigma2).exp_m1()
}

/// CDF of `Exp(2)`, the law of `M*` for standard Brownian motion.
pub fn standardized_exponential_cdf(x: f64) -> f64 {
    kingman_cdf(x, 1.0)
}

const ML_ACCURACY: f64 = 1e-8;

fn ml_series(beta: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut k = 0u32;
    loop {
        let term = z.powi(k as i32) / gamma(beta * k as f64 + 1.0);
        sum += term;
        if k > 10 && term.abs() < 1e-17 * sum.abs().max(1e-300) {
            return sum;
        }
        k += 1;
        if k > 2000 {
            return sum;
        }
    }
}

/// Largest `|z^k / Gamma(beta k + 1)|` in the power series.
fn ml_series_peak(beta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let lx = x.ln();
    let mut peak = 0.0f64;
    for k in 0..2000u32 {
        let l = k as f64 * lx - ln_gamma(beta * k as f64 + 1.0);
        peak = peak.max(l);
        if k > 5 && l < peak - 50.0 {
            break;
        }
    }
    peak.exp()
}

/// `-sum_{k=1}^{K} (-x)^(-k) / Gamma(1 - beta k)`, optimally truncated, with
/// the first omitted term as its error.
fn ml_asymptotic(beta: f64, x: f64) -> (f64, f64) {
    let z = -x;
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let arg = 1.0 - beta * k as f64;
        // 1/Gamma vanishes at the poles
        let recip = if arg <= 0.0 && (arg - arg.round()).abs() < 1e-9 {
            0.0
        } else {
            1.0 / gamma(arg)
        };
        if !recip.is_finite() {
            return (sum, f64::INFINITY);
        }
        let term = -z.powi(-(k as i32)) * recip;
        let size = term.abs();
        if recip != 0.0 {
            if size > last {
                return (sum, last);
            }
            last = size;
        }
        sum += term;
    }
    (sum, last)
}

/// `E_beta(-t^beta)` as the Laplace transform of a positive spectral density,
/// integrated in `s = r t`.
fn ml_integral(beta: f64, x: f64) -> Result<f64> {
    let t = x.powf(1.0 / beta);
    let (sn, cs) = ((beta * PI).sin(), (beta * PI).cos());
    let kernel = move |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let r = s / t;
        let rb = r.powf(beta);
        (-s).exp() * rb / s * sn / (PI * (rb * rb + 2.0 * rb * cs + 1.0))
    };
    let tol = Tolerance {
        abs: 1e-13,
        rel: 1e-12,
        max_intervals: 8000,
    };
    // break at s = 1 and at the spectral peak s = t when it lies in the bulk of e^{-s}
    let mut breaks = vec![0.0, 1.0];
    if t < 1.0 {
        breaks.insert(1, t);
    } else if t < 60.0 {
        breaks.push(t);
    }
    let mut parts: Vec<_> = breaks.windows(2).map(|w| integrate(kernel, w[0], w[1], tol)).collect();
    parts.push(integrate_to_infinity(kernel, *breaks.last().expect("nonempty"), tol));
    let err: f64 = parts.iter().map(|p| p.error).sum();
    if err > ML_ACCURACY {
        return Err(Error::MittagLefflerAccuracy { beta, z: -x });
    }
    Ok(parts.iter().map(|p| p.value).sum())
}

/// One-parameter Mittag-Leffler function `E_beta(z)` for `beta in (0, 1]`, `z <= 0`.
///
/// The power series is used while it is well conditioned; beyond that the
/// asymptotic expansion when its optimal truncation error is small enough,
/// and otherwise the integral representation.
pub fn mittag_leffler_e(beta: f64, z: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("Mittag-Leffler index must lie in (0,1], got {beta}")));
    }
    if !(z <= 0.0) {
        return Err(invalid(format!("Mittag-Leffler argument must be <= 0, got {z}")));
    }
    if beta == 1.0 {
        return Ok(z.exp());
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let x = -z;
    if x <= 10.0 && ml_series_peak(beta, x) < 1e6 {
        return Ok(ml_series(beta, z));
    }
    if x > 10.0 {
        let (value, err) = ml_asymptotic(beta, x);
        if err < 1e-10 {
            return Ok(value);
        }
    }
    ml_integral(beta, x)
}

/// `P(M* > x) = E_{alpha-1}(-c x^(alpha-1))`.
pub fn mstar_tail_spectrally_positive(x: f64, alpha: f64, c: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) || !(c > 0.0) {
        return Err(invalid(format!("bad Mittag-Leffler law alpha = {alpha}, c = {c}")));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    mittag_leffler_e(alpha - 1.0, -c * x.powf(alpha - 1.0))
}

/// Scale `c` for which the spectrally positive V-normalised limit has
/// `P(M* > x) = E_{alpha-1}(-c x^(alpha-1))`, namely the reciprocal of the
/// Laplace exponent constant.
pub fn analytic_ml_scale(alpha: f64) -> f64 {
    1.0 / spectrally_positive_laplace_constant(alpha)
}

/// Closed-form limit laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    /// `1 - exp(-2x/sigma2)`.
    Exponential { sigma2: f64 },
    /// `Exp(2)`.
    StandardizedExponential,
    /// `1 - E_{alpha-1}(-c x^(alpha-1))`.
    MittagLeffler { alpha: f64, c: f64 },
}

impl LimitLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LimitLaw::Exponential { sigma2 } if !(sigma2 > 0.0) => {
                Err(invalid(format!("variance must be positive, got {sigma2}")))
            }
            LimitLaw::MittagLeffler { alpha, c } if !(alpha > 1.0 && alpha <= 2.0 && c > 0.0) => {
                Err(invalid(format!("bad Mittag-Leffler law alpha = {alpha}, c = {c}")))
            }
            _ => Ok(()),
        }
    }

    pub fn try_cdf(&self, x: f64) -> Result<f64> {
        match *self {
            LimitLaw::Exponential { sigma2 } => Ok(kingman_cdf(x, sigma2)),
            LimitLaw::StandardizedExponential => Ok(standardized_exponential_cdf(x)),
            LimitLaw::MittagLeffler { alpha, c } => Ok(1.0 - mstar_tail_spectrally_positive(x, alpha, c)?),
        }
    }
}

impl Cdf for LimitLaw {
    /// Panics only on parameters that [`LimitLaw::validate`] rejects.
    fn cdf(&self, x: f64) -> f64 {
        self.try_cdf(x).expect("validated limit law")
    }
}

/// What `M*` is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLawSpec {
    Closed(LimitLaw),
    /// No closed form; represented by [`mstar_sup_exact`] or [`mstar_sup_mc`] output.
    MonteCarloStable {
        alpha: f64,
        skew: Skew,
    },
}

impl LimitLawSpec {
    /// Limit of `M(a) / c_{n(a)}` for walks driven by `spec`. The
    /// Mittag-Leffler scale is the analytic one.
    pub fn for_spec(spec: &JumpSpec) -> Self {
        let alpha = spec.alpha();
        match spec.limit_skew() {
            _ if alpha >= 2.0 => LimitLawSpec::Closed(LimitLaw::Exponential { sigma2: 1.0 }),
            Skew::SpectrallyPositive => LimitLawSpec::Closed(LimitLaw::MittagLeffler {
                alpha,
                c: analytic_ml_scale(alpha),
            }),
            skew => LimitLawSpec::MonteCarloStable { alpha, skew },
        }
    }
}

/// `E_beta(-y)` tabulated on a log grid for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct MittagLefflerTable {
    beta: f64,
    log_lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl MittagLefflerTable {
    const LOG_LO: f64 = -8.0 * std::f64::consts::LN_10;
    const LOG_HI: f64 = 8.0 * std::f64::consts::LN_10;
    const NODES: usize = 8001;

    pub fn new(beta: f64) -> Result<Self> {
        let step = (Self::LOG_HI - Self::LOG_LO) / (Self::NODES - 1) as f64;
        let values = (0..Self::NODES)
            .map(|i| mittag_leffler_e(beta, -(Self::LOG_LO + step * i as f64).exp()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            beta,
            log_lo: Self::LOG_LO,
            step,
            values,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `E_beta(-y)` for `y >= 0`.
    pub fn eval(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        let u = (y.ln() - self.log_lo) / self.step;
        if u < 0.0 {
            return 1.0 - y / gamma(1.0 + self.beta);
        }
        let i = u.floor() as usize;
        if i + 1 >= self.values.len() {
            return ml_asymptotic(self.beta, y).0;
        }
        let f = u - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// `1 - E_{alpha-1}(-c x^(alpha-1))` backed by a table.
#[derive(Debug, Clone, Copy)]
pub struct TabulatedMittagLeffler<'a> {
    pub table: &'a MittagLefflerTable,
    pub c: f64,
}

impl Cdf for TabulatedMittagLeffler<'_> {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        1.0 - self.table.eval(self.c * x.powf(self.table.beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleCalibration {
    pub c: f64,
    pub ks: f64,
    pub analytic_c: f64,
}

/// The scale `c` minimising the KS distance between `dist` and the
/// Mittag-Leffler tail law of index `alpha - 1` (golden-section search on `log c`).
pub fn calibrate_ml_scale(dist: &EmpiricalDistribution, alpha: f64) -> Result<ScaleCalibration> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid(format!("calibration needs alpha in (1,2), got {alpha}")));
    }
    let table = MittagLefflerTable::new(alpha - 1.0)?;
    let ks = |lc: f64| {
        ks_distance(
            dist,
            &TabulatedMittagLeffler {
                table: &table,
                c: lc.exp(),
            },
        )
    };
    let analytic_c = analytic_ml_scale(alpha);
    // coarse scan, then golden section around the best cell
    let (lo, hi) = (analytic_c.ln() - 4.0, analytic_c.ln() + 4.0);
    let cells = 32;
    let h = (hi - lo) / cells as f64;
    let best = (0..=cells)
        .map(|i| lo + h * i as f64)
        .min_by(|a, b| ks(*a).total_cmp(&ks(*b)))
        .expect("nonempty scan");
    let (mut a, mut b) = (best - h, best + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (ks(x1), ks(x2));
    while b - a > 1e-6 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = ks(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = ks(x2);
        }
    }
    let lc = 0.5 * (a + b);
    Ok(ScaleCalibration {
        c: lc.exp(),
        ks: ks(lc),
        analytic_c,
    })
}

/// Integration window `[eps, T]` of the `v`-integral with its log-spaced nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWindow {
    eps: f64,
    t: f64,
    v_grid: Vec<f64>,
    samples: u64,
}

impl QuadratureWindow {
    pub fn new(eps: f64, t: f64, nodes: usize, samples: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0 && t > 1.0 && t.is_finite()) {
            return Err(invalid(format!("need 0 < eps < 1 < T, got eps = {eps}, T = {t}")));
        }
        if nodes < 3 || samples < 2 {
            return Err(invalid("window needs at least 3 nodes and 2 samples"));
        }
        let (l0, l1) = (eps.ln(), t.ln());
        let v_grid = (0..nodes)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (nodes - 1) as f64).exp())
            .collect();
        Ok(Self {
            eps,
            t,
            v_grid,
            samples,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn v_grid(&self) -> &[f64] {
        &self.v_grid
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Bound on the change from the omitted `(0, eps)` part.
    pub eps_bound: f64,
    /// Bound on the change from the omitted `(T, inf)` part.
    pub t_bound: f64,
}

/// `int_{eps}^{min(T, v*)} (1 - exp(-mu (v^(1/alpha) xi - v))) dv / v`, where
/// `v*` is where the integrand's support ends; composite Simpson in `log v`.
fn window_integral(xi: f64, mu: f64, alpha: f64, window: &QuadratureWindow) -> f64 {
    if xi <= 0.0 {
        return 0.0;
    }
    let v_star = xi.powf(alpha / (alpha - 1.0));
    let upper = window.t.min(v_star);
    if upper <= window.eps {
        return 0.0;
    }
    let (l0, l1) = (window.eps.ln(), upper.ln());
    let panels = (window.v_grid.len() - 1).max(2) & !1;
    let h = (l1 - l0) / panels as f64;
    let f = |l: f64| {
        let v = l.exp();
        let d = (l / alpha).exp() * xi - v;
        if d > 0.0 {
            -(-mu * d).exp_m1()
        } else {
            0.0
        }
    };
    let mut sum = f(l0) + f(l1);
    for i in 1..panels {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(l0 + h * i as f64);
    }
    sum * h / 3.0
}

/// Right-tail weight of the V-normalised law: the share of `(2 - alpha)|x|^(-1-alpha)` on `x > 0`.
fn right_weight(skew: Skew) -> f64 {
    match skew {
        Skew::SpectrallyPositive => 1.0,
        _ => 0.5,
    }
}

/// Monte Carlo estimate of `exp(-int_eps^T v^(-1) E(1 - e^{-mu(xi_v - v)}; xi_v > v) dv)`.
pub fn mstar_laplace_mc(
    mu: f64,
    alpha: f64,
    skew: Skew,
    window: &QuadratureWindow,
    seed: u64,
    tolerance: Option<f64>,
) -> Result<LaplaceEstimate> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(invalid(format!("mu must be nonnegative, got {mu}")));
    }
    let law = StableLaw::v_normalized(alpha, skew)?;
    if mu == 0.0 {
        return Ok(LaplaceEstimate {
            estimate: 1.0,
            stderr: 0.0,
            eps_bound: 0.0,
            t_bound: 0.0,
        });
    }
    let parts = map_chunks(window.samples, |range| {
        let (mut s, mut s2, mut pos) = (0.0, 0.0, 0.0);
        for trial in range {
            let mut rng = trial_rng(seed, domain::STABLE_LIMIT, trial);
            let xi = law.sample(&mut rng);
            let j = window_integral(xi, mu, alpha, window);
            s += j;
            s2 += j * j;
            pos += xi.max(0.0);
        }
        (s, s2, pos)
    });
    let n = window.samples as f64;
    let (s, s2, pos) = parts
        .into_iter()
        .fold((0.0, 0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    let estimate = (-mean).exp();
    let stderr = estimate * (var / n).sqrt();
    if let Some(tol) = tolerance {
        if stderr > tol {
            return Err(Error::Tolerance {
                achieved: stderr,
                requested: tol,
            });
        }
    }
    // 1 - e^{-mu x} <= mu x and E xi_v^+ = v^{1/alpha} E xi_1^+
    let inner = mu * alpha * (pos / n) * window.eps.powf(1.0 / alpha);
    let outer = if alpha == 2.0 {
        // P(N > sqrt v) <= exp(-v/2)/2
        (-window.t / 2.0).exp() / window.t
    } else {
        right_weight(skew) * (2.0 - alpha) / (alpha * (alpha - 1.0)) * window.t.powf(1.0 - alpha)
    };
    Ok(LaplaceEstimate {
        estimate,
        stderr,
        eps_bound: estimate * -(-inner).exp_m1(),
        t_bound: estimate * -(-outer).exp_m1(),
    })
}

/// Samples of `sup_{t <= T}(xi_t - t)` over `grid_steps` equal steps.
///
/// For `alpha = 2` the supremum inside each step is drawn exactly from the
/// Brownian-bridge maximum, so the only error is the horizon `T`.
pub fn mstar_sup_mc(
    alpha: f64,
    skew: Skew,
    t: f64,
    grid_steps: u64,
    trials: u64,
    seed: u64,
    budget: u128,
) -> Result<EmpiricalDistribution> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(invalid(format!("horizon must be >= 1, got {t}")));
    }
    if grid_steps == 0 || trials == 0 {
        return Err(invalid("grid_steps and trials must be positive"));
    }
    check_budget(grid_steps, trials, budget)?;
    let law = StableLaw::v_normalized(alpha, skew)?;
    let dt = t / grid_steps as f64;
    let chunks = map_chunks(trials, |range| {
        range
            .map(|trial| {
                let mut rng = trial_rng(seed, domain::STABLE_LIMIT, trial);
                if alpha == 2.0 {
                    brownian_sup(&mut rng, dt, grid_steps)
                } else {
                    grid_sup(&mut rng, &law, dt, grid_steps)
                }
            })
            .collect::<Vec<_>>()
    });
    EmpiricalDistribution::new(
        chunks.into_iter().flatten().collect(),
        format!(
            "sup_(t<={t}) of stable(alpha={alpha}, {}) minus t, {grid_steps} steps",
            skew.name()
        ),
    )
}

fn brownian_sup<R: Rng>(rng: &mut R, dt: f64, steps: u64) -> f64 {
    let sd = dt.sqrt();
    let (mut x, mut best) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(rng);
        let next = x + sd * z - dt;
        let u: f64 = 1.0 - rng.random::<f64>();
        let d = next - x;
        let bridge = 0.5 * (x + next + (d * d - 2.0 * dt * u.ln()).sqrt());
        best = best.max(bridge);
        x = next;
    }
    best
}

fn grid_sup<R: Rng>(rng: &mut R, law: &StableLaw, dt: f64, steps: u64) -> f64 {
    let scale = dt.powf(1.0 / law.alpha());
    let (mut x, mut best) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        x += scale * law.sample(rng) - dt;
        best = best.max(x);
    }
    best
}

/// Exact samples of `sup_{t <= T}(xi_t - t)` via the stick-breaking
/// representation of the supremum: for uniform stick-breaking lengths
/// `l_k` of `[0, T]` and independent increments `X_k ~ xi_{l_k} - l_k`,
/// the supremum has the law of `sum_k max(X_k, 0)`.
///
/// Sticks are drawn until the unbroken remainder is below `T * 1e-15`; the
/// remainder is then taken as one last stick. Cost grows like `log T`.
pub fn mstar_sup_exact(alpha: f64, skew: Skew, t: f64, trials: u64, seed: u64) -> Result<EmpiricalDistribution> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(invalid(format!("horizon must be >= 1, got {t}")));
    }
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let law = StableLaw::v_normalized(alpha, skew)?;
    let chunks = map_chunks(trials, |range| {
        range
            .map(|trial| {
                let mut rng = trial_rng(seed, domain::STABLE_LIMIT, trial);
                stick_sup(&mut rng, &law, t)
            })
            .collect::<Vec<_>>()
    });
    EmpiricalDistribution::new(
        chunks.into_iter().flatten().collect(),
        format!(
            "sup_(t<={t}) of stable(alpha={alpha}, {}) minus t, stick-breaking",
            skew.name()
        ),
    )
}

fn stick_sup<R: Rng>(rng: &mut R, law: &StableLaw, t: f64) -> f64 {
    let inv_alpha = 1.0 / law.alpha();
    let floor = t * 1e-15;
    let increment = |rng: &mut R, len: f64| len.powf(inv_alpha) * law.sample(rng) - len;
    let (mut rest, mut sup) = (t, 0.0f64);
    while rest > floor {
        let u: f64 = rng.random();
        let len = rest * u;
        rest -= len;
        sup += increment(rng, len).max(0.0);
    }
    sup + increment(rng, rest).max(0.0)
}

#[derive(Debug, Clone)]
pub struct RefinedSup {
    pub dist: EmpiricalDistribution,
    pub grid_steps: u64,
    /// KS distance between the last two refinements.
    pub last_change: f64,
}

/// Doubles the grid until successive refinements differ by less than `ks_tol`.
#[allow(clippy::too_many_arguments)]
pub fn mstar_sup_refined(
    alpha: f64,
    skew: Skew,
    t: f64,
    initial_steps: u64,
    max_steps: u64,
    trials: u64,
    seed: u64,
    ks_tol: f64,
    budget: u128,
) -> Result<RefinedSup> {
    let mut steps = initial_steps.max(1);
    let mut prev = mstar_sup_mc(alpha, skew, t, steps, trials, seed, budget)?;
    loop {
        let next_steps = steps * 2;
        if next_steps > max_steps {
            return Err(Error::Tolerance {
                achieved: f64::NAN,
                requested: ks_tol,
            });
        }
        let next = mstar_sup_mc(alpha, skew, t, next_steps, trials, seed, budget)?;
        let change = crate::stats::ks_two_sample(&prev, &next);
        if change < ks_tol {
            return Ok(RefinedSup {
                dist: next,
                grid_steps: next_steps,
                last_change: change,
            });
        }
        prev = next;
        steps = next_steps;
    }
}

/// Least-squares slope of `log P(M > x)` on `log x` between two empirical quantiles.
pub fn tail_slope_estimate(
    dist: &EmpiricalDistribution,
    quantile_lo: f64,
    quantile_hi: f64,
) -> Result<crate::stats::LineFit> {
    if !(0.0 < quantile_lo && quantile_lo < quantile_hi && quantile_hi < 1.0) {
        return Err(invalid(format!(
            "need 0 < quantile_lo < quantile_hi < 1, got {quantile_lo}, {quantile_hi}"
        )));
    }
    if dist.len() < 10_000 {
        return Err(Error::TooFewPoints {
            got: dist.len(),
            need: 10_000,
        });
    }
    let xs = dist.samples();
    let n = xs.len();
    let (lo, hi) = (dist.quantile(quantile_lo), dist.quantile(quantile_hi));
    let mut pts = Vec::new();
    let mut i = 0;
    while i < n {
        let x = xs[i];
        let mut j = i;
        while j < n && xs[j] == x {
            j += 1;
        }
        if x >= lo && x <= hi && x > 0.0 {
            // fraction of samples strictly above x
            let surv = (n - j) as f64 / n as f64;
            if surv > 0.0 {
                pts.push((x.ln(), surv.ln()));
            }
        }
        i = j;
    }
    if pts.len() < 30 {
        return Err(Error::TooFewPoints {
            got: pts.len(),
            need: 30,
        });
    }
    crate::stats::linear_fit(&pts)
}
