//! Drifted random walks `S_k - k a`, their truncated maxima, and the
//! quantities that control what truncation throws away.

use crate::error::{invalid, Error, Result};
use crate::jumps::JumpSpec;
use crate::normalize::{c_of_n, n_of_a};
use crate::rng::{check_budget, domain, map_chunks, trial_rng, DEFAULT_STEP_BUDGET};
use crate::stats::binomial_stderr;
use rand::Rng;

/// Paths longer than this accumulate with Neumaier summation.
pub const COMPENSATION_THRESHOLD: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationLaw {
    /// Uniform on `[-b, b]`.
    Uniform { b: f64 },
    /// `b` times a fair sign.
    Rademacher { b: f64 },
}

/// Independent zero-mean noise `Y_i` added to every increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    law: PerturbationLaw,
    gamma: f64,
}

impl PerturbationSpec {
    /// `gamma` is the moment order asserted finite; it must exceed the walk's index.
    pub fn new(law: PerturbationLaw, gamma: f64) -> Result<Self> {
        let b = match law {
            PerturbationLaw::Uniform { b } | PerturbationLaw::Rademacher { b } => b,
        };
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("perturbation half-width must be positive, got {b}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "perturbation moment order must be positive, got {gamma}"
            )));
        }
        Ok(Self { law, gamma })
    }

    pub fn law(&self) -> PerturbationLaw {
        self.law
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn bound(&self) -> f64 {
        match self.law {
            PerturbationLaw::Uniform { b } | PerturbationLaw::Rademacher { b } => b,
        }
    }

    /// `E|Y|^gamma`.
    pub fn gamma_moment(&self) -> f64 {
        match self.law {
            PerturbationLaw::Uniform { b } => b.powf(self.gamma) / (self.gamma + 1.0),
            PerturbationLaw::Rademacher { b } => b.powf(self.gamma),
        }
    }

    pub fn variance(&self) -> f64 {
        match self.law {
            PerturbationLaw::Uniform { b } => b * b / 3.0,
            PerturbationLaw::Rademacher { b } => b * b,
        }
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.law {
            PerturbationLaw::Uniform { b } => b * (2.0 * rng.random::<f64>() - 1.0),
            PerturbationLaw::Rademacher { b } => {
                if rng.random::<bool>() {
                    b
                } else {
                    -b
                }
            }
        }
    }
}

/// Simulated horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// `K = ceil(T n(a))`.
    Scaled(f64),
    /// A fixed number of steps, for walks whose drift lives inside the spec.
    Steps(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub spec: JumpSpec,
    pub a: f64,
    pub horizon: Horizon,
    pub trials: u64,
    pub seed: u64,
    pub perturbation: Option<PerturbationSpec>,
    pub step_budget: u128,
}

impl WalkConfig {
    pub fn new(spec: JumpSpec, a: f64, t: f64, trials: u64, seed: u64) -> Self {
        Self {
            spec,
            a,
            horizon: Horizon::Scaled(t),
            trials,
            seed,
            perturbation: None,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn with_perturbation(mut self, p: PerturbationSpec) -> Self {
        self.perturbation = Some(p);
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(invalid(format!("drift must be nonnegative, got {}", self.a)));
        }
        if self.a == 0.0 && !(self.spec.mean() < 0.0) {
            return Err(invalid("zero drift requires a spec with negative mean"));
        }
        match self.horizon {
            Horizon::Scaled(t) if !(t >= 1.0 && t.is_finite()) => {
                return Err(invalid(format!("horizon multiplier must be >= 1, got {t}")))
            }
            Horizon::Scaled(_) if self.a == 0.0 => return Err(invalid("a scaled horizon needs a positive drift")),
            Horizon::Steps(0) => return Err(invalid("horizon must contain at least one step")),
            _ => {}
        }
        if self.trials == 0 {
            return Err(invalid("trials must be >= 1"));
        }
        if let Some(p) = &self.perturbation {
            let alpha = self.spec.alpha();
            if p.gamma() <= alpha {
                return Err(invalid(format!(
                    "perturbation moment order {} must exceed alpha = {alpha}",
                    p.gamma()
                )));
            }
        }
        Ok(())
    }

    /// `n(a)` when the drift is positive; optional for fixed-step horizons.
    pub fn time_scale(&self) -> Result<Option<u64>> {
        match self.horizon {
            _ if self.a == 0.0 => Ok(None),
            Horizon::Scaled(_) => Ok(Some(n_of_a(&self.spec, self.a)?)),
            Horizon::Steps(_) => Ok(n_of_a(&self.spec, self.a).ok()),
        }
    }

    pub fn horizon_steps(&self, n_a: Option<u64>) -> Result<u64> {
        match (self.horizon, n_a) {
            (Horizon::Steps(k), _) => Ok(k),
            (Horizon::Scaled(t), Some(n)) => Ok((t * n as f64).ceil() as u64),
            (Horizon::Scaled(_), None) => Err(invalid("a scaled horizon needs a positive drift")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxSampleBatch {
    /// `max_{0<=k<=K} S_k^(a)`, one per trial in trial order.
    pub samples: Vec<f64>,
    /// `k*/n(a)` (or `k*` when the drift is inside the spec).
    pub argmax_ratios: Vec<f64>,
    pub k: u64,
    pub a: f64,
    pub spec: JumpSpec,
    pub seed: u64,
    pub n_a: Option<u64>,
    pub c_n: Option<f64>,
    pub truncation_certificate: Option<f64>,
}

impl MaxSampleBatch {
    /// Samples divided by `c_{n(a)}`.
    pub fn scaled_samples(&self) -> Option<Vec<f64>> {
        let c = self.c_n?;
        Some(self.samples.iter().map(|m| m / c).collect())
    }
}

/// Neumaier running sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) struct PathDriver<'a> {
    cfg: &'a WalkConfig,
    sampler: crate::jumps::JumpSampler,
    /// Largest possible single-step rise, if bounded.
    max_rise: Option<f64>,
}

impl<'a> PathDriver<'a> {
    pub(crate) fn new(cfg: &'a WalkConfig) -> Self {
        let max_rise = cfg
            .spec
            .upper_jump_bound()
            .map(|ub| ub - cfg.a + cfg.perturbation.map_or(0.0, |p| p.bound()));
        Self {
            cfg,
            sampler: cfg.spec.sampler(),
            max_rise,
        }
    }

    /// Runs trial `trial` for `k_max` steps; `visit(k, s)` sees every partial sum.
    #[inline]
    pub(crate) fn run<F: FnMut(u64, f64)>(&self, trial: u64, k_max: u64, mut visit: F) {
        let mut rng = trial_rng(self.cfg.seed, domain::WALK, trial);
        let mut noise = self
            .cfg
            .perturbation
            .map(|p| (p, trial_rng(self.cfg.seed, domain::PERTURBATION, trial)));
        let a = self.cfg.a;
        if k_max > COMPENSATION_THRESHOLD {
            let mut s = Compensated::default();
            for k in 1..=k_max {
                let mut x = self.sampler.draw(&mut rng) - a;
                if let Some((p, r)) = noise.as_mut() {
                    x += p.draw(r);
                }
                s.add(x);
                visit(k, s.value());
            }
        } else {
            let mut s = 0.0;
            for k in 1..=k_max {
                let mut x = self.sampler.draw(&mut rng) - a;
                if let Some((p, r)) = noise.as_mut() {
                    x += p.draw(r);
                }
                s += x;
                visit(k, s);
            }
        }
    }

    /// Running maximum and its first attaining index, with early exit for
    /// bounded jumps once the remaining steps cannot reach the maximum.
    fn max_of(&self, trial: u64, k_max: u64) -> (f64, u64) {
        let mut rng = trial_rng(self.cfg.seed, domain::WALK, trial);
        let mut noise = self
            .cfg
            .perturbation
            .map(|p| (p, trial_rng(self.cfg.seed, domain::PERTURBATION, trial)));
        let a = self.cfg.a;
        let compensate = k_max > COMPENSATION_THRESHOLD;
        let mut s = Compensated::default();
        let mut plain = 0.0;
        let (mut best, mut arg) = (0.0f64, 0u64);
        for k in 1..=k_max {
            let mut x = self.sampler.draw(&mut rng) - a;
            if let Some((p, r)) = noise.as_mut() {
                x += p.draw(r);
            }
            let cur = if compensate {
                s.add(x);
                s.value()
            } else {
                plain += x;
                plain
            };
            if cur > best {
                best = cur;
                arg = k;
            }
            if let Some(rise) = self.max_rise {
                if k % 64 == 0 && cur + rise.max(0.0) * (k_max - k) as f64 <= best {
                    break;
                }
            }
        }
        (best, arg)
    }
}

/// Simulates `trials` independent truncated maxima.
pub fn simulate_max_batch(cfg: &WalkConfig) -> Result<MaxSampleBatch> {
    cfg.validate()?;
    let n_a = cfg.time_scale()?;
    let k = cfg.horizon_steps(n_a)?;
    check_budget(k, cfg.trials, cfg.step_budget)?;
    let driver = PathDriver::new(cfg);
    let chunks = map_chunks(cfg.trials, |range| {
        range.map(|t| driver.max_of(t, k)).collect::<Vec<_>>()
    });
    let denom = n_a.map_or(1.0, |n| n as f64);
    let (samples, argmax_ratios) = chunks
        .into_iter()
        .flatten()
        .map(|(m, arg)| (m, arg as f64 / denom))
        .unzip();
    let (c_n, certificate) = match (n_a, cfg.horizon) {
        (Some(n), Horizon::Scaled(t)) if cfg.spec.is_centered() => (
            Some(c_of_n(&cfg.spec, n)?),
            Some(certificate_sum(&cfg.spec, cfg.a, n, t)?),
        ),
        (Some(n), _) => (c_of_n(&cfg.spec, n).ok(), None),
        _ => (None, None),
    };
    Ok(MaxSampleBatch {
        samples,
        argmax_ratios,
        k,
        a: cfg.a,
        spec: cfg.spec,
        seed: cfg.seed,
        n_a,
        c_n,
        truncation_certificate: certificate,
    })
}

fn certificate_sum(spec: &JumpSpec, a: f64, n: u64, t: f64) -> Result<f64> {
    const MAX_TERMS: usize = 2000;
    let base = a * n as f64 * t;
    let mut total = 0.0;
    for j in 0..MAX_TERMS {
        let scale = 2f64.powi(j as i32);
        let x = scale * base;
        let term = 2.0 * scale * n as f64 * t * spec.truncated_second_moment(x)? / (x * x);
        if !term.is_finite() {
            return Err(Error::DivergentSum { terms: j });
        }
        total += term;
        if term < 1e-12 {
            return Ok(total);
        }
    }
    Err(Error::DivergentSum { terms: MAX_TERMS })
}

/// Dyadic bound skeleton `sum_j 2^(j+1) n T V(2^j a n T) / (2^j a n T)^2` with unit constant.
pub fn truncation_certificate(cfg: &WalkConfig) -> Result<f64> {
    cfg.validate()?;
    let t = match cfg.horizon {
        Horizon::Scaled(t) => t,
        Horizon::Steps(_) => return Err(invalid("certificate needs a scaled horizon")),
    };
    let n = cfg
        .time_scale()?
        .ok_or_else(|| invalid("certificate needs a positive drift"))?;
    certificate_sum(&cfg.spec, cfg.a, n, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProbe {
    pub t_lo: f64,
    pub t_hi: f64,
    pub probability: f64,
    pub stderr: f64,
}

/// `P(max_{T_lo n(a) <= k <= T_hi n(a)} S_k^(a) >= 0)`.
pub fn truncation_tail_probe(cfg: &WalkConfig, t_lo: f64, t_hi: f64) -> Result<TailProbe> {
    Ok(truncation_tail_sweep(cfg, &[t_lo], t_hi)?[0])
}

/// Probes for several `T_lo` at once on shared paths.
pub fn truncation_tail_sweep(cfg: &WalkConfig, t_los: &[f64], t_hi: f64) -> Result<Vec<TailProbe>> {
    cfg.validate()?;
    if t_los.is_empty() {
        return Err(invalid("no lower horizons given"));
    }
    for &t in t_los {
        if !(t >= 1.0 && t < t_hi) {
            return Err(invalid(format!("need 1 <= T_lo < T_hi, got {t} and {t_hi}")));
        }
    }
    let n = cfg
        .time_scale()?
        .ok_or_else(|| invalid("tail probe needs a positive drift"))?;
    let k_hi = (t_hi * n as f64).ceil() as u64;
    let k_los: Vec<u64> = t_los.iter().map(|t| (t * n as f64).ceil() as u64).collect();
    check_budget(k_hi, cfg.trials, cfg.step_budget)?;
    let driver = PathDriver::new(cfg);
    let earliest = *k_los.iter().min().expect("nonempty");
    let counts = map_chunks(cfg.trials, |range| {
        let mut hits = vec![0u64; k_los.len()];
        for trial in range {
            // last time the walk was at or above zero, within the probed window
            let mut last = 0u64;
            driver.run(trial, k_hi, |k, s| {
                if k >= earliest && s >= 0.0 {
                    last = k;
                }
            });
            for (h, &klo) in hits.iter_mut().zip(&k_los) {
                if last >= klo {
                    *h += 1;
                }
            }
        }
        hits
    });
    let mut totals = vec![0u64; k_los.len()];
    for c in counts {
        for (t, h) in totals.iter_mut().zip(c) {
            *t += h;
        }
    }
    Ok(t_los
        .iter()
        .zip(totals)
        .map(|(&t_lo, hits)| {
            let p = hits as f64 / cfg.trials as f64;
            TailProbe {
                t_lo,
                t_hi,
                probability: p,
                stderr: binomial_stderr(p, cfg.trials),
            }
        })
        .collect())
}

/// Root in (0, 1) of `s = exp(-shift beta (1-s)) / (2 - s)`.
pub fn gim1_sigma(beta: f64, shift: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("service rate must be positive, got {beta}")));
    }
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(invalid(format!(
            "shift must be positive for a finite maximum, got {shift}"
        )));
    }
    let lst = |s: f64| (-shift * s).exp() * beta / (beta + s);
    let mut sigma = 0.5;
    for _ in 0..100_000 {
        let next = lst(beta * (1.0 - sigma));
        if (next - sigma).abs() < 1e-12 {
            return Ok(next);
        }
        sigma = next;
    }
    Err(Error::Tolerance {
        achieved: (lst(beta * (1.0 - sigma)) - sigma).abs(),
        requested: 1e-12,
    })
}

/// `P(M > x) = sigma* exp(-beta (1 - sigma*) x)` for the walk with increments
/// `Exp(beta) - (shift + Exp(beta))`.
pub fn exact_gim1_tail(beta: f64, shift: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("x must be nonnegative, got {x}")));
    }
    let sigma = gim1_sigma(beta, shift)?;
    Ok(sigma * (-beta * (1.0 - sigma) * x).exp())
}
