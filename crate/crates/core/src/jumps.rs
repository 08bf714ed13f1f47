//! Catalog of jump laws in stable domains of attraction.
//!
//! Each entry knows how to draw exactly, and how to evaluate the truncated
//! second moment `V(x) = E(X^2; |X| <= x)`, the two-sided tail `P(|X| > x)`
//! and the truncated mean `|E(X; |X| <= x)|`, in closed form where one exists
//! and by adaptive quadrature otherwise.

use crate::error::{invalid, Error, Result};
use crate::quad::{self, Tolerance};
use crate::stable::{Skew, StableLaw};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpKind {
    Gaussian {
        sigma: f64,
    },
    /// `U - V` with `U, V` independent exponential(`beta`): a Laplace law.
    ExpDifference {
        beta: f64,
    },
    /// Symmetric density `(alpha/2) xmin^alpha |x|^(-alpha-1)` on `|x| >= xmin`.
    TwoSidedPareto {
        alpha: f64,
        xmin: f64,
    },
    /// `P - E[P]` for `P ~ Pareto(alpha, xmin)`.
    OneSidedParetoCentered {
        alpha: f64,
        xmin: f64,
    },
    Rademacher,
    /// Characteristic function `exp(-|scale t|^alpha)`.
    SymmetricStable {
        alpha: f64,
        scale: f64,
    },
    /// `U - (V + shift)` with `U, V ~ Exp(beta)`: a GI/M/1 walk increment.
    ServiceMinusShiftedArrival {
        beta: f64,
        shift: f64,
    },
}

impl JumpKind {
    pub fn name(&self) -> &'static str {
        match self {
            JumpKind::Gaussian { .. } => "gaussian",
            JumpKind::ExpDifference { .. } => "exp_difference",
            JumpKind::TwoSidedPareto { .. } => "two_sided_pareto",
            JumpKind::OneSidedParetoCentered { .. } => "one_sided_pareto_centered",
            JumpKind::Rademacher => "rademacher",
            JumpKind::SymmetricStable { .. } => "symmetric_stable",
            JumpKind::ServiceMinusShiftedArrival { .. } => "service_minus_shifted_arrival",
        }
    }

    fn has_zero_mean(&self) -> bool {
        match *self {
            JumpKind::ServiceMinusShiftedArrival { shift, .. } => shift == 0.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSpec {
    kind: JumpKind,
    centered: bool,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn tail_index(v: f64, allow_two: bool) -> Result<()> {
    let ok = if allow_two {
        v > 1.0 && v <= 2.0
    } else {
        v > 1.0 && v < 2.0
    };
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("alpha = {v} outside the admissible range")))
    }
}

impl JumpSpec {
    pub fn new(kind: JumpKind) -> Result<Self> {
        match kind {
            JumpKind::Gaussian { sigma } => positive("sigma", sigma)?,
            JumpKind::ExpDifference { beta } => positive("beta", beta)?,
            JumpKind::TwoSidedPareto { alpha, xmin } | JumpKind::OneSidedParetoCentered { alpha, xmin } => {
                tail_index(alpha, false)?;
                positive("xmin", xmin)?;
            }
            JumpKind::Rademacher => {}
            JumpKind::SymmetricStable { alpha, scale } => {
                tail_index(alpha, true)?;
                positive("scale", scale)?;
            }
            JumpKind::ServiceMinusShiftedArrival { beta, shift } => {
                positive("beta", beta)?;
                if !(shift >= 0.0 && shift.is_finite()) {
                    return Err(invalid(format!("shift must be >= 0, got {shift}")));
                }
            }
        }
        Ok(Self {
            kind,
            centered: kind.has_zero_mean(),
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(JumpKind::Gaussian { sigma })
    }
    pub fn exp_difference(beta: f64) -> Result<Self> {
        Self::new(JumpKind::ExpDifference { beta })
    }
    pub fn two_sided_pareto(alpha: f64, xmin: f64) -> Result<Self> {
        Self::new(JumpKind::TwoSidedPareto { alpha, xmin })
    }
    pub fn one_sided_pareto_centered(alpha: f64, xmin: f64) -> Result<Self> {
        Self::new(JumpKind::OneSidedParetoCentered { alpha, xmin })
    }
    pub fn rademacher() -> Self {
        Self {
            kind: JumpKind::Rademacher,
            centered: true,
        }
    }
    pub fn symmetric_stable(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(JumpKind::SymmetricStable { alpha, scale })
    }
    pub fn service_minus_shifted_arrival(beta: f64, shift: f64) -> Result<Self> {
        Self::new(JumpKind::ServiceMinusShiftedArrival { beta, shift })
    }

    pub fn kind(&self) -> JumpKind {
        self.kind
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Rejects non-centered specs; theorem suites call this at configuration time.
    pub fn require_centered(&self) -> Result<()> {
        if self.centered {
            Ok(())
        } else {
            Err(Error::NotCentered)
        }
    }

    /// Stability index of the domain of attraction.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            JumpKind::TwoSidedPareto { alpha, .. }
            | JumpKind::OneSidedParetoCentered { alpha, .. }
            | JumpKind::SymmetricStable { alpha, .. } => alpha,
            _ => 2.0,
        }
    }

    /// Jump direction of the limit stable process.
    pub fn limit_skew(&self) -> Skew {
        match self.kind {
            JumpKind::OneSidedParetoCentered { .. } => Skew::SpectrallyPositive,
            _ => Skew::Symmetric,
        }
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            JumpKind::ServiceMinusShiftedArrival { shift, .. } => -shift,
            _ => 0.0,
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match self.kind {
            JumpKind::Gaussian { sigma } => Some(sigma * sigma),
            JumpKind::ExpDifference { beta } | JumpKind::ServiceMinusShiftedArrival { beta, .. } => {
                Some(2.0 / (beta * beta))
            }
            JumpKind::Rademacher => Some(1.0),
            JumpKind::SymmetricStable { alpha: 2.0, scale } => Some(2.0 * scale * scale),
            _ => None,
        }
    }

    /// Whether `V` is piecewise smooth without atoms (so `c_n` solves `nV(c)/c^2 = 1` exactly).
    pub fn has_continuous_v(&self) -> bool {
        !matches!(self.kind, JumpKind::Rademacher)
    }

    /// `inf` of the support of `|X|`.
    pub fn min_abs_support(&self) -> f64 {
        match self.kind {
            JumpKind::Rademacher => 1.0,
            JumpKind::TwoSidedPareto { xmin, .. } => xmin,
            _ => 0.0,
        }
    }

    /// An a-priori upper bound on a single jump, if the law has one.
    pub fn upper_jump_bound(&self) -> Option<f64> {
        match self.kind {
            JumpKind::Rademacher => Some(1.0),
            _ => None,
        }
    }

    /// A length scale for bracketing searches.
    pub fn natural_scale(&self) -> f64 {
        match self.kind {
            JumpKind::Gaussian { sigma } => sigma,
            JumpKind::ExpDifference { beta } | JumpKind::ServiceMinusShiftedArrival { beta, .. } => 1.0 / beta,
            JumpKind::TwoSidedPareto { xmin, .. } | JumpKind::OneSidedParetoCentered { xmin, .. } => xmin,
            JumpKind::Rademacher => 1.0,
            JumpKind::SymmetricStable { scale, .. } => scale,
        }
    }

    pub fn sampler(&self) -> JumpSampler {
        match self.kind {
            JumpKind::Gaussian { sigma } => JumpSampler::Gaussian { sigma },
            JumpKind::ExpDifference { beta } => JumpSampler::Laplace {
                inv_beta: 1.0 / beta,
                shift: 0.0,
            },
            JumpKind::ServiceMinusShiftedArrival { beta, shift } => JumpSampler::Laplace {
                inv_beta: 1.0 / beta,
                shift,
            },
            JumpKind::TwoSidedPareto { alpha, xmin } => JumpSampler::TwoSidedPareto {
                neg_inv_alpha: -1.0 / alpha,
                xmin,
            },
            JumpKind::OneSidedParetoCentered { alpha, xmin } => JumpSampler::CenteredPareto {
                neg_inv_alpha: -1.0 / alpha,
                xmin,
                mean: alpha * xmin / (alpha - 1.0),
            },
            JumpKind::Rademacher => JumpSampler::Rademacher,
            JumpKind::SymmetricStable { alpha, scale } => {
                JumpSampler::Stable(StableLaw::new(alpha, 0.0, scale).expect("validated at construction"))
            }
        }
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().draw(rng)
    }

    /// `V(x) = E(X^2; |X| <= x)`.
    pub fn truncated_second_moment(&self, x: f64) -> Result<f64> {
        check_level(x)?;
        Ok(match self.kind {
            JumpKind::Gaussian { sigma } => gaussian_v(sigma, x),
            JumpKind::ExpDifference { beta } => {
                let t = beta * x;
                2.0 / (beta * beta) * (-(-t).exp_m1() - (-t).exp() * (t + 0.5 * t * t))
            }
            JumpKind::TwoSidedPareto { alpha, xmin } => {
                if x < xmin {
                    0.0
                } else {
                    alpha * xmin.powf(alpha) * (x.powf(2.0 - alpha) - xmin.powf(2.0 - alpha)) / (2.0 - alpha)
                }
            }
            JumpKind::OneSidedParetoCentered { alpha, xmin } => {
                let p = CenteredPareto::new(alpha, xmin);
                p.second_moment(x)
            }
            JumpKind::Rademacher => {
                if x >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            JumpKind::SymmetricStable { alpha, scale } => {
                if alpha == 2.0 {
                    gaussian_v(SQRT_2 * scale, x)
                } else {
                    stable_v(alpha, scale, x).map_err(|err| self.quad_error(x, err))?
                }
            }
            JumpKind::ServiceMinusShiftedArrival { beta, shift } => {
                let f = |y: f64| y * y * laplace_density(beta, y + shift);
                let est = integrate_split(&f, -x, x, -shift);
                if !est.converged {
                    return Err(self.quad_error(x, est.error));
                }
                est.value
            }
        })
    }

    /// `P(|X| > x)`.
    pub fn tail_probability(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(invalid(format!("level must be >= 0, got {x}")));
        }
        Ok(match self.kind {
            JumpKind::Gaussian { sigma } => erfc(x / sigma * FRAC_1_SQRT_2),
            JumpKind::ExpDifference { beta } => (-beta * x).exp(),
            JumpKind::TwoSidedPareto { alpha, xmin } => {
                if x < xmin {
                    1.0
                } else {
                    (xmin / x).powf(alpha)
                }
            }
            JumpKind::OneSidedParetoCentered { alpha, xmin } => CenteredPareto::new(alpha, xmin).tail(x),
            JumpKind::Rademacher => {
                if x < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            JumpKind::SymmetricStable { alpha, scale } => {
                if alpha == 2.0 {
                    erfc(x / (SQRT_2 * scale) * FRAC_1_SQRT_2)
                } else {
                    stable_tail(alpha, scale, x).map_err(|err| self.quad_error(x, err))?
                }
            }
            JumpKind::ServiceMinusShiftedArrival { beta, shift } => {
                let upper = shift + x;
                let lower = shift - x;
                laplace_sf(beta, upper) + laplace_cdf(beta, lower)
            }
        })
    }

    /// `|E(X; |X| <= x)|`; for centered laws this equals `|E(X; |X| > x)|`.
    pub fn truncated_mean_abs(&self, x: f64) -> Result<f64> {
        check_level(x)?;
        self.require_centered()?;
        Ok(match self.kind {
            JumpKind::OneSidedParetoCentered { alpha, xmin } => {
                CenteredPareto::new(alpha, xmin).truncated_mean(x).abs()
            }
            _ => 0.0,
        })
    }

    fn quad_error(&self, x: f64, err: f64) -> Error {
        Error::Quadrature {
            what: format!("{:?}", self.kind),
            x,
            err,
        }
    }

    /// Flat `key = value` pairs; `kind` first.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut out = vec![("kind".to_string(), self.kind.name().to_string())];
        let mut put = |k: &str, v: f64| out.push((k.to_string(), format!("{v}")));
        match self.kind {
            JumpKind::Gaussian { sigma } => put("sigma", sigma),
            JumpKind::ExpDifference { beta } => put("beta", beta),
            JumpKind::TwoSidedPareto { alpha, xmin } | JumpKind::OneSidedParetoCentered { alpha, xmin } => {
                put("alpha", alpha);
                put("xmin", xmin);
            }
            JumpKind::Rademacher => {}
            JumpKind::SymmetricStable { alpha, scale } => {
                put("alpha", alpha);
                put("scale", scale);
            }
            JumpKind::ServiceMinusShiftedArrival { beta, shift } => {
                put("beta", beta);
                put("shift", shift);
            }
        }
        out.push(("centered".to_string(), self.centered.to_string()));
        out
    }

    /// Parses the pairs produced by [`JumpSpec::to_kv`]. Unknown keys are rejected.
    pub fn from_kv<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for (k, v) in pairs {
            if map
                .insert(k.as_ref().trim().to_string(), v.as_ref().trim().to_string())
                .is_some()
            {
                return Err(invalid(format!("duplicate spec key '{}'", k.as_ref())));
            }
        }
        let kind_name = map
            .remove("kind")
            .ok_or_else(|| invalid("spec block needs a 'kind' key"))?;
        let centered = map.remove("centered");
        let mut num = |key: &str| -> Result<f64> {
            let raw = map
                .remove(key)
                .ok_or_else(|| invalid(format!("spec '{kind_name}' needs '{key}'")))?;
            raw.parse::<f64>()
                .map_err(|_| invalid(format!("spec key '{key}': cannot parse '{raw}'")))
        };
        let kind = match kind_name.as_str() {
            "gaussian" => JumpKind::Gaussian { sigma: num("sigma")? },
            "exp_difference" => JumpKind::ExpDifference { beta: num("beta")? },
            "two_sided_pareto" => JumpKind::TwoSidedPareto {
                alpha: num("alpha")?,
                xmin: num("xmin")?,
            },
            "one_sided_pareto_centered" => JumpKind::OneSidedParetoCentered {
                alpha: num("alpha")?,
                xmin: num("xmin")?,
            },
            "rademacher" => JumpKind::Rademacher,
            "symmetric_stable" => JumpKind::SymmetricStable {
                alpha: num("alpha")?,
                scale: num("scale")?,
            },
            "service_minus_shifted_arrival" => JumpKind::ServiceMinusShiftedArrival {
                beta: num("beta")?,
                shift: num("shift")?,
            },
            other => return Err(invalid(format!("unknown jump kind '{other}'"))),
        };
        if let Some(extra) = map.keys().next() {
            return Err(invalid(format!("unknown spec key '{extra}'")));
        }
        let spec = Self::new(kind)?;
        if let Some(flag) = centered {
            let flag: bool = flag
                .parse()
                .map_err(|_| invalid(format!("centered must be true/false, got '{flag}'")))?;
            if flag != spec.centered {
                return Err(invalid(format!(
                    "centered = {flag} contradicts the mean of '{kind_name}'"
                )));
            }
        }
        Ok(spec)
    }
}

fn check_level(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(invalid(format!("truncation level must be positive, got {x}")))
    }
}

fn gaussian_v(sigma: f64, x: f64) -> f64 {
    let t = x / sigma;
    let phi = (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    sigma * sigma * (erf(t * FRAC_1_SQRT_2) - 2.0 * t * phi).max(0.0)
}

fn laplace_density(beta: f64, y: f64) -> f64 {
    0.5 * beta * (-beta * y.abs()).exp()
}

fn laplace_sf(beta: f64, u: f64) -> f64 {
    if u >= 0.0 {
        0.5 * (-beta * u).exp()
    } else {
        1.0 - 0.5 * (beta * u).exp()
    }
}

fn laplace_cdf(beta: f64, w: f64) -> f64 {
    1.0 - laplace_sf(beta, w)
}

fn integrate_split<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, kink: f64) -> quad::Estimate {
    let tol = Tolerance::default();
    if kink > lo && kink < hi {
        let a = quad::integrate(f, lo, kink, tol);
        let b = quad::integrate(f, kink, hi, tol);
        quad::Estimate {
            value: a.value + b.value,
            error: a.error + b.error,
            converged: a.converged && b.converged,
        }
    } else {
        quad::integrate(f, lo, hi, tol)
    }
}

/// `P - m` with `P ~ Pareto(alpha, xmin)` and `m = E P`.
#[derive(Debug, Clone, Copy)]
struct CenteredPareto {
    alpha: f64,
    xmin: f64,
    mean: f64,
    norm: f64,
}

impl CenteredPareto {
    fn new(alpha: f64, xmin: f64) -> Self {
        Self {
            alpha,
            xmin,
            mean: alpha * xmin / (alpha - 1.0),
            norm: alpha * xmin.powf(alpha),
        }
    }

    /// Range of `P` on the event `|P - m| <= x`.
    fn window(&self, x: f64) -> Option<(f64, f64)> {
        let lo = self.xmin.max(self.mean - x);
        let hi = self.mean + x;
        (hi > lo).then_some((lo, hi))
    }

    fn second_moment(&self, x: f64) -> f64 {
        let (a, m) = (self.alpha, self.mean);
        // antiderivative of (p - m)^2 p^(-a-1)
        let prim =
            |p: f64| p.powf(2.0 - a) / (2.0 - a) - 2.0 * m * p.powf(1.0 - a) / (1.0 - a) - m * m * p.powf(-a) / a;
        match self.window(x) {
            // the primitive cancels catastrophically on short windows
            Some((lo, hi)) if hi - lo < 0.25 * m => {
                let f = |p: f64| (p - m) * (p - m) * p.powf(-a - 1.0);
                self.norm * crate::quad::integrate(f, lo, hi, crate::quad::Tolerance::default()).value
            }
            Some((lo, hi)) => (self.norm * (prim(hi) - prim(lo))).max(0.0),
            None => 0.0,
        }
    }

    fn truncated_mean(&self, x: f64) -> f64 {
        let (a, m) = (self.alpha, self.mean);
        // antiderivative of (p - m) p^(-a-1)
        let prim = |p: f64| p.powf(1.0 - a) / (1.0 - a) + m * p.powf(-a) / a;
        match self.window(x) {
            Some((lo, hi)) => self.norm * (prim(hi) - prim(lo)),
            None => 0.0,
        }
    }

    fn tail(&self, x: f64) -> f64 {
        let upper = (self.xmin / (self.mean + x)).powf(self.alpha);
        let lower = if self.mean - x > self.xmin {
            1.0 - (self.xmin / (self.mean - x)).powf(self.alpha)
        } else {
            0.0
        };
        upper + lower
    }
}

// Symmetric stable, alpha < 2: Fourier quadrature below `STABLE_SWITCH * scale`,
// the large-|x| density expansion above it.
const STABLE_SWITCH: f64 = 20.0;
const STABLE_TERMS: usize = 12;

fn stable_cutoff(alpha: f64, scale: f64) -> f64 {
    45f64.powf(1.0 / alpha) / scale
}

fn stable_quad(alpha: f64, scale: f64, integrand: impl Fn(f64) -> f64) -> std::result::Result<f64, f64> {
    let phi = |theta: f64| (-(scale * theta).powf(alpha)).exp();
    let est = quad::integrate(
        |theta| phi(theta) * integrand(theta),
        0.0,
        stable_cutoff(alpha, scale),
        Tolerance {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 20_000,
        },
    );
    if est.converged {
        Ok(est.value)
    } else {
        Err(est.error)
    }
}

/// Coefficients `b_k` of the expansion `f(x) ~ sum_k b_k x^(-alpha k - 1)`.
fn stable_expansion(alpha: f64, scale: f64) -> Vec<(f64, f64)> {
    (1..=STABLE_TERMS)
        .map(|k| {
            let k = k as f64;
            let sign = if (k as usize) % 2 == 1 { 1.0 } else { -1.0 };
            let b = sign * gamma(alpha * k + 1.0) * (k * PI * alpha / 2.0).sin() * scale.powf(alpha * k)
                / (PI * gamma(k + 1.0));
            (alpha * k, b)
        })
        .collect()
}

/// `int_0^x t^2 cos(theta t) dt`.
fn moment_kernel(theta: f64, x: f64) -> f64 {
    let z = theta * x;
    if z < 1.0 {
        let mut term = x * x * x / 3.0;
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -z * z / ((2.0 * k - 1.0) * (2.0 * k)) * (2.0 * k + 1.0) / (2.0 * k + 3.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break sum;
            }
        }
    } else {
        let (s, c) = z.sin_cos();
        x * x * s / theta + 2.0 * x * c / (theta * theta) - 2.0 * s / (theta * theta * theta)
    }
}

fn stable_v(alpha: f64, scale: f64, x: f64) -> std::result::Result<f64, f64> {
    let switch = STABLE_SWITCH * scale;
    let near = x.min(switch);
    let mut v = stable_quad(alpha, scale, |theta| 2.0 * moment_kernel(theta, near))? / PI;
    if x > switch {
        for (p, b) in stable_expansion(alpha, scale) {
            // 2 * int t^2 b t^(-p-1) dt
            v += 2.0 * b * (x.powf(2.0 - p) - switch.powf(2.0 - p)) / (2.0 - p);
        }
    }
    Ok(v.max(0.0))
}

fn stable_tail(alpha: f64, scale: f64, x: f64) -> std::result::Result<f64, f64> {
    if x > STABLE_SWITCH * scale {
        let tail: f64 = stable_expansion(alpha, scale)
            .into_iter()
            .map(|(p, b)| 2.0 * b * x.powf(-p) / p)
            .sum();
        return Ok(tail.clamp(0.0, 1.0));
    }
    let inside = stable_quad(
        alpha,
        scale,
        |theta| {
            if theta == 0.0 {
                x
            } else {
                (theta * x).sin() / theta
            }
        },
    )? * 2.0
        / PI;
    Ok((1.0 - inside).clamp(0.0, 1.0))
}

/// Precomputed per-spec draw routine for hot loops.
#[derive(Debug, Clone, Copy)]
pub enum JumpSampler {
    Gaussian { sigma: f64 },
    Laplace { inv_beta: f64, shift: f64 },
    TwoSidedPareto { neg_inv_alpha: f64, xmin: f64 },
    CenteredPareto { neg_inv_alpha: f64, xmin: f64, mean: f64 },
    Rademacher,
    Stable(StableLaw),
}

/// Uniform on (0, 1] from the top 53 bits, plus the lowest bit as a sign.
#[inline]
fn open_unit_and_sign(bits: u64) -> (f64, f64) {
    let u = ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let sign = if bits & 1 == 0 { 1.0 } else { -1.0 };
    (u, sign)
}

impl JumpSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpSampler::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            JumpSampler::Laplace { inv_beta, shift } => {
                // U - V for iid exponentials is a symmetric exponential
                let (u, sign) = open_unit_and_sign(rng.random());
                -sign * u.ln() * inv_beta - shift
            }
            JumpSampler::TwoSidedPareto { neg_inv_alpha, xmin } => {
                let (u, sign) = open_unit_and_sign(rng.random());
                sign * xmin * u.powf(neg_inv_alpha)
            }
            JumpSampler::CenteredPareto {
                neg_inv_alpha,
                xmin,
                mean,
            } => {
                let (u, _) = open_unit_and_sign(rng.random());
                xmin * u.powf(neg_inv_alpha) - mean
            }
            JumpSampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            JumpSampler::Stable(law) => law.sample(rng),
        }
    }
}
