//! Strictly stable variates via the Chambers-Mallows-Stuck transform, and
//! the stable law that arises as the limit of `S_n / c_n` when `c_n` is
//! built from the truncated second moment.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::gamma::gamma;
use std::f64::consts::{FRAC_PI_2, PI};

/// Direction of the jumps of the limit process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Skew {
    Symmetric,
    SpectrallyPositive,
    SpectrallyNegative,
}

impl Skew {
    pub fn beta(self) -> f64 {
        match self {
            Skew::Symmetric => 0.0,
            Skew::SpectrallyPositive => 1.0,
            Skew::SpectrallyNegative => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Skew::Symmetric => "symmetric",
            Skew::SpectrallyPositive => "spectrally-positive",
            Skew::SpectrallyNegative => "spectrally-negative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "symmetric" => Some(Skew::Symmetric),
            "spectrally-positive" | "positive" => Some(Skew::SpectrallyPositive),
            "spectrally-negative" | "negative" => Some(Skew::SpectrallyNegative),
            _ => None,
        }
    }
}

/// Stable law with characteristic exponent
/// `-|scale * t|^alpha * (1 - i*beta*sign(t)*tan(pi*alpha/2))`, `alpha in (1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLaw {
    alpha: f64,
    beta: f64,
    scale: f64,
    // CMS constants
    shift: f64,
    factor: f64,
}

impl StableLaw {
    pub fn new(alpha: f64, beta: f64, scale: f64) -> crate::Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(crate::error::invalid(format!(
                "stable index must lie in (1,2], got {alpha}"
            )));
        }
        if !(-1.0..=1.0).contains(&beta) || !(scale > 0.0 && scale.is_finite()) {
            return Err(crate::error::invalid(format!(
                "bad stable parameters beta = {beta}, scale = {scale}"
            )));
        }
        let (shift, factor) = if alpha == 2.0 {
            (0.0, 1.0)
        } else {
            let zeta = beta * (PI * alpha / 2.0).tan();
            (zeta.atan() / alpha, (1.0 + zeta * zeta).powf(0.5 / alpha))
        };
        Ok(Self {
            alpha,
            beta,
            scale,
            shift,
            factor,
        })
    }

    /// The law of `xi_1` for the limit Levy process when partial sums are
    /// scaled by `c_n = sup{u : V(u)/u^2 > 1/n}`: the Levy measure then has
    /// total density `(2 - alpha)|x|^(-1-alpha)`, split by `skew`.
    pub fn v_normalized(alpha: f64, skew: Skew) -> crate::Result<Self> {
        Self::new(alpha, skew.beta(), v_normalized_scale(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = Exp1.sample(rng);
        if self.alpha == 2.0 {
            return self.scale * 2.0 * v.sin() * w.sqrt();
        }
        let a = self.alpha;
        let arg = a * (v + self.shift);
        let x = self.factor * arg.sin() / v.cos().powf(1.0 / a) * ((v - arg).cos() / w).powf((1.0 - a) / a);
        self.scale * x
    }
}

/// Scale of the V-normalised limit, `((2-alpha) |Gamma(-alpha) cos(pi alpha/2)|)^(1/alpha)`;
/// tends to `1/sqrt(2)` (standard Brownian motion) as `alpha -> 2`.
pub fn v_normalized_scale(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        return std::f64::consts::FRAC_1_SQRT_2;
    }
    let k = (2.0 - alpha) * (gamma(-alpha) * (FRAC_PI_2 * alpha).cos()).abs();
    k.powf(1.0 / alpha)
}

/// Laplace exponent constant `kappa` with `E exp(-lambda xi_1) = exp(kappa lambda^alpha)`
/// for the spectrally positive V-normalised limit; `1/2` at `alpha = 2`.
pub fn spectrally_positive_laplace_constant(alpha: f64) -> f64 {
    if alpha >= 2.0 {
        return 0.5;
    }
    (2.0 - alpha) * gamma(-alpha)
}
