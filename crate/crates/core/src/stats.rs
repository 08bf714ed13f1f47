//! Empirical distributions, Kolmogorov-Smirnov distances and small fitting
//! helpers shared by the verification suites.

use crate::error::{invalid, Error, Result};

/// A distribution function. Laws with atoms override `cdf_left` so that
/// KS distances see both sides of every jump.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

impl<F: Fn(f64) -> f64> Cdf for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    provenance: String,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("empirical distribution needs at least one sample"));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("NaN sample"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self {
            samples,
            provenance: provenance.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Number of samples `<= x`.
    fn count_le(&self, x: f64) -> usize {
        self.samples.partition_point(|&s| s <= x)
    }

    fn count_lt(&self, x: f64) -> usize {
        self.samples.partition_point(|&s| s < x)
    }

    /// Fraction of samples `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    pub fn ecdf_left(&self, x: f64) -> f64 {
        self.count_lt(x) as f64 / self.len() as f64
    }

    /// Lower empirical quantile: the smallest sample with ECDF >= q.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.len();
        let idx = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[idx]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Distinct sample values with their counts, ascending.
    fn distinct(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.samples.len() {
                return None;
            }
            let x = self.samples[i];
            let start = i;
            while i < self.samples.len() && self.samples[i] == x {
                i += 1;
            }
            Some((x, i - start))
        })
    }

    /// ECDF evaluated on a grid, as `(x, F_n(x))` rows.
    pub fn ecdf_grid(&self, grid: &[f64]) -> Vec<(f64, f64)> {
        grid.iter().map(|&x| (x, self.ecdf(x))).collect()
    }
}

/// Fraction of samples `<= x`.
pub fn ecdf_eval(d: &EmpiricalDistribution, x: f64) -> f64 {
    d.ecdf(x)
}

/// Sup-distance between the ECDF of `d` and `law`, evaluated on both sides
/// of every sample point.
pub fn ks_distance<L: Cdf + ?Sized>(d: &EmpiricalDistribution, law: &L) -> f64 {
    let n = d.len() as f64;
    let mut below = 0usize;
    let mut worst = 0.0f64;
    for (x, count) in d.distinct() {
        let left = below as f64 / n;
        below += count;
        let right = below as f64 / n;
        worst = worst
            .max((right - law.cdf(x)).abs())
            .max((left - law.cdf_left(x)).abs());
    }
    worst
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (xa, xb) = (a.samples(), b.samples());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = 0.0f64;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => break,
        };
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// Dvoretzky-Kiefer-Wolfowitz half-width `sqrt(ln(2/delta) / (2n))`.
pub fn dkw_epsilon(n: u64, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("DKW band needs n >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("DKW confidence delta must lie in (0,1), got {delta}")));
    }
    Ok(((2.0 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Mean of `exp(-mu * X)` and its standard error.
pub fn empirical_laplace(d: &EmpiricalDistribution, mu: f64) -> (f64, f64) {
    let n = d.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for &x in d.samples() {
        let y = (-mu * x).exp();
        s += y;
        s2 += y * y;
    }
    let mean = s / n;
    if d.len() < 2 {
        return (mean, 0.0);
    }
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            got: points.len(),
            need: 2,
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(invalid("all abscissae coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept, r2 })
}

/// Least-squares fit of `ln y` against `ln x`; every coordinate must be positive.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<LineFit> {
    let logs = points
        .iter()
        .map(|&(x, y)| {
            if x > 0.0 && y > 0.0 {
                Ok((x.ln(), y.ln()))
            } else {
                Err(invalid(format!("log-log fit needs positive data, got ({x}, {y})")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    linear_fit(&logs)
}

/// Binomial standard error of a proportion.
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(xs: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(xs.to_vec(), "test").unwrap()
    }

    #[test]
    fn ecdf_basics() {
        let d = dist(&[3.0, 1.0, 2.0]);
        assert_eq!(ecdf_eval(&d, 0.5), 0.0);
        assert_eq!(ecdf_eval(&d, 3.0), 1.0);
        assert_eq!(ecdf_eval(&d, 7.0), 1.0);
        assert!((ecdf_eval(&d, 2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_accumulate() {
        let d = dist(&[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(d.ecdf(1.0), 0.5);
        assert_eq!(d.ecdf_left(1.0), 0.0);
        assert_eq!(d.ecdf(1.5), 0.5);
    }

    #[test]
    fn ks_against_own_ecdf_is_zero() {
        let d = dist(&[0.3, 1.2, 1.2, 5.0]);
        struct Own<'a>(&'a EmpiricalDistribution);
        impl Cdf for Own<'_> {
            fn cdf(&self, x: f64) -> f64 {
                self.0.ecdf(x)
            }
            fn cdf_left(&self, x: f64) -> f64 {
                self.0.ecdf_left(x)
            }
        }
        assert_eq!(ks_distance(&d, &Own(&d)), 0.0);
    }

    #[test]
    fn ks_point_mass_at_zero_against_exponential() {
        let d = dist(&[0.0; 10]);
        let exp2 = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-2.0 * x).exp() };
        assert!((ks_distance(&d, &exp2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_of_exact_draws_within_dkw() {
        use rand::Rng;
        let mut rng = crate::rng::trial_rng(11, crate::rng::domain::SAMPLER_TEST, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.random::<f64>()).ln() / 2.0).collect();
        let d = EmpiricalDistribution::new(xs, "exp2").unwrap();
        let exp2 = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-2.0 * x).exp() };
        let eps = dkw_epsilon(100_000, 0.01).unwrap();
        assert!(ks_distance(&d, &exp2) <= eps);
    }

    #[test]
    fn dkw_values() {
        let eps = dkw_epsilon(100_000, 0.01).unwrap();
        assert!((eps - 0.005_146_6).abs() < 5e-6, "{eps}");
        assert!(dkw_epsilon(1000, 0.01).unwrap() > dkw_epsilon(2000, 0.01).unwrap());
        assert!(dkw_epsilon(10, 2.0).is_err());
        assert!(dkw_epsilon(0, 0.1).is_err());
    }

    #[test]
    fn laplace_cases() {
        let d = dist(&[0.5, 2.0, 3.0]);
        assert_eq!(empirical_laplace(&d, 0.0), (1.0, 0.0));
        let (m, se) = empirical_laplace(&dist(&[1.0, 1.0]), 1.0);
        assert!((m - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn exponential_laplace_transform() {
        use rand::Rng;
        let mut rng = crate::rng::trial_rng(5, crate::rng::domain::SAMPLER_TEST, 1);
        let xs: Vec<f64> = (0..50_000).map(|_| -(1.0 - rng.random::<f64>()).ln() / 2.0).collect();
        let d = EmpiricalDistribution::new(xs, "exp2").unwrap();
        let (m, se) = empirical_laplace(&d, 2.0);
        assert!((m - 0.5).abs() <= 3.0 * se, "{m} {se}");
    }

    #[test]
    fn loglog_cases() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 10.0].iter().map(|&x: &f64| (x, x.powf(-1.5))).collect();
        let fit = loglog_slope(&pts).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let flat = loglog_slope(&[(1.0, 3.0), (2.0, 3.0), (4.0, 3.0)]).unwrap();
        assert!(flat.slope.abs() < 1e-15);
        let two = loglog_slope(&[(1.0, 1.0), (std::f64::consts::E, std::f64::consts::E.powi(2))]).unwrap();
        assert!((two.slope - 2.0).abs() < 1e-12 && two.intercept.abs() < 1e-12);
        assert!(loglog_slope(&[(1.0, 0.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn two_sample_ks() {
        let a = dist(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b = dist(&[5.0, 6.0]);
        assert_eq!(ks_two_sample(&a, &b), 1.0);
    }

    proptest! {
        #[test]
        fn ecdf_is_monotone_step_with_unit_mass(xs in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            let d = EmpiricalDistribution::new(xs.clone(), "p").unwrap();
            let lo = d.samples()[0] - 1.0;
            let hi = d.samples()[d.len() - 1];
            prop_assert_eq!(d.ecdf(lo), 0.0);
            prop_assert_eq!(d.ecdf(hi), 1.0);
            let mut prev = 0.0;
            for &x in d.samples() {
                let f = d.ecdf(x);
                prop_assert!(f >= prev);
                prop_assert!(d.ecdf_left(x) <= f);
                prev = f;
            }
        }

        #[test]
        fn ks_invariant_under_increasing_maps(xs in prop::collection::vec(0.0f64..5.0, 1..200)) {
            let law = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() };
            let d = EmpiricalDistribution::new(xs.clone(), "p").unwrap();
            // y = x^3 + x is strictly increasing; push the law forward through it
            let g = |x: f64| x * x * x + x;
            let mapped = EmpiricalDistribution::new(xs.iter().map(|&x| g(x)).collect(), "q").unwrap();
            let pushed = |y: f64| {
                // invert g by bisection
                let (mut lo, mut hi) = (-10.0f64, 10.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) < y { lo = mid } else { hi = mid }
                }
                law(0.5 * (lo + hi))
            };
            prop_assert!((ks_distance(&d, &law) - ks_distance(&mapped, &pushed)).abs() < 1e-9);
        }
    }
}
