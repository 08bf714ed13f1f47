//! The Spitzer series `-log E exp(-lambda M) = sum_k k^(-1) E(1 - exp(-lambda S_k^(a)); S_k^(a) > 0)`
//! evaluated by path-sharing Monte Carlo, split at `eps n(a)` and `T n(a)`.

use crate::error::{invalid, Result};
use crate::jumps::JumpSpec;
use crate::normalize::{c_of_n, n_of_a};
use crate::rng::{check_budget, domain, map_chunks, trial_rng, DEFAULT_STEP_BUDGET};
use crate::stable::StableLaw;
use crate::stats::{empirical_laplace, EmpiricalDistribution};
use crate::walksim::{simulate_max_batch, truncation_certificate, Horizon, PathDriver, WalkConfig};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct SpitzerConfig {
    pub spec: JumpSpec,
    pub a: f64,
    pub mu_grid: Vec<f64>,
    pub eps: f64,
    pub t: f64,
    pub trials: u64,
    pub seed: u64,
    pub step_budget: u128,
}

impl SpitzerConfig {
    pub fn new(spec: JumpSpec, a: f64, mu_grid: Vec<f64>, eps: f64, t: f64, trials: u64, seed: u64) -> Self {
        Self {
            spec,
            a,
            mu_grid,
            eps,
            t,
            trials,
            seed,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.require_centered()?;
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(invalid(format!("drift must be positive, got {}", self.a)));
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(invalid("mu grid must be nonempty and nonnegative"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0 && self.t > 1.0 && self.t.is_finite()) {
            return Err(invalid(format!(
                "need 0 < eps < 1 < T, got eps = {}, T = {}",
                self.eps, self.t
            )));
        }
        if self.trials < 2 {
            return Err(invalid("need at least two trials"));
        }
        Ok(())
    }

    fn walk(&self) -> WalkConfig {
        WalkConfig::new(self.spec, self.a, self.t, self.trials, self.seed).with_budget(self.step_budget)
    }
}

/// Term estimates for one `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuTerms {
    pub mu: f64,
    /// `t_k` for `k = 1..=K` at index `k - 1`.
    pub terms: Vec<f64>,
    /// Per-term standard errors.
    pub term_stderr: Vec<f64>,
    /// Path-level second moment of the partial sum through `k`.
    prefix_sq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpitzerResult {
    pub n_a: u64,
    pub c_n: f64,
    pub k_max: u64,
    pub eps: f64,
    pub t: f64,
    pub a: f64,
    pub trials: u64,
    pub per_mu: Vec<MuTerms>,
    /// `P(S_k^(a) > 0)` by `k`.
    pub positive_prob: Vec<f64>,
    /// `E(S_k^(a); S_k^(a) > 0)` by `k`.
    pub positive_mean: Vec<f64>,
    pub sigma3_bound: f64,
}

impl SpitzerResult {
    fn cut(&self, eps: f64) -> usize {
        ((eps * self.n_a as f64).floor() as usize).min(self.k_max as usize)
    }

    fn partial(&self, mu_index: usize, m: usize) -> (f64, f64) {
        let terms = &self.per_mu[mu_index];
        if m == 0 {
            return (0.0, 0.0);
        }
        let mean: f64 = terms.terms[..m].iter().sum();
        let n = self.trials as f64;
        let var = (terms.prefix_sq[m - 1] - mean * mean).max(0.0) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    /// `sum_{k <= eps n(a)} t_k` and its standard error, for any `eps`.
    pub fn sigma1(&self, mu_index: usize, eps: f64) -> (f64, f64) {
        self.partial(mu_index, self.cut(eps))
    }

    /// `sum_{k <= K} t_k` and its standard error.
    pub fn total(&self, mu_index: usize) -> (f64, f64) {
        self.partial(mu_index, self.k_max as usize)
    }

    /// `exp(-sum_{k<=K} t_k)` with a delta-method standard error.
    pub fn laplace(&self, mu_index: usize) -> (f64, f64) {
        let (s, se) = self.total(mu_index);
        let e = (-s).exp();
        (e, e * se)
    }
}

struct Accum {
    terms: Vec<Vec<f64>>,
    terms_sq: Vec<Vec<f64>>,
    prefix_sq: Vec<Vec<f64>>,
    pos_count: Vec<u64>,
    pos_sum: Vec<f64>,
}

impl Accum {
    fn new(mus: usize, k: usize) -> Self {
        Self {
            terms: vec![vec![0.0; k]; mus],
            terms_sq: vec![vec![0.0; k]; mus],
            prefix_sq: vec![vec![0.0; k]; mus],
            pos_count: vec![0; k],
            pos_sum: vec![0.0; k],
        }
    }

    fn merge(&mut self, other: Accum) {
        let add = |a: &mut Vec<f64>, b: Vec<f64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        for (i, (t, (t2, p2))) in other
            .terms
            .into_iter()
            .zip(other.terms_sq.into_iter().zip(other.prefix_sq))
            .enumerate()
        {
            add(&mut self.terms[i], t);
            add(&mut self.terms_sq[i], t2);
            add(&mut self.prefix_sq[i], p2);
        }
        self.pos_count
            .iter_mut()
            .zip(other.pos_count)
            .for_each(|(x, y)| *x += y);
        add(&mut self.pos_sum, other.pos_sum);
    }
}

/// `sum_{k > K} V(ka)/(ka)^2` by comparison with `int_K^inf V(ka)/(ka)^2 dk`.
pub fn sigma3_bound(spec: &JumpSpec, a: f64, k: u64) -> Result<f64> {
    let ka = k as f64 * a;
    // substitute y = ka / s
    let f = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        spec.truncated_second_moment(ka / s).unwrap_or(f64::NAN)
    };
    let est = crate::quad::integrate(
        f,
        0.0,
        1.0,
        crate::quad::Tolerance {
            abs: 1e-14,
            rel: 1e-9,
            max_intervals: 2000,
        },
    );
    if !est.value.is_finite() {
        // surface the underlying error
        spec.truncated_second_moment(ka)?;
        return Err(invalid("V evaluation failed inside the tail integral"));
    }
    Ok(est.value / (k as f64 * a * a))
}

/// Single-pass estimate of every term `t_k`, `k <= ceil(T n(a))`, for every `mu`.
pub fn estimate_terms(cfg: &SpitzerConfig) -> Result<SpitzerResult> {
    cfg.validate()?;
    let walk = cfg.walk();
    let n_a = n_of_a(&cfg.spec, cfg.a)?;
    let c_n = c_of_n(&cfg.spec, n_a)?;
    let k_max = walk.horizon_steps(Some(n_a))?;
    check_budget(k_max, cfg.trials, cfg.step_budget)?;
    let k = k_max as usize;
    let lambdas: Vec<f64> = cfg.mu_grid.iter().map(|m| m / c_n).collect();
    let driver = PathDriver::new(&walk);
    let parts = map_chunks(cfg.trials, |range| {
        let mut acc = Accum::new(lambdas.len(), k);
        let mut prefix = vec![0.0; lambdas.len()];
        for trial in range {
            prefix.iter_mut().for_each(|p| *p = 0.0);
            driver.run(trial, k_max, |step, s| {
                let i = (step - 1) as usize;
                if s > 0.0 {
                    acc.pos_count[i] += 1;
                    acc.pos_sum[i] += s;
                    let inv_k = 1.0 / step as f64;
                    for (m, &lam) in lambdas.iter().enumerate() {
                        let x = -(-lam * s).exp_m1() * inv_k;
                        acc.terms[m][i] += x;
                        acc.terms_sq[m][i] += x * x;
                        prefix[m] += x;
                    }
                }
                for (m, p) in prefix.iter().enumerate() {
                    acc.prefix_sq[m][i] += p * p;
                }
            });
        }
        acc
    });
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one chunk");
    for p in it {
        acc.merge(p);
    }
    let n = cfg.trials as f64;
    let per_mu = cfg
        .mu_grid
        .iter()
        .enumerate()
        .map(|(m, &mu)| {
            let terms: Vec<f64> = acc.terms[m].iter().map(|s| s / n).collect();
            let term_stderr = terms
                .iter()
                .zip(&acc.terms_sq[m])
                .map(|(t, s2)| ((s2 / n - t * t).max(0.0) / (n - 1.0)).sqrt())
                .collect();
            MuTerms {
                mu,
                terms,
                term_stderr,
                prefix_sq: acc.prefix_sq[m].iter().map(|s| s / n).collect(),
            }
        })
        .collect();
    Ok(SpitzerResult {
        n_a,
        c_n,
        k_max,
        eps: cfg.eps,
        t: cfg.t,
        a: cfg.a,
        trials: cfg.trials,
        per_mu,
        positive_prob: acc.pos_count.iter().map(|&c| c as f64 / n).collect(),
        positive_mean: acc.pos_sum.iter().map(|s| s / n).collect(),
        sigma3_bound: sigma3_bound(&cfg.spec, cfg.a, k_max)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSplit {
    pub mu: f64,
    pub sigma1: f64,
    pub sigma1_stderr: f64,
    pub sigma2: f64,
    pub sigma3_bound: f64,
}

/// `(Sigma_1, Sigma_2, Sigma_3 bound)` per `mu` at the configured `eps`.
pub fn sigma_split_report(result: &SpitzerResult) -> Vec<SigmaSplit> {
    (0..result.per_mu.len())
        .map(|m| {
            let (s1, se1) = result.sigma1(m, result.eps);
            let (tot, _) = result.total(m);
            SigmaSplit {
                mu: result.per_mu[m].mu,
                sigma1: s1,
                sigma1_stderr: se1,
                sigma2: tot - s1,
                sigma3_bound: result.sigma3_bound,
            }
        })
        .collect()
}

/// `v^(-1) E(1 - exp(-mu(sqrt(v) Z - v)); sqrt(v) Z > v)` for standard normal `Z`.
pub fn gaussian_limit_integrand(v: f64, mu: f64) -> f64 {
    if v <= 0.0 || mu == 0.0 {
        return 0.0;
    }
    let z = Normal::standard();
    let r = v.sqrt();
    let tail = z.sf(r);
    // e^{mu v + mu^2 v/2} Phi-bar(r + mu r), combined in log space
    let log_second = mu * v + 0.5 * mu * mu * v + z.sf(r + mu * r).ln();
    (tail - log_second.exp()) / v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandRow {
    pub v: f64,
    pub k: u64,
    pub scaled_term: f64,
    pub scaled_stderr: f64,
    pub limit: f64,
    pub limit_stderr: f64,
    pub diff: f64,
    pub joint_stderr: f64,
}

/// Compares `n(a) t_k` at `k = round(v n(a))` with the limit integrand at `v`,
/// the latter from `limit_samples` stable draws.
pub fn integrand_limit_compare(
    result: &SpitzerResult,
    mu_index: usize,
    alpha: f64,
    skew: crate::stable::Skew,
    v_points: &[f64],
    limit_samples: u64,
    seed: u64,
) -> Result<Vec<IntegrandRow>> {
    let mu = result
        .per_mu
        .get(mu_index)
        .ok_or_else(|| invalid(format!("no mu at index {mu_index}")))?
        .mu;
    let law = StableLaw::v_normalized(alpha, skew)?;
    if limit_samples < 2 {
        return Err(invalid("need at least two limit samples"));
    }
    let xis: Vec<f64> = map_chunks(limit_samples, |range| {
        range
            .map(|t| law.sample(&mut trial_rng(seed, domain::STABLE_LIMIT, t)))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let n = result.n_a as f64;
    v_points
        .iter()
        .map(|&v| {
            let k = (v * n).round().max(1.0) as u64;
            if k > result.k_max {
                return Err(invalid(format!("v = {v} lies beyond the simulated horizon")));
            }
            let i = (k - 1) as usize;
            let terms = &result.per_mu[mu_index];
            let scaled_term = n * terms.terms[i];
            let scaled_stderr = n * terms.term_stderr[i];
            let scale = v.powf(1.0 / alpha);
            let (mut s, mut s2) = (0.0, 0.0);
            for &xi in &xis {
                let d = scale * xi - v;
                let y = if d > 0.0 { -(-mu * d).exp_m1() / v } else { 0.0 };
                s += y;
                s2 += y * y;
            }
            let m = xis.len() as f64;
            let limit = s / m;
            let limit_stderr = ((s2 / m - limit * limit).max(0.0) / (m - 1.0)).sqrt();
            Ok(IntegrandRow {
                v,
                k,
                scaled_term,
                scaled_stderr,
                limit,
                limit_stderr,
                diff: scaled_term - limit,
                joint_stderr: scaled_stderr.hypot(limit_stderr),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhRow {
    pub mu: f64,
    pub spitzer: f64,
    pub spitzer_stderr: f64,
    pub empirical: f64,
    pub empirical_stderr: f64,
    pub diff: f64,
    pub allowance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhReport {
    pub rows: Vec<WhRow>,
    pub sigma3_bound: f64,
    pub certificate: f64,
    pub pass: bool,
}

/// Checks `exp(-sum_{k<=K} t_k)` against the empirical transform of the
/// truncated maximum at `lambda = mu / c_{n(a)}`, on independent paths.
pub fn wiener_hopf_consistency(cfg: &SpitzerConfig) -> Result<WhReport> {
    wiener_hopf_with_terms(cfg, &estimate_terms(cfg)?)
}

/// As [`wiener_hopf_consistency`], reusing terms already estimated from `cfg`.
pub fn wiener_hopf_with_terms(cfg: &SpitzerConfig, result: &SpitzerResult) -> Result<WhReport> {
    let walk = WalkConfig {
        seed: cfg.seed ^ 0x9e37_79b9_7f4a_7c15,
        ..cfg.walk()
    }
    .with_horizon(Horizon::Scaled(cfg.t));
    let batch = simulate_max_batch(&walk)?;
    let certificate = truncation_certificate(&walk)?;
    let dist = EmpiricalDistribution::new(batch.samples, "walk maxima")?;
    let rows: Vec<WhRow> = cfg
        .mu_grid
        .iter()
        .enumerate()
        .map(|(m, &mu)| {
            let (spitzer, spitzer_stderr) = result.laplace(m);
            let (empirical, empirical_stderr) = empirical_laplace(&dist, mu / result.c_n);
            let diff = spitzer - empirical;
            let allowance = if mu == 0.0 {
                0.0
            } else {
                3.0 * spitzer_stderr.hypot(empirical_stderr) + spitzer * -(-result.sigma3_bound).exp_m1()
            };
            WhRow {
                mu,
                spitzer,
                spitzer_stderr,
                empirical,
                empirical_stderr,
                diff,
                allowance,
                pass: diff.abs() <= allowance,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(WhReport {
        rows,
        sigma3_bound: result.sigma3_bound,
        certificate,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Tolerance;
    use crate::walksim::gim1_sigma;

    fn cfg(spec: JumpSpec, a: f64, mus: &[f64], trials: u64) -> SpitzerConfig {
        SpitzerConfig::new(spec, a, mus.to_vec(), 0.1, 10.0, trials, 17)
    }

    #[test]
    fn zero_mu_gives_unit_transform() {
        let r = estimate_terms(&cfg(JumpSpec::exp_difference(1.0).unwrap(), 0.3, &[0.0], 200)).unwrap();
        assert!(r.per_mu[0].terms.iter().all(|&t| t == 0.0));
        assert_eq!(r.laplace(0), (1.0, 0.0));
    }

    #[test]
    fn term_bounds() {
        let r = estimate_terms(&cfg(
            JumpSpec::two_sided_pareto(1.5, 1.0).unwrap(),
            0.3,
            &[0.5, 4.0],
            500,
        ))
        .unwrap();
        for terms in &r.per_mu {
            let mut prev = 1.0;
            let mut partial = 0.0;
            for (i, &t) in terms.terms.iter().enumerate() {
                let k = (i + 1) as f64;
                assert!(t >= 0.0 && t <= r.positive_prob[i] / k + 1e-15);
                let bound = terms.mu * r.positive_mean[i] / (k * r.c_n);
                assert!(t <= bound + 1e-12);
                partial += t;
                let e = (-partial).exp();
                assert!(e <= prev);
                prev = e;
            }
        }
    }

    #[test]
    fn rademacher_terms_match_convolution() {
        let a = 0.25;
        let r = estimate_terms(&cfg(JumpSpec::rademacher(), a, &[1.0], 40_000)).unwrap();
        let lam = 1.0 / r.c_n;
        for k in [1u64, 2, 5, 16, 40] {
            if k > r.k_max {
                continue;
            }
            // exact: S_k = 2j - k with probability C(k, j) / 2^k
            let mut exact = 0.0;
            let mut log_binom = 0.0f64;
            for j in 0..=k {
                if j > 0 {
                    log_binom += ((k - j + 1) as f64 / j as f64).ln();
                }
                let s = (2 * j) as f64 - k as f64 - k as f64 * a;
                if s > 0.0 {
                    exact += (log_binom - k as f64 * 2f64.ln()).exp() * -(-lam * s).exp_m1();
                }
            }
            exact /= k as f64;
            let i = (k - 1) as usize;
            let (t, se) = (r.per_mu[0].terms[i], r.per_mu[0].term_stderr[i]);
            assert!((t - exact).abs() < 4.0 * se + 1e-12, "k={k}: {t} vs {exact} (se {se})");
        }
    }

    #[test]
    fn matches_gim1_transform() {
        let a = 0.2;
        let c = SpitzerConfig::new(
            JumpSpec::exp_difference(1.0).unwrap(),
            a,
            vec![0.5, 1.0, 2.0],
            0.1,
            30.0,
            20_000,
            5,
        );
        let r = estimate_terms(&c).unwrap();
        let sigma = gim1_sigma(1.0, a).unwrap();
        for (m, &mu) in c.mu_grid.iter().enumerate() {
            let lam = mu / r.c_n;
            let exact = (1.0 - sigma) + sigma * (1.0 - sigma) / ((1.0 - sigma) + lam);
            let (e, se) = r.laplace(m);
            let budget = 3.0 * se + e * -(-r.sigma3_bound).exp_m1();
            assert!((e - exact).abs() <= budget, "mu={mu}: {e} vs {exact}, budget {budget}");
        }
    }

    #[test]
    fn sigma3_shape() {
        for spec in [
            JumpSpec::gaussian(1.0).unwrap(),
            JumpSpec::two_sided_pareto(1.5, 1.0).unwrap(),
            JumpSpec::one_sided_pareto_centered(1.5, 1.0).unwrap(),
        ] {
            let n = n_of_a(&spec, 0.1).unwrap();
            let alpha = spec.alpha();
            for t in [2.0, 4.0, 8.0, 16.0] {
                let k1 = (t * n as f64).ceil() as u64;
                let k2 = (2.0 * t * n as f64).ceil() as u64;
                let r = sigma3_bound(&spec, 0.1, k2).unwrap() / sigma3_bound(&spec, 0.1, k1).unwrap();
                assert!(r <= 2f64.powf(1.0 - alpha) * 1.05, "{spec:?} T={t}: {r}");
            }
        }
        // finite variance: integral of sigma^2/(ka)^2 over k > K
        let g = JumpSpec::gaussian(1.0).unwrap();
        let s = sigma3_bound(&g, 0.1, 1000).unwrap();
        assert!((s / (1.0 / (1000.0 * 0.01)) - 1.0).abs() < 1e-6, "{s}");
    }

    #[test]
    fn gaussian_integrand_matches_quadrature() {
        for &v in &[0.1f64, 0.5, 1.0, 2.0, 5.0] {
            for &mu in &[0.5f64, 1.0, 2.0] {
                let f = |z: f64| {
                    let d = v.sqrt() * z - v;
                    (-(-mu * d).exp_m1()) * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
                };
                let q = crate::quad::integrate_to_infinity(f, v.sqrt(), Tolerance::default()).value / v;
                let c = gaussian_limit_integrand(v, mu);
                assert!((q - c).abs() < 1e-8, "v={v} mu={mu}: {q} vs {c}");
            }
        }
        assert_eq!(gaussian_limit_integrand(1.0, 0.0), 0.0);
    }

    #[test]
    fn sigma1_rescaling() {
        let spec = JumpSpec::gaussian(1.0).unwrap();
        let c = SpitzerConfig::new(spec, 0.05, vec![0.5, 1.0, 2.0], 0.2, 2.0, 4000, 3);
        let r = estimate_terms(&c).unwrap();
        let (s1, _) = r.sigma1(1, 0.2);
        let (s_half, _) = r.sigma1(1, 0.1);
        assert!(s_half / s1 <= 0.5f64.sqrt() * 1.2, "{}", s_half / s1);
        let split = sigma_split_report(&r);
        assert_eq!(split.len(), 3);
        assert!(split.iter().all(|s| s.sigma1 > 0.0 && s.sigma2 > 0.0));
    }
}
