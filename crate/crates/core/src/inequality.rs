//! Empirical checks of the maximal inequality
//! `P(max_{k<=n} S_k >= x) <= C n V(x) / x^2` and of its ingredients.

use crate::error::{invalid, Result};
use crate::jumps::JumpSpec;
use crate::normalize::c_of_n;
use crate::rng::{check_budget, domain, map_chunks, trial_rng};
use crate::stats::binomial_stderr;

/// Cells whose bound falls below this are reported but not calibrated on.
pub const RARE_BOUND: f64 = 1e-4;

/// How the `x` grid is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum XGrid {
    Absolute(Vec<f64>),
    /// Multiples of `c_n`, per row.
    ScaledByCn(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: u64,
    pub x: f64,
    /// `x / c_n`.
    pub x_over_cn: f64,
    pub hits: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub bound: f64,
    pub ratio: f64,
    pub rare: bool,
    /// One-sided 95% upper limit for `p` when no exceedance was seen.
    pub zero_hit_upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub spec: JumpSpec,
    pub trials: u64,
    pub cells: Vec<Cell>,
    /// Largest ratio over non-rare cells.
    pub c_hat: Option<f64>,
}

impl InequalityReport {
    /// For each distinct `x / c_n`, `max ratio / min ratio` across `n` over non-rare cells.
    pub fn variation_by_multiple(&self) -> Vec<(f64, f64)> {
        let mut keys: Vec<f64> = self.cells.iter().map(|c| c.x_over_cn).collect();
        keys.sort_by(f64::total_cmp);
        keys.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
        keys.into_iter()
            .filter_map(|m| {
                let ratios: Vec<f64> = self
                    .cells
                    .iter()
                    .filter(|c| !c.rare && (c.x_over_cn - m).abs() <= 1e-9 * m.abs() && c.ratio > 0.0)
                    .map(|c| c.ratio)
                    .collect();
                if ratios.len() < 2 {
                    return None;
                }
                let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
                let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
                Some((m, hi / lo))
            })
            .collect()
    }
}

/// Monte Carlo sweep of the maximal-inequality ratio over `n_grid x x_grid`
/// for the undrifted walk; one set of paths serves every `n`.
pub fn maximal_ratio_sweep(
    spec: &JumpSpec,
    n_grid: &[u64],
    x_grid: &XGrid,
    trials: u64,
    seed: u64,
    budget: u128,
) -> Result<InequalityReport> {
    spec.require_centered()?;
    let xs = match x_grid {
        XGrid::Absolute(v) | XGrid::ScaledByCn(v) => v,
    };
    if n_grid.is_empty() || xs.is_empty() {
        return Err(invalid("n and x grids must be nonempty"));
    }
    if n_grid.contains(&0) || xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(invalid("grid entries must be positive"));
    }
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let mut ns = n_grid.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().expect("nonempty");
    check_budget(n_max, trials, budget)?;

    let rows: Vec<(u64, f64, Vec<f64>)> = ns
        .iter()
        .map(|&n| {
            let c = c_of_n(spec, n)?;
            let row = match x_grid {
                XGrid::Absolute(v) => v.clone(),
                XGrid::ScaledByCn(v) => v.iter().map(|m| m * c).collect(),
            };
            Ok((n, c, row))
        })
        .collect::<Result<_>>()?;

    let sampler = spec.sampler();
    let maxima: Vec<Vec<f64>> = map_chunks(trials, |range| {
        range
            .map(|t| {
                let mut rng = trial_rng(seed, domain::INEQUALITY, t);
                let (mut s, mut m) = (0.0f64, f64::NEG_INFINITY);
                let mut out = Vec::with_capacity(ns.len());
                let mut next = 0;
                for k in 1..=n_max {
                    s += sampler.draw(&mut rng);
                    m = m.max(s);
                    if k == ns[next] {
                        out.push(m);
                        next += 1;
                    }
                }
                out
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut cells = Vec::new();
    for (i, (n, c, row)) in rows.iter().enumerate() {
        for &x in row {
            let hits = maxima.iter().filter(|m| m[i] >= x).count() as u64;
            let p = hits as f64 / trials as f64;
            let bound = *n as f64 * spec.truncated_second_moment(x)? / (x * x);
            let ratio = if bound > 0.0 { p / bound } else { 0.0 };
            cells.push(Cell {
                n: *n,
                x,
                x_over_cn: x / c,
                hits,
                p_hat: p,
                stderr: binomial_stderr(p, trials),
                bound,
                ratio,
                rare: bound < RARE_BOUND,
                zero_hit_upper: (hits == 0).then(|| 3.0 / trials as f64),
            });
        }
    }
    let c_hat = cells
        .iter()
        .filter(|c| !c.rare)
        .map(|c| c.ratio)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    Ok(InequalityReport {
        spec: *spec,
        trials,
        cells,
        c_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaramataResult {
    pub max_ratio: f64,
    pub x: f64,
    pub y: f64,
}

/// `max [V(y)/V(x)] / (y/x)^(2 - alpha + gamma)` over pairs `y >= x`.
pub fn karamata_check(spec: &JumpSpec, gamma: f64, pairs: &[(f64, f64)]) -> Result<KaramataResult> {
    let alpha = spec.alpha();
    if !(gamma > 0.0 && gamma < alpha) {
        return Err(invalid(format!("gamma must lie in (0, alpha), got {gamma}")));
    }
    if pairs.is_empty() {
        return Err(invalid("no pairs given"));
    }
    let mut best: Option<KaramataResult> = None;
    for &(x, y) in pairs {
        if !(x > 0.0 && y >= x) {
            return Err(invalid(format!("pairs need 0 < x <= y, got ({x}, {y})")));
        }
        let vx = spec.truncated_second_moment(x)?;
        if vx <= 0.0 {
            return Err(invalid(format!("V vanishes at x = {x}")));
        }
        let r = spec.truncated_second_moment(y)? / vx / (y / x).powf(2.0 - alpha + gamma);
        if best.is_none_or(|b| r > b.max_ratio) {
            best = Some(KaramataResult { max_ratio: r, x, y });
        }
    }
    Ok(best.expect("nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruittRow {
    pub x: f64,
    /// `P(|X| > x) x^2 / V(x)`.
    pub tail_ratio: f64,
    /// `|E(X; |X| <= x)| x / V(x)`.
    pub mean_ratio: f64,
    pub unit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruittReport {
    pub rows: Vec<PruittRow>,
    pub midpoint: PruittRow,
    /// Every ratio stays within 1.5 times its midpoint value.
    pub bounded: bool,
}

pub fn pruitt_component_check(spec: &JumpSpec, x_grid: &[f64]) -> Result<PruittReport> {
    spec.require_centered()?;
    if x_grid.is_empty() || x_grid.iter().any(|x| !(*x > 0.0)) {
        return Err(invalid("x grid must be nonempty and positive"));
    }
    let rows = x_grid
        .iter()
        .map(|&x| {
            let v = spec.truncated_second_moment(x)?;
            if v <= 0.0 {
                return Err(invalid(format!("V vanishes at x = {x}")));
            }
            Ok(PruittRow {
                x,
                tail_ratio: spec.tail_probability(x)? * x * x / v,
                mean_ratio: spec.truncated_mean_abs(x)? * x / v,
                unit: 1.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = x_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    let geo = (lo * hi).sqrt();
    let midpoint = *rows
        .iter()
        .min_by(|a, b| (a.x.ln() - geo.ln()).abs().total_cmp(&(b.x.ln() - geo.ln()).abs()))
        .expect("nonempty");
    let within = |v: f64, m: f64| v <= 1.5 * m + 1e-15;
    let bounded = rows
        .iter()
        .all(|r| within(r.tail_ratio, midpoint.tail_ratio) && within(r.mean_ratio, midpoint.mean_ratio));
    Ok(PruittReport {
        rows,
        midpoint,
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_vacuous_cell() {
        let r = maximal_ratio_sweep(
            &JumpSpec::rademacher(),
            &[100],
            &XGrid::Absolute(vec![10.0, 2000.0]),
            2000,
            1,
            u128::MAX,
        )
        .unwrap();
        let c = r.cells[0];
        assert!((c.bound - 1.0).abs() < 1e-12);
        assert!(c.ratio <= 1.0);
        let far = r.cells[1];
        assert!(far.rare && far.hits == 0 && far.ratio == 0.0 && far.zero_hit_upper.is_some());
        assert_eq!(r.c_hat, Some(c.ratio));
    }

    #[test]
    fn probability_monotone_in_n() {
        let r = maximal_ratio_sweep(
            &JumpSpec::gaussian(1.0).unwrap(),
            &[10, 100, 1000],
            &XGrid::Absolute(vec![5.0, 20.0]),
            3000,
            2,
            u128::MAX,
        )
        .unwrap();
        for x in [5.0, 20.0] {
            let ps: Vec<u64> = r.cells.iter().filter(|c| c.x == x).map(|c| c.hits).collect();
            assert!(ps.windows(2).all(|w| w[0] <= w[1]), "{ps:?}");
        }
    }

    #[test]
    fn pareto_ratio_is_uniform_in_n() {
        let spec = JumpSpec::two_sided_pareto(1.5, 1.0).unwrap();
        let r = maximal_ratio_sweep(
            &spec,
            &[100, 1000],
            &XGrid::ScaledByCn(vec![0.5, 1.0, 2.0, 4.0]),
            4000,
            3,
            u128::MAX,
        )
        .unwrap();
        assert!(r.c_hat.unwrap().is_finite());
        for (m, v) in r.variation_by_multiple() {
            assert!(v < 2.0, "x/c_n = {m}: {v}");
        }
    }

    #[test]
    fn karamata() {
        let p = JumpSpec::two_sided_pareto(1.5, 1.0).unwrap();
        let same = karamata_check(&p, 0.25, &[(10.0, 10.0)]).unwrap();
        assert!((same.max_ratio - 1.0).abs() < 1e-15);
        let mut pairs = Vec::new();
        for i in 0..30 {
            for j in i..30 {
                pairs.push((10f64 * 1.5f64.powi(i), 10f64 * 1.5f64.powi(j)));
            }
        }
        assert!(karamata_check(&p, 0.25, &pairs).unwrap().max_ratio <= 1.0 + 1e-6);
        let g = JumpSpec::gaussian(1.0).unwrap();
        assert!(karamata_check(&g, 0.25, &pairs).unwrap().max_ratio <= 1.0 + 1e-12);
        assert!(karamata_check(&p, 1.5, &pairs).is_err());
    }

    #[test]
    fn pruitt_components() {
        let p = JumpSpec::two_sided_pareto(1.5, 1.0).unwrap();
        let r = pruitt_component_check(&p, &[1e3]).unwrap();
        assert!((r.rows[0].tail_ratio / (1.0 / 3.0) - 1.0).abs() < 0.05);
        assert_eq!(r.rows[0].mean_ratio, 0.0);
        let grid: Vec<f64> = (7..20).map(|j| 2f64.powi(j)).collect();
        for spec in [p, JumpSpec::one_sided_pareto_centered(1.5, 1.0).unwrap()] {
            let r = pruitt_component_check(&spec, &grid).unwrap();
            assert!(r.bounded, "{spec:?}");
        }
        let rad = pruitt_component_check(&JumpSpec::rademacher(), &[1.0, 2.0, 5.0]).unwrap();
        assert!(rad.rows.iter().all(|r| r.tail_ratio == 0.0 && r.mean_ratio == 0.0));
    }
}
