//! The five experiment commands. Each returns its tables, metrics and pass flags.

use crate::config::RunConfig;
use crate::output::{line_chart, Artifact, Field, Series, Table};
use crate::CliError;
use heavytraffic::inequality::{maximal_ratio_sweep, pruitt_component_check, XGrid};
use heavytraffic::limits::{
    calibrate_ml_scale, mstar_laplace_mc, mstar_sup_exact, mstar_sup_mc, tail_slope_estimate, LimitLaw, LimitLawSpec,
    MittagLefflerTable, QuadratureWindow, TabulatedMittagLeffler,
};
use heavytraffic::normalize::{c_of_n, rv_slope_check, NormalizationTable};
use heavytraffic::spitzer::{estimate_terms, sigma_split_report, wiener_hopf_with_terms, SpitzerConfig};
use heavytraffic::stable::spectrally_positive_laplace_constant;
use heavytraffic::stats::{dkw_epsilon, ks_distance, ks_two_sample, Cdf};
use heavytraffic::walksim::{simulate_max_batch, WalkConfig};
use heavytraffic::{EmpiricalDistribution, Error, Skew};
use serde_json::Value;
use std::collections::BTreeMap;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub seed: u64,
    pub budget: u128,
    pub svg: bool,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub metrics: BTreeMap<String, Value>,
    pub pass: BTreeMap<String, bool>,
}

impl Outcome {
    fn metric(&mut self, key: impl Into<String>, v: f64) {
        let value = serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number);
        self.metrics.insert(key.into(), value);
    }

    fn note(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.metrics.insert(key.into(), Value::String(v.into()));
    }

    fn flag(&mut self, key: impl Into<String>, ok: bool) {
        self.pass.insert(key.into(), ok);
    }

    fn csv(&mut self, name: &str, table: &Table) {
        self.artifacts.push(Artifact::csv(name, table));
    }
}

fn require_a_grid(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    if cfg.a_grid.is_empty() {
        return Err(CliError::Config(format!("{command} needs a nonempty a_grid")));
    }
    Ok(())
}

fn label(prefix: &str, a: f64) -> String {
    format!("{prefix}_a{a}")
}

pub fn normalize(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    require_a_grid(cfg, "normalize")?;
    let spec = &cfg.spec;
    let table = NormalizationTable::build(spec, cfg.n_lo, cfg.n_hi, &cfg.a_grid)?;

    let mut rows: Vec<(u64, f64)> = table.entries().to_vec();
    let mut decade = 1u64;
    while decade <= cfg.n_hi {
        if decade >= cfg.n_lo && !rows.iter().any(|r| r.0 == decade) {
            match c_of_n(spec, decade) {
                Ok(c) => rows.push((decade, c)),
                Err(Error::DegenerateLevelSet { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        decade = decade.saturating_mul(10);
    }
    rows.sort_by_key(|r| r.0);

    let mut out = Outcome::default();
    let mut cn = Table::new(&["n", "c_n", "n_v_over_c2"]);
    let mut worst = None::<f64>;
    for &(n, c) in &rows {
        let rel = n as f64 * spec.truncated_second_moment(c)? / (c * c);
        if n >= 1000 {
            worst = Some(worst.unwrap_or(0.0).max((rel - 1.0).abs()));
        }
        cn.push(vec![n.into(), c.into(), rel.into()]);
    }
    out.csv("normalize_cn.csv", &cn);

    let mut drift = Table::new(&["a", "n_a", "c_n_a", "a_n_over_c"]);
    for r in table.drift_rows() {
        drift.push(vec![
            r.a.into(),
            r.n.into(),
            r.c.into(),
            (r.a * r.n as f64 / r.c).into(),
        ]);
    }
    out.csv("normalize_na.csv", &drift);

    let alpha = spec.alpha();
    out.metric("alpha", alpha);
    if let Some(w) = worst {
        out.metric("relation_max_deviation", w);
        if spec.has_continuous_v() {
            out.flag("relation", w <= cfg.tolerances.relation);
        }
    }
    match rv_slope_check(&table) {
        Ok(s) => {
            out.metric("slope_c", s.slope_c);
            out.metric("slope_n", s.slope_n);
            out.flag("slope_c", (s.slope_c - 1.0 / alpha).abs() <= cfg.tolerances.slope_c);
            out.flag(
                "slope_n",
                (s.slope_n + alpha / (alpha - 1.0)).abs() <= cfg.tolerances.slope_n,
            );
        }
        Err(Error::InsufficientSpan(why)) => out.note("slopes_skipped", why),
        Err(e) => return Err(e.into()),
    }

    if ctx.svg {
        let pts = |f: &dyn Fn(&(u64, f64)) -> f64| -> Vec<(f64, f64)> {
            rows.iter().map(|r| ((r.0 as f64).log10(), f(r))).collect()
        };
        let lo = rows.first().map_or(0.0, |r| r.1.log10());
        let hi = rows.last().map_or(1.0, |r| r.1.log10());
        let svg = line_chart(
            &format!("c_n for {}", spec.kind().name()),
            "log10 n",
            "log10 c_n",
            &[
                Series {
                    label: "c_n".into(),
                    points: pts(&|r| r.1.log10()),
                    dashed: false,
                },
                Series {
                    label: format!("slope 1/{alpha}"),
                    points: pts(&|r| lo + ((r.0 as f64).log10() - (rows[0].0 as f64).log10()) / alpha),
                    dashed: true,
                },
            ],
            (lo.min(hi) - 0.1, hi.max(lo) + 0.1),
        );
        out.artifacts.push(Artifact::svg("normalize_cn.svg", svg));
    }
    Ok(out)
}

/// What scaled maxima are compared with.
enum Reference {
    Law(LimitLaw),
    MittagLeffler { table: MittagLefflerTable, c: f64 },
    Sample(EmpiricalDistribution),
}

impl Reference {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Reference::Law(law) => law.cdf(x),
            Reference::MittagLeffler { table, c } => TabulatedMittagLeffler { table, c: *c }.cdf(x),
            Reference::Sample(d) => d.ecdf(x),
        }
    }

    fn ks(&self, d: &EmpiricalDistribution) -> f64 {
        match self {
            Reference::Law(law) => ks_distance(d, law),
            Reference::MittagLeffler { table, c } => ks_distance(d, &TabulatedMittagLeffler { table, c: *c }),
            Reference::Sample(s) => ks_two_sample(d, s),
        }
    }

    fn name(&self) -> String {
        match self {
            Reference::Law(LimitLaw::MittagLeffler { alpha, c }) => format!("ML({alpha}, c={c:.4})"),
            Reference::Law(law) => format!("{law:?}"),
            Reference::MittagLeffler { c, .. } => format!("ML(c={c:.4})"),
            Reference::Sample(_) => "exact limit sample".into(),
        }
    }
}

/// The limit reference for `cfg.spec`, calibrating the Mittag-Leffler scale
/// against exact limit samples; records the calibration in `out`.
fn reference_for(ctx: &Context, out: &mut Outcome) -> Result<Reference, CliError> {
    let cfg = ctx.cfg;
    Ok(match LimitLawSpec::for_spec(&cfg.spec) {
        LimitLawSpec::Closed(LimitLaw::MittagLeffler { alpha, c }) => {
            let exact = mstar_sup_exact(alpha, Skew::SpectrallyPositive, cfg.limit_t, cfg.limit_trials, ctx.seed)?;
            let cal = calibrate_ml_scale(&exact, alpha)?;
            out.metric("ml_analytic_c", c);
            out.metric("ml_calibrated_c", cal.c);
            out.metric("ml_calibration_ks", cal.ks);
            let mut t = Table::new(&[
                "alpha",
                "analytic_c",
                "calibrated_c",
                "calibration_ks",
                "samples",
                "horizon",
            ]);
            t.push(vec![
                alpha.into(),
                c.into(),
                cal.c.into(),
                cal.ks.into(),
                cfg.limit_trials.into(),
                cfg.limit_t.into(),
            ]);
            out.csv("ml_calibration.csv", &t);
            Reference::MittagLeffler {
                table: MittagLefflerTable::new(alpha - 1.0)?,
                c: cal.c,
            }
        }
        LimitLawSpec::Closed(law) => Reference::Law(law),
        LimitLawSpec::MonteCarloStable { alpha, skew } => {
            Reference::Sample(mstar_sup_exact(alpha, skew, cfg.limit_t, cfg.limit_trials, ctx.seed)?)
        }
    })
}

fn ecdf_grid(x_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| x_max * i as f64 / (points - 1) as f64).collect()
}

pub fn limit(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    require_a_grid(cfg, "limit")?;
    let mut out = Outcome::default();
    let reference = reference_for(ctx, &mut out)?;
    let alpha = cfg.spec.alpha();

    let mut dists = Vec::with_capacity(cfg.a_grid.len());
    let mut ks_table = Table::new(&[
        "a",
        "n_a",
        "c_n_a",
        "steps",
        "trials",
        "ks",
        "dkw_eps_0.01",
        "atom_at_zero",
        "argmax_within_10n",
        "truncation_certificate",
        "tail_slope",
        "perturbation_ks",
    ]);
    let mut ks_values = Vec::new();
    let mut last_slope = None;
    let mut last_perturbation = None;
    for &a in &cfg.a_grid {
        let walk = WalkConfig::new(cfg.spec, a, cfg.t, cfg.trials, ctx.seed).with_budget(ctx.budget);
        let batch = simulate_max_batch(&walk)?;
        let scaled = batch
            .scaled_samples()
            .ok_or_else(|| CliError::Config(format!("drift {a} has no time scale n(a)")))?;
        let c_n = batch.c_n.unwrap_or(f64::NAN);
        let dist = EmpiricalDistribution::new(scaled, format!("M(a)/c_n(a), a = {a}"))?;
        let ks = reference.ks(&dist);
        let atom = dist.ecdf(0.0);
        let within =
            batch.argmax_ratios.iter().filter(|&&r| r <= 10.0).count() as f64 / batch.argmax_ratios.len() as f64;
        let slope = if alpha < 2.0 {
            match tail_slope_estimate(&dist, 0.95, 0.999) {
                Ok(fit) => Some(fit.slope),
                Err(Error::TooFewPoints { .. } | Error::InsufficientSpan(_)) => None,
                Err(e) => return Err(e.into()),
            }
        } else {
            None
        };
        let perturbation_ks = match cfg.perturbation {
            Some(p) => {
                let perturbed = simulate_max_batch(&walk.clone().with_perturbation(p))?;
                let scaled_p: Vec<f64> = perturbed.samples.iter().map(|m| m / c_n).collect();
                let dp = EmpiricalDistribution::new(scaled_p, "perturbed")?;
                Some(ks_two_sample(&dist, &dp))
            }
            None => None,
        };
        ks_table.push(vec![
            a.into(),
            batch.n_a.into(),
            c_n.into(),
            batch.k.into(),
            cfg.trials.into(),
            ks.into(),
            dkw_epsilon(cfg.trials, 0.01)?.into(),
            atom.into(),
            within.into(),
            batch.truncation_certificate.into(),
            slope.into(),
            perturbation_ks.into(),
        ]);
        out.metric(label("ks", a), ks);
        out.metric(label("atom", a), atom);
        out.metric(label("argmax_within_10n", a), within);
        if let Some(s) = slope {
            out.metric(label("tail_slope", a), s);
        }
        if let Some(p) = perturbation_ks {
            out.metric(label("perturbation_ks", a), p);
        }
        ks_values.push(ks);
        last_slope = slope;
        last_perturbation = perturbation_ks;
        dists.push((a, dist));
    }
    out.csv("limit_ks.csv", &ks_table);

    if ks_values.len() >= 2 {
        out.flag("ks_decreasing", ks_values.windows(2).all(|w| w[1] < w[0]));
    }
    out.flag(
        "ks_final",
        *ks_values.last().expect("nonempty grid") < cfg.tolerances.ks,
    );
    if let Some(s) = last_slope {
        out.flag("tail_slope", (s - (1.0 - alpha)).abs() <= cfg.tolerances.tail_slope);
    }
    if let Some(p) = last_perturbation {
        out.flag("perturbation", p < cfg.tolerances.perturbation_ks);
    }

    let x_max = dists.last().map_or(1.0, |(_, d)| d.quantile(0.99)).max(1e-9);
    let grid = ecdf_grid(x_max, 201);
    let mut ecdf = Table::new(&["a", "x", "ecdf", "limit_cdf"]);
    for (a, d) in &dists {
        for &x in &grid {
            ecdf.push(vec![(*a).into(), x.into(), d.ecdf(x).into(), reference.cdf(x).into()]);
        }
    }
    out.csv("limit_ecdf.csv", &ecdf);

    if ctx.svg {
        let mut series: Vec<Series> = dists
            .iter()
            .map(|(a, d)| Series {
                label: format!("a = {a}"),
                points: grid.iter().map(|&x| (x, d.ecdf(x))).collect(),
                dashed: false,
            })
            .collect();
        series.push(Series {
            label: reference.name(),
            points: grid.iter().map(|&x| (x, reference.cdf(x))).collect(),
            dashed: true,
        });
        let svg = line_chart(
            &format!("scaled maxima, {}", cfg.spec.kind().name()),
            "x",
            "P(M(a)/c_n(a) <= x)",
            &series,
            (0.0, 1.0),
        );
        out.artifacts.push(Artifact::svg("limit_ecdf.svg", svg));
    }
    Ok(out)
}

pub fn spitzer(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    require_a_grid(cfg, "spitzer")?;
    let mut out = Outcome::default();
    let mut split = Table::new(&[
        "a",
        "mu",
        "sigma1",
        "sigma1_stderr",
        "sigma2",
        "sigma3_bound",
        "laplace",
        "laplace_stderr",
    ]);
    let mut wh = Table::new(&[
        "a",
        "mu",
        "spitzer",
        "spitzer_stderr",
        "empirical",
        "empirical_stderr",
        "diff",
        "allowance",
        "pass",
    ]);
    for (i, &a) in cfg.a_grid.iter().enumerate() {
        let mut sc = SpitzerConfig::new(cfg.spec, a, cfg.mu_grid.clone(), cfg.eps, cfg.t, cfg.trials, ctx.seed);
        sc.step_budget = ctx.budget;
        sc.validate()?;
        let result = estimate_terms(&sc)?;

        let mut header = vec!["k".to_string(), "p_positive".into(), "mean_positive".into()];
        for mu in &cfg.mu_grid {
            header.push(format!("term_mu{mu}"));
            header.push(format!("stderr_mu{mu}"));
        }
        let mut terms = Table::new(&header);
        for k in 0..result.k_max as usize {
            let mut row: Vec<Field> = vec![
                (k as u64 + 1).into(),
                result.positive_prob[k].into(),
                result.positive_mean[k].into(),
            ];
            for m in &result.per_mu {
                row.push(m.terms[k].into());
                row.push(m.term_stderr[k].into());
            }
            terms.push(row);
        }
        out.csv(&format!("spitzer_terms_{i}.csv"), &terms);
        out.metric(label("k_max", a), result.k_max as f64);

        for (m, s) in sigma_split_report(&result).iter().enumerate() {
            let (lap, lap_se) = result.laplace(m);
            split.push(vec![
                a.into(),
                s.mu.into(),
                s.sigma1.into(),
                s.sigma1_stderr.into(),
                s.sigma2.into(),
                s.sigma3_bound.into(),
                lap.into(),
                lap_se.into(),
            ]);
        }

        let report = wiener_hopf_with_terms(&sc, &result)?;
        for r in &report.rows {
            wh.push(vec![
                a.into(),
                r.mu.into(),
                r.spitzer.into(),
                r.spitzer_stderr.into(),
                r.empirical.into(),
                r.empirical_stderr.into(),
                r.diff.into(),
                r.allowance.into(),
                r.pass.into(),
            ]);
        }
        out.metric(label("sigma3_bound", a), report.sigma3_bound);
        out.metric(label("certificate", a), report.certificate);
        out.flag(label("wiener_hopf", a), report.pass);
    }
    out.csv("spitzer_split.csv", &split);
    out.csv("spitzer_wh.csv", &wh);
    Ok(out)
}

pub fn inequality(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    if cfg.n_grid.is_empty() || cfg.x_multiples.is_empty() {
        return Err(CliError::Config(
            "inequality needs nonempty n_grid and x_multiples".into(),
        ));
    }
    let spec = &cfg.spec;
    let grid = XGrid::ScaledByCn(cfg.x_multiples.clone());
    let report = maximal_ratio_sweep(spec, &cfg.n_grid, &grid, cfg.trials, ctx.seed, ctx.budget)?;
    let doubled = maximal_ratio_sweep(spec, &cfg.n_grid, &grid, 2 * cfg.trials, ctx.seed, ctx.budget)?;

    let mut out = Outcome::default();
    let mut cells = Table::new(&[
        "trials",
        "n",
        "x",
        "x_over_cn",
        "hits",
        "p_hat",
        "stderr",
        "bound",
        "ratio",
        "rare",
    ]);
    for r in [&report, &doubled] {
        for c in &r.cells {
            cells.push(vec![
                r.trials.into(),
                c.n.into(),
                c.x.into(),
                c.x_over_cn.into(),
                c.hits.into(),
                c.p_hat.into(),
                c.stderr.into(),
                c.bound.into(),
                c.ratio.into(),
                c.rare.into(),
            ]);
        }
    }
    out.csv("inequality_cells.csv", &cells);

    let variation = report.variation_by_multiple();
    let mut var_table = Table::new(&["x_over_cn", "max_over_min"]);
    for &(m, v) in &variation {
        var_table.push(vec![m.into(), v.into()]);
    }
    out.csv("inequality_variation.csv", &var_table);

    match (report.c_hat, doubled.c_hat) {
        (Some(c1), Some(c2)) => {
            let change = (c2 - c1).abs() / c1;
            out.metric("c_hat", c1);
            out.metric("c_hat_doubled", c2);
            out.metric("c_hat_change", change);
            out.flag("c_hat_finite", c1.is_finite() && c2.is_finite());
            out.flag("doubling", change < cfg.tolerances.doubling);
        }
        _ => out.flag("c_hat_finite", false),
    }
    let worst = variation
        .iter()
        .map(|v| v.1)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    if let Some(w) = worst {
        out.metric("variation_max", w);
        out.flag("variation", w < cfg.tolerances.variation);
    }

    let scale = spec.natural_scale();
    let xs: Vec<f64> = (7..=12).map(|j| scale * f64::powi(2.0, j)).collect();
    let pruitt = pruitt_component_check(spec, &xs)?;
    let mut pt = Table::new(&["x", "tail_ratio", "mean_ratio"]);
    for r in &pruitt.rows {
        pt.push(vec![r.x.into(), r.tail_ratio.into(), r.mean_ratio.into()]);
    }
    out.csv("inequality_pruitt.csv", &pt);
    out.flag("pruitt_bounded", pruitt.bounded);
    Ok(out)
}

/// `E exp(-mu M*)` where a closed form exists.
fn closed_laplace(alpha: f64, skew: Skew, mu: f64) -> Option<f64> {
    if alpha >= 2.0 {
        Some(2.0 / (2.0 + mu))
    } else if skew == Skew::SpectrallyPositive {
        Some(1.0 / (1.0 + spectrally_positive_laplace_constant(alpha) * mu.powf(alpha - 1.0)))
    } else {
        None
    }
}

pub fn mstar(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = ctx.cfg;
    let (alpha, skew) = (cfg.spec.alpha(), cfg.spec.limit_skew());
    let mut out = Outcome::default();
    let reference = reference_for(ctx, &mut out)?;

    let sup = mstar_sup_mc(alpha, skew, cfg.t, cfg.grid_steps, cfg.trials, ctx.seed, ctx.budget)?;
    let ks = reference.ks(&sup);
    out.metric("sup_ks", ks);
    out.metric("sup_atom", sup.ecdf(0.0));
    if !matches!(reference, Reference::Sample(_)) {
        out.flag("sup_ks", ks < cfg.tolerances.mstar_ks);
    }
    let grid = ecdf_grid(sup.quantile(0.99).max(1e-9), 201);
    let mut ecdf = Table::new(&["x", "ecdf", "limit_cdf"]);
    for &x in &grid {
        ecdf.push(vec![x.into(), sup.ecdf(x).into(), reference.cdf(x).into()]);
    }
    out.csv("mstar_ecdf.csv", &ecdf);

    let window = QuadratureWindow::new(cfg.eps, cfg.laplace_t, cfg.laplace_nodes, cfg.laplace_samples)?;
    let mut lt = Table::new(&[
        "mu",
        "estimate",
        "stderr",
        "eps_bound",
        "t_bound",
        "closed_form",
        "diff",
        "allowance",
        "pass",
    ]);
    let mut all = None::<bool>;
    for &mu in &cfg.mu_grid {
        let est = mstar_laplace_mc(mu, alpha, skew, &window, ctx.seed, None)?;
        let closed = closed_laplace(alpha, skew, mu);
        let allowance = cfg.tolerances.laplace_stderr * est.stderr + est.eps_bound + est.t_bound;
        let diff = closed.map(|c| est.estimate - c);
        let pass = diff.map(|d| d.abs() <= allowance);
        if let Some(p) = pass {
            all = Some(all.unwrap_or(true) && p);
        }
        lt.push(vec![
            mu.into(),
            est.estimate.into(),
            est.stderr.into(),
            est.eps_bound.into(),
            est.t_bound.into(),
            closed.into(),
            diff.into(),
            allowance.into(),
            pass.map_or(Field::Text(String::new()), Field::Bool),
        ]);
    }
    out.csv("mstar_laplace.csv", &lt);
    if let Some(p) = all {
        out.flag("laplace", p);
    }

    if ctx.svg {
        let svg = line_chart(
            &format!("sup of stable({alpha}) minus t, T = {}", cfg.t),
            "x",
            "P(M* <= x)",
            &[
                Series {
                    label: format!("grid, {} steps", cfg.grid_steps),
                    points: grid.iter().map(|&x| (x, sup.ecdf(x))).collect(),
                    dashed: false,
                },
                Series {
                    label: reference.name(),
                    points: grid.iter().map(|&x| (x, reference.cdf(x))).collect(),
                    dashed: true,
                },
            ],
            (0.0, 1.0),
        );
        out.artifacts.push(Artifact::svg("mstar_ecdf.svg", svg));
    }
    Ok(out)
}
