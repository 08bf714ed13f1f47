//! Run configuration: flat `key = value` lines under `[section]` headers.
//!
//! ```text
//! [run]
//! a_grid = 0.4, 0.2, 0.1
//! t = 20
//! trials = 100000
//!
//! [spec]
//! kind = exp_difference
//! beta = 1
//! ```

use crate::CliError;
use heavytraffic::walksim::{PerturbationLaw, PerturbationSpec};
use heavytraffic::JumpSpec;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const SECTIONS: [&str; 4] = ["run", "spec", "tolerances", "perturbation"];

/// Sections and their keys, sorted by name.
pub type Sections = BTreeMap<String, BTreeMap<String, String>>;

pub fn parse_sections(text: &str) -> Result<Sections, CliError> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| config_err(line_no, format!("malformed section header '{line}'")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(config_err(line_no, format!("unknown section [{name}]")));
            }
            if out.contains_key(name) {
                return Err(config_err(line_no, format!("section [{name}] appears twice")));
            }
            out.insert(name.to_string(), BTreeMap::new());
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(config_err(line_no, "empty key"));
        }
        let section = current
            .as_ref()
            .ok_or_else(|| config_err(line_no, format!("key '{key}' appears before any section")))?;
        let map = out.get_mut(section).expect("section inserted on header");
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(config_err(line_no, format!("duplicate key '{key}' in [{section}]")));
        }
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn config_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("line {line}: {}", msg.into()))
}

/// Acceptance thresholds; every field can be overridden under `[tolerances]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// KS bound on the smallest drift of a `limit` run.
    pub ks: f64,
    /// Allowed `|n V(c_n) / c_n^2 - 1|`.
    pub relation: f64,
    pub slope_c: f64,
    pub slope_n: f64,
    /// Allowed distance of the tail slope from `1 - alpha`.
    pub tail_slope: f64,
    pub perturbation_ks: f64,
    pub mstar_ks: f64,
    /// Standard-error multiple in the Laplace comparison.
    pub laplace_stderr: f64,
    /// Largest max/min ratio of `C_hat` across `n` at fixed `x / c_n`.
    pub variation: f64,
    /// Largest relative change of `C_hat` under trial doubling.
    pub doubling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ks: 0.05,
            relation: 0.01,
            slope_c: 0.02,
            slope_n: 0.1,
            tail_slope: 0.15,
            perturbation_ks: 0.03,
            mstar_ks: 0.03,
            laplace_stderr: 2.0,
            variation: 2.0,
            doubling: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: JumpSpec,
    pub a_grid: Vec<f64>,
    /// Horizon in units of `n(a)` for walks, or in limit time for `mstar`.
    pub t: f64,
    pub trials: u64,
    pub seed: u64,
    pub mu_grid: Vec<f64>,
    pub eps: f64,
    pub out: Option<PathBuf>,
    pub max_steps: Option<u128>,
    pub n_lo: u64,
    pub n_hi: u64,
    pub n_grid: Vec<u64>,
    pub x_multiples: Vec<f64>,
    pub grid_steps: u64,
    pub laplace_t: f64,
    pub laplace_nodes: usize,
    pub laplace_samples: u64,
    /// Horizon of the exact limit sampler used for calibration and two-sample KS.
    pub limit_t: f64,
    pub limit_trials: u64,
    pub tolerances: Tolerances,
    pub perturbation: Option<PerturbationSpec>,
    /// Every section as read, for the manifest echo and hash.
    pub echo: Sections,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections = parse_sections(text)?;
        let echo = sections.clone();

        let spec_pairs: Vec<(String, String)> = sections
            .remove("spec")
            .ok_or_else(|| CliError::Config("missing [spec] section".into()))?
            .into_iter()
            .collect();
        let spec = JumpSpec::from_kv(&spec_pairs).map_err(|e| CliError::Config(e.to_string()))?;

        let mut run = Section::new("run", sections.remove("run").unwrap_or_default());
        let trials = run.parse_or("trials", 10_000u64)?;
        let mut cfg = RunConfig {
            spec,
            a_grid: run.list_or("a_grid", vec![])?,
            t: run.parse_or("t", 20.0)?,
            trials,
            seed: run.parse_or("seed", 1u64)?,
            mu_grid: run.list_or("mu_grid", vec![0.5, 1.0, 2.0])?,
            eps: run.parse_or("eps", 0.01)?,
            out: run.take("out").map(PathBuf::from),
            max_steps: run.parse_opt("max_steps")?,
            n_lo: run.parse_or("n_lo", 10u64)?,
            n_hi: run.parse_or("n_hi", 10_000_000u64)?,
            n_grid: run.list_or("n_grid", vec![100u64, 1_000, 10_000])?,
            x_multiples: run.list_or("x_multiples", vec![1.0, 2.0, 4.0])?,
            grid_steps: run.parse_or("grid_steps", 1_000u64)?,
            laplace_t: run.parse_or("laplace_t", 400.0)?,
            laplace_nodes: run.parse_or("laplace_nodes", 257usize)?,
            laplace_samples: run.parse_or("laplace_samples", 20_000u64)?,
            limit_t: run.parse_or("limit_t", 1e8)?,
            limit_trials: run.parse_or("limit_trials", trials)?,
            tolerances: Tolerances::default(),
            perturbation: None,
            echo,
        };
        run.finish()?;

        let mut tol = Section::new("tolerances", sections.remove("tolerances").unwrap_or_default());
        let d = Tolerances::default();
        cfg.tolerances = Tolerances {
            ks: tol.parse_or("ks", d.ks)?,
            relation: tol.parse_or("relation", d.relation)?,
            slope_c: tol.parse_or("slope_c", d.slope_c)?,
            slope_n: tol.parse_or("slope_n", d.slope_n)?,
            tail_slope: tol.parse_or("tail_slope", d.tail_slope)?,
            perturbation_ks: tol.parse_or("perturbation_ks", d.perturbation_ks)?,
            mstar_ks: tol.parse_or("mstar_ks", d.mstar_ks)?,
            laplace_stderr: tol.parse_or("laplace_stderr", d.laplace_stderr)?,
            variation: tol.parse_or("variation", d.variation)?,
            doubling: tol.parse_or("doubling", d.doubling)?,
        };
        tol.finish()?;

        if let Some(map) = sections.remove("perturbation") {
            let mut p = Section::new("perturbation", map);
            let law_name = p
                .take("law")
                .ok_or_else(|| CliError::Config("[perturbation] needs 'law'".into()))?;
            let b = p.parse_or("b", 1.0)?;
            let law = match law_name.as_str() {
                "uniform" => PerturbationLaw::Uniform { b },
                "rademacher" => PerturbationLaw::Rademacher { b },
                other => {
                    return Err(CliError::Config(format!(
                        "[perturbation] unknown law '{other}' (expected uniform or rademacher)"
                    )))
                }
            };
            let gamma = p.parse_or("gamma", 3.0)?;
            p.finish()?;
            cfg.perturbation = Some(PerturbationSpec::new(law, gamma).map_err(|e| CliError::Config(e.to_string()))?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("t must be positive, got {}", self.t));
        }
        if self.a_grid.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("a_grid entries must be positive".into());
        }
        if self.mu_grid.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return bad("mu_grid entries must be nonnegative".into());
        }
        if !(self.n_lo >= 1 && self.n_lo < self.n_hi) {
            return bad(format!("need 1 <= n_lo < n_hi, got {} and {}", self.n_lo, self.n_hi));
        }
        if self.limit_trials == 0 || self.grid_steps == 0 {
            return bad("limit_trials and grid_steps must be positive".into());
        }
        Ok(())
    }

    /// Lines of the canonical `[section]` / `key = value` form, sorted.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for (name, map) in &self.echo {
            s.push_str(&format!("[{name}]\n"));
            for (k, v) in map {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s
    }
}

struct Section {
    name: &'static str,
    map: BTreeMap<String, String>,
}

impl Section {
    fn new(name: &'static str, map: BTreeMap<String, String>) -> Self {
        Self { name, map }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse_opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(raw) => parse_scalar(&raw)
                .map(Some)
                .ok_or_else(|| CliError::Config(format!("[{}] {key}: cannot parse '{raw}'", self.name))),
        }
    }

    fn parse_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    fn list_or<T: std::str::FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(raw) if raw.trim().is_empty() => Ok(vec![]),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    parse_scalar(item.trim()).ok_or_else(|| {
                        CliError::Config(format!("[{}] {key}: cannot parse '{}'", self.name, item.trim()))
                    })
                })
                .collect(),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(key) => Err(CliError::Config(format!("unknown key '{key}' in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

/// Integers also accept `1e5`-style literals when they are exact.
fn parse_scalar<T: std::str::FromStr>(raw: &str) -> Option<T> {
    if let Ok(v) = raw.parse::<T>() {
        return Some(v);
    }
    let x: f64 = raw.parse().ok()?;
    if x.fract() == 0.0 && x.abs() < 1e18 {
        format!("{}", x as i128).parse().ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[run]\na_grid = 0.4, 0.2\ntrials = 1e3\n\n[spec]\nkind = exp_difference\nbeta = 1\n";

    #[test]
    fn parses_sections_lists_and_scientific_integers() {
        let cfg = RunConfig::parse(BASE).unwrap();
        assert_eq!(cfg.a_grid, vec![0.4, 0.2]);
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.spec, JumpSpec::exp_difference(1.0).unwrap());
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let err = RunConfig::parse(&format!("{BASE}[tolerances]\nkss = 0.1\n")).unwrap_err();
        assert!(err.to_string().contains("unknown key 'kss'"), "{err}");
        assert!(RunConfig::parse(&format!("{BASE}[extra]\n")).is_err());
        assert!(RunConfig::parse(&BASE.replace("beta = 1", "beta = 1\ngamma = 2")).is_err());
    }

    #[test]
    fn duplicates_and_orphans_are_rejected() {
        assert!(RunConfig::parse(&BASE.replace("trials = 1e3", "trials = 1\ntrials = 2")).is_err());
        assert!(RunConfig::parse(&format!("seed = 3\n{BASE}")).is_err());
        assert!(RunConfig::parse("[run]\ntrials = 5\n").is_err());
    }

    #[test]
    fn bad_values_are_configuration_errors() {
        for (from, to) in [
            ("trials = 1e3", "trials = 0"),
            ("trials = 1e3", "trials = -1"),
            ("trials = 1e3", "trials = 1.5"),
            ("a_grid = 0.4, 0.2", "a_grid = 0.1, x"),
            ("a_grid = 0.4, 0.2", "a_grid = -0.1"),
        ] {
            let res = RunConfig::parse(&BASE.replace(from, to));
            assert!(matches!(res, Err(CliError::Config(_))), "{to}");
        }
    }

    #[test]
    fn comments_are_ignored_and_echo_is_canonical() {
        let a = RunConfig::parse(&format!("# header\n{BASE}")).unwrap();
        let b = RunConfig::parse(&BASE.replace("trials = 1e3", "trials = 1e3   ; inline")).unwrap();
        assert_eq!(a.canonical_text(), b.canonical_text());
    }

    #[test]
    fn perturbation_section() {
        let cfg = RunConfig::parse(&format!("{BASE}[perturbation]\nlaw = uniform\nb = 1\n")).unwrap();
        let p = cfg.perturbation.unwrap();
        assert_eq!(p.law(), PerturbationLaw::Uniform { b: 1.0 });
        assert!(RunConfig::parse(&format!("{BASE}[perturbation]\nlaw = cauchy\n")).is_err());
    }
}
