//! Batch experiments over the `heavytraffic` library: each command reads a
//! run configuration, writes CSV tables (and optionally SVG plots) and a
//! JSON manifest with content hashes and pass flags.

pub mod commands;
pub mod config;
pub mod output;

use clap::ValueEnum;
use config::RunConfig;
use output::{sha256_hex, write_atomic, FileEntry, Manifest};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "HEAVYTRAFFIC_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] heavytraffic::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// `2` for anything the user can fix in the configuration, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        use heavytraffic::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidParameter(_)
                | E::NotCentered
                | E::StepBudget { .. }
                | E::NoCrossing { .. }
                | E::InsufficientSpan(_)
                | E::DegenerateLevelSet { .. },
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Normalize,
    Limit,
    Spitzer,
    Inequality,
    Mstar,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Normalize => "normalize",
            Command::Limit => "limit",
            Command::Spitzer => "spitzer",
            Command::Inequality => "inequality",
            Command::Mstar => "mstar",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: bool,
    pub max_steps: Option<u128>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.all_pass {
            0
        } else {
            1
        }
    }
}

/// Sizes the global thread pool from [`WORKERS_ENV`] when it is set.
pub fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))
}

pub fn execute(opts: &RunOptions) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let cfg = RunConfig::load(&opts.config)?;
    let ctx = commands::Context {
        cfg: &cfg,
        seed: opts.seed.unwrap_or(cfg.seed),
        budget: opts
            .max_steps
            .or(cfg.max_steps)
            .unwrap_or(heavytraffic::rng::DEFAULT_STEP_BUDGET),
        svg: opts.svg,
    };
    let outcome = match opts.command {
        Command::Normalize => commands::normalize(&ctx)?,
        Command::Limit => commands::limit(&ctx)?,
        Command::Spitzer => commands::spitzer(&ctx)?,
        Command::Inequality => commands::inequality(&ctx)?,
        Command::Mstar => commands::mstar(&ctx)?,
    };

    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;
    let mut files = Vec::with_capacity(outcome.artifacts.len());
    for art in &outcome.artifacts {
        write_atomic(&out_dir.join(&art.name), &art.bytes)?;
        files.push(FileEntry {
            name: art.name.clone(),
            sha256: sha256_hex(&art.bytes),
            bytes: art.bytes.len(),
        });
    }
    let all_pass = outcome.pass.values().all(|&p| p);
    let manifest = Manifest {
        tool: "heavytraffic".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: opts.command.name().into(),
        config_sha256: sha256_hex(cfg.canonical_text().as_bytes()),
        config: cfg.echo.clone(),
        seed: ctx.seed,
        max_steps: ctx.budget.to_string(),
        workers: rayon::current_num_threads(),
        wall_time_s: started.elapsed().as_secs_f64(),
        metrics: outcome.metrics,
        pass: outcome.pass,
        all_pass,
        files,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
    write_atomic(&manifest_path(&out_dir), &json)?;
    Ok(RunReport { out_dir, manifest })
}

pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join("manifest.json")
}
