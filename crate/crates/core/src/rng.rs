//! Deterministic random substreams.
//!
//! Every Monte Carlo trial owns its own ChaCha8 stream keyed by
//! `(seed, domain)` and indexed by the trial number, so results never depend
//! on how trials are grouped into chunks or how many workers run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per parallel work item.
pub const CHUNK_TRIALS: u64 = 256;

/// Domain tags keep unrelated simulations on disjoint key material.
pub mod domain {
    pub const WALK: u64 = 0x5741_4c4b;
    pub const PERTURBATION: u64 = 0x5045_5254;
    pub const STABLE_LIMIT: u64 = 0x5354_424c;
    pub const INEQUALITY: u64 = 0x494e_4551;
    pub const SAMPLER_TEST: u64 = 0x5445_5354;
}

/// The generator for one trial.
pub fn trial_rng(seed: u64, domain: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.rotate_left(32));
    rng.set_stream(trial);
    rng
}

/// Runs `work` over consecutive trial ranges in parallel and returns the
/// per-chunk results in chunk order.
pub fn map_chunks<T, F>(trials: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync + Send,
{
    map_chunks_sized(trials, CHUNK_TRIALS, work)
}

pub fn map_chunks_sized<T, F>(trials: u64, chunk: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = trials.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(trials);
            work(lo..hi)
        })
        .collect()
}

/// Rejects `steps_per_trial * trials` above `budget`.
pub fn check_budget(steps_per_trial: u64, trials: u64, budget: u128) -> crate::Result<()> {
    let requested = steps_per_trial as u128 * trials as u128;
    if requested > budget {
        let fit = (budget / steps_per_trial.max(1) as u128).max(1);
        return Err(crate::Error::StepBudget {
            requested,
            budget,
            suggestion: format!("reduce trials to at most {fit}, shorten the horizon, or raise the step budget"),
        });
    }
    Ok(())
}

/// Default cap on jump evaluations per command.
pub const DEFAULT_STEP_BUDGET: u128 = 10_000_000_000;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut r1 = trial_rng(7, domain::WALK, 3);
        let mut r2 = trial_rng(7, domain::WALK, 3);
        let mut r3 = trial_rng(7, domain::WALK, 4);
        let x1: u64 = r1.random();
        assert_eq!(x1, r2.random::<u64>());
        assert_ne!(x1, r3.random::<u64>());
        let mut r4 = trial_rng(7, domain::PERTURBATION, 3);
        assert_ne!(x1, r4.random::<u64>());
    }

    #[test]
    fn chunk_results_are_ordered_and_complete() {
        let out = map_chunks_sized(1000, 64, |r| (r.start, r.end));
        assert_eq!(out.first(), Some(&(0, 64)));
        assert_eq!(out.last(), Some(&(960, 1000)));
        let total: u64 = out.iter().map(|(a, b)| b - a).sum();
        assert_eq!(total, 1000);
    }

    #[test]
    fn budget_refusal_suggests_reduction() {
        assert!(check_budget(10, 10, 100).is_ok());
        let err = check_budget(10, 11, 100).unwrap_err();
        assert!(err.to_string().contains("at most 10"));
    }
}
