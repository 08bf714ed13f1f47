//! Heavy-traffic limits for maxima of asymptotically stable random walks.
//!
//! For a centered walk `S_k` in the domain of attraction of an
//! `alpha`-stable law (`1 < alpha <= 2`) and drift `a > 0`, the maximum
//! `M(a) = sup_k (S_k - k a)` scaled by `c_{n(a)}` converges to
//! `M* = sup_t (xi_t - t)` as `a -> 0`. This crate computes the normalising
//! machinery ([`normalize`]), simulates truncated maxima with tail
//! certificates ([`walksim`]), evaluates the Spitzer series ([`spitzer`]) and
//! the limit law ([`limits`]), and checks the maximal inequality that
//! controls the truncation ([`inequality`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inequality;
pub mod jumps;
pub mod limits;
pub mod normalize;
pub mod quad;
pub mod rng;
pub mod spitzer;
pub mod stable;
pub mod stats;
pub mod walksim;

pub use error::{Error, Result};
pub use jumps::{JumpKind, JumpSpec};
pub use stable::{Skew, StableLaw};
pub use stats::EmpiricalDistribution;
