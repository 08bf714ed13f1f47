//! Norming sequence `c_n` and heavy-traffic time scale `n(a)`.
//!
//! `c_n` is the last exit of `u -> V(u)/u^2` above level `1/n`, which agrees
//! with the first-passage definition whenever that ratio is eventually
//! decreasing and stays well defined for laws whose support avoids a
//! neighbourhood of zero. `n(a)` is the first `n` with `c_n <= a n`.

use crate::error::{invalid, Error, Result};
use crate::jumps::JumpSpec;
use crate::stats::linear_fit;

const REL_TOL: f64 = 1e-9;
const U_MAX: f64 = 1e30;
const N_MAX: u64 = 1_000_000_000_000;
/// Default upper limit for admissible drifts.
pub const DEFAULT_A_MAX: f64 = 1.0;

fn ratio(spec: &JumpSpec, u: f64) -> Result<f64> {
    Ok(spec.truncated_second_moment(u)? / (u * u))
}

/// `c_n = sup{u > 0 : V(u)/u^2 > 1/n}`.
///
/// When the level set is empty the smallest support radius of `|X|` is
/// returned; if that radius is zero the set is degenerate and an error is
/// reported instead.
pub fn c_of_n(spec: &JumpSpec, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("c_n needs n >= 1"));
    }
    let level = 1.0 / n as f64;
    let scale = spec.natural_scale();

    // Grow until the ratio is at or below the level on three consecutive doublings.
    let mut hi = scale * (n as f64).sqrt().max(1.0);
    loop {
        if hi > U_MAX {
            return Err(Error::BracketNotFound { n });
        }
        if ratio(spec, hi)? <= level && ratio(spec, 2.0 * hi)? <= level && ratio(spec, 4.0 * hi)? <= level {
            break;
        }
        hi *= 2.0;
    }

    // Walk down until the ratio exceeds the level.
    let step = 2f64.powf(0.25);
    let floor = scale * 1e-12;
    let mut lo = hi;
    loop {
        lo /= step;
        if lo < floor {
            let radius = spec.min_abs_support();
            return if radius > 0.0 {
                Ok(radius)
            } else {
                Err(Error::DegenerateLevelSet { n })
            };
        }
        if ratio(spec, lo)? > level {
            break;
        }
        hi = lo;
    }

    while hi - lo > REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if ratio(spec, mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn crosses(spec: &JumpSpec, n: u64, a: f64) -> Result<bool> {
    match c_of_n(spec, n) {
        Ok(c) => Ok(c <= a * n as f64),
        Err(Error::DegenerateLevelSet { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `n(a) = min{n >= 1 : c_n <= a n}` with drift limit [`DEFAULT_A_MAX`].
pub fn n_of_a(spec: &JumpSpec, a: f64) -> Result<u64> {
    n_of_a_bounded(spec, a, DEFAULT_A_MAX)
}

pub fn n_of_a_bounded(spec: &JumpSpec, a: f64, a_max: f64) -> Result<u64> {
    if !(a > 0.0 && a < a_max) {
        return Err(invalid(format!("drift a = {a} outside (0, {a_max})")));
    }
    // c_n / n is eventually decreasing, so the crossing predicate is monotone
    // past the first few n; exponential search then bisection on integers.
    let mut hi = 1u64;
    while !crosses(spec, hi, a)? {
        if hi >= N_MAX {
            return Err(Error::NoCrossing { a });
        }
        hi = (hi * 2).min(N_MAX);
    }
    let mut lo = hi / 2; // predicate false at lo (or lo == 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if crosses(spec, mid, a)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One `(a, n(a), c_{n(a)})` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftRow {
    pub a: f64,
    pub n: u64,
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct NormalizationTable {
    spec: JumpSpec,
    alpha: f64,
    entries: Vec<(u64, f64)>,
    drift_rows: Vec<DriftRow>,
}

impl NormalizationTable {
    /// Tabulates `c_n` on a geometric grid (ratio 1.1) over `[n_lo, n_hi]` and
    /// solves `n(a)` exactly for every drift in `drifts`.
    pub fn build(spec: &JumpSpec, n_lo: u64, n_hi: u64, drifts: &[f64]) -> Result<Self> {
        if n_lo == 0 || n_hi < n_lo {
            return Err(invalid(format!("bad n range [{n_lo}, {n_hi}]")));
        }
        let mut grid = Vec::new();
        let mut x = n_lo as f64;
        while x.round() as u64 <= n_hi {
            let n = x.round() as u64;
            if grid.last() != Some(&n) {
                grid.push(n);
            }
            x *= 1.1;
        }
        if grid.last() != Some(&n_hi) {
            grid.push(n_hi);
        }
        let mut entries = Vec::with_capacity(grid.len());
        for n in grid {
            match c_of_n(spec, n) {
                Ok(c) => entries.push((n, c)),
                Err(Error::DegenerateLevelSet { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let drift_rows = drifts
            .iter()
            .map(|&a| {
                let n = n_of_a(spec, a)?;
                Ok(DriftRow {
                    a,
                    n,
                    c: c_of_n(spec, n)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: *spec,
            alpha: spec.alpha(),
            entries,
            drift_rows,
        })
    }

    pub fn spec(&self) -> &JumpSpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn drift_rows(&self) -> &[DriftRow] {
        &self.drift_rows
    }

    /// Log-log interpolation between grid points; exact at grid points.
    pub fn interpolate(&self, n: u64) -> Option<f64> {
        let i = self.entries.partition_point(|&(m, _)| m < n);
        let (n1, c1) = *self.entries.get(i)?;
        if n1 == n {
            return Some(c1);
        }
        let (n0, c0) = *self.entries.get(i.checked_sub(1)?)?;
        let t = ((n as f64).ln() - (n0 as f64).ln()) / ((n1 as f64).ln() - (n0 as f64).ln());
        Some((c0.ln() + t * (c1.ln() - c0.ln())).exp())
    }
}

/// Regular-variation slopes of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RvSlopes {
    /// Slope of `log c_n` against `log n`; tends to `1/alpha`.
    pub slope_c: f64,
    /// Slope of `log n(a)` against `log a`; tends to `-alpha/(alpha-1)`.
    pub slope_n: f64,
}

pub fn rv_slope_check(table: &NormalizationTable) -> Result<RvSlopes> {
    let entries = table.entries();
    let (first, last) = match (entries.first(), entries.last()) {
        (Some(f), Some(l)) => (f.0 as f64, l.0 as f64),
        _ => return Err(Error::InsufficientSpan("empty c_n table".into())),
    };
    if (last / first).log10() < 3.0 - 1e-9 {
        return Err(Error::InsufficientSpan(format!(
            "c_n table spans n in [{first}, {last}], need three decades"
        )));
    }
    let rows = table.drift_rows();
    let (amin, amax) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.a), hi.max(r.a)));
    if rows.len() < 2 || amax / amin < 10.0 - 1e-9 {
        return Err(Error::InsufficientSpan("drift grid must span a decade of a".into()));
    }
    let pts: Vec<_> = entries.iter().map(|&(n, c)| ((n as f64).ln(), c.ln())).collect();
    let slope_c = linear_fit(&pts)?.slope;
    let pts: Vec<_> = rows.iter().map(|r| (r.a.ln(), (r.n as f64).ln())).collect();
    let slope_n = linear_fit(&pts)?.slope;
    Ok(RvSlopes { slope_c, slope_n })
}
