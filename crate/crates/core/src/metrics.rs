//! Benchmark criteria over absolute angular errors.

use alloc::vec::Vec;

use crate::{Error, Result};

/// An estimate counts as correct when its error is at most this many degrees.
pub const CE_THRESHOLD: f64 = 0.1;

// Errors are differences of decimal angles: an error that is exactly 0.1 in
// decimal can come out a few ulps above 0.1 in binary. Sums and the threshold
// test therefore work on errors rounded to whole nano-degrees.
const NANOS_PER_DEGREE: f64 = 1e9;

fn nanos(error: f64) -> u64 {
    libm::round(error * NANOS_PER_DEGREE) as u64
}

fn mean(errors: &[u64]) -> f64 {
    let total: u128 = errors.iter().map(|&e| u128::from(e)).sum();
    total as f64 / (errors.len() as f64 * NANOS_PER_DEGREE)
}

/// Summary statistics of a set of absolute errors, in degrees.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    /// Mean error (AED).
    pub aed: f64,
    /// Mean of the best `ceil(0.8 n)` errors.
    pub top80: f64,
    /// Fraction of errors within [`CE_THRESHOLD`].
    pub ce: f64,
    /// Worst error.
    pub we: f64,
    pub n: usize,
    /// All errors, ascending.
    pub sorted_errors: Vec<f64>,
}

/// Number of errors averaged by TOP80, `ceil(0.8 n)`.
pub fn top80_count(n: usize) -> usize {
    (4 * n).div_ceil(5)
}

/// Whether an absolute error meets the inclusive CE threshold.
pub fn is_correct(error: f64) -> bool {
    nanos(error) <= nanos(CE_THRESHOLD)
}

/// AED, TOP80, CE and worst error of a list of absolute errors.
///
/// Errors are rounded to whole nano-degrees first; the reported sorted
/// errors are the rounded values.
pub fn compute_metrics(errors: &[f64]) -> Result<Metrics> {
    if errors.is_empty() {
        return Err(Error::invalid("metrics need at least one error"));
    }
    if errors.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::invalid("errors must be finite and non-negative"));
    }
    let mut sorted: Vec<u64> = errors.iter().map(|&e| nanos(e)).collect();
    sorted.sort_unstable();
    let n = sorted.len();
    let k = top80_count(n);
    let limit = nanos(CE_THRESHOLD);
    let correct = sorted.iter().filter(|&&e| e <= limit).count();
    Ok(Metrics {
        aed: mean(&sorted),
        top80: mean(&sorted[..k]),
        ce: correct as f64 / n as f64,
        we: sorted[n - 1] as f64 / NANOS_PER_DEGREE,
        n,
        sorted_errors: sorted.iter().map(|&e| e as f64 / NANOS_PER_DEGREE).collect(),
    })
}
