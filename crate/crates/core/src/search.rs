//! Candidate sets and selection rules for tuning `W` and `D`.
//!
//! `W` is tuned first with the correction projection as the only output:
//! 20 coarse offsets in `[0, H/3]`, then 20 fine offsets within `H/15` of
//! the coarse winner, keeping the offset with the highest CE. `D` is then
//! swept with the full aggregation rule and the lowest AED wins.
//!
//! The functions here are pure; scoring a candidate is left to the caller.

use alloc::vec::Vec;

/// Candidates per search stage.
pub const STAGE_SIZE: usize = 20;

/// Step and upper end of the `D` sweep, in degrees.
pub const DISTANCE_STEP: f64 = 0.05;
pub const DISTANCE_MAX: f64 = 3.0;

fn spread(lo: usize, hi: usize) -> Vec<usize> {
    let span = (hi - lo) as f64;
    (0..STAGE_SIZE)
        .map(|i| lo + libm::round(i as f64 * span / (STAGE_SIZE - 1) as f64) as usize)
        .collect()
}

/// Largest admissible offset for a working height, the last integer below `H/2`.
pub fn max_window(height: usize) -> usize {
    (height - 1) / 2
}

/// Half-width of the fine stage, `round(2H/30)`.
pub fn fine_deviation(height: usize) -> usize {
    libm::round(2.0 * height as f64 / 30.0) as usize
}

/// 20 evenly spaced offsets from 0 to `floor(H/3)`.
pub fn coarse_window_candidates(height: usize) -> Vec<usize> {
    spread(0, height / 3)
}

/// 20 evenly spaced offsets within `fine_deviation(H)` of `coarse`, kept
/// inside `[0, H/2)`.
pub fn fine_window_candidates(height: usize, coarse: usize) -> Vec<usize> {
    let dev = fine_deviation(height);
    let lo = coarse.saturating_sub(dev);
    let hi = (coarse + dev).min(max_window(height)).max(lo);
    spread(lo, hi)
}

/// `0, 0.05, ..., 3.0`.
pub fn distance_grid() -> Vec<f64> {
    let steps = libm::round(DISTANCE_MAX / DISTANCE_STEP) as usize;
    (0..=steps)
        .map(|i| libm::round(i as f64 * DISTANCE_STEP * 1e9) / 1e9)
        .collect()
}

/// Offset with the highest CE; ties go to the smaller offset.
///
/// Returns the winner and the `(offset, ce)` table in candidate order.
pub fn select_window(candidates: &[usize], mut ce: impl FnMut(usize) -> f64) -> (usize, Vec<(usize, f64)>) {
    assert!(!candidates.is_empty());
    let table: Vec<(usize, f64)> = candidates.iter().map(|&w| (w, ce(w))).collect();
    let mut best = table[0];
    for &(w, score) in &table[1..] {
        if score > best.1 || (score == best.1 && w < best.0) {
            best = (w, score);
        }
    }
    (best.0, table)
}

/// One row of the `D` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceScore {
    pub distance: f64,
    pub aed: f64,
    pub ce: f64,
}

/// Distance with the lowest AED, then the highest CE, then the smallest `D`.
pub fn select_distance(grid: &[f64], mut score: impl FnMut(f64) -> (f64, f64)) -> (f64, Vec<DistanceScore>) {
    assert!(!grid.is_empty());
    let table: Vec<DistanceScore> = grid
        .iter()
        .map(|&distance| {
            let (aed, ce) = score(distance);
            DistanceScore { distance, aed, ce }
        })
        .collect();
    let mut best = table[0];
    for row in &table[1..] {
        let better = row.aed < best.aed
            || (row.aed == best.aed && row.ce > best.ce)
            || (row.aed == best.aed && row.ce == best.ce && row.distance < best.distance);
        if better {
            best = *row;
        }
    }
    (best.distance, table)
}
