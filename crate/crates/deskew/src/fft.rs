//! `rustfft` backend for the estimator.

use std::cell::RefCell;

use deskew_core::Dft2d;
use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Row-column 2D FFT on top of `rustfft`, with a per-thread plan cache.
#[derive(Debug, Clone, Copy, Default)]
pub struct RustFft;

impl Dft2d for RustFft {
    fn forward(&self, width: usize, height: usize, data: &mut [Complex64]) {
        assert_eq!(data.len(), width * height);
        let (rows, cols) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(width), p.plan_fft_forward(height))
        });
        rows.process(data);

        // Columns are transformed as rows of the transpose.
        let mut transposed = vec![Complex64::default(); data.len()];
        transpose(width, height, data, &mut transposed);
        cols.process(&mut transposed);
        transpose(height, width, &transposed, data);
    }
}

fn transpose(width: usize, height: usize, src: &[Complex64], dst: &mut [Complex64]) {
    const TILE: usize = 32;
    for y0 in (0..height).step_by(TILE) {
        for x0 in (0..width).step_by(TILE) {
            for y in y0..(y0 + TILE).min(height) {
                for x in x0..(x0 + TILE).min(width) {
                    dst[x * height + y] = src[y * width + x];
                }
            }
        }
    }
}
