//! Test-only helpers: a rustfft backend and an independent direct DFT.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::image::BinaryImage;
use crate::spectrum::Dft2d;

/// Row/column decomposition on top of rustfft.
pub struct RustFft;

impl Dft2d for RustFft {
    fn forward(&self, width: usize, height: usize, data: &mut [Complex64]) {
        let mut planner = rustfft::FftPlanner::new();
        let rows = planner.plan_fft_forward(width);
        for row in data.chunks_exact_mut(width) {
            rows.process(row);
        }
        let cols = planner.plan_fft_forward(height);
        let mut column = Vec::with_capacity(height);
        for x in 0..width {
            column.clear();
            column.extend((0..height).map(|y| data[y * width + x]));
            cols.process(&mut column);
            for (y, v) in column.iter().enumerate() {
                data[y * width + x] = *v;
            }
        }
    }
}

/// Direct quadruple-loop evaluation of the 2D DFT.
pub struct NaiveDft;

impl Dft2d for NaiveDft {
    fn forward(&self, width: usize, height: usize, data: &mut [Complex64]) {
        let input: Vec<Complex64> = data.to_vec();
        for v in 0..height {
            for u in 0..width {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..height {
                    for x in 0..width {
                        let phase = -2.0
                            * core::f64::consts::PI
                            * ((v * y) as f64 / height as f64 + (u * x) as f64 / width as f64);
                        acc += input[y * width + x] * Complex64::new(libm::cos(phase), libm::sin(phase));
                    }
                }
                data[v * width + u] = acc;
            }
        }
    }
}

pub fn random_binary(width: usize, height: usize, seed: u64) -> BinaryImage {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let pixels = (0..width * height)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            ((state >> 11) & 1) as u8
        })
        .collect();
    BinaryImage::new(width, height, pixels).unwrap()
}
