//! 2D DFT magnitude spectra.
//!
//! [`dft2_magnitude`] transforms at exactly the size it is given. The page
//! pipeline squares the page first so that both frequency axes share one bin
//! pitch. The transform itself is delegated to a [`Dft2d`] backend.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::image::BinaryImage;
use crate::{Error, Result};

/// Forward, unnormalized 2D DFT over a row-major buffer.
///
/// Implementations must accept arbitrary (non power-of-two) sizes and leave
/// the result in row-major order, `data[v * width + u] = F(v, u)` with
/// `F(v, u) = sum f(y, x) exp(-2 pi i (v y / height + u x / width))`.
pub trait Dft2d {
    fn forward(&self, width: usize, height: usize, data: &mut [Complex64]);
}

impl<T: Dft2d + ?Sized> Dft2d for &T {
    fn forward(&self, width: usize, height: usize, data: &mut [Complex64]) {
        (**self).forward(width, height, data)
    }
}

/// Non-negative spectrum values on a `height` x `width` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrum {
    width: usize,
    height: usize,
    values: Vec<f64>,
    centered: bool,
    normalized: bool,
}

impl MagnitudeSpectrum {
    /// Wrap raw (uncentered, unnormalized) values.
    pub fn from_raw(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Self::with_flags(width, height, values, false, false)
    }

    /// Wrap values that already sit in the centered, normalized layout.
    pub fn from_centered(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&v| v > 1.0) {
            return Err(Error::invalid("normalized spectrum values must lie in [0, 1]"));
        }
        Self::with_flags(width, height, values, true, true)
    }

    fn with_flags(width: usize, height: usize, values: Vec<f64>, centered: bool, normalized: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("spectrum dimensions must be non-zero"));
        }
        if values.len() != width * height {
            return Err(Error::invalid("spectrum length does not match dimensions"));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("spectrum values must be finite and non-negative"));
        }
        Ok(Self {
            width,
            height,
            values,
            centered,
            normalized,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Column of the DC bin once centered.
    pub fn c_x(&self) -> usize {
        self.width / 2
    }

    /// Row of the DC bin once centered.
    pub fn c_y(&self) -> usize {
        self.height / 2
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Projection radius, `min(height, width) / 2`.
    ///
    /// Rays of this length stay inside the array up to 45 degrees, so every
    /// angle in a grid sums the same number of samples. Longer rays would run
    /// past the edge sooner near the axes than near the diagonals, and a
    /// uniform noise floor would then favour the ends of a wide range.
    pub fn radius(&self) -> usize {
        self.width.min(self.height) / 2
    }
}

/// Raw `|F(u, v)|` of a binary image, DC at index `(0, 0)`.
pub fn dft2_magnitude(backend: &impl Dft2d, image: &BinaryImage) -> MagnitudeSpectrum {
    let (w, h) = (image.width(), image.height());
    let mut data: Vec<Complex64> = image
        .pixels()
        .iter()
        .map(|&p| Complex64::new(f64::from(p), 0.0))
        .collect();
    backend.forward(w, h, &mut data);
    let values = data.iter().map(|c| libm::hypot(c.re, c.im)).collect();
    MagnitudeSpectrum {
        width: w,
        height: h,
        values,
        centered: false,
        normalized: false,
    }
}

/// Elementwise square of a raw magnitude spectrum.
pub fn power_spectrum(raw: &MagnitudeSpectrum) -> Result<MagnitudeSpectrum> {
    if raw.centered || raw.normalized {
        return Err(Error::invalid("power spectrum must be formed from raw magnitudes"));
    }
    Ok(MagnitudeSpectrum {
        values: raw.values.iter().map(|v| v * v).collect(),
        ..raw.clone()
    })
}

/// Move the DC bin from `(0, 0)` to `(height / 2, width / 2)`.
pub(crate) fn quadrant_swap(width: usize, height: usize, values: &[f64]) -> Vec<f64> {
    let (cx, cy) = (width / 2, height / 2);
    let mut out = vec![0.0; values.len()];
    for y in 0..height {
        let dst_row = ((y + cy) % height) * width;
        let src_row = &values[y * width..(y + 1) * width];
        for (x, &v) in src_row.iter().enumerate() {
            out[dst_row + (x + cx) % width] = v;
        }
    }
    out
}

/// `v <- ln(1 + v)`, then divide by the maximum. All-zero input stays zero.
pub(crate) fn log_normalize(values: &mut [f64]) {
    let mut max = 0.0f64;
    for v in values.iter_mut() {
        *v = libm::log1p(*v);
        max = max.max(*v);
    }
    if max > 0.0 {
        for v in values.iter_mut() {
            *v /= max;
        }
    }
}

/// Quadrant swap, log compression and max scaling of a raw spectrum.
pub fn normalize_and_center(raw: &MagnitudeSpectrum) -> Result<MagnitudeSpectrum> {
    if raw.centered || raw.normalized {
        return Err(Error::invalid("spectrum is already centered or normalized"));
    }
    let mut values = quadrant_swap(raw.width, raw.height, &raw.values);
    log_normalize(&mut values);
    Ok(MagnitudeSpectrum {
        width: raw.width,
        height: raw.height,
        values,
        centered: true,
        normalized: true,
    })
}
