//! Radial projections over a centered spectrum.
//!
//! A projection at angle `theta` sums spectrum samples along the ray
//! `(c_y + s cos theta, c_x - s sin theta)` for `s = start..=R`, where
//! `R = min(height, width) / 2`. Samples outside the array contribute nothing.
//! With `start = 0` this is the initial projection; skipping the first `W`
//! samples discards the DC bin and the low frequencies around it.

use alloc::vec;
use alloc::vec::Vec;

use crate::spectrum::MagnitudeSpectrum;
use crate::{Error, Result};

/// Largest grid step that still resolves the 0.1 degree correctness threshold.
pub const MAX_ANGLE_STEP: f64 = 0.1;

/// Evenly spaced candidate angles in degrees, `min, min + step, ... <= max`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    theta_min: f64,
    theta_max: f64,
    step: f64,
    angles: Vec<f64>,
}

// Grid points are snapped to 1e-9 degrees so that values such as 10.0 or 0.0
// come out exact instead of carrying the representation error of `step`.
fn snap(angle: f64) -> f64 {
    libm::round(angle * 1e9) / 1e9
}

impl AngleGrid {
    pub fn new(theta_min: f64, theta_max: f64, step: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite() && step.is_finite()) {
            return Err(Error::invalid("angle grid bounds must be finite"));
        }
        if theta_min >= theta_max {
            return Err(Error::invalid("theta_min must be below theta_max"));
        }
        if !(step > 0.0 && step <= MAX_ANGLE_STEP) {
            return Err(Error::invalid("angle step must lie in (0, 0.1]"));
        }
        let count = libm::floor((theta_max - theta_min) / step + 1e-9) as usize + 1;
        let angles = (0..count)
            .map(|i| snap(theta_min + i as f64 * step))
            .filter(|&a| a <= theta_max + 1e-9)
            .collect();
        Ok(Self {
            theta_min,
            theta_max,
            step,
            angles,
        })
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// How a ray position between bins is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sampling {
    /// Round both coordinates to the nearest bin.
    #[default]
    Nearest,
    /// Bilinear interpolation, treating out-of-range bins as zero.
    Bilinear,
}

/// One projection value per grid angle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProjectionProfile {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProjectionProfile {
    pub fn argmax(&self) -> f64 {
        argmax_angle(&self.angles, &self.values)
    }
}

/// Angle of the largest value; ties go to the smallest angle.
///
/// Panics if `angles` is empty or the slices differ in length.
pub fn argmax_angle(angles: &[f64], values: &[f64]) -> f64 {
    assert!(!angles.is_empty() && angles.len() == values.len());
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    angles[best]
}

/// Which candidate the aggregation rule returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Branch {
    /// The initial projection won: the candidates disagree by more than `D`.
    Initial,
    /// The correction projection won.
    Correction,
}

/// Whether two angles differ by more than `distance`.
///
/// The comparison is done in whole nano-degrees so that decimal ties such as
/// `|5.45 - 5.0|` against `0.45` are treated as equal.
pub fn differs_by_more_than(theta_a: f64, theta_b: f64, distance: f64) -> bool {
    let nanos = |x: f64| libm::round(x * 1e9) as i64;
    nanos((theta_a - theta_b).abs()) > nanos(distance)
}

/// Keep the correction angle unless it strays more than `distance` from the
/// initial angle.
pub fn aggregate(theta_a: f64, theta_b: f64, distance: f64) -> (f64, Branch) {
    if differs_by_more_than(theta_a, theta_b, distance) {
        (theta_a, Branch::Initial)
    } else {
        (theta_b, Branch::Correction)
    }
}

/// Unit ray directions `(cos, sin)` for each grid angle.
fn directions(grid: &AngleGrid) -> Vec<(f64, f64)> {
    grid.angles()
        .iter()
        .map(|a| {
            let r = a.to_radians();
            (libm::cos(r), libm::sin(r))
        })
        .collect()
}

struct Ray<'a> {
    spectrum: &'a MagnitudeSpectrum,
    sampling: Sampling,
    cy: f64,
    cx: f64,
}

impl Ray<'_> {
    #[inline]
    fn sample(&self, s: usize, cos: f64, sin: f64) -> f64 {
        let y = self.cy + s as f64 * cos;
        let x = self.cx - s as f64 * sin;
        match self.sampling {
            Sampling::Nearest => self.at(libm::round(y), libm::round(x)),
            Sampling::Bilinear => {
                let (y0, x0) = (libm::floor(y), libm::floor(x));
                let (fy, fx) = (y - y0, x - x0);
                let top = self.at(y0, x0) * (1.0 - fx) + self.at(y0, x0 + 1.0) * fx;
                let bottom = self.at(y0 + 1.0, x0) * (1.0 - fx) + self.at(y0 + 1.0, x0 + 1.0) * fx;
                top * (1.0 - fy) + bottom * fy
            }
        }
    }

    #[inline]
    fn at(&self, row: f64, col: f64) -> f64 {
        let m = self.spectrum;
        if row < 0.0 || col < 0.0 || row >= m.height() as f64 || col >= m.width() as f64 {
            0.0
        } else {
            m.get(row as usize, col as usize)
        }
    }
}

fn check_input(m: &MagnitudeSpectrum, start_offset: usize) -> Result<()> {
    if !m.is_centered() {
        return Err(Error::NotCentered);
    }
    if start_offset >= m.radius() {
        return Err(Error::invalid(alloc::format!(
            "start offset {start_offset} must be below the projection radius {}",
            m.radius()
        )));
    }
    Ok(())
}

/// Radial projection of a centered spectrum at every grid angle.
///
/// Terms are accumulated from the outer end of the ray inwards, the same
/// order [`RayTable`] uses, so both give bit-identical profiles.
pub fn radial_projection(
    m: &MagnitudeSpectrum,
    grid: &AngleGrid,
    start_offset: usize,
    sampling: Sampling,
) -> Result<ProjectionProfile> {
    check_input(m, start_offset)?;
    let radius = m.radius();
    let ray = Ray {
        spectrum: m,
        sampling,
        cy: m.c_y() as f64,
        cx: m.c_x() as f64,
    };
    let values = directions(grid)
        .into_iter()
        .map(|(cos, sin)| {
            let mut acc = 0.0;
            for s in (start_offset..=radius).rev() {
                acc += ray.sample(s, cos, sin);
            }
            acc
        })
        .collect();
    Ok(ProjectionProfile {
        angles: grid.angles().to_vec(),
        values,
    })
}

/// Per-angle suffix sums along every ray of a spectrum.
///
/// Once built, the projection for any start offset costs one lookup per
/// angle, which makes sweeps over the window offset cheap.
#[derive(Debug, Clone)]
pub struct RayTable {
    angles: Vec<f64>,
    // `sums[i * stride + s]` = sum of samples `s..=radius` along ray `i`.
    sums: Vec<f64>,
    stride: usize,
}

impl RayTable {
    pub fn new(m: &MagnitudeSpectrum, grid: &AngleGrid, sampling: Sampling) -> Result<Self> {
        check_input(m, 0)?;
        let radius = m.radius();
        let stride = radius + 2;
        let ray = Ray {
            spectrum: m,
            sampling,
            cy: m.c_y() as f64,
            cx: m.c_x() as f64,
        };
        let mut sums = vec![0.0; grid.len() * stride];
        for (i, (cos, sin)) in directions(grid).into_iter().enumerate() {
            let row = &mut sums[i * stride..(i + 1) * stride];
            let mut acc = 0.0;
            for s in (0..=radius).rev() {
                acc += ray.sample(s, cos, sin);
                row[s] = acc;
            }
        }
        Ok(Self {
            angles: grid.angles().to_vec(),
            sums,
            stride,
        })
    }

    /// Projection radius of the underlying spectrum.
    pub fn radius(&self) -> usize {
        self.stride - 2
    }

    /// Profile for rays starting `start_offset` samples from the center.
    ///
    /// Offsets past the radius give an all-zero profile.
    pub fn profile(&self, start_offset: usize) -> ProjectionProfile {
        let s = start_offset.min(self.stride - 1);
        let values = (0..self.angles.len()).map(|i| self.sums[i * self.stride + s]).collect();
        ProjectionProfile {
            angles: self.angles.clone(),
            values,
        }
    }

    /// `argmax_angle(self.profile(start_offset))` without allocating.
    pub fn argmax(&self, start_offset: usize) -> f64 {
        let s = start_offset.min(self.stride - 1);
        let mut best = 0;
        let mut best_value = self.sums[s];
        for i in 1..self.angles.len() {
            let v = self.sums[i * self.stride + s];
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
        self.angles[best]
    }
}
