//! The end-to-end estimator: preprocessing, spectrum, the two radial
//! projections and their aggregation, plus the ablation variants.

use alloc::vec::Vec;

use crate::image::{binarize, resize_to_height, rotate, BinaryImage, GrayImage};
use crate::projection::{aggregate, radial_projection, AngleGrid, Branch, ProjectionProfile, Sampling};
use crate::spectrum::{
    dft2_magnitude, log_normalize, normalize_and_center, power_spectrum, quadrant_swap, Dft2d, MagnitudeSpectrum,
};
use crate::{Error, Result};

/// Working heights that ship with tuned `{W, D}` values.
pub const PRESET_HEIGHTS: [u32; 5] = [1024, 1500, 2048, 3072, 4096];

const PRESETS: [(u32, usize, f64); 5] = [
    (1024, 247, 0.7),
    (1500, 328, 0.55),
    (2048, 304, 0.55),
    (3072, 307, 0.45),
    (4096, 250, 0.5),
];

/// Pages whose foreground fraction falls below this are reported as blank.
pub const MIN_FOREGROUND_FRACTION: f64 = 1e-4;

/// Smallest block side the blockwise estimator accepts.
pub const MIN_BLOCK_SIZE: usize = 32;

/// Which spectrum feeds the projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpectrumKind {
    #[default]
    Magnitude,
    /// Squared magnitudes.
    Power,
}

/// Tunable parameters of the estimator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EstimatorConfig {
    /// Working height `H` the page is resized to.
    pub target_height: usize,
    /// Start offset `W` of the correction projection, in spectrum bins.
    pub window_offset: usize,
    /// Distance `D` in degrees above which the initial angle is kept.
    pub distance: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub angle_step: f64,
    pub spectrum_kind: SpectrumKind,
    /// Block side as a fraction of `H`; 1 means the whole page.
    pub block_fraction: f64,
    pub sampling: Sampling,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        load_preset(1024).expect("1024 is a preset height")
    }
}

/// Tuned configuration for one of [`PRESET_HEIGHTS`], over +-15 degrees.
pub fn load_preset(height: u32) -> Result<EstimatorConfig> {
    let &(h, w, d) = PRESETS
        .iter()
        .find(|(h, _, _)| *h == height)
        .ok_or(Error::UnknownPreset { height })?;
    Ok(EstimatorConfig {
        target_height: h as usize,
        window_offset: w,
        distance: d,
        theta_min: -15.0,
        theta_max: 15.0,
        angle_step: 0.05,
        spectrum_kind: SpectrumKind::Magnitude,
        block_fraction: 1.0,
        sampling: Sampling::Nearest,
    })
}

impl EstimatorConfig {
    /// Same configuration over `[-limit, limit]`.
    pub fn with_range(mut self, limit: f64) -> Self {
        self.theta_min = -limit;
        self.theta_max = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_height < 256 {
            return Err(Error::invalid("target height must be at least 256"));
        }
        if 2 * self.window_offset >= self.target_height {
            return Err(Error::invalid("window offset must be below half the target height"));
        }
        if self.distance.is_nan() || self.distance < 0.0 {
            return Err(Error::invalid("distance must be non-negative"));
        }
        if !(self.block_fraction > 0.0 && self.block_fraction <= 1.0) {
            return Err(Error::invalid("block fraction must lie in (0, 1]"));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<AngleGrid> {
        AngleGrid::new(self.theta_min, self.theta_max, self.angle_step)
    }

    /// Width of the angle range, the error charged for a failed estimate.
    pub fn range_width(&self) -> f64 {
        self.theta_max - self.theta_min
    }
}

/// Result of one estimate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SkewEstimate {
    /// Final angle in degrees.
    pub theta_f: f64,
    /// Argmax of the initial projection.
    pub theta_a: f64,
    /// Argmax of the correction projection.
    pub theta_b: f64,
    /// Projection the final angle came from.
    pub branch: Branch,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub initial_profile: Option<ProjectionProfile>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub correction_profile: Option<ProjectionProfile>,
}

/// Output rule used by [`estimate_variant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Both projections merged by the distance rule.
    Adaptive,
    /// Initial projection only (the ablation baseline).
    InitialOnly,
    /// Correction projection only.
    CorrectionOnly,
}

/// Resize to the working height and binarize; blank pages are rejected.
pub fn preprocess(img: &GrayImage, cfg: &EstimatorConfig) -> Result<BinaryImage> {
    let resized = resize_to_height(img, cfg.target_height)?;
    let bin = binarize(&resized);
    let fraction = bin.foreground_fraction();
    if fraction < MIN_FOREGROUND_FRACTION {
        return Err(Error::NoContent {
            fraction,
            threshold: MIN_FOREGROUND_FRACTION,
        });
    }
    Ok(bin)
}

/// Centered, normalized spectrum of a binary image at its native size.
pub fn spectrum_of(backend: &impl Dft2d, bin: &BinaryImage, kind: SpectrumKind) -> Result<MagnitudeSpectrum> {
    let raw = dft2_magnitude(backend, bin);
    let raw = match kind {
        SpectrumKind::Magnitude => raw,
        SpectrumKind::Power => power_spectrum(&raw)?,
    };
    normalize_and_center(&raw)
}

/// Spectrum of a whole page: padded to a square, then transformed.
pub fn page_spectrum(backend: &impl Dft2d, bin: &BinaryImage, kind: SpectrumKind) -> Result<MagnitudeSpectrum> {
    spectrum_of(backend, &bin.pad_to_square(), kind)
}

/// Run the projections the variant needs over a prepared spectrum.
pub fn estimate_from_spectrum(m: &MagnitudeSpectrum, cfg: &EstimatorConfig, variant: Variant) -> Result<SkewEstimate> {
    let grid = cfg.grid()?;
    let initial = radial_projection(m, &grid, 0, cfg.sampling)?;
    let theta_a = initial.argmax();
    if variant == Variant::InitialOnly {
        return Ok(SkewEstimate {
            theta_f: theta_a,
            theta_a,
            theta_b: theta_a,
            branch: Branch::Initial,
            initial_profile: Some(initial),
            correction_profile: None,
        });
    }
    let correction = radial_projection(m, &grid, cfg.window_offset, cfg.sampling)?;
    let theta_b = correction.argmax();
    let (theta_f, branch) = match variant {
        Variant::CorrectionOnly => (theta_b, Branch::Correction),
        _ => aggregate(theta_a, theta_b, cfg.distance),
    };
    Ok(SkewEstimate {
        theta_f,
        theta_a,
        theta_b,
        branch,
        initial_profile: Some(initial),
        correction_profile: Some(correction),
    })
}

/// Estimate the skew of a page with the given output rule.
pub fn estimate_variant(
    backend: &impl Dft2d,
    img: &GrayImage,
    cfg: &EstimatorConfig,
    variant: Variant,
) -> Result<SkewEstimate> {
    cfg.validate()?;
    let bin = preprocess(img, cfg)?;
    let m = page_spectrum(backend, &bin, cfg.spectrum_kind)?;
    estimate_from_spectrum(&m, cfg, variant)
}

/// Estimate the skew angle of a page, in degrees.
///
/// The page is resized to `cfg.target_height`, binarized with Otsu, padded
/// to a square and transformed; the initial (offset 0) and correction (offset `W`)
/// projections give `theta_a` and `theta_b`, and `theta_b` is kept unless the
/// two differ by more than `D`. Blank pages yield [`Error::NoContent`].
pub fn estimate_skew(backend: &impl Dft2d, img: &GrayImage, cfg: &EstimatorConfig) -> Result<SkewEstimate> {
    if cfg.block_fraction != 1.0 {
        return Err(Error::invalid(
            "estimate_skew works on the whole page; use estimate_blockwise for block fractions below 1",
        ));
    }
    estimate_variant(backend, img, cfg, Variant::Adaptive)
}

/// Estimate the skew and rotate the page upright (white fill).
pub fn deskew(backend: &impl Dft2d, img: &GrayImage, cfg: &EstimatorConfig) -> Result<(GrayImage, SkewEstimate)> {
    let estimate = estimate_skew(backend, img, cfg)?;
    let corrected = rotate(img, -estimate.theta_f, 255)?;
    Ok((corrected, estimate))
}

/// Block side used by [`estimate_blockwise`] for a page of the given size.
///
/// The side is `round(fraction * height)`, capped at the page width so that
/// at least one full block fits.
pub fn block_size(fraction: f64, height: usize, width: usize) -> usize {
    (libm::round(fraction * height as f64) as usize).min(width).min(height)
}

/// Averaged spectrum of the full `size` x `size` tiles of a binary page.
///
/// Each tile's spectrum is log-normalized on its own before averaging.
/// Ragged tiles at the right and bottom edges are dropped.
pub fn blockwise_spectrum(
    backend: &impl Dft2d,
    bin: &BinaryImage,
    size: usize,
    kind: SpectrumKind,
) -> Result<MagnitudeSpectrum> {
    if size < MIN_BLOCK_SIZE {
        return Err(Error::invalid(alloc::format!(
            "block size {size} is below the minimum of {MIN_BLOCK_SIZE}"
        )));
    }
    let (rows, cols) = (bin.height() / size, bin.width() / size);
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("page is smaller than one block"));
    }
    let mut sum = alloc::vec![0.0; size * size];
    for by in 0..rows {
        for bx in 0..cols {
            let tile = bin.crop(bx * size, by * size, size, size)?;
            let raw = dft2_magnitude(backend, &tile);
            let mut values: Vec<f64> = match kind {
                SpectrumKind::Magnitude => raw.values().to_vec(),
                SpectrumKind::Power => raw.values().iter().map(|v| v * v).collect(),
            };
            log_normalize(&mut values);
            for (acc, v) in sum.iter_mut().zip(&values) {
                *acc += v;
            }
        }
    }
    let count = (rows * cols) as f64;
    for v in sum.iter_mut() {
        *v /= count;
    }
    MagnitudeSpectrum::from_centered(size, size, quadrant_swap(size, size, &sum))
}

/// Initial-projection estimate over block-averaged spectra.
///
/// A block fraction of 1 is the whole page and reproduces the initial-only
/// estimate exactly. The result carries `theta_b == theta_a`.
pub fn estimate_blockwise(backend: &impl Dft2d, img: &GrayImage, cfg: &EstimatorConfig) -> Result<SkewEstimate> {
    cfg.validate()?;
    if cfg.block_fraction == 1.0 {
        return estimate_variant(backend, img, cfg, Variant::InitialOnly);
    }
    let bin = preprocess(img, cfg)?;
    let size = block_size(cfg.block_fraction, bin.height(), bin.width());
    let m = blockwise_spectrum(backend, &bin, size, cfg.spectrum_kind)?;
    estimate_from_spectrum(&m, cfg, Variant::InitialOnly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::RustFft;

    /// Horizontal dark bars on white.
    fn stripe_document(width: usize, height: usize, bars: usize) -> GrayImage {
        let pitch = height / (bars + 1);
        let thickness = (pitch / 3).max(2);
        let margin = width / 10;
        GrayImage::from_fn(width, height, |x, y| {
            let in_bar = y >= pitch / 2 && (y - pitch / 2) % pitch < thickness && y < pitch / 2 + bars * pitch;
            if in_bar && x >= margin && x < width - margin {
                0
            } else {
                255
            }
        })
        .unwrap()
    }

    #[test]
    fn presets() {
        let c = load_preset(1024).unwrap();
        assert_eq!((c.window_offset, c.distance), (247, 0.7));
        let c = load_preset(3072).unwrap();
        assert_eq!((c.window_offset, c.distance), (307, 0.45));
        let c = load_preset(1500).unwrap();
        assert_eq!((c.window_offset, c.distance), (328, 0.55));
        let c = load_preset(2048).unwrap();
        assert_eq!((c.window_offset, c.distance), (304, 0.55));
        let c = load_preset(4096).unwrap();
        assert_eq!((c.window_offset, c.distance), (250, 0.5));
        assert_eq!((c.theta_min, c.theta_max, c.angle_step), (-15.0, 15.0, 0.05));
        assert_eq!(load_preset(999), Err(Error::UnknownPreset { height: 999 }));
    }

    #[test]
    fn config_validation() {
        let base = load_preset(1024).unwrap();
        assert!(base.validate().is_ok());
        let bad = [
            EstimatorConfig {
                target_height: 200,
                ..base.clone()
            },
            EstimatorConfig {
                window_offset: 1024,
                ..base.clone()
            },
            EstimatorConfig {
                distance: -0.1,
                ..base.clone()
            },
            EstimatorConfig {
                angle_step: 0.2,
                ..base.clone()
            },
            EstimatorConfig {
                theta_min: 15.0,
                ..base.clone()
            },
            EstimatorConfig {
                block_fraction: 0.0,
                ..base.clone()
            },
            EstimatorConfig {
                block_fraction: 1.5,
                ..base.clone()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn straight_stripes() {
        let doc = stripe_document(900, 1200, 20);
        let est = estimate_skew(&RustFft, &doc, &load_preset(1024).unwrap()).unwrap();
        assert!(est.theta_f.abs() <= 0.1, "{est:?}");
    }

    #[test]
    fn rotated_stripes() {
        let doc = stripe_document(900, 1200, 20);
        let cfg = load_preset(1024).unwrap();
        let est = estimate_skew(&RustFft, &rotate(&doc, 7.3, 255).unwrap(), &cfg).unwrap();
        assert!((est.theta_f - 7.3).abs() <= 0.1, "{est:?}");

        let cfg = cfg.with_range(44.9);
        let est = estimate_skew(&RustFft, &rotate(&doc, -30.0, 255).unwrap(), &cfg).unwrap();
        assert!((est.theta_f + 30.0).abs() <= 0.1, "{est:?}");
    }

    #[test]
    fn estimate_invariants() {
        let doc = stripe_document(700, 1000, 14);
        let cfg = load_preset(1024).unwrap();
        for angle in [-11.0, -2.5, 0.7, 4.0, 13.2] {
            let est = estimate_skew(&RustFft, &rotate(&doc, angle, 255).unwrap(), &cfg).unwrap();
            assert!(est.theta_f == est.theta_a || est.theta_f == est.theta_b);
            assert_eq!(
                crate::projection::differs_by_more_than(est.theta_a, est.theta_b, cfg.distance),
                est.branch == Branch::Initial
            );
            assert!(cfg.grid().unwrap().angles().contains(&est.theta_f));
        }
    }

    #[test]
    fn blank_page_is_no_content() {
        let blank = GrayImage::filled(600, 800, 255).unwrap();
        let cfg = load_preset(1024).unwrap();
        assert!(matches!(
            estimate_skew(&RustFft, &blank, &cfg),
            Err(Error::NoContent { .. })
        ));
        assert!(matches!(deskew(&RustFft, &blank, &cfg), Err(Error::NoContent { .. })));
    }

    #[test]
    fn deskew_straightens() {
        let doc = stripe_document(900, 1200, 20);
        let cfg = load_preset(1024).unwrap();
        let (fixed, est) = deskew(&RustFft, &rotate(&doc, 10.0, 255).unwrap(), &cfg).unwrap();
        assert!((est.theta_f - 10.0).abs() <= 0.1);
        let again = estimate_skew(&RustFft, &fixed, &cfg).unwrap();
        assert!(again.theta_f.abs() <= 0.2, "{again:?}");
    }

    #[test]
    fn blockwise_whole_page_matches_initial_only() {
        let doc = rotate(&stripe_document(900, 1200, 20), 3.1, 255).unwrap();
        let cfg = load_preset(1024).unwrap();
        let whole = estimate_blockwise(&RustFft, &doc, &cfg).unwrap();
        let base = estimate_variant(&RustFft, &doc, &cfg, Variant::InitialOnly).unwrap();
        assert_eq!(whole, base);
        assert_eq!(whole.theta_b, whole.theta_a);
    }

    #[test]
    fn block_tiling() {
        assert_eq!(block_size(0.1, 1024, 800), 102);
        assert_eq!(block_size(0.9, 1024, 800), 800);
        let bin = BinaryImage::new(64, 40, alloc::vec![0; 64 * 40]).unwrap();
        assert!(blockwise_spectrum(&RustFft, &bin, 31, SpectrumKind::Magnitude).is_err());
        let m = blockwise_spectrum(&RustFft, &bin, 32, SpectrumKind::Magnitude).unwrap();
        assert_eq!((m.width(), m.height()), (32, 32));

        let doc = rotate(&stripe_document(900, 1200, 20), 2.0, 255).unwrap();
        let cfg = EstimatorConfig {
            block_fraction: 0.5,
            ..load_preset(1024).unwrap()
        };
        let est = estimate_blockwise(&RustFft, &doc, &cfg).unwrap();
        assert_eq!(est.theta_f, est.theta_a);
        assert!((est.theta_f - 2.0).abs() < 1.0);
        let tiny = EstimatorConfig {
            block_fraction: 0.01,
            ..cfg
        };
        assert!(estimate_blockwise(&RustFft, &doc, &tiny).is_err());
    }

    #[test]
    fn polarity_flip_keeps_correction_angle() {
        let doc = rotate(&stripe_document(800, 1000, 16), 5.0, 255).unwrap();
        let cfg = load_preset(1024).unwrap();
        let bin = preprocess(&doc, &cfg).unwrap().pad_to_square();
        let flipped =
            BinaryImage::new(bin.width(), bin.height(), bin.pixels().iter().map(|p| 1 - p).collect()).unwrap();
        let a = estimate_from_spectrum(
            &spectrum_of(&RustFft, &bin, SpectrumKind::Magnitude).unwrap(),
            &cfg,
            Variant::Adaptive,
        )
        .unwrap();
        let b = estimate_from_spectrum(
            &spectrum_of(&RustFft, &flipped, SpectrumKind::Magnitude).unwrap(),
            &cfg,
            Variant::Adaptive,
        )
        .unwrap();
        assert_eq!(a.theta_b, b.theta_b);
    }
}
