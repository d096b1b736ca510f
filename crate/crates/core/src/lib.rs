//! Document skew estimation from the 2D Fourier magnitude spectrum.
//!
//! The estimator binarizes a page, takes the magnitude of its 2D DFT and
//! runs two radial projections over the centered spectrum: one starting at
//! the DC bin and one starting `W` bins away from it. The two candidate
//! angles are merged with a distance threshold `D`.
//!
//! This crate is `no_std` and only needs `alloc`. The FFT itself is supplied
//! by the caller through [`Dft2d`], so the crate carries no platform
//! dependencies; the `deskew` crate provides a `rustfft` backend together
//! with image IO, dataset tooling and the command line interface.
//!
//! Angle convention: angles are in degrees and positive angles are
//! counter-clockwise in the raster frame (x to the right, y pointing down),
//! which is clockwise on a displayed page. [`rotate`] and
//! [`estimate_skew`] use the same convention, so `estimate_skew(rotate(page,
//! a))` recovers `a` and rotating by the negated estimate straightens a page.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod estimator;
pub mod image;
pub mod metrics;
pub mod projection;
pub mod search;
pub mod spectrum;

#[cfg(test)]
mod testutil;

pub use error::Error;
pub use estimator::{
    deskew, estimate_blockwise, estimate_skew, estimate_variant, load_preset, EstimatorConfig, SkewEstimate,
    SpectrumKind, Variant, PRESET_HEIGHTS,
};
pub use image::{binarize, resize_to_height, rotate, rotated_dimensions, BinaryImage, GrayImage};
pub use metrics::{compute_metrics, Metrics, CE_THRESHOLD};
pub use projection::{
    aggregate, argmax_angle, differs_by_more_than, radial_projection, AngleGrid, Branch, ProjectionProfile, RayTable,
    Sampling,
};
pub use spectrum::{dft2_magnitude, normalize_and_center, power_spectrum, Dft2d, MagnitudeSpectrum};

pub type Result<T> = core::result::Result<T, Error>;
