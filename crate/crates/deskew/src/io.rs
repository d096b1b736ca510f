//! Image decoding and encoding.
//!
//! PNG, JPEG, TIFF and BMP are read; outputs are written as PNG. EXIF
//! orientation tags are not interpreted: pixels are used as stored.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use deskew_core::image::luma_bt601;
use deskew_core::{GrayImage, MagnitudeSpectrum};
use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

/// Decode an image and reduce it to BT.601 luminance.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    to_gray(&decoded).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn to_gray(img: &DynamicImage) -> deskew_core::Result<GrayImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.as_raw().clone(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        _ => img
            .to_rgb8()
            .pixels()
            .map(|p| luma_bt601(p.0[0], p.0[1], p.0[2]))
            .collect(),
    };
    GrayImage::new(w, h, pixels)
}

fn png_encoder(path: &Path) -> Result<PngEncoder<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(PngEncoder::new_with_quality(
        BufWriter::new(file),
        CompressionType::Fast,
        FilterType::Adaptive,
    ))
}

/// Write an 8-bit grayscale PNG.
pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    png_encoder(path)?
        .write_image(
            img.pixels(),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Write a spectrum as a 16-bit grayscale heatmap (`value * 65535`).
pub fn save_spectrum_png(spectrum: &MagnitudeSpectrum, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max = spectrum.values().iter().cloned().fold(0.0, f64::max);
    let scale = if spectrum.is_normalized() || max == 0.0 {
        1.0
    } else {
        1.0 / max
    };
    let bytes: Vec<u8> = spectrum
        .values()
        .iter()
        .flat_map(|v| (((v * scale).clamp(0.0, 1.0) * 65535.0).round() as u16).to_ne_bytes())
        .collect();
    png_encoder(path)?
        .write_image(
            &bytes,
            spectrum.width() as u32,
            spectrum.height() as u32,
            ExtendedColorType::L16,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}
