//! Raster buffers and the pixel-domain operations of the pipeline:
//! resizing to a working height, global Otsu binarization and rotation.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// 8-bit luminance image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be non-zero"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid("pixel buffer length does not match dimensions"));
        }
        Ok(Self { width, height, pixels })
    }

    /// A `width` x `height` image where every pixel is `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }
}

/// Binary raster where 1 marks foreground (ink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be non-zero"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid("pixel buffer length does not match dimensions"));
        }
        if pixels.iter().any(|&p| p > 1) {
            return Err(Error::invalid("binary pixels must be 0 or 1"));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == 1).count()
    }

    pub fn foreground_fraction(&self) -> f64 {
        self.foreground_count() as f64 / self.pixels.len() as f64
    }

    /// Copy out the `width` x `height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Self> {
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::invalid("crop window exceeds image bounds"));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            let row = y * self.width;
            pixels.extend_from_slice(&self.pixels[row + x0..row + x0 + width]);
        }
        Self::new(width, height, pixels)
    }

    /// Extend with background to a square of side `max(width, height)`.
    ///
    /// The content stays in the top-left corner. A square transform has the
    /// same frequency spacing along both axes, so spectral angles match the
    /// angles on the page.
    pub fn pad_to_square(&self) -> Self {
        let side = self.width.max(self.height);
        if side == self.width && side == self.height {
            return self.clone();
        }
        let mut pixels = vec![0; side * side];
        for (dst, src) in pixels.chunks_exact_mut(side).zip(self.pixels.chunks_exact(self.width)) {
            dst[..self.width].copy_from_slice(src);
        }
        Self {
            width: side,
            height: side,
            pixels,
        }
    }

    /// Render as black ink (0) on white (255).
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self.pixels.iter().map(|&p| if p == 1 { 0 } else { 255 }).collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// ITU-R BT.601 luma of an RGB triple, rounded to the nearest integer.
pub fn luma_bt601(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    to_u8(y)
}

fn to_u8(v: f64) -> u8 {
    let r = libm::round(v);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

/// Width that keeps the aspect ratio when scaling `height` to `target_height`.
pub fn scaled_width(width: usize, height: usize, target_height: usize) -> usize {
    let w = libm::round(width as f64 * target_height as f64 / height as f64) as usize;
    w.max(1)
}

/// Bilinear resize to `target_height` rows, preserving the aspect ratio.
pub fn resize_to_height(img: &GrayImage, target_height: usize) -> Result<GrayImage> {
    if target_height < 2 {
        return Err(Error::invalid("target height must be at least 2"));
    }
    let out_w = scaled_width(img.width, img.height, target_height);
    let out_h = target_height;
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }

    let sx = img.width as f64 / out_w as f64;
    let sy = img.height as f64 / out_h as f64;
    let max_x = (img.width - 1) as f64;
    let max_y = (img.height - 1) as f64;

    // Horizontal taps are shared by every output row.
    let x_taps: Vec<(usize, usize, f64)> = (0..out_w)
        .map(|x| {
            let src = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let x0 = libm::floor(src) as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            (x0, x1, src - x0 as f64)
        })
        .collect();

    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let src_y = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let y0 = libm::floor(src_y) as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let fy = src_y - y0 as f64;
        let row0 = &img.pixels[y0 * img.width..(y0 + 1) * img.width];
        let row1 = &img.pixels[y1 * img.width..(y1 + 1) * img.width];
        for &(x0, x1, fx) in &x_taps {
            let top = f64::from(row0[x0]) * (1.0 - fx) + f64::from(row0[x1]) * fx;
            let bottom = f64::from(row1[x0]) * (1.0 - fx) + f64::from(row1[x1]) * fx;
            pixels.push(to_u8(top * (1.0 - fy) + bottom * fy));
        }
    }
    GrayImage::new(out_w, out_h, pixels)
}

/// Otsu threshold of `img`.
///
/// Pixels strictly below the returned value are the dark class. Returns
/// `None` when the histogram has a single populated level.
pub fn otsu_threshold(img: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &p in &img.pixels {
        hist[p as usize] += 1;
    }
    let total = img.pixels.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(level, &count)| level as f64 * count as f64)
        .sum();

    let mut weight_low = 0.0;
    let mut sum_low = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for (level, &count) in hist.iter().enumerate() {
        weight_low += count as f64;
        sum_low += level as f64 * count as f64;
        if weight_low == 0.0 {
            continue;
        }
        let weight_high = total - weight_low;
        if weight_high == 0.0 {
            break;
        }
        let mean_low = sum_low / weight_low;
        let mean_high = (sum_all - sum_low) / weight_high;
        let diff = mean_low - mean_high;
        let between = weight_low * weight_high * diff * diff;
        if best.is_none_or(|(_, v)| between > v) {
            best = Some((level, between));
        }
    }
    // `level` is the last dark level and is at most 254 here.
    best.map(|(level, _)| (level + 1) as u8)
}

/// Global Otsu binarization; dark pixels become foreground.
///
/// A constant image has no second class and maps entirely to background.
pub fn binarize(img: &GrayImage) -> BinaryImage {
    let pixels = match otsu_threshold(img) {
        Some(t) => img.pixels.iter().map(|&p| u8::from(p < t)).collect(),
        None => vec![0; img.pixels.len()],
    };
    BinaryImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Canvas size that holds a `width` x `height` image rotated by `angle` degrees.
///
/// Each side is the ceiling of the rotated bounding box, grown by one pixel
/// where needed so it has the same parity as the corresponding input side.
pub fn rotated_dimensions(width: usize, height: usize, angle: f64) -> (usize, usize) {
    let rad = angle.to_radians();
    let (s, c) = (libm::sin(rad).abs(), libm::cos(rad).abs());
    let (w, h) = (width as f64, height as f64);
    // The epsilon absorbs rounding in sin/cos at multiples of 90 degrees.
    let out_w = libm::ceil(w * c + h * s - 1e-6).max(1.0) as usize;
    let out_h = libm::ceil(w * s + h * c - 1e-6).max(1.0) as usize;
    // Matching the input parity keeps the rotation center on the pixel grid
    // of the source, so a rotation and its inverse resample on aligned grids.
    (out_w + (out_w + width) % 2, out_h + (out_h + height) % 2)
}

/// Rotate about the image center onto an expanded canvas.
///
/// Samples are bilinear; source positions outside the image read `fill`.
pub fn rotate(img: &GrayImage, angle: f64, fill: u8) -> Result<GrayImage> {
    if !angle.is_finite() {
        return Err(Error::invalid("rotation angle must be finite"));
    }
    let (out_w, out_h) = rotated_dimensions(img.width, img.height, angle);
    let rad = angle.to_radians();
    let (s, c) = (libm::sin(rad), libm::cos(rad));
    let in_cx = (img.width as f64 - 1.0) / 2.0;
    let in_cy = (img.height as f64 - 1.0) / 2.0;
    let out_cx = (out_w as f64 - 1.0) / 2.0;
    let out_cy = (out_h as f64 - 1.0) / 2.0;
    let fill_f = f64::from(fill);
    let (w, h) = (img.width as isize, img.height as isize);

    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w || y >= h {
            fill_f
        } else {
            f64::from(img.pixels[y as usize * img.width + x as usize])
        }
    };

    let mut pixels = Vec::with_capacity(out_w * out_h);
    for oy in 0..out_h {
        let dy = oy as f64 - out_cy;
        for ox in 0..out_w {
            let dx = ox as f64 - out_cx;
            // Inverse map: output pixel -> source position.
            let sx = in_cx + c * dx + s * dy;
            let sy = in_cy - s * dx + c * dy;
            if sx <= -1.0 || sy <= -1.0 || sx >= w as f64 || sy >= h as f64 {
                pixels.push(fill);
                continue;
            }
            let x0 = libm::floor(sx);
            let y0 = libm::floor(sy);
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as isize, y0 as isize);
            let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
            let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
            pixels.push(to_u8(top * (1.0 - fy) + bottom * fy));
        }
    }
    GrayImage::new(out_w, out_h, pixels)
}
