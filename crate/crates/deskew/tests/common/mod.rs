#![allow(dead_code)]

use std::path::Path;

use deskew::io::save_png;
use deskew_core::GrayImage;

/// Dark horizontal bars on white, with a margin on each side.
pub fn stripe_document(width: usize, height: usize, bars: usize) -> GrayImage {
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

/// The 20-bar, 900 x 1200 test page.
pub fn stripe_page() -> GrayImage {
    stripe_document(900, 1200, 20)
}

/// Small distinct straight pages, cheap to rotate and encode.
pub fn write_small_sources(dir: &Path, count: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..count {
        let page = stripe_document(160 + 8 * i, 200, 6 + i % 4);
        save_png(&page, dir.join(format!("src_{i:02}.png"))).unwrap();
    }
}
