//! Straight synthetic pages: text-line bars, ruled lines, tables, figure
//! frames and photos on white. The text is level by construction.
//!
//! Photos mimic two things found on real scans: prints pasted a fraction of
//! a degree off the text direction, and halftone screens, whose dot lattice
//! puts strong peaks far from the spectrum center at the screen angle.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use deskew_core::{binarize, GrayImage};

/// Smallest and largest page side, in pixels.
pub const MIN_SIDE: usize = 800;
pub const MAX_SIDE: usize = 2400;
/// Accepted foreground fraction of a rendered page after binarization.
pub const INK_RANGE: std::ops::RangeInclusive<f64> = 0.02..=0.40;

struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![255; width * height],
        }
    }

    fn fill(&mut self, x: usize, y: usize, w: usize, h: usize, value: u8) {
        let x1 = (x + w).min(self.width);
        let y1 = (y + h).min(self.height);
        for row in y.min(y1)..y1 {
            self.pixels[row * self.width + x.min(x1)..row * self.width + x1].fill(value);
        }
    }

    /// Fill a `w` x `h` rectangle centered at `(cx, cy)` and turned by
    /// `angle` degrees.
    fn fill_rotated(&mut self, cx: f64, cy: f64, w: f64, h: f64, angle: f64, value: u8) {
        let (sin, cos) = angle.to_radians().sin_cos();
        let reach = (w.hypot(h) / 2.0).ceil();
        let x0 = (cx - reach).max(0.0) as usize;
        let y0 = (cy - reach).max(0.0) as usize;
        let x1 = ((cx + reach) as usize).min(self.width);
        let y1 = ((cy + reach) as usize).min(self.height);
        for y in y0..y1 {
            for x in x0..x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let u = cos * dx + sin * dy;
                let v = -sin * dx + cos * dy;
                if u.abs() <= w / 2.0 && v.abs() <= h / 2.0 {
                    self.pixels[y * self.width + x] = value;
                }
            }
        }
    }

    fn frame(&mut self, x: usize, y: usize, w: usize, h: usize, t: usize, value: u8) {
        self.fill(x, y, w, t, value);
        self.fill(x, (y + h).saturating_sub(t), w, t, value);
        self.fill(x, y, t, h, value);
        self.fill((x + w).saturating_sub(t), y, t, h, value);
    }
}

struct Style {
    ink: u8,
    x_height: usize,
    pitch: usize,
    char_width: usize,
}

/// One glyph-like character in an `x_height` cell: stems, bowls and bars,
/// sometimes with an ascender or descender.
fn glyph(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x: usize, y: usize) {
    let (w, h) = (s.char_width.saturating_sub(s.char_width / 4).max(2), s.x_height);
    let stem = (h / 6).max(1);
    let ink = s.ink;
    match rng.gen_range(0..7) {
        // n, u, h
        0 => {
            c.fill(x, y, stem, h, ink);
            c.fill(x + w - stem, y, stem, h, ink);
            if rng.gen_bool(0.5) {
                c.fill(x, y, w, stem, ink);
            } else {
                c.fill(x, y + h - stem, w, stem, ink);
            }
        }
        // o, a
        1 => c.frame(x, y, w, h, stem, ink),
        // e, c
        2 => {
            c.fill(x, y, stem, h, ink);
            c.fill(x, y, w, stem, ink);
            c.fill(x, y + h - stem, w, stem, ink);
            c.fill(x, y + h / 2, w, stem, ink);
        }
        // i, l, t
        3 => {
            let sx = x + w / 2;
            c.fill(sx, y, stem, h, ink);
            if rng.gen_bool(0.5) {
                c.fill(x, y + stem, w, stem, ink);
            }
        }
        // m, w
        4 => {
            for k in 0..3 {
                c.fill(x + k * (w - stem) / 2, y, stem, h, ink);
            }
            c.fill(x, y, w, stem, ink);
        }
        // s, z
        5 => {
            c.fill(x, y, w, stem, ink);
            c.fill(x, y + h / 2, w, stem, ink);
            c.fill(x, y + h - stem, w, stem, ink);
            c.fill(x, y, stem, h / 2, ink);
            c.fill(x + w - stem, y + h / 2, stem, h / 2, ink);
        }
        // v, x, y: a short diagonal-ish staircase
        _ => {
            for k in 0..h {
                let dx = k * (w - stem) / h.max(1);
                c.fill(x + dx, y + k, stem, 1, ink);
                c.fill(x + w - stem - dx, y + k, stem, 1, ink);
            }
        }
    }
    let reach = h * 2 / 3;
    match rng.gen_range(0..6) {
        0 => c.fill(x, y.saturating_sub(reach), stem, reach, ink),
        1 => c.fill(x + w - stem, y + h, stem, reach, ink),
        _ => {}
    }
}

/// Words of glyphs; each word sits a pixel or so off the baseline.
fn text_line(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x0: usize, y: usize, width: usize) {
    let space = (s.char_width * 3 / 2).max(2);
    let mut x = x0;
    while x + s.char_width <= x0 + width {
        let chars = rng.gen_range(1..11).min((x0 + width - x) / s.char_width);
        let wy = (y as i64 + rng.gen_range(-1..=1)).max(0) as usize;
        for k in 0..chars {
            glyph(c, rng, s, x + k * s.char_width, wy);
        }
        x += chars * s.char_width + space;
    }
}

fn paragraph(
    c: &mut Canvas,
    rng: &mut ChaCha8Rng,
    s: &Style,
    x0: usize,
    y0: usize,
    width: usize,
    bottom: usize,
) -> usize {
    let lines = rng.gen_range(3..13);
    let indent = if rng.gen_bool(0.5) { 4 * s.char_width } else { 0 };
    let mut y = y0;
    for i in 0..lines {
        if y + s.pitch > bottom {
            break;
        }
        let (start, mut len) = if i == 0 {
            (x0 + indent, width - indent)
        } else {
            (x0, width)
        };
        if i + 1 == lines {
            len = len * rng.gen_range(20..90) / 100;
        }
        text_line(c, rng, s, start, y, len.max(s.char_width));
        y += s.pitch;
    }
    y + s.pitch / 2
}

fn table(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x0: usize, y0: usize, width: usize, bottom: usize) -> usize {
    let rows = rng.gen_range(3..9);
    let cols = rng.gen_range(2..6);
    let row_h = s.pitch + s.x_height;
    let rule = (s.x_height / 6).max(1);
    let height = (rows * row_h).min(bottom.saturating_sub(y0));
    if height < 2 * row_h {
        return y0;
    }
    let col_w = width / cols;
    c.frame(x0, y0, cols * col_w, height, rule, s.ink);
    for r in 1..height / row_h {
        c.fill(x0, y0 + r * row_h, cols * col_w, rule, s.ink);
    }
    for k in 1..cols {
        c.fill(x0 + k * col_w, y0, rule, height, s.ink);
    }
    for r in 0..height / row_h {
        for k in 0..cols {
            let cell_x = x0 + k * col_w + s.char_width;
            let len = rng.gen_range(col_w / 4..col_w * 3 / 4).max(s.char_width);
            let y = y0 + r * row_h + (row_h - s.x_height) / 2;
            text_line(c, rng, s, cell_x, y, len.min(col_w - 2 * s.char_width));
        }
    }
    y0 + height + s.pitch
}

fn figure(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x0: usize, y0: usize, width: usize, bottom: usize) -> usize {
    let h = rng.gen_range(width / 4..width / 2 + 1).min(bottom.saturating_sub(y0));
    if h < 4 * s.pitch {
        return y0;
    }
    let w = width * rng.gen_range(50..100) / 100;
    let x = x0 + (width - w) / 2;
    let t = rng.gen_range(2..6);
    c.frame(x, y0, w, h, t, s.ink);
    // A few filled shapes inside the frame.
    for _ in 0..rng.gen_range(1..5) {
        let bw = rng.gen_range(w / 10..w / 3);
        let bh = rng.gen_range(h / 10..h / 3);
        let bx = x + t + rng.gen_range(0..w - bw - 2 * t);
        let by = y0 + t + rng.gen_range(0..h - bh - 2 * t);
        c.fill(bx, by, bw, bh, s.ink);
    }
    // Caption.
    let cap_y = y0 + h + s.pitch / 2;
    if cap_y + s.pitch < bottom {
        text_line(c, rng, s, x, cap_y, w * 2 / 3);
    }
    cap_y + 2 * s.pitch
}

/// A solid print turned slightly off the text direction, with a few light
/// patches inside.
fn pasted_print(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x: usize, y: usize, w: usize, h: usize) {
    let tilt = rng.gen_range(0.15..0.6) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (cx, cy) = (x as f64 + w as f64 / 2.0, y as f64 + h as f64 / 2.0);
    c.fill_rotated(cx, cy, w as f64, h as f64, tilt, s.ink);
    for _ in 0..rng.gen_range(1..4) {
        let pw = rng.gen_range(0.1..0.4) * w as f64;
        let ph = rng.gen_range(0.1..0.4) * h as f64;
        let px = cx + rng.gen_range(-0.25..0.25) * w as f64;
        let py = cy + rng.gen_range(-0.25..0.25) * h as f64;
        c.fill_rotated(px, py, pw, ph, tilt, 255);
    }
}

/// A halftone: round dots on a square lattice turned by the screen angle,
/// with dot size following a smooth random tone.
fn halftone(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x: usize, y: usize, w: usize, h: usize) {
    let screen = rng.gen_range(-15.0f64..15.0).to_radians();
    let period = rng.gen_range(1.0..1.6) * s.x_height as f64;
    let (sin, cos) = screen.sin_cos();
    let (fx, fy) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    for py in y..(y + h).min(c.height) {
        for px in x..(x + w).min(c.width) {
            let (u, v) = ((px - x) as f64 / w as f64, (py - y) as f64 / h as f64);
            let tone = 0.5 + 0.3 * (fx * u * 6.0 + phase).sin() * (fy * v * 6.0).cos();
            let a = (cos * px as f64 + sin * py as f64) / period;
            let b = (-sin * px as f64 + cos * py as f64) / period;
            let (da, db) = (a - a.round(), b - b.round());
            if da * da + db * db < tone * tone * 0.25 {
                c.pixels[py * c.width + px] = s.ink;
            }
        }
    }
}

fn photo(c: &mut Canvas, rng: &mut ChaCha8Rng, s: &Style, x0: usize, y0: usize, width: usize, bottom: usize) -> usize {
    let h = (width * rng.gen_range(40..80) / 100).min(bottom.saturating_sub(y0));
    if h < 4 * s.pitch {
        return y0;
    }
    let w = width * rng.gen_range(50..90) / 100;
    let x = x0 + (width - w) / 2;
    if rng.gen_bool(0.5) {
        pasted_print(c, rng, s, x, y0, w, h);
    } else {
        halftone(c, rng, s, x, y0, w, h);
    }
    y0 + h + s.pitch
}

/// Render one straight page from `seed`.
///
/// Pages whose ink coverage falls outside [`INK_RANGE`] are redrawn from the
/// next ChaCha stream of the same seed.
pub fn render_document(seed: u64) -> GrayImage {
    (0..)
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            render_page(&mut rng)
        })
        .find(|page| INK_RANGE.contains(&binarize(page).foreground_fraction()))
        .expect("some stream yields a page within the ink range")
}

fn render_page(rng: &mut ChaCha8Rng) -> GrayImage {
    let height = rng.gen_range(1100..=MAX_SIDE);
    let width = (height * rng.gen_range(68..86) / 100).clamp(MIN_SIDE, MAX_SIDE);
    let mut canvas = Canvas::new(width, height);

    let scale = height as f64 / 1600.0;
    let x_height = ((rng.gen_range(8.0..16.0) * scale) as usize).max(4);
    let style = Style {
        ink: rng.gen_range(0..70),
        x_height,
        pitch: (x_height as f64 * rng.gen_range(1.7..2.5)) as usize,
        char_width: (x_height * 4 / 5).max(3),
    };

    let margin_x = width * rng.gen_range(6..11) / 100;
    let margin_y = height * rng.gen_range(5..9) / 100;
    let columns = if rng.gen_bool(0.3) { 2 } else { 1 };
    let gutter = 3 * style.char_width;
    let col_w = (width - 2 * margin_x - (columns - 1) * gutter) / columns;
    let bottom = height - margin_y;

    // Optional full-width header with a rule under it.
    let mut top = margin_y;
    if rng.gen_bool(0.5) {
        text_line(&mut canvas, rng, &style, margin_x, top, (width - 2 * margin_x) / 2);
        top += 2 * style.pitch;
        canvas.fill(margin_x, top, width - 2 * margin_x, rng.gen_range(1..4), style.ink);
        top += style.pitch;
    }

    for col in 0..columns {
        let x0 = margin_x + col * (col_w + gutter);
        let mut y = top;
        while y + 2 * style.pitch < bottom {
            let next = match rng.gen_range(0..12) {
                0 => {
                    canvas.fill(x0, y, col_w, rng.gen_range(1..4), style.ink);
                    y + style.pitch
                }
                1 => table(&mut canvas, rng, &style, x0, y, col_w, bottom),
                2 => figure(&mut canvas, rng, &style, x0, y, col_w, bottom),
                3..=5 => photo(&mut canvas, rng, &style, x0, y, col_w, bottom),
                _ => paragraph(&mut canvas, rng, &style, x0, y, col_w, bottom),
            };
            // Blocks that did not fit still advance the cursor.
            y = next.max(y + style.pitch);
        }
    }

    // Scanner speckle.
    for _ in 0..width * height / 2000 {
        let i = rng.gen_range(0..canvas.pixels.len());
        canvas.pixels[i] = if canvas.pixels[i] > 128 { style.ink } else { 255 };
    }

    GrayImage::new(width, height, canvas.pixels).expect("canvas dimensions are valid")
}
