//! Skewed datasets with ground-truth manifests.
//!
//! A dataset directory holds `images/*.png`, `manifest.json` (the full
//! record) and `manifest.csv` (a flat `path,angle,split` mirror). Image paths
//! in a manifest are relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use deskew_core::rotate;

use crate::error::{Error, Result};
use crate::io::{load_gray, save_png};
use crate::synth::render_document;

/// Extensions accepted as source images.
pub const IMAGE_EXTENSIONS: [&str; 6] = ["png", "jpg", "jpeg", "tif", "tiff", "bmp"];

/// Ranges wider than this half-width get twice the variants per source.
pub const DOUBLING_LIMIT: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

/// Entries to keep when reading a manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitFilter {
    Dev,
    Test,
    #[default]
    All,
}

impl SplitFilter {
    pub fn accepts(self, split: Option<Split>) -> bool {
        match self {
            SplitFilter::All => true,
            SplitFilter::Dev => split == Some(Split::Dev),
            SplitFilter::Test => split == Some(Split::Test),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl AngleRange {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite() && theta_min < theta_max) {
            return Err(Error::invalid(format!("bad angle range [{theta_min}, {theta_max}]")));
        }
        Ok(Self { theta_min, theta_max })
    }

    /// `[-limit, limit]`.
    pub fn symmetric(limit: f64) -> Result<Self> {
        Self::new(-limit, limit)
    }

    pub fn contains(&self, angle: f64) -> bool {
        (self.theta_min..=self.theta_max).contains(&angle)
    }

    /// Variants per source for a requested count, doubled for wide ranges.
    pub fn variants(&self, per_image: usize) -> usize {
        if self.theta_max.abs().max(self.theta_min.abs()) > DOUBLING_LIMIT {
            2 * per_image
        } else {
            per_image
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_path: String,
    pub source_path: String,
    pub ground_truth_angle: f64,
    /// Unset until the manifest is split.
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub range: AngleRange,
    pub seed: u64,
}

impl DatasetManifest {
    /// Read `manifest.json`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Write `manifest.json` and `manifest.csv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let json_path = dir.join("manifest.json");
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;

        let csv_path = dir.join("manifest.csv");
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&csv_path)?;
        w.write_record(["path", "angle", "split"])?;
        for e in &self.entries {
            let angle = format!("{:.2}", e.ground_truth_angle);
            w.write_record([e.image_path.as_str(), &angle, e.split.map_or("", Split::as_str)])?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;
        Ok(())
    }

    pub fn select(&self, filter: SplitFilter) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| filter.accepts(e.split)).collect()
    }

    /// Source paths in order of first appearance.
    pub fn sources(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.entries
            .iter()
            .map(|e| e.source_path.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }
}

/// Independent seed for one `(seed, a, b)` stream.
pub fn stream_seed(seed: u64, a: u64, b: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    out[..8].copy_from_slice(&seed.to_le_bytes());
    out[8..16].copy_from_slice(&a.to_le_bytes());
    out[16..24].copy_from_slice(&b.to_le_bytes());
    out[24..].copy_from_slice(b"deskew\0\0");
    out
}

/// Ground-truth angle for one variant of one source, rounded to 0.01 degree.
pub fn draw_angle(seed: u64, source: usize, variant: usize, range: AngleRange) -> f64 {
    let mut rng = ChaCha8Rng::from_seed(stream_seed(seed, source as u64, variant as u64));
    let raw = rng.gen_range(range.theta_min..=range.theta_max);
    ((raw * 100.0).round() / 100.0).clamp(range.theta_min, range.theta_max)
}

/// Decodable-looking images in `dir`, sorted by file name.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Rotate every straight image in `straight_dir` by angles drawn from
/// `range` and write the results with their manifest under `out_dir`.
pub fn generate_skew_dataset(
    straight_dir: impl AsRef<Path>,
    range: AngleRange,
    per_image: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    if per_image == 0 {
        return Err(Error::invalid("per-image count must be at least 1"));
    }
    let sources = list_images(&straight_dir)?;
    if sources.is_empty() {
        return Err(Error::invalid(format!(
            "no source images in {}",
            straight_dir.as_ref().display()
        )));
    }
    let out_dir = out_dir.as_ref();
    create_dir(&out_dir.join("images"))?;
    let variants = range.variants(per_image);

    let per_source: Vec<Vec<ManifestEntry>> = sources
        .par_iter()
        .enumerate()
        .map(|(i, src)| -> Result<Vec<ManifestEntry>> {
            let page = load_gray(src)?;
            let stem = src
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (0..variants)
                .map(|v| {
                    let angle = draw_angle(seed, i, v, range);
                    let rel = format!("images/{i:04}_{stem}_{v:02}.png");
                    save_png(&rotate(&page, angle, 255)?, out_dir.join(&rel))?;
                    Ok(ManifestEntry {
                        image_path: rel,
                        source_path: file_name(src),
                        ground_truth_angle: angle,
                        split: None,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let manifest = DatasetManifest {
        entries: per_source.into_iter().flatten().collect(),
        range,
        seed,
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}

/// Number of sources assigned to the dev split.
pub fn dev_count(sources: usize, dev_ratio: f64) -> usize {
    ((dev_ratio * sources as f64).round() as usize).clamp(1, sources - 1)
}

/// Assign whole sources to dev or test so no source lands in both.
pub fn split_dev_test(manifest: &DatasetManifest, dev_ratio: f64, seed: u64) -> Result<DatasetManifest> {
    if !(dev_ratio > 0.0 && dev_ratio < 1.0) {
        return Err(Error::invalid(format!("dev ratio must lie in (0, 1), got {dev_ratio}")));
    }
    let mut sources = manifest.sources();
    if sources.len() < 2 {
        return Err(Error::invalid("a split needs at least two source images"));
    }
    let n_dev = dev_count(sources.len(), dev_ratio);
    sources.shuffle(&mut ChaCha8Rng::from_seed(stream_seed(seed, u64::MAX, 0)));
    let dev: std::collections::HashSet<&str> = sources[..n_dev].iter().copied().collect();

    let mut out = manifest.clone();
    for e in &mut out.entries {
        e.split = Some(if dev.contains(e.source_path.as_str()) {
            Split::Dev
        } else {
            Split::Test
        });
    }
    Ok(out)
}

/// Render `count` straight synthetic pages into `out_dir`.
pub fn synth_corpus(count: usize, out_dir: impl AsRef<Path>, seed: u64) -> Result<PathBuf> {
    let out_dir = out_dir.as_ref();
    create_dir(out_dir)?;
    (0..count).into_par_iter().try_for_each(|i| {
        let doc_seed = ChaCha8Rng::from_seed(stream_seed(seed, i as u64, u64::MAX)).gen();
        save_png(&render_document(doc_seed), out_dir.join(format!("doc_{i:04}.png")))
    })?;
    Ok(out_dir.to_path_buf())
}
