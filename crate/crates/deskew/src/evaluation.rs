//! Batch evaluation over manifests, the two-stage search for `W` and `D`,
//! and the ablation tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use deskew_core::estimator::{page_spectrum, preprocess};
use deskew_core::search::{
    coarse_window_candidates, distance_grid, fine_window_candidates, max_window, select_distance, select_window,
    DistanceScore,
};
use deskew_core::{
    aggregate, compute_metrics, estimate_blockwise, estimate_variant, EstimatorConfig, GrayImage, Metrics, RayTable,
    SpectrumKind, Variant,
};

use crate::dataset::{DatasetManifest, SplitFilter};
use crate::error::{Error, Result};
use crate::fft::RustFft;
use crate::io::load_gray;

/// Floor applied before taking `log10` in the error curve.
pub const LOG_ERROR_FLOOR: f64 = 1e-4;

/// One image to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Path as written in the manifest; used in reports.
    pub label: String,
    /// Where to read the image from.
    pub path: PathBuf,
    pub truth: f64,
}

/// Manifest entries passing `filter`, with paths resolved against `root`.
pub fn samples(manifest: &DatasetManifest, root: impl AsRef<Path>, filter: SplitFilter) -> Vec<Sample> {
    manifest
        .select(filter)
        .into_iter()
        .map(|e| Sample {
            label: e.image_path.clone(),
            path: root.as_ref().join(&e.image_path),
            truth: e.ground_truth_angle,
        })
        .collect()
}

/// Load `manifest.json` and return its samples.
pub fn load_samples(manifest_path: impl AsRef<Path>, filter: SplitFilter) -> Result<Vec<Sample>> {
    let manifest_path = manifest_path.as_ref();
    let manifest = DatasetManifest::load(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    Ok(samples(&manifest, root, filter))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageResult {
    pub path: String,
    pub truth: f64,
    pub estimate: Option<f64>,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub aed: f64,
    pub top80: f64,
    pub ce: f64,
    pub we: f64,
    pub n: usize,
    pub sorted_errors: Vec<f64>,
    pub per_image: Vec<ImageResult>,
    /// Images that produced no estimate; each is scored at the range width.
    pub failures: usize,
}

impl EvalReport {
    pub fn from_results(per_image: Vec<ImageResult>) -> Result<Self> {
        let errors: Vec<f64> = per_image.iter().map(|r| r.error).collect();
        let m = compute_metrics(&errors)?;
        Ok(Self {
            aed: m.aed,
            top80: m.top80,
            ce: m.ce,
            we: m.we,
            n: m.n,
            sorted_errors: m.sorted_errors,
            failures: per_image.iter().filter(|r| r.failure.is_some()).count(),
            per_image,
        })
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            aed: self.aed,
            top80: self.top80,
            ce: self.ce,
            we: self.we,
            n: self.n,
            sorted_errors: self.sorted_errors.clone(),
        }
    }

    /// `AED=.. TOP80=.. CE=.. WE=.. N=..`
    pub fn summary_line(&self) -> String {
        summary_line(&self.metrics())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Per-image CSV: `path,truth,estimate,error,failure`.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv_writer(path.as_ref())?;
        w.write_record(["path", "truth", "estimate", "error", "failure"])?;
        for r in &self.per_image {
            let estimate = r.estimate.map(|e| e.to_string()).unwrap_or_default();
            w.write_record([
                r.path.as_str(),
                &r.truth.to_string(),
                &estimate,
                &r.error.to_string(),
                r.failure.as_deref().unwrap_or(""),
            ])?;
        }
        flush(w, path.as_ref())
    }
}

pub fn summary_line(m: &Metrics) -> String {
    format!(
        "AED={:.4} TOP80={:.4} CE={:.3} WE={:.4} N={}",
        m.aed, m.top80, m.ce, m.we, m.n
    )
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn flush(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Score every sample with `estimate`; failures cost `range_width`.
///
/// Samples run in parallel but results keep the input order.
pub fn evaluate_samples<F>(samples: &[Sample], range_width: f64, estimate: F) -> Result<EvalReport>
where
    F: Fn(&Sample) -> Result<f64> + Sync,
{
    let results = samples
        .par_iter()
        .map(|s| match estimate(s) {
            Ok(theta) => ImageResult {
                path: s.label.clone(),
                truth: s.truth,
                estimate: Some(theta),
                error: (theta - s.truth).abs(),
                failure: None,
            },
            Err(e) => ImageResult {
                path: s.label.clone(),
                truth: s.truth,
                estimate: None,
                error: range_width,
                failure: Some(e.to_string()),
            },
        })
        .collect();
    EvalReport::from_results(results)
}

/// Evaluate an estimator configuration with the given output rule.
///
/// Block fractions below 1 use the blockwise initial-only estimator.
pub fn evaluate_variant(samples: &[Sample], cfg: &EstimatorConfig, variant: Variant) -> Result<EvalReport> {
    cfg.validate()?;
    evaluate_samples(samples, cfg.range_width(), |s| {
        let img = load_gray(&s.path)?;
        let estimate = if cfg.block_fraction < 1.0 {
            estimate_blockwise(&RustFft, &img, cfg)?
        } else {
            estimate_variant(&RustFft, &img, cfg, variant)?
        };
        Ok(estimate.theta_f)
    })
}

/// Evaluate the full estimator.
pub fn evaluate(samples: &[Sample], cfg: &EstimatorConfig) -> Result<EvalReport> {
    evaluate_variant(samples, cfg, Variant::Adaptive)
}

/// Write the sorted error curve as `rank,fraction,error,log10_error`.
pub fn export_error_curve(errors: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["rank", "fraction", "error", "log10_error"])?;
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    for (i, e) in sorted.iter().enumerate() {
        let rank = i + 1;
        w.write_record([
            rank.to_string(),
            (rank as f64 / n as f64).to_string(),
            e.to_string(),
            e.max(LOG_ERROR_FLOOR).log10().to_string(),
        ])?;
    }
    flush(w, path)
}

/// Argmax angle of one image for every window offset `0..=max_window(H)`.
#[derive(Debug, Clone)]
pub struct ImageSweep {
    pub label: String,
    pub truth: f64,
    /// `None` when the image could not be estimated.
    pub thetas: Option<Vec<f64>>,
}

/// Offset sweeps of a whole sample set, from which any `(W, D)` pair or
/// single-projection variant can be scored without recomputing spectra.
#[derive(Debug, Clone)]
pub struct SweepSet {
    pub height: usize,
    pub range_width: f64,
    pub images: Vec<ImageSweep>,
}

fn sweep_image(s: &Sample, cfg: &EstimatorConfig) -> Result<Vec<f64>> {
    let img: GrayImage = load_gray(&s.path)?;
    let bin = preprocess(&img, cfg)?;
    let m = page_spectrum(&RustFft, &bin, cfg.spectrum_kind)?;
    let table = RayTable::new(&m, &cfg.grid()?, cfg.sampling)?;
    Ok((0..=max_window(cfg.target_height)).map(|w| table.argmax(w)).collect())
}

impl SweepSet {
    /// Build sweeps with `cfg`'s height, range, step, spectrum and sampling.
    pub fn build(samples: &[Sample], cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        let images = samples
            .par_iter()
            .map(|s| ImageSweep {
                label: s.label.clone(),
                truth: s.truth,
                thetas: sweep_image(s, cfg).ok(),
            })
            .collect();
        Ok(Self {
            height: cfg.target_height,
            range_width: cfg.range_width(),
            images,
        })
    }

    fn results(&self, pick: impl Fn(&[f64]) -> f64) -> Vec<ImageResult> {
        self.images
            .iter()
            .map(|im| match &im.thetas {
                Some(t) => {
                    let theta = pick(t);
                    ImageResult {
                        path: im.label.clone(),
                        truth: im.truth,
                        estimate: Some(theta),
                        error: (theta - im.truth).abs(),
                        failure: None,
                    }
                }
                None => ImageResult {
                    path: im.label.clone(),
                    truth: im.truth,
                    estimate: None,
                    error: self.range_width,
                    failure: Some("no estimate".into()),
                },
            })
            .collect()
    }

    fn check_window(&self, w: usize) -> Result<()> {
        if w > max_window(self.height) {
            return Err(Error::invalid(format!(
                "window {w} is outside [0, {}]",
                max_window(self.height)
            )));
        }
        Ok(())
    }

    /// Initial projection alone.
    pub fn initial_report(&self) -> Result<EvalReport> {
        EvalReport::from_results(self.results(|t| t[0]))
    }

    /// Correction projection alone at offset `w`.
    pub fn window_report(&self, w: usize) -> Result<EvalReport> {
        self.check_window(w)?;
        EvalReport::from_results(self.results(|t| t[w]))
    }

    /// Full aggregation rule with offset `w` and distance `d`.
    pub fn adaptive_report(&self, w: usize, d: f64) -> Result<EvalReport> {
        self.check_window(w)?;
        EvalReport::from_results(self.results(|t| aggregate(t[0], t[w], d).0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowScore {
    pub window: usize,
    pub aed: f64,
    pub ce: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSearch {
    pub coarse: Vec<WindowScore>,
    pub fine: Vec<WindowScore>,
    pub coarse_window: usize,
    pub window: usize,
}

fn window_stage(sweep: &SweepSet, candidates: &[usize]) -> Result<(usize, Vec<WindowScore>)> {
    let mut scores = Vec::with_capacity(candidates.len());
    for &w in candidates {
        let r = sweep.window_report(w)?;
        scores.push(WindowScore {
            window: w,
            aed: r.aed,
            ce: r.ce,
        });
    }
    let (best, _) = select_window(candidates, |w| {
        scores.iter().find(|s| s.window == w).map_or(0.0, |s| s.ce)
    });
    Ok((best, scores))
}

/// Coarse-to-fine search for the offset with the best correction-only CE.
pub fn search_window(sweep: &SweepSet) -> Result<WindowSearch> {
    let (coarse_window, coarse) = window_stage(sweep, &coarse_window_candidates(sweep.height))?;
    let (window, fine) = window_stage(sweep, &fine_window_candidates(sweep.height, coarse_window))?;
    Ok(WindowSearch {
        coarse,
        fine,
        coarse_window,
        window,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSearch {
    pub table: Vec<DistanceScore>,
    pub distance: f64,
}

/// Distance with the lowest AED of the full rule at offset `window`.
pub fn search_distance(sweep: &SweepSet, window: usize) -> Result<DistanceSearch> {
    sweep.check_window(window)?;
    let (distance, table) = select_distance(&distance_grid(), |d| {
        let r = sweep
            .adaptive_report(window, d)
            .expect("offset checked and sweep non-empty");
        (r.aed, r.ce)
    });
    Ok(DistanceSearch { table, distance })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSearch {
    pub window: WindowSearch,
    pub distance: DistanceSearch,
}

impl ParamSearch {
    pub fn window_offset(&self) -> usize {
        self.window.window
    }

    pub fn distance(&self) -> f64 {
        self.distance.distance
    }

    /// `stage,value,aed,ce` rows for every scored candidate.
    pub fn write_sweep_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv_writer(path)?;
        w.write_record(["stage", "value", "aed", "ce"])?;
        for (stage, rows) in [("coarse", &self.window.coarse), ("fine", &self.window.fine)] {
            for r in rows {
                w.write_record([
                    stage.to_string(),
                    r.window.to_string(),
                    r.aed.to_string(),
                    r.ce.to_string(),
                ])?;
            }
        }
        for r in &self.distance.table {
            w.write_record([
                "distance".to_string(),
                r.distance.to_string(),
                r.aed.to_string(),
                r.ce.to_string(),
            ])?;
        }
        flush(w, path)
    }
}

/// Search `W` then `D` on a sweep.
pub fn search_params(sweep: &SweepSet) -> Result<ParamSearch> {
    if sweep.images.is_empty() {
        return Err(Error::invalid("parameter search needs at least one image"));
    }
    let window = search_window(sweep)?;
    let distance = search_distance(sweep, window.window)?;
    Ok(ParamSearch { window, distance })
}

/// One row of an ablation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub value: String,
    pub aed: f64,
    pub top80: f64,
    pub ce: f64,
    pub we: f64,
}

impl AblationRow {
    fn new(value: impl Into<String>, r: &EvalReport) -> Self {
        Self {
            value: value.into(),
            aed: r.aed,
            top80: r.top80,
            ce: r.ce,
            we: r.we,
        }
    }
}

/// Initial-only estimates over averaged block spectra, one row per fraction.
pub fn ablate_division(samples: &[Sample], cfg: &EstimatorConfig, fractions: &[f64]) -> Result<Vec<AblationRow>> {
    fractions
        .iter()
        .map(|&k| {
            let cfg = EstimatorConfig {
                block_fraction: k,
                ..cfg.clone()
            };
            let r = evaluate_variant(samples, &cfg, Variant::InitialOnly)?;
            Ok(AblationRow::new(k.to_string(), &r))
        })
        .collect()
}

/// Initial-only estimates from the magnitude and the power spectrum.
pub fn ablate_power(samples: &[Sample], cfg: &EstimatorConfig) -> Result<Vec<AblationRow>> {
    [(SpectrumKind::Magnitude, "magnitude"), (SpectrumKind::Power, "power")]
        .into_iter()
        .map(|(kind, name)| {
            let cfg = EstimatorConfig {
                spectrum_kind: kind,
                ..cfg.clone()
            };
            let r = evaluate_variant(samples, &cfg, Variant::InitialOnly)?;
            Ok(AblationRow::new(name, &r))
        })
        .collect()
}

/// Correction-only estimates, one row per window offset.
pub fn ablate_window(samples: &[Sample], cfg: &EstimatorConfig, windows: &[usize]) -> Result<Vec<AblationRow>> {
    let sweep = SweepSet::build(samples, cfg)?;
    windows
        .iter()
        .map(|&w| Ok(AblationRow::new(w.to_string(), &sweep.window_report(w)?)))
        .collect()
}

/// `value,AED,TOP80,CE,WE` with a header row.
pub fn write_ablation_csv(rows: &[AblationRow], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["value", "AED", "TOP80", "CE", "WE"])?;
    for r in rows {
        w.write_record([
            r.value.clone(),
            format!("{:.4}", r.aed),
            format!("{:.4}", r.top80),
            format!("{:.3}", r.ce),
            format!("{:.4}", r.we),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<ablation output>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_of(truths: &[f64], thetas: Vec<Option<Vec<f64>>>) -> SweepSet {
        SweepSet {
            height: 8,
            range_width: 30.0,
            images: truths
                .iter()
                .zip(thetas)
                .enumerate()
                .map(|(i, (&truth, thetas))| ImageSweep {
                    label: format!("img{i}"),
                    truth,
                    thetas,
                })
                .collect(),
        }
    }

    #[test]
    fn sweep_reports_pick_the_right_projection() {
        // Offsets 0..=3; the initial projection is off by 2, larger offsets are right.
        let s = sweep_of(&[1.0], vec![Some(vec![3.0, 1.0, 1.0, 1.05])]);
        assert_eq!(s.initial_report().unwrap().aed, 2.0);
        assert_eq!(s.window_report(1).unwrap().aed, 0.0);
        assert_eq!(s.adaptive_report(1, 0.5).unwrap().aed, 2.0);
        assert_eq!(s.adaptive_report(1, 2.0).unwrap().aed, 0.0);
        assert!(s.window_report(4).is_err());
    }

    #[test]
    fn failures_cost_the_range_width() {
        let s = sweep_of(&[0.0, 0.0], vec![Some(vec![0.0; 4]), None]);
        let r = s.initial_report().unwrap();
        assert_eq!((r.we, r.failures, r.aed), (30.0, 1, 15.0));
    }
}
