//! Command-line interface.
//!
//! Data goes to stdout and diagnostics to stderr. Exit status is 0 on
//! success, 2 when some images failed but the rest were processed, and 1 on
//! fatal errors, including bad flags.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use deskew_core::estimator::{page_spectrum, preprocess};
use deskew_core::search::{coarse_window_candidates, fine_window_candidates};
use deskew_core::{deskew, estimate_skew, load_preset, Branch, EstimatorConfig, SkewEstimate};

use crate::config::load_config;
use crate::dataset::{
    generate_skew_dataset, list_images, split_dev_test, synth_corpus, AngleRange, DatasetManifest, SplitFilter,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    ablate_division, ablate_power, ablate_window, evaluate, export_error_curve, load_samples, search_params,
    write_ablation_csv, SweepSet,
};
use crate::fft::RustFft;
use crate::io::{load_gray, save_png, save_spectrum_png};

/// Half-width used for `--range 45`; the grid stops short of the diagonal.
pub const WIDE_RANGE_LIMIT: f64 = 44.9;

#[derive(Debug, Parser)]
#[command(
    name = "deskew",
    version,
    about = "Document skew estimation from the Fourier magnitude spectrum"
)]
pub struct Cli {
    /// Worker threads for per-image work [default: logical cores, or DESKEW_THREADS]
    #[arg(long, global = true, env = "DESKEW_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate skew angles, one `path<TAB>angle` line per image
    Estimate(EstimateArgs),
    /// Estimate the skew and write the corrected image
    Deskew(DeskewArgs),
    /// Rotate straight images into a skewed dataset with a manifest
    Generate(GenerateArgs),
    /// Render straight synthetic pages
    Synth(SynthArgs),
    /// Assign manifest entries to dev and test by source image
    Split(SplitArgs),
    /// Evaluate the estimator against a manifest
    Evaluate(EvaluateArgs),
    /// Search the window offset W and distance D on a dev split
    SearchParams(SearchArgs),
    /// Ablation tables over block division, spectrum kind or window offset
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RangeArg {
    /// -15 to 15 degrees
    #[value(name = "15")]
    Narrow,
    /// -44.9 to 44.9 degrees
    #[value(name = "45")]
    Wide,
}

impl RangeArg {
    pub fn limit(self) -> f64 {
        match self {
            RangeArg::Narrow => 15.0,
            RangeArg::Wide => WIDE_RANGE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    /// Working height; selects the tuned W and D for that height
    #[arg(long, default_value_t = 1024)]
    pub height: u32,
    /// Angle range in degrees
    #[arg(long, value_enum, default_value = "15")]
    pub range: RangeArg,
    /// Angle grid step in degrees
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// TOML or JSON estimator config; replaces --height
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl EstimatorArgs {
    pub fn resolve(&self) -> Result<EstimatorConfig> {
        let base = match &self.config {
            Some(path) => load_config(path)?,
            None => load_preset(self.height)?,
        };
        let cfg = EstimatorConfig {
            angle_step: self.step,
            ..base.with_range(self.range.limit())
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Image to estimate
    #[arg(long, required_unless_present = "input_dir", conflicts_with = "input_dir")]
    pub input: Option<PathBuf>,
    /// Estimate every image in a directory
    #[arg(long)]
    pub input_dir: Option<PathBuf>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Print one JSON record per image with both candidate angles
    #[arg(long)]
    pub json: bool,
    /// Write both projection profiles as CSV (single input only)
    #[arg(long, requires = "input")]
    pub profile_out: Option<PathBuf>,
    /// Write the centered log-magnitude spectrum as a 16-bit PNG (single input only)
    #[arg(long, requires = "input")]
    pub spectrum_dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeskewArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Corrected PNG
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory of straight source images
    #[arg(long)]
    pub source_dir: PathBuf,
    #[arg(long, value_enum, default_value = "15")]
    pub range: RangeArg,
    /// Skewed variants per source (doubled for --range 45)
    #[arg(long, default_value_t = 5)]
    pub per_image: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output dataset directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// manifest.json to split; rewritten in place
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 0.7)]
    pub dev_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Dev,
    Test,
    All,
}

impl From<SplitArg> for SplitFilter {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Dev => SplitFilter::Dev,
            SplitArg::Test => SplitFilter::Test,
            SplitArg::All => SplitFilter::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
    /// Full JSON report
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-image CSV report
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
    /// Sorted error curve CSV
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, value_enum, default_value = "dev")]
    pub split: SplitArg,
    /// Every scored candidate as CSV
    #[arg(long)]
    pub sweep_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationMode {
    /// Block fractions of the working height
    Division,
    /// Magnitude against power spectrum
    Power,
    /// Correction-only window offsets
    Window,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub mode: AblationMode,
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
    /// Comma-separated values [default: 0.1,0.2,0.5,1.0 for division; 0,15,35,55,75 for window]
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
    /// Write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a command that may have skipped some images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Partial,
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("deskew: thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("deskew: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(command: Command) -> Result<Status> {
    match command {
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Deskew(a) => cmd_deskew(&a),
        Command::Generate(a) => {
            let range = AngleRange::symmetric(a.range.limit())?;
            let m = generate_skew_dataset(&a.source_dir, range, a.per_image, a.seed, &a.out)?;
            eprintln!("wrote {} images to {}", m.entries.len(), a.out.display());
            Ok(Status::Ok)
        }
        Command::Synth(a) => {
            synth_corpus(a.count, &a.out, a.seed)?;
            eprintln!("rendered {} pages into {}", a.count, a.out.display());
            Ok(Status::Ok)
        }
        Command::Split(a) => {
            let m = split_dev_test(&DatasetManifest::load(&a.manifest)?, a.dev_ratio, a.seed)?;
            m.save(a.manifest.parent().unwrap_or(Path::new(".")))?;
            Ok(Status::Ok)
        }
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::SearchParams(a) => cmd_search(&a),
        Command::Ablate(a) => cmd_ablate(&a),
    }
}

#[derive(Serialize)]
struct EstimateRecord {
    path: String,
    theta_f: f64,
    theta_a: f64,
    theta_b: f64,
    branch: Branch,
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Status> {
    let cfg = a.estimator.resolve()?;
    let inputs = match (&a.input, &a.input_dir) {
        (Some(p), _) => vec![p.clone()],
        (None, Some(dir)) => list_images(dir)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    // A single unreadable input is fatal; in a directory it is skipped.
    let single = a.input.is_some();
    let mut status = Status::Ok;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for path in &inputs {
        let estimate = match load_gray(path).and_then(|img| Ok(estimate_skew(&RustFft, &img, &cfg)?)) {
            Ok(e) => e,
            Err(e @ (Error::Io { .. } | Error::Image { .. })) if single => return Err(e),
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                status = Status::Partial;
                continue;
            }
        };
        if a.json {
            let record = EstimateRecord {
                path: path.display().to_string(),
                theta_f: estimate.theta_f,
                theta_a: estimate.theta_a,
                theta_b: estimate.theta_b,
                branch: estimate.branch,
            };
            writeln!(out, "{}", serde_json::to_string(&record)?).map_err(|e| Error::io("<stdout>", e))?;
        } else {
            writeln!(out, "{}\t{:.2}", path.display(), estimate.theta_f).map_err(|e| Error::io("<stdout>", e))?;
        }
        if let Some(p) = &a.profile_out {
            write_profiles(&estimate, p)?;
        }
        if let Some(p) = &a.spectrum_dump {
            let bin = preprocess(&load_gray(path)?, &cfg)?;
            save_spectrum_png(&page_spectrum(&RustFft, &bin, cfg.spectrum_kind)?, p)?;
        }
    }
    Ok(status)
}

fn write_profiles(e: &SkewEstimate, path: &Path) -> Result<()> {
    let (Some(a), Some(b)) = (&e.initial_profile, &e.correction_profile) else {
        return Err(Error::invalid("estimate carries no profiles"));
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["angle", "initial", "correction"])?;
    for ((angle, va), vb) in a.angles.iter().zip(&a.values).zip(&b.values) {
        w.write_record([angle.to_string(), va.to_string(), vb.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn cmd_deskew(a: &DeskewArgs) -> Result<Status> {
    let cfg = a.estimator.resolve()?;
    let img = load_gray(&a.input)?;
    match deskew(&RustFft, &img, &cfg) {
        Ok((corrected, estimate)) => {
            save_png(&corrected, &a.output)?;
            println!("{:.2}", estimate.theta_f);
            Ok(Status::Ok)
        }
        Err(e @ deskew_core::Error::NoContent { .. }) => {
            eprintln!("{}: {e}; nothing written", a.input.display());
            Ok(Status::Partial)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<Status> {
    let cfg = a.estimator.resolve()?;
    let samples = load_samples(&a.manifest, a.split.into())?;
    if samples.is_empty() {
        return Err(Error::invalid("no manifest entries match the split"));
    }
    let report = evaluate(&samples, &cfg)?;
    for r in report.per_image.iter().filter(|r| r.failure.is_some()) {
        eprintln!("{}: {}", r.path, r.failure.as_deref().unwrap_or_default());
    }
    if let Some(p) = &a.report {
        report.save_json(p)?;
    }
    if let Some(p) = &a.report_csv {
        report.save_csv(p)?;
    }
    if let Some(p) = &a.curve {
        export_error_curve(&report.sorted_errors, p)?;
    }
    println!("{}", report.summary_line());
    Ok(if report.failures > 0 {
        Status::Partial
    } else {
        Status::Ok
    })
}

fn cmd_search(a: &SearchArgs) -> Result<Status> {
    let cfg = a.estimator.resolve()?;
    let samples = load_samples(&a.manifest, a.split.into())?;
    if samples.is_empty() {
        return Err(Error::invalid("no manifest entries match the split"));
    }
    let sweep = SweepSet::build(&samples, &cfg)?;
    let failures = sweep.images.iter().filter(|i| i.thetas.is_none()).count();
    let search = search_params(&sweep)?;
    if let Some(p) = &a.sweep_out {
        search.write_sweep_csv(p)?;
    }
    let h = cfg.target_height;
    println!(
        "W={} D={:.2} coarse={} fine={}",
        search.window_offset(),
        search.distance(),
        coarse_window_candidates(h).len(),
        fine_window_candidates(h, search.window.coarse_window).len()
    );
    Ok(if failures > 0 { Status::Partial } else { Status::Ok })
}

fn parse_values<T: std::str::FromStr + Clone>(values: &[String], default: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Ok(default.to_vec());
    }
    values
        .iter()
        .map(|v| v.trim().parse().map_err(|_| Error::invalid(format!("bad value {v:?}"))))
        .collect()
}

fn cmd_ablate(a: &AblateArgs) -> Result<Status> {
    let cfg = a.estimator.resolve()?;
    let samples = load_samples(&a.manifest, a.split.into())?;
    if samples.is_empty() {
        return Err(Error::invalid("no manifest entries match the split"));
    }
    let rows = match a.mode {
        AblationMode::Division => ablate_division(&samples, &cfg, &parse_values(&a.values, &[0.1, 0.2, 0.5, 1.0])?)?,
        AblationMode::Power => ablate_power(&samples, &cfg)?,
        AblationMode::Window => ablate_window(&samples, &cfg, &parse_values(&a.values, &[0, 15, 35, 55, 75])?)?,
    };
    match &a.out {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
            write_ablation_csv(&rows, file)?;
        }
        None => write_ablation_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(Status::Ok)
}
