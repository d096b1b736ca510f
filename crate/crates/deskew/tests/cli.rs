mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use deskew::dataset::{AngleRange, DatasetManifest, ManifestEntry};
use deskew::io::{load_gray, save_png};
use deskew::RustFft;
use deskew_core::{estimate_skew, load_preset, rotate, GrayImage};

fn deskew(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deskew"))
        .args(args)
        .env_remove("DESKEW_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn estimate_prints_path_and_two_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("doc.png");
    save_png(&rotate(&common::stripe_page(), 7.3, 255).unwrap(), &p).unwrap();
    let o = deskew(&["estimate", "--input", s(&p), "--height", "3072"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let (path, angle) = out.trim_end().split_once('\t').unwrap();
    assert_eq!(path, s(&p));
    assert_eq!(angle.split_once('.').unwrap().1.len(), 2);
    assert!((angle.parse::<f64>().unwrap() - 7.3).abs() <= 0.1, "{angle}");
}

#[test]
fn estimate_json_record() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("doc.png");
    save_png(&rotate(&common::stripe_page(), -4.0, 255).unwrap(), &p).unwrap();
    let profile = dir.path().join("profile.csv");
    let spectrum = dir.path().join("spectrum.png");
    let o = deskew(&[
        "estimate",
        "--input",
        s(&p),
        "--json",
        "--profile-out",
        s(&profile),
        "--spectrum-dump",
        s(&spectrum),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let f = v["theta_f"].as_f64().unwrap();
    assert!(f == v["theta_a"].as_f64().unwrap() || f == v["theta_b"].as_f64().unwrap());
    assert!(["initial", "correction"].contains(&v["branch"].as_str().unwrap()));
    let csv = fs::read_to_string(&profile).unwrap();
    assert!(csv.starts_with("angle,initial,correction\n"));
    assert_eq!(csv.lines().count(), 602);
    assert!(load_gray(&spectrum).is_ok());
}

#[test]
fn estimate_directory_and_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    save_png(&common::stripe_page(), dir.path().join("a.png")).unwrap();
    save_png(&GrayImage::filled(600, 800, 255).unwrap(), dir.path().join("b.png")).unwrap();
    fs::write(dir.path().join("c.png"), b"not an image").unwrap();
    let o = deskew(&["estimate", "--input-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with(s(&dir.path().join("a.png"))));
    assert!(stderr(&o).contains("no content"));
}

#[test]
fn bad_height_lists_presets() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("doc.png");
    save_png(&common::stripe_page(), &p).unwrap();
    let o = deskew(&["estimate", "--input", s(&p), "--height", "999"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1024, 1500, 2048, 3072, 4096"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn bad_flags_are_fatal() {
    assert_eq!(deskew(&["estimate", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        deskew(&["estimate", "--input", "x.png", "--range", "30"]).status.code(),
        Some(1)
    );
    assert_eq!(deskew(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(deskew(&["--help"]).status.code(), Some(0));
}

#[test]
fn deskew_straightens_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let output = dir.path().join("out.png");
    save_png(&rotate(&common::stripe_page(), 10.0, 255).unwrap(), &input).unwrap();
    let o = deskew(&["deskew", "--input", s(&input), "--output", s(&output)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let applied: f64 = stdout(&o).trim().parse().unwrap();
    assert!((applied - 10.0).abs() <= 0.1);
    let again = estimate_skew(&RustFft, &load_gray(&output).unwrap(), &load_preset(1024).unwrap()).unwrap();
    assert!(again.theta_f.abs() <= 0.2, "{}", again.theta_f);
}

#[test]
fn deskew_straight_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let output = dir.path().join("out.png");
    save_png(&common::stripe_page(), &input).unwrap();
    let o = deskew(&["deskew", "--input", s(&input), "--output", s(&output)]);
    assert!(o.status.success());
    assert!(stdout(&o).trim().parse::<f64>().unwrap().abs() <= 0.1);
    assert!(output.is_file());
}

#[test]
fn deskew_blank_and_unreadable() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.png");
    let output = dir.path().join("out.png");
    save_png(&GrayImage::filled(400, 500, 255).unwrap(), &blank).unwrap();
    let o = deskew(&["deskew", "--input", s(&blank), "--output", s(&output)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!output.exists());
    let o = deskew(&[
        "deskew",
        "--input",
        s(&dir.path().join("missing.png")),
        "--output",
        s(&output),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn generate(src: &Path, out: &Path, range: &str, per_image: &str, seed: &str) -> Output {
    deskew(&[
        "generate",
        "--source-dir",
        s(src),
        "--range",
        range,
        "--per-image",
        per_image,
        "--seed",
        seed,
        "--out",
        s(out),
    ])
}

#[test]
fn generate_split_and_doubling() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    common::write_small_sources(&src, 10);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(generate(&src, &a, "15", "5", "7").status.success());
    assert!(generate(&src, &b, "15", "5", "7").status.success());
    assert_eq!(
        fs::read(a.join("manifest.csv")).unwrap(),
        fs::read(b.join("manifest.csv")).unwrap()
    );

    let o = deskew(&["split", "--manifest", s(&a.join("manifest.json")), "--dev-ratio", "0.7"]);
    assert!(o.status.success());
    let m = DatasetManifest::load(a.join("manifest.json")).unwrap();
    let dev: std::collections::HashSet<_> = m
        .entries
        .iter()
        .filter(|e| e.split.is_some_and(|s| s.as_str() == "dev"))
        .map(|e| &e.source_path)
        .collect();
    assert_eq!(dev.len(), 7);
    assert_eq!(
        fs::read_to_string(a.join("manifest.csv"))
            .unwrap()
            .matches(",test\n")
            .count(),
        15
    );

    let wide = dir.path().join("wide");
    assert!(generate(&src, &wide, "45", "5", "7").status.success());
    assert_eq!(
        DatasetManifest::load(wide.join("manifest.json")).unwrap().entries.len(),
        100
    );
}

/// Straight stripe pages whose manifest claims the given angles, so the
/// errors equal the claimed angles.
fn planted_manifest(dir: &Path, truths: &[f64]) -> std::path::PathBuf {
    fs::create_dir_all(dir.join("images")).unwrap();
    let entries = truths
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let rel = format!("images/{i}.png");
            save_png(&common::stripe_document(700 + 10 * i, 900, 16), dir.join(&rel)).unwrap();
            ManifestEntry {
                image_path: rel,
                source_path: format!("{i}.png"),
                ground_truth_angle: t,
                split: None,
            }
        })
        .collect();
    let m = DatasetManifest {
        entries,
        range: AngleRange::symmetric(15.0).unwrap(),
        seed: 0,
    };
    m.save(dir).unwrap();
    dir.join("manifest.json")
}

#[test]
fn evaluate_summaries() {
    // At 2048 the ray raster resolves the 0.05 degree grid, so straight stripes read exactly 0.
    let dir = tempfile::tempdir().unwrap();
    let perfect = planted_manifest(&dir.path().join("perfect"), &[0.0, 0.0, 0.0]);
    let o = deskew(&["evaluate", "--height", "2048", "--manifest", s(&perfect)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("CE=1.000"), "{}", stdout(&o));

    let planted = planted_manifest(&dir.path().join("planted"), &[0.05, 0.2, 0.08, 1.0, 0.02]);
    let report = dir.path().join("report.json");
    let curve = dir.path().join("curve.csv");
    let o = deskew(&[
        "evaluate",
        "--height",
        "2048",
        "--manifest",
        s(&planted),
        "--report",
        s(&report),
        "--curve",
        s(&curve),
        "--split",
        "all",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "AED=0.2700 TOP80=0.0875 CE=0.600 WE=1.0000 N=5\n");
    assert!(report.is_file());
    assert_eq!(fs::read_to_string(&curve).unwrap().lines().count(), 6);

    // Identical inputs, identical bytes.
    let report2 = dir.path().join("report2.json");
    deskew(&[
        "evaluate",
        "--height",
        "2048",
        "--manifest",
        s(&planted),
        "--report",
        s(&report2),
    ]);
    assert_eq!(fs::read(&report).unwrap(), fs::read(&report2).unwrap());
}

#[test]
fn search_params_and_ablations() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    fs::create_dir_all(&src).unwrap();
    for i in 0..4 {
        save_png(
            &common::stripe_document(640 + 30 * i, 800, 12 + 2 * i),
            src.join(format!("{i}.png")),
        )
        .unwrap();
    }
    let ds = dir.path().join("ds");
    assert!(generate(&src, &ds, "15", "2", "1").status.success());
    let manifest = ds.join("manifest.json");
    assert!(deskew(&["split", "--manifest", s(&manifest)]).status.success());

    let sweep = dir.path().join("sweep.csv");
    let o = deskew(&["search-params", "--manifest", s(&manifest), "--sweep-out", s(&sweep)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.contains("coarse=20 fine=20"), "{line}");
    let w: usize = line
        .split_whitespace()
        .next()
        .unwrap()
        .trim_start_matches("W=")
        .parse()
        .unwrap();
    assert!(w < 512);
    assert_eq!(fs::read_to_string(&sweep).unwrap().lines().count(), 1 + 20 + 20 + 61);

    let o = deskew(&[
        "ablate",
        "--mode",
        "division",
        "--manifest",
        s(&manifest),
        "--values",
        "0.1,0.2,0.9,1.0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(rows[0], "value,AED,TOP80,CE,WE");
    assert_eq!(rows.len(), 5);
    // Block 1.0 is the initial projection alone, as is a window of 0.
    let o = deskew(&[
        "ablate",
        "--mode",
        "window",
        "--manifest",
        s(&manifest),
        "--values",
        "0,35",
    ]);
    let window_rows: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(
        rows[4].split_once(',').unwrap().1,
        window_rows[1].split_once(',').unwrap().1
    );

    let o = deskew(&["ablate", "--mode", "power", "--manifest", s(&manifest)]);
    let power: Vec<&str> = std::str::from_utf8(&o.stdout).unwrap().lines().collect();
    assert_eq!(power.len(), 3);
    assert!(power[1].starts_with("magnitude,") && power[2].starts_with("power,"));
}
