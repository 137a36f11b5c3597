use std::path::Path;
use std::process::{Command, Output};

use edgebench::evaluation::{score, synth_step};
use edgebench::pnm::{read_image, Image};
use edgebench::{EdgeMap, GrayImage};

fn edgebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgebench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_gray(path: &Path) -> GrayImage {
    match read_image(path).unwrap() {
        Image::Gray(g) => g,
        other => panic!("expected a gray image, got {other:?}"),
    }
}

fn to_edges(img: &GrayImage) -> EdgeMap {
    EdgeMap::from_fn(img.width(), img.height(), |x, y| img.get(x, y) > 0.5).unwrap()
}

#[test]
fn synth_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("step.pgm");
    let truth = dir.path().join("truth.pgm");
    let edges = dir.path().join("edges.pgm");
    let s = |p: &Path| p.to_str().unwrap().to_owned();

    let out = edgebench(&[
        "synth",
        "--scene",
        "step",
        "--size",
        "32",
        "--out-image",
        &s(&image),
        "--out-truth",
        &s(&truth),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let expected = synth_step(32, 32, 16, 0.5).unwrap();
    let written = read_gray(&image);
    for (a, b) in written.pixels().iter().zip(expected.image.pixels()) {
        assert!((a - b).abs() <= 0.5 / 255.0);
    }
    assert_eq!(to_edges(&read_gray(&truth)), expected.truth);

    let out = edgebench(&[
        "detect",
        "--detector",
        "canny",
        "--in",
        &s(&image),
        "--out",
        &s(&edges),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let detected = to_edges(&read_gray(&edges));
    let r = score(&detected, &expected.truth, 1.5).unwrap();
    assert_eq!((r.false_positive_rate, r.false_negative_rate), (0.0, 0.0));
}

#[test]
fn detect_marr_hildreth_with_hysteresis() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("circle.pgm");
    let truth = dir.path().join("truth.pgm");
    let edges = dir.path().join("edges.pgm");
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let out = edgebench(&[
        "synth",
        "--scene",
        "circle",
        "--out-image",
        &s(&image),
        "--out-truth",
        &s(&truth),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = edgebench(&[
        "detect",
        "--detector",
        "marr-hildreth",
        "--hysteresis",
        "--low",
        "0.01",
        "--high",
        "0.05",
        "--in",
        &s(&image),
        "--out",
        &s(&edges),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let detected = to_edges(&read_gray(&edges));
    let r = score(&detected, &to_edges(&read_gray(&truth)), 1.5).unwrap();
    assert!(r.false_negative_rate < 0.1, "{r:?}");
}

#[test]
fn compare_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = edgebench(&[
        "compare",
        "--suite",
        "rectangle-corners",
        "--seeds",
        "3",
        "--low",
        "0.05",
        "--high",
        "0.15",
        "--slope-threshold",
        "0.01",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise generator"));

    let mut reader = csv::Reader::from_path(&report).unwrap();
    let header: Vec<String> = reader
        .headers()
        .unwrap()
        .iter()
        .map(str::to_owned)
        .collect();
    assert_eq!(header[..2], ["scene", "detector"]);
    let detectors: Vec<String> = reader.records().map(|r| r.unwrap()[1].to_owned()).collect();
    assert_eq!(detectors, ["canny", "marr-hildreth"]);
}

#[test]
fn bad_input_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.pgm");
    std::fs::write(&junk, b"P7\n1 1\n255\n\0").unwrap();
    let out_path = dir.path().join("never.pgm");
    let out = edgebench(&[
        "detect",
        "--detector",
        "canny",
        "--in",
        junk.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P7"));
    assert!(!out_path.exists());

    let out = edgebench(&[
        "detect",
        "--detector",
        "canny",
        "--low",
        "0.3",
        "--high",
        "0.1",
        "--in",
        "x",
        "--out",
        "y",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(edgebench(&["frobnicate"]).status.code(), Some(1));
}
