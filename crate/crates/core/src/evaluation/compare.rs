//! Running both detectors over scene suites, threshold tuning and report
//! serialization.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scenes::{synth_circle, synth_rectangle, synth_step, Scene};
use super::score::{score, EvalReport};
use crate::canny::{canny_detect, canny_thinned, hysteresis, CannyParams};
use crate::error::{Error, Result};
use crate::image::{EdgeMap, GrayImage};
use crate::marr_hildreth::{
    crossing_slopes, laplacian_of_smoothed_with_radius, mh_detect, MHParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    Canny,
    MarrHildreth,
}

impl Detector {
    /// Sorted by name.
    pub const ALL: [Detector; 2] = [Detector::Canny, Detector::MarrHildreth];

    pub fn name(self) -> &'static str {
        match self {
            Detector::Canny => "canny",
            Detector::MarrHildreth => "marr-hildreth",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canny" => Ok(Detector::Canny),
            "marr-hildreth" => Ok(Detector::MarrHildreth),
            other => Err(Error::param(format!("unknown detector {other:?}"))),
        }
    }
}

/// Parameters of one detector run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorParams {
    Canny(CannyParams),
    MarrHildreth(MHParams),
}

impl DetectorParams {
    pub fn detector(&self) -> Detector {
        match self {
            DetectorParams::Canny(_) => Detector::Canny,
            DetectorParams::MarrHildreth(_) => Detector::MarrHildreth,
        }
    }

    pub fn detect(&self, img: &GrayImage) -> Result<EdgeMap> {
        match self {
            DetectorParams::Canny(p) => canny_detect(img, p),
            DetectorParams::MarrHildreth(p) => mh_detect(img, p),
        }
    }
}

/// One (scene, detector) result.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scene: String,
    pub seed: Option<u64>,
    pub params: DetectorParams,
    pub report: EvalReport,
}

impl ComparisonRow {
    pub fn detector(&self) -> Detector {
        self.params.detector()
    }

    pub fn record(&self) -> ReportRecord {
        let (sigma, low, high, slope_threshold) = match self.params {
            DetectorParams::Canny(p) => (p.sigma, Some(p.low), Some(p.high), None),
            DetectorParams::MarrHildreth(p) if p.use_hysteresis => {
                (p.sigma, Some(p.low), Some(p.high), None)
            }
            DetectorParams::MarrHildreth(p) => (p.sigma, None, None, Some(p.slope_threshold)),
        };
        ReportRecord {
            scene: self.scene.clone(),
            detector: self.detector().name().to_string(),
            sigma,
            low,
            high,
            slope_threshold,
            fp_rate: self.report.false_positive_rate,
            fn_rate: self.report.false_negative_rate,
            mean_sq_distance: self.report.mean_sq_distance,
            detected: self.report.detected_count,
            truth: self.report.truth_count,
            matched: self.report.matched_count,
            tolerance: self.report.match_tolerance,
            seed: self.seed,
        }
    }
}

/// Flat report row; the CSV columns and JSON keys, in order. Parameters that
/// do not apply to a detector are empty (CSV) or `null` (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub scene: String,
    pub detector: String,
    pub sigma: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub slope_threshold: Option<f64>,
    pub fp_rate: f64,
    pub fn_rate: f64,
    pub mean_sq_distance: f64,
    pub detected: usize,
    pub truth: usize,
    pub matched: usize,
    pub tolerance: f64,
    pub seed: Option<u64>,
}

pub fn evaluate(scene: &Scene, params: &DetectorParams, tolerance: f64) -> Result<ComparisonRow> {
    let detected = params.detect(&scene.image)?;
    Ok(ComparisonRow {
        scene: scene.name.clone(),
        seed: scene.seed,
        params: *params,
        report: score(&detected, &scene.truth, tolerance)?,
    })
}

/// Runs both detectors on every scene.
///
/// Rows follow the scene order given; within a scene the detectors appear in
/// name order (`canny`, then `marr-hildreth`).
pub fn run_comparison(
    scenes: &[Scene],
    mh: &MHParams,
    canny: &CannyParams,
    tolerance: f64,
) -> Result<Vec<ComparisonRow>> {
    if scenes.is_empty() {
        return Err(Error::param("comparison needs at least one scene"));
    }
    mh.validate()?;
    canny.validate()?;
    let mut rows = Vec::with_capacity(scenes.len() * 2);
    for scene in scenes {
        for detector in Detector::ALL {
            let params = match detector {
                Detector::Canny => DetectorParams::Canny(*canny),
                Detector::MarrHildreth => DetectorParams::MarrHildreth(*mh),
            };
            rows.push(evaluate(scene, &params, tolerance)?);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row.record())
            .map_err(|e| Error::param(format!("CSV encoding failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn to_csv(rows: &[ComparisonRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

pub fn to_json(rows: &[ComparisonRow]) -> Result<Vec<u8>> {
    let records: Vec<ReportRecord> = rows.iter().map(ComparisonRow::record).collect();
    let mut buf = serde_json::to_vec_pretty(&records)
        .map_err(|e| Error::param(format!("JSON encoding failed: {e}")))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Built-in scene families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// 64x64 vertical step, contrast 0.5, one noisy copy per seed.
    NoisyStep,
    /// 64x64 disc of radius 20.
    Circle,
    /// 64x64 with a 32x32 bright square.
    RectangleCorners,
}

pub const SUITE_SIZE: usize = 64;
pub const STEP_COLUMN: usize = 32;
pub const STEP_CONTRAST: f64 = 0.5;
pub const SQUARE: (usize, usize, usize, usize) = (16, 16, 47, 47);
pub const CIRCLE_RADIUS: f64 = 20.0;

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::NoisyStep => "noisy-step",
            Suite::Circle => "circle",
            Suite::RectangleCorners => "rectangle-corners",
        }
    }

    /// Noise level used when none is requested.
    pub fn default_noise(self) -> f64 {
        match self {
            Suite::NoisyStep => 0.1,
            Suite::Circle | Suite::RectangleCorners => 0.0,
        }
    }

    pub fn base_scene(self) -> Scene {
        let mut scene = match self {
            Suite::NoisyStep => synth_step(SUITE_SIZE, SUITE_SIZE, STEP_COLUMN, STEP_CONTRAST),
            Suite::Circle => {
                let c = SUITE_SIZE as f64 / 2.0;
                synth_circle(SUITE_SIZE, (c, c), CIRCLE_RADIUS)
            }
            Suite::RectangleCorners => {
                let (x0, y0, x1, y1) = SQUARE;
                synth_rectangle(SUITE_SIZE, x0, y0, x1, y1)
            }
        }
        .expect("suite geometry is valid");
        scene.name = self.name().to_string();
        scene
    }

    /// One scene per seed, each with its own noise draw.
    pub fn scenes(self, seeds: &[u64], noise: f64) -> Result<Vec<Scene>> {
        seeds
            .iter()
            .map(|&seed| self.base_scene().with_noise(noise, seed))
            .collect()
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noisy-step" => Ok(Suite::NoisyStep),
            "circle" => Ok(Suite::Circle),
            "rectangle-corners" => Ok(Suite::RectangleCorners),
            other => Err(Error::param(format!(
                "unknown suite {other:?} (expected noisy-step, circle or rectangle-corners)"
            ))),
        }
    }
}

/// Threshold grid for operating-point search: 0 and `2^(-k/2)` for
/// `k = 24..=0`, ascending (from about 2.4e-4 up to 1).
pub fn threshold_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..=24).rev().map(|k| 2f64.powf(-(k as f64) / 2.0)))
        .collect()
}

/// Best operating point found by a grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuned<P> {
    pub params: P,
    /// Mean F-score over the tuning scenes at `params`.
    pub mean_f_score: f64,
}

fn mean_f(
    maps: impl Iterator<Item = Result<(EdgeMap, usize)>>,
    scenes: &[Scene],
    tolerance: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for m in maps {
        let (map, i) = m?;
        total += score(&map, &scenes[i].truth, tolerance)?.f_score();
    }
    Ok(total / scenes.len() as f64)
}

/// Picks the `(low, high)` pair from [`threshold_grid`] with the best mean
/// F-score; ties keep the earlier pair in grid order.
pub fn tune_canny(scenes: &[Scene], sigma: f64, tolerance: f64) -> Result<Tuned<CannyParams>> {
    if scenes.is_empty() {
        return Err(Error::param("tuning needs at least one scene"));
    }
    let thinned: Vec<GrayImage> = scenes
        .iter()
        .map(|s| canny_thinned(&s.image, sigma, None))
        .collect::<Result<_>>()?;
    let grid = threshold_grid();
    let mut best: Option<Tuned<CannyParams>> = None;
    for (hi_idx, &high) in grid.iter().enumerate() {
        for &low in &grid[..=hi_idx] {
            let f = mean_f(
                thinned
                    .iter()
                    .enumerate()
                    .map(|(i, t)| Ok((hysteresis(t, low, high)?, i))),
                scenes,
                tolerance,
            )?;
            if best.is_none_or(|b| f > b.mean_f_score) {
                best = Some(Tuned {
                    params: CannyParams::new(sigma, low, high),
                    mean_f_score: f,
                });
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}

fn mh_slopes(scenes: &[Scene], sigma: f64) -> Result<Vec<GrayImage>> {
    if scenes.is_empty() {
        return Err(Error::param("tuning needs at least one scene"));
    }
    scenes
        .iter()
        .map(|s| {
            Ok(crossing_slopes(&laplacian_of_smoothed_with_radius(
                &s.image, sigma, None,
            )?))
        })
        .collect()
}

/// Picks the slope threshold from [`threshold_grid`] with the best mean
/// F-score for the single-threshold Marr-Hildreth variant.
pub fn tune_mh(scenes: &[Scene], sigma: f64, tolerance: f64) -> Result<Tuned<MHParams>> {
    let slopes = mh_slopes(scenes, sigma)?;
    let mut best: Option<Tuned<MHParams>> = None;
    for &t in &threshold_grid() {
        // Thresholding at t is hysteresis with low == high == t.
        let f = mean_f(
            slopes
                .iter()
                .enumerate()
                .map(|(i, s)| Ok((hysteresis(s, t, t)?, i))),
            scenes,
            tolerance,
        )?;
        if best.is_none_or(|b| f > b.mean_f_score) {
            best = Some(Tuned {
                params: MHParams::single(sigma, t),
                mean_f_score: f,
            });
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Picks `(low, high)` for the hysteresis Marr-Hildreth variant.
pub fn tune_mh_hysteresis(scenes: &[Scene], sigma: f64, tolerance: f64) -> Result<Tuned<MHParams>> {
    let slopes = mh_slopes(scenes, sigma)?;
    let grid = threshold_grid();
    let mut best: Option<Tuned<MHParams>> = None;
    for (hi_idx, &high) in grid.iter().enumerate() {
        for &low in &grid[..=hi_idx] {
            let f = mean_f(
                slopes
                    .iter()
                    .enumerate()
                    .map(|(i, s)| Ok((hysteresis(s, low, high)?, i))),
                scenes,
                tolerance,
            )?;
            if best.is_none_or(|b| f > b.mean_f_score) {
                best = Some(Tuned {
                    params: MHParams::with_hysteresis(sigma, low, high),
                    mean_f_score: f,
                });
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}
