//! Scoring a detected edge map against ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::EdgeMap;

/// Default matching distance in pixels.
pub const DEFAULT_TOLERANCE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Fraction of detected pixels with no truth pixel within tolerance.
    pub false_positive_rate: f64,
    /// Fraction of truth pixels with no detected pixel within tolerance.
    pub false_negative_rate: f64,
    /// Mean squared distance (px²) from each matched detection to its nearest
    /// truth pixel.
    pub mean_sq_distance: f64,
    pub detected_count: usize,
    pub truth_count: usize,
    /// Detected pixels that have a truth pixel within tolerance.
    pub matched_count: usize,
    pub match_tolerance: f64,
}

impl EvalReport {
    /// Harmonic mean of `1 - FP` and `1 - FN`.
    pub fn f_score(&self) -> f64 {
        f_score(self.false_positive_rate, self.false_negative_rate)
    }
}

pub fn f_score(fp_rate: f64, fn_rate: f64) -> f64 {
    let (p, r) = (1.0 - fp_rate, 1.0 - fn_rate);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::param(format!(
            "match tolerance must be non-negative and finite, got {tol}"
        )));
    }
    Ok(())
}

/// Squared distance from `(x, y)` to the nearest marked pixel of `map` that
/// lies within `tol`, if any.
fn nearest_within(map: &EdgeMap, x: usize, y: usize, tol: f64) -> Option<f64> {
    let reach = tol.floor() as isize;
    let tol2 = tol * tol;
    let (w, h) = (map.width() as isize, map.height() as isize);
    let (x, y) = (x as isize, y as isize);
    let mut best: Option<f64> = None;
    for ny in (y - reach).max(0)..=(y + reach).min(h - 1) {
        for nx in (x - reach).max(0)..=(x + reach).min(w - 1) {
            if !map.get(nx as usize, ny as usize) {
                continue;
            }
            let d2 = ((nx - x).pow(2) + (ny - y).pow(2)) as f64;
            if d2 <= tol2 && best.is_none_or(|b| d2 < b) {
                best = Some(d2);
            }
        }
    }
    best
}

/// Fraction of `pixels` that have a detection within `tol`.
pub fn recall_at(detected: &EdgeMap, pixels: &[(usize, usize)], tol: f64) -> Result<f64> {
    check_tolerance(tol)?;
    if pixels.is_empty() {
        return Ok(1.0);
    }
    let hit = pixels
        .iter()
        .filter(|&&(x, y)| nearest_within(detected, x, y, tol).is_some())
        .count();
    Ok(hit as f64 / pixels.len() as f64)
}

/// Tolerance-matched false-positive and false-negative rates.
pub fn score(detected: &EdgeMap, truth: &EdgeMap, match_tolerance: f64) -> Result<EvalReport> {
    if detected.width() != truth.width() || detected.height() != truth.height() {
        return Err(Error::param(format!(
            "detected map is {}x{} but truth is {}x{}",
            detected.width(),
            detected.height(),
            truth.width(),
            truth.height()
        )));
    }
    check_tolerance(match_tolerance)?;

    let det = detected.points();
    let tru = truth.points();

    let mut matched = 0usize;
    let mut sq_sum = 0.0;
    for &(x, y) in &det {
        if let Some(d2) = nearest_within(truth, x, y, match_tolerance) {
            matched += 1;
            sq_sum += d2;
        }
    }
    let covered = tru
        .iter()
        .filter(|&&(x, y)| nearest_within(detected, x, y, match_tolerance).is_some())
        .count();

    let false_positive_rate = if det.is_empty() {
        0.0
    } else {
        (det.len() - matched) as f64 / det.len() as f64
    };
    let false_negative_rate = if tru.is_empty() {
        0.0
    } else {
        (tru.len() - covered) as f64 / tru.len() as f64
    };
    let mean_sq_distance = if matched == 0 {
        0.0
    } else {
        sq_sum / matched as f64
    };

    Ok(EvalReport {
        false_positive_rate,
        false_negative_rate,
        mean_sq_distance,
        detected_count: det.len(),
        truth_count: tru.len(),
        matched_count: matched,
        match_tolerance,
    })
}
