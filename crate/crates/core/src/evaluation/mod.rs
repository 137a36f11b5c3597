//! Synthetic ground truth and detector scoring.
//!
//! Scenes are generated with their exact edge maps, so the false-positive
//! rate, false-negative rate and mean squared localization error of a
//! detector can be measured directly.

mod compare;
mod scenes;
mod score;

pub use compare::{
    evaluate, run_comparison, threshold_grid, to_csv, to_json, tune_canny, tune_mh,
    tune_mh_hysteresis, write_csv, ComparisonRow, Detector, DetectorParams, ReportRecord, Suite,
    Tuned, CIRCLE_RADIUS, SQUARE, STEP_COLUMN, STEP_CONTRAST, SUITE_SIZE,
};
pub use scenes::{
    add_gaussian_noise, rectangle_corners, synth_circle, synth_rectangle, synth_step, Scene,
    NOISE_GENERATOR,
};
pub use score::{f_score, recall_at, score, EvalReport, DEFAULT_TOLERANCE};
