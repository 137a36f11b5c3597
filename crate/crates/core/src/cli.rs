//! The `edgebench` command line.
//!
//! Exit status: 0 on success, 1 for usage or validation errors, 2 for I/O and
//! file-format errors. Every flag is validated before any file is touched.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::canny::CannyParams;
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate, run_comparison, synth_circle, synth_rectangle, synth_step, to_csv, to_json,
    tune_canny, tune_mh, ComparisonRow, DetectorParams, Scene, Suite, DEFAULT_TOLERANCE,
    NOISE_GENERATOR,
};
use crate::marr_hildreth::MHParams;
use crate::pnm;

#[derive(Debug, Parser)]
#[command(
    name = "edgebench",
    version,
    about = "Marr-Hildreth and Canny edge detection with synthetic ground-truth scoring"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect edges in a PGM/PPM image and write the edge map as a PGM.
    Detect(DetectCmd),
    /// Write a synthetic scene image and its true edge map.
    Synth(SynthCmd),
    /// Run one detector on one synthetic scene and print its report record.
    Evaluate(EvaluateCmd),
    /// Run both detectors over a built-in scene suite.
    Compare(CompareCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Canny,
    MarrHildreth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    Step,
    Circle,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    NoisyStep,
    Circle,
    RectangleCorners,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::NoisyStep => Suite::NoisyStep,
            SuiteArg::Circle => Suite::Circle,
            SuiteArg::RectangleCorners => Suite::RectangleCorners,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DetectorFlags {
    #[arg(long, value_enum)]
    pub detector: DetectorArg,
    /// Gaussian smoothing scale.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Gaussian truncation radius [default: ceil(3*sigma)].
    #[arg(long)]
    pub radius: Option<usize>,
    /// Low hysteresis threshold (Canny, or Marr-Hildreth with --hysteresis).
    #[arg(long, default_value_t = 0.05)]
    pub low: f64,
    /// High hysteresis threshold (Canny, or Marr-Hildreth with --hysteresis).
    #[arg(long, default_value_t = 0.15)]
    pub high: f64,
    /// Marr-Hildreth minimum slope across a zero crossing.
    #[arg(long, default_value_t = 0.0)]
    pub slope_threshold: f64,
    /// Marr-Hildreth: threshold crossing slopes with hysteresis (--low/--high).
    #[arg(long)]
    pub hysteresis: bool,
}

impl DetectorFlags {
    fn params(&self) -> Result<DetectorParams> {
        let p = match self.detector {
            DetectorArg::Canny => {
                let p = CannyParams {
                    sigma: self.sigma,
                    low: self.low,
                    high: self.high,
                    radius: self.radius,
                };
                p.validate()?;
                DetectorParams::Canny(p)
            }
            DetectorArg::MarrHildreth => {
                let p = MHParams {
                    sigma: self.sigma,
                    slope_threshold: self.slope_threshold,
                    use_hysteresis: self.hysteresis,
                    low: self.low,
                    high: self.high,
                    radius: self.radius,
                };
                p.validate()?;
                DetectorParams::MarrHildreth(p)
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct SceneFlags {
    #[arg(long, value_enum)]
    pub scene: SceneKind,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Step contrast in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub contrast: f64,
    /// Step column [default: size/2].
    #[arg(long)]
    pub column: Option<usize>,
    /// Circle radius [default: 5*size/16].
    #[arg(long)]
    pub circle_radius: Option<f64>,
    /// Rectangle as x0,y0,x1,y1 (inclusive) [default: the centered half-size square].
    #[arg(long, value_parser = parse_rect)]
    pub rect: Option<(usize, usize, usize, usize)>,
    /// Additive Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SceneFlags {
    fn build(&self) -> Result<Scene> {
        let s = self.size;
        let scene = match self.scene {
            SceneKind::Step => synth_step(s, s, self.column.unwrap_or(s / 2), self.contrast)?,
            SceneKind::Circle => {
                let c = s as f64 / 2.0;
                synth_circle(
                    s,
                    (c, c),
                    self.circle_radius.unwrap_or(5.0 * s as f64 / 16.0),
                )?
            }
            SceneKind::Rectangle => {
                let (x0, y0, x1, y1) = self.rect.unwrap_or((
                    s / 4,
                    s / 4,
                    (3 * s / 4).saturating_sub(1),
                    (3 * s / 4).saturating_sub(1),
                ));
                synth_rectangle(s, x0, y0, x1, y1)?
            }
        };
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::param(format!(
                "noise stddev must be non-negative, got {}",
                self.noise
            )));
        }
        if self.noise > 0.0 {
            scene.with_noise(self.noise, self.seed)
        } else {
            Ok(scene)
        }
    }
}

fn parse_rect(s: &str) -> std::result::Result<(usize, usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid rectangle coordinate {p:?}"))
        })
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [x0, y0, x1, y1] => Ok((x0, y0, x1, y1)),
        _ => Err(format!("expected x0,y0,x1,y1, got {s:?}")),
    }
}

/// Noise seeds given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

/// Parses `a..b` / `a..=b` (both inclusive), a comma list, or a single seed.
pub fn parse_seeds(s: &str) -> std::result::Result<Seeds, String> {
    let num = |p: &str| {
        p.trim()
            .parse::<u64>()
            .map_err(|_| format!("invalid seed {p:?}"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty seed range {s:?}"));
        }
        if b - a >= 1_000_000 {
            return Err(format!("seed range {s:?} is too large"));
        }
        return Ok(Seeds((a..=b).collect()));
    }
    s.split(',')
        .map(num)
        .collect::<std::result::Result<_, _>>()
        .map(Seeds)
}

#[derive(Debug, Args)]
pub struct DetectCmd {
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// Input PGM or PPM image; color is converted to gray.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output edge map (PGM, edges 255).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[command(flatten)]
    pub scene: SceneFlags,
    #[arg(long)]
    pub out_image: PathBuf,
    #[arg(long)]
    pub out_truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateCmd {
    #[command(flatten)]
    pub detector: DetectorFlags,
    #[command(flatten)]
    pub scene: SceneFlags,
    /// Match distance in pixels.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report file [default: standard output].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    /// Noise seeds: a..b (inclusive), a,b,c or a single value.
    #[arg(long, default_value = "0..9", value_parser = parse_seeds)]
    pub seeds: Seeds,
    /// Noise standard deviation [default: 0.1 for noisy-step, 0 otherwise].
    #[arg(long)]
    pub noise: Option<f64>,
    /// Gaussian smoothing scale for both detectors.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Canny low threshold; with --high. Both omitted: grid-searched.
    #[arg(long, requires = "high")]
    pub low: Option<f64>,
    /// Canny high threshold; with --low.
    #[arg(long, requires = "low")]
    pub high: Option<f64>,
    /// Marr-Hildreth slope threshold [default: grid-searched].
    #[arg(long)]
    pub slope_threshold: Option<f64>,
    /// Match distance in pixels.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report file [default: standard output].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn check_tolerance(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!(
            "tolerance must be non-negative, got {t}"
        )));
    }
    Ok(())
}

fn emit(bytes: &[u8], out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => pnm::write_atomic(path, bytes),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn encode(rows: &[ComparisonRow], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

fn detect(cmd: &DetectCmd) -> Result<()> {
    let params = cmd.detector.params()?;
    let img = pnm::read_image(&cmd.input)?.into_gray();
    let edges = params.detect(&img)?;
    pnm::write_edges(&edges, &cmd.out)
}

fn synth(cmd: &SynthCmd) -> Result<()> {
    let scene = cmd.scene.build()?;
    pnm::write_gray(&scene.image, &cmd.out_image)?;
    pnm::write_edges(&scene.truth, &cmd.out_truth)
}

fn evaluate_cmd(cmd: &EvaluateCmd, stdout: &mut dyn Write) -> Result<()> {
    let params = cmd.detector.params()?;
    check_tolerance(cmd.tolerance)?;
    let scene = cmd.scene.build()?;
    let row = evaluate(&scene, &params, cmd.tolerance)?;
    emit(&encode(&[row], cmd.format)?, cmd.out.as_ref(), stdout)
}

fn compare(cmd: &CompareCmd, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    check_tolerance(cmd.tolerance)?;
    let suite = Suite::from(cmd.suite);
    let noise = cmd.noise.unwrap_or(suite.default_noise());
    let scenes = suite.scenes(&cmd.seeds.0, noise)?;

    let canny = match (cmd.low, cmd.high) {
        (Some(low), Some(high)) => {
            let p = CannyParams::new(cmd.sigma, low, high);
            p.validate()?;
            p
        }
        _ => {
            CannyParams::new(cmd.sigma, 0.0, 0.0).validate()?;
            tune_canny(&scenes, cmd.sigma, cmd.tolerance)?.params
        }
    };
    let mh = match cmd.slope_threshold {
        Some(t) => {
            let p = MHParams::single(cmd.sigma, t);
            p.validate()?;
            p
        }
        None => tune_mh(&scenes, cmd.sigma, cmd.tolerance)?.params,
    };

    let rows = run_comparison(&scenes, &mh, &canny, cmd.tolerance)?;
    let _ = writeln!(stderr, "noise generator: {NOISE_GENERATOR}");
    emit(&encode(&rows, cmd.format)?, cmd.out.as_ref(), stdout)
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Detect(c) => detect(c),
        Command::Synth(c) => synth(c),
        Command::Evaluate(c) => evaluate_cmd(c, stdout),
        Command::Compare(c) => compare(c, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
