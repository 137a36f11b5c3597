//! Canny detector: Gaussian smoothing, central-difference gradient,
//! interpolated non-maximum suppression and hysteresis thresholding.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::gaussian_blur;
use crate::image::GrayImage;

pub use crate::image::EdgeMap;

/// Gradient components of an image together with their polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    gx: Vec<f64>,
    gy: Vec<f64>,
    magnitude: Vec<f64>,
    direction: Vec<f64>,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gx(&self) -> &[f64] {
        &self.gx
    }

    pub fn gy(&self) -> &[f64] {
        &self.gy
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    /// `atan2(gy, gx)` in `(-π, π]`. The y axis points down the image.
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn magnitude_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.magnitude.clone()).expect("valid dimensions")
    }
}

/// Smoothing scale and hysteresis thresholds, in gradient-magnitude units
/// (intensity per pixel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
    /// Gaussian truncation radius; `None` means `ceil(3σ)`.
    #[serde(default)]
    pub radius: Option<usize>,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            low: 0.05,
            high: 0.15,
            radius: None,
        }
    }
}

impl CannyParams {
    pub fn new(sigma: f64, low: f64, high: f64) -> Self {
        Self {
            sigma,
            low,
            high,
            radius: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::param(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.radius == Some(0) {
            return Err(Error::param("kernel radius must be at least 1"));
        }
        check_thresholds(self.low, self.high)
    }
}

pub(crate) fn check_thresholds(low: f64, high: f64) -> Result<()> {
    if !(low >= 0.0) {
        return Err(Error::param(format!(
            "low threshold must be non-negative, got {low}"
        )));
    }
    if !(high >= 0.0) {
        return Err(Error::param(format!(
            "high threshold must be non-negative, got {high}"
        )));
    }
    if low > high {
        return Err(Error::param(format!(
            "low threshold {low} must not exceed high threshold {high}"
        )));
    }
    Ok(())
}

/// Central-difference gradient with replicated borders.
pub fn gradient(img: &GrayImage) -> Result<GradientField> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::Dimension(format!(
            "gradient needs an image of at least 3x3, got {w}x{h}"
        )));
    }
    let n = w * h;
    let mut gx = Vec::with_capacity(n);
    let mut gy = Vec::with_capacity(n);
    let mut magnitude = Vec::with_capacity(n);
    let mut direction = Vec::with_capacity(n);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let dx = (img.get_clamped(x + 1, y) - img.get_clamped(x - 1, y)) / 2.0;
            let dy = (img.get_clamped(x, y + 1) - img.get_clamped(x, y - 1)) / 2.0;
            gx.push(dx);
            gy.push(dy);
            // Not hypot: the sum must be symmetric in its operands so that a
            // quarter turn of the input reproduces the same magnitudes.
            magnitude.push((dx * dx + dy * dy).sqrt());
            let mut theta = dy.atan2(dx);
            if theta <= -PI {
                theta = PI;
            }
            direction.push(theta);
        }
    }
    Ok(GradientField {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
        direction,
    })
}

/// Interpolated magnitudes one step forward and one step backward along the
/// gradient at interior pixel `(x, y)`.
///
/// The gradient ray leaves the 3x3 neighbourhood through the side between an
/// axis neighbour and a diagonal neighbour; the sample there is the linear
/// blend of those two magnitudes.
pub fn interpolated_neighbors(g: &GradientField, x: usize, y: usize) -> (f64, f64) {
    let w = g.width;
    let i = y * w + x;
    let (gx, gy) = (g.gx[i], g.gy[i]);
    let (ax, ay) = (gx.abs(), gy.abs());
    let sx = if gx > 0.0 {
        1
    } else if gx < 0.0 {
        -1
    } else {
        0
    };
    let sy = if gy > 0.0 {
        1
    } else if gy < 0.0 {
        -1
    } else {
        0
    };
    let m = |dx: isize, dy: isize| {
        g.magnitude[(y as isize + dy) as usize * w + (x as isize + dx) as usize]
    };
    if ax == 0.0 && ay == 0.0 {
        return (0.0, 0.0);
    }
    if ax >= ay {
        let t = ay / ax;
        (
            (1.0 - t) * m(sx, 0) + t * m(sx, sy),
            (1.0 - t) * m(-sx, 0) + t * m(-sx, -sy),
        )
    } else {
        let t = ax / ay;
        (
            (1.0 - t) * m(0, sy) + t * m(sx, sy),
            (1.0 - t) * m(0, -sy) + t * m(-sx, -sy),
        )
    }
}

/// Keeps a magnitude only where it is a maximum along its gradient direction.
///
/// A pixel survives iff its magnitude is `>=` the forward sample and strictly
/// `>` the backward sample, so an exact plateau along the gradient keeps only
/// its first pixel. Border pixels are always suppressed.
pub fn nonmax_suppress(g: &GradientField) -> GrayImage {
    let (w, h) = (g.width, g.height);
    let mut out = vec![0.0; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let i = y * w + x;
            let m = g.magnitude[i];
            if m == 0.0 {
                continue;
            }
            let (forward, backward) = interpolated_neighbors(g, x, y);
            if m >= forward && m > backward {
                out[i] = m;
            }
        }
    }
    GrayImage::new(w, h, out).expect("valid dimensions")
}

/// Visiting order used by the hysteresis flood fill. The result does not
/// depend on it; the alternatives exist so that can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillOrder {
    /// Seeds in row-major order, depth-first growth.
    #[default]
    RowMajorStack,
    /// Seeds in reverse row-major order, breadth-first growth.
    ReverseQueue,
}

/// Two-threshold hysteresis with 8-connected propagation.
///
/// Pixels strictly above `high` seed edges; pixels strictly above `low` join
/// when they are 8-connected to a seed through other such pixels.
pub fn hysteresis(thinned: &GrayImage, low: f64, high: f64) -> Result<EdgeMap> {
    hysteresis_ordered(thinned, low, high, FillOrder::default())
}

pub fn hysteresis_ordered(
    thinned: &GrayImage,
    low: f64,
    high: f64,
    order: FillOrder,
) -> Result<EdgeMap> {
    check_thresholds(low, high)?;
    let (w, h) = (thinned.width(), thinned.height());
    let v = thinned.pixels();
    let mut mask = vec![false; w * h];
    let mut pending = VecDeque::new();

    let seeds: Box<dyn Iterator<Item = usize>> = match order {
        FillOrder::RowMajorStack => Box::new(0..w * h),
        FillOrder::ReverseQueue => Box::new((0..w * h).rev()),
    };
    for seed in seeds {
        if mask[seed] || !(v[seed] > high) {
            continue;
        }
        mask[seed] = true;
        pending.push_back(seed);
        loop {
            let next = match order {
                FillOrder::RowMajorStack => pending.pop_back(),
                FillOrder::ReverseQueue => pending.pop_front(),
            };
            let Some(i) = next else { break };
            let (x, y) = (i % w, i / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if !mask[j] && v[j] > low {
                        mask[j] = true;
                        pending.push_back(j);
                    }
                }
            }
        }
    }
    EdgeMap::new(w, h, mask)
}

/// Smoothed, gradient-filtered and thinned magnitude plane; everything in the
/// Canny pipeline except the final thresholding.
pub fn canny_thinned(img: &GrayImage, sigma: f64, radius: Option<usize>) -> Result<GrayImage> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::Dimension(format!(
            "Canny needs an image of at least 3x3, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let smoothed = gaussian_blur(img, sigma, radius)?;
    Ok(nonmax_suppress(&gradient(&smoothed)?))
}

pub fn canny_detect(img: &GrayImage, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    let thinned = canny_thinned(img, params.sigma, params.radius)?;
    hysteresis(&thinned, params.low, params.high)
}
