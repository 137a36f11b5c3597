//! Synthetic scenes with exact edge maps, and additive Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::{EdgeMap, GrayImage};

/// Identity of the noise source. Changing it changes every noisy scene, so it
/// is part of the reproducibility contract.
pub const NOISE_GENERATOR: &str =
    "ChaCha8Rng::seed_from_u64 + rand_distr::StandardNormal (ziggurat)";

/// An image together with its true edge pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    pub image: GrayImage,
    pub truth: EdgeMap,
    /// Noise seed, when noise was added.
    pub seed: Option<u64>,
}

impl Scene {
    fn new(name: impl Into<String>, image: GrayImage, truth: EdgeMap) -> Self {
        Self {
            name: name.into(),
            image,
            truth,
            seed: None,
        }
    }

    /// Returns the scene with noise of `stddev` added to its image. The truth
    /// is unchanged.
    pub fn with_noise(mut self, stddev: f64, seed: u64) -> Result<Self> {
        self.image = add_gaussian_noise(&self.image, stddev, seed)?;
        self.seed = Some(seed);
        Ok(self)
    }
}

/// Vertical step: `0.5 - contrast/2` left of `column`, `0.5 + contrast/2` from
/// `column` on. The truth is column `column` in every row.
pub fn synth_step(width: usize, height: usize, column: usize, contrast: f64) -> Result<Scene> {
    if width == 0 || height == 0 {
        return Err(Error::param(format!(
            "step scene must be at least 1x1, got {width}x{height}"
        )));
    }
    if column == 0 || column >= width {
        return Err(Error::param(format!(
            "step column must satisfy 0 < column < width ({width}), got {column}"
        )));
    }
    if !(contrast > 0.0 && contrast <= 1.0) {
        return Err(Error::param(format!(
            "contrast must be in (0, 1], got {contrast}"
        )));
    }
    let (dark, bright) = (0.5 - contrast / 2.0, 0.5 + contrast / 2.0);
    let image = GrayImage::from_fn(width, height, |x, _| if x < column { dark } else { bright })?;
    let truth = EdgeMap::from_fn(width, height, |x, _| x == column)?;
    Ok(Scene::new("step", image, truth))
}

/// Bright disc on a dark square of side `size`.
///
/// Pixel `(x, y)` has its center at `(x + 0.5, y + 0.5)` and is inside when
/// that center lies within `radius` of `center`. The truth is every inside
/// pixel with at least one outside 4-neighbour.
pub fn synth_circle(size: usize, center: (f64, f64), radius: f64) -> Result<Scene> {
    let (cx, cy) = center;
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::param(format!(
            "circle radius must be non-negative, got {radius}"
        )));
    }
    let clearance = cx.min(cy).min(size as f64 - cx).min(size as f64 - cy);
    if !(radius + 2.0 <= clearance) {
        return Err(Error::param(format!(
            "circle of radius {radius} at ({cx}, {cy}) must stay 2 px clear of a {size}x{size} border"
        )));
    }
    let r2 = radius * radius;
    let inside = |x: isize, y: isize| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        dx * dx + dy * dy <= r2
    };
    let image = GrayImage::from_fn(size, size, |x, y| {
        if inside(x as isize, y as isize) {
            1.0
        } else {
            0.0
        }
    })?;
    let truth = EdgeMap::from_fn(size, size, |x, y| {
        let (x, y) = (x as isize, y as isize);
        inside(x, y)
            && [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
                .iter()
                .any(|&(a, b)| !inside(a, b))
    })?;
    Ok(Scene::new("circle", image, truth))
}

/// Bright filled rectangle covering columns `x0..=x1` and rows `y0..=y1` on a
/// dark square of side `size`. The truth is the rectangle's outline.
pub fn synth_rectangle(size: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Scene> {
    let ok = |a: usize, b: usize| 0 < a && a <= b && b + 1 < size;
    if !ok(x0, x1) || !ok(y0, y1) {
        return Err(Error::param(format!(
            "rectangle ({x0}, {y0})..({x1}, {y1}) must satisfy 0 < x0 <= x1 < size - 1 (and same for y) with size {size}"
        )));
    }
    let within = |x: usize, y: usize| (x0..=x1).contains(&x) && (y0..=y1).contains(&y);
    let image = GrayImage::from_fn(size, size, |x, y| if within(x, y) { 1.0 } else { 0.0 })?;
    let truth = EdgeMap::from_fn(size, size, |x, y| {
        within(x, y) && (x == x0 || x == x1 || y == y0 || y == y1)
    })?;
    Ok(Scene::new("rectangle", image, truth))
}

/// The four corner pixels of a [`synth_rectangle`] outline.
pub fn rectangle_corners(x0: usize, y0: usize, x1: usize, y1: usize) -> [(usize, usize); 4] {
    [(x0, y0), (x1, y0), (x0, y1), (x1, y1)]
}

/// Adds independent `N(0, stddev²)` noise to every pixel and clamps to `[0, 1]`.
/// Deterministic for a given `seed`; `stddev == 0` returns the input as is.
pub fn add_gaussian_noise(img: &GrayImage, stddev: f64, seed: u64) -> Result<GrayImage> {
    if !(stddev >= 0.0) || !stddev.is_finite() {
        return Err(Error::param(format!(
            "noise stddev must be non-negative, got {stddev}"
        )));
    }
    if stddev == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            (v + stddev * n).clamp(0.0, 1.0)
        })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}
