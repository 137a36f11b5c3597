//! Pixel buffers shared by every stage: real-valued gray and RGB images and
//! boolean edge masks.
//!
//! Intensities are stored as `f64` in the nominal range `[0, 1]`. Filter
//! outputs are allowed to leave that range; values are only clamped when an
//! image is written to disk.

use crate::error::{Error, Result};

/// Luminance weights applied by [`rgb_to_gray`] (ITU-R BT.601, as used by
/// MATLAB's `rgb2gray`).
pub const LUMA_WEIGHTS: [f64; 3] = [0.2989, 0.5870, 0.1140];

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!(
            "image must be at least 1x1, got {width}x{height}"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::Dimension(format!(
            "{width}x{height} image needs {} pixels, got {len}",
            width.saturating_mul(height)
        )));
    }
    Ok(())
}

/// Row-major grid of real intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Sample with edge replication: out-of-range coordinates are clamped to
    /// the nearest border pixel.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    /// Applies `f` to every intensity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Rotates the image a quarter turn counter-clockwise.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        // Source (x, y) lands at (y, w - 1 - x) in an h-wide image.
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                out[(w - 1 - x) * h + y] = self.get(x, y);
            }
        }
        GrayImage {
            width: h,
            height: w,
            pixels: out,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Row-major grid of `[r, g, b]` triples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some(bad) = pixels.iter().flatten().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::param(format!("color channel {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}

/// Converts color to gray with the fixed BT.601 luminance weights.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let pixels = img
        .pixels
        .iter()
        // The weights sum to 0.9999, so equal channels land a hair under the
        // input; clamp to the channel range to keep the output a convex
        // combination in floating point too.
        .map(|&[r, g, b]| {
            let lo = r.min(g).min(b);
            let hi = r.max(g).max(b);
            (wr * r + wg * g + wb * b).clamp(lo, hi)
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Per-pixel boolean edge mask; the output of both detectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        check_dims(width, height, mask.len())?;
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    /// An all-false mask.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut mask = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                mask.push(f(x, y));
            }
        }
        Self::new(width, height, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.mask[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Coordinates of every marked pixel in row-major order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    /// True when every pixel marked here is also marked in `other`.
    pub fn is_subset_of(&self, other: &EdgeMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// Quarter turn counter-clockwise, matching [`GrayImage::rotate90`].
    pub fn rotate90(&self) -> EdgeMap {
        let (w, h) = (self.width, self.height);
        let mut out = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                out[(w - 1 - x) * h + y] = self.get(x, y);
            }
        }
        EdgeMap {
            width: h,
            height: w,
            mask: out,
        }
    }

    /// Number of 8-connected components of marked pixels.
    pub fn component_count(&self) -> usize {
        let (w, h) = (self.width, self.height);
        let mut seen = vec![false; w * h];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..w * h {
            if !self.mask[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let (x, y) = ((i % w) as isize, (i / w) as isize);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let j = ny as usize * w + nx as usize;
                        if self.mask[j] && !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count
    }
}
