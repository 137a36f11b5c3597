//! Gaussian kernels and convolution.
//!
//! Both convolution routines compute a correlation (`out(x, y) = Σ k(i, j) ·
//! in(x + i, y + j)`) with edge replication at the borders. Every kernel built
//! here is symmetric, so this is the same as a true convolution.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Symmetric 1-D kernel with taps at offsets `-radius..=radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    radius: usize,
    taps: Vec<f64>,
}

impl Kernel1D {
    /// `taps` must have odd length and be mirror-symmetric.
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.len().is_multiple_of(2) {
            return Err(Error::param(format!(
                "1-D kernel needs an odd number of taps, got {}",
                taps.len()
            )));
        }
        let n = taps.len();
        if (0..n / 2).any(|i| taps[i] != taps[n - 1 - i]) {
            return Err(Error::param("1-D kernel taps must be symmetric"));
        }
        Ok(Self {
            radius: n / 2,
            taps,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at signed offset `k`.
    pub fn at(&self, k: isize) -> f64 {
        self.taps[(k + self.radius as isize) as usize]
    }
}

/// Square odd-sided 2-D kernel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(radius: usize, taps: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if taps.len() != side * side {
            return Err(Error::param(format!(
                "2-D kernel of radius {radius} needs {} taps, got {}",
                side * side,
                taps.len()
            )));
        }
        Ok(Self { radius, taps })
    }

    /// Outer product `ky · kxᵀ`. The smaller kernel is zero-padded when the
    /// radii differ.
    pub fn outer(kx: &Kernel1D, ky: &Kernel1D) -> Self {
        let radius = kx.radius.max(ky.radius);
        let r = radius as isize;
        let tap = |k: &Kernel1D, o: isize| {
            if o.unsigned_abs() <= k.radius {
                k.at(o)
            } else {
                0.0
            }
        };
        let mut taps = Vec::with_capacity((2 * radius + 1).pow(2));
        for j in -r..=r {
            for i in -r..=r {
                taps.push(tap(ky, j) * tap(kx, i));
            }
        }
        Self { radius, taps }
    }

    /// The 4-neighbour Laplacian stencil `0 1 0 / 1 -4 1 / 0 1 0`.
    pub fn laplacian() -> Self {
        Self {
            radius: 1,
            taps: vec![0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0],
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at signed offset `(i, j)` (column, row).
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let side = 2 * self.radius + 1;
        let r = self.radius as isize;
        self.taps[(j + r) as usize * side + (i + r) as usize]
    }
}

/// Default truncation radius for a Gaussian of scale `sigma`: `ceil(3σ)`, at least 1.
pub fn default_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}

/// Sampled Gaussian `exp(-k²/2σ²)` on `-radius..=radius`, normalized to sum 1.
pub fn gaussian_kernel_1d(sigma: f64, radius: usize) -> Result<Kernel1D> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    if radius < 1 {
        return Err(Error::param("kernel radius must be at least 1"));
    }
    let half: Vec<f64> = (0..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum = half[0] + 2.0 * half[1..].iter().sum::<f64>();
    let mut taps = Vec::with_capacity(2 * radius + 1);
    taps.extend(half.iter().rev().map(|v| v / sum));
    taps.extend(half[1..].iter().map(|v| v / sum));
    Ok(Kernel1D { radius, taps })
}

// One separable pass. Taps are applied in mirrored pairs, `k_i · (a + b)`, so
// the result is unchanged when the image is flipped along the pass axis.
fn pass(img: &GrayImage, k: &Kernel1D, horizontal: bool) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let r = k.radius as isize;
    let center = k.at(0);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = center * img.get_clamped(x, y);
            for i in 1..=r {
                let pair = if horizontal {
                    img.get_clamped(x - i, y) + img.get_clamped(x + i, y)
                } else {
                    img.get_clamped(x, y - i) + img.get_clamped(x, y + i)
                };
                acc += k.at(i) * pair;
            }
            out.push(acc);
        }
    }
    GrayImage::new(w, h, out).expect("pass preserves dimensions")
}

/// Separable convolution with `kx` along rows and `ky` along columns.
///
/// Both pass orders (x then y, y then x) are evaluated and averaged. Together
/// with the mirrored-pair accumulation this makes the output bit-exactly
/// covariant with quarter turns and flips of the input when `kx == ky`, which
/// keeps downstream tie-breaking rotation consistent.
pub fn convolve_separable(img: &GrayImage, kx: &Kernel1D, ky: &Kernel1D) -> GrayImage {
    let xy = pass(&pass(img, kx, true), ky, false);
    let yx = pass(&pass(img, ky, false), kx, true);
    let pixels = xy
        .pixels()
        .iter()
        .zip(yx.pixels())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

/// Direct dense 2-D correlation with replicated borders.
pub fn convolve_2d(img: &GrayImage, k: &Kernel2D) -> GrayImage {
    let r = k.radius as isize;
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        let mut acc = 0.0;
        for j in -r..=r {
            for i in -r..=r {
                acc += k.at(i, j) * img.get_clamped(x + i, y + j);
            }
        }
        acc
    })
    .expect("same dimensions")
}

/// Gaussian smoothing with the default radius.
pub fn gaussian_blur(img: &GrayImage, sigma: f64, radius: Option<usize>) -> Result<GrayImage> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    let k = gaussian_kernel_1d(sigma, radius.unwrap_or_else(|| default_radius(sigma)))?;
    Ok(convolve_separable(img, &k, &k))
}
