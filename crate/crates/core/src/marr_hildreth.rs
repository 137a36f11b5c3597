//! Marr-Hildreth detector: Gaussian smoothing, discrete Laplacian and a
//! zero-crossing scan with a slope threshold (or hysteresis on the slopes).
//!
//! Smoothing followed by the 4-neighbour Laplacian is the Laplacian of
//! Gaussian up to discretization; no sampled LoG kernel is built.

use serde::{Deserialize, Serialize};

use crate::canny::{check_thresholds, hysteresis};
use crate::error::{Error, Result};
use crate::filtering::{convolve_2d, gaussian_blur, Kernel2D};
use crate::image::{EdgeMap, GrayImage};

/// Signed second-derivative response of a smoothed image.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianResponse {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl LaplacianResponse {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        // Reuse the image dimension checks.
        let img = GrayImage::new(width, height, values)?;
        Ok(Self::from_image(img))
    }

    fn from_image(img: GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            values: img.into_pixels(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MHParams {
    pub sigma: f64,
    /// Minimum `|a - b|` across a sign change `(a, b)`.
    pub slope_threshold: f64,
    /// Threshold slopes with hysteresis on `(low, high)` instead.
    pub use_hysteresis: bool,
    pub low: f64,
    pub high: f64,
    /// Gaussian truncation radius; `None` means `ceil(3σ)`.
    #[serde(default)]
    pub radius: Option<usize>,
}

impl Default for MHParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            slope_threshold: 0.0,
            use_hysteresis: false,
            low: 0.0,
            high: 0.0,
            radius: None,
        }
    }
}

impl MHParams {
    pub fn single(sigma: f64, slope_threshold: f64) -> Self {
        Self {
            sigma,
            slope_threshold,
            ..Self::default()
        }
    }

    pub fn with_hysteresis(sigma: f64, low: f64, high: f64) -> Self {
        Self {
            sigma,
            use_hysteresis: true,
            low,
            high,
            ..Self::default()
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
        if !(self.slope_threshold >= 0.0) {
            return Err(Error::param(format!(
                "slope threshold must be non-negative, got {}",
                self.slope_threshold
            )));
        }
        if self.use_hysteresis {
            check_thresholds(self.low, self.high)?;
        }
        Ok(())
    }
}

pub fn laplacian_of_smoothed(img: &GrayImage, sigma: f64) -> Result<LaplacianResponse> {
    laplacian_of_smoothed_with_radius(img, sigma, None)
}

/// Separable Gaussian smoothing followed by the 4-neighbour Laplacian stencil.
/// The response is not clamped.
pub fn laplacian_of_smoothed_with_radius(
    img: &GrayImage,
    sigma: f64,
    radius: Option<usize>,
) -> Result<LaplacianResponse> {
    let smoothed = gaussian_blur(img, sigma, radius)?;
    Ok(LaplacianResponse::from_image(convolve_2d(
        &smoothed,
        &Kernel2D::laplacian(),
    )))
}

#[inline]
fn opposite(a: f64, b: f64) -> bool {
    (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)
}

/// Slope of the strongest zero crossing attributed to each pixel, 0 where
/// there is none.
///
/// Every horizontally or vertically adjacent pair with strictly opposite signs
/// is a crossing with slope `|a - b|`; it is attributed to the member with the
/// smaller absolute response (the earlier one in scan order on a tie). A pixel
/// that is exactly zero between opposite-signed axis neighbours is a crossing
/// with slope `|left - right|` (or `|up - down|`) attributed to itself.
pub fn crossing_slopes(resp: &LaplacianResponse) -> GrayImage {
    let (w, h) = (resp.width, resp.height);
    let mut slopes = vec![0.0f64; w * h];
    let mut credit = |x: usize, y: usize, s: f64| {
        let i = y * w + x;
        slopes[i] = slopes[i].max(s);
    };
    for y in 0..h {
        for x in 0..w {
            let v = resp.get(x, y);
            if x + 1 < w {
                let r = resp.get(x + 1, y);
                if opposite(v, r) {
                    let tx = if v.abs() <= r.abs() { x } else { x + 1 };
                    credit(tx, y, (v - r).abs());
                }
            }
            if y + 1 < h {
                let d = resp.get(x, y + 1);
                if opposite(v, d) {
                    let ty = if v.abs() <= d.abs() { y } else { y + 1 };
                    credit(x, ty, (v - d).abs());
                }
            }
            if v == 0.0 {
                if x > 0 && x + 1 < w {
                    let (l, r) = (resp.get(x - 1, y), resp.get(x + 1, y));
                    if opposite(l, r) {
                        credit(x, y, (l - r).abs());
                    }
                }
                if y > 0 && y + 1 < h {
                    let (u, d) = (resp.get(x, y - 1), resp.get(x, y + 1));
                    if opposite(u, d) {
                        credit(x, y, (u - d).abs());
                    }
                }
            }
        }
    }
    GrayImage::new(w, h, slopes).expect("valid dimensions")
}

/// Marks every pixel credited with a zero crossing steeper than
/// `slope_threshold`.
pub fn zero_crossings(resp: &LaplacianResponse, slope_threshold: f64) -> Result<EdgeMap> {
    if !(slope_threshold >= 0.0) {
        return Err(Error::param(format!(
            "slope threshold must be non-negative, got {slope_threshold}"
        )));
    }
    let slopes = crossing_slopes(resp);
    EdgeMap::new(
        resp.width,
        resp.height,
        slopes
            .pixels()
            .iter()
            .map(|&s| s > slope_threshold)
            .collect(),
    )
}

pub fn mh_detect(img: &GrayImage, params: &MHParams) -> Result<EdgeMap> {
    params.validate()?;
    let resp = laplacian_of_smoothed_with_radius(img, params.sigma, params.radius)?;
    if params.use_hysteresis {
        hysteresis(&crossing_slopes(&resp), params.low, params.high)
    } else {
        zero_crossings(&resp, params.slope_threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtering::gaussian_kernel_1d;
    use proptest::prelude::*;

    fn row(values: &[f64]) -> LaplacianResponse {
        LaplacianResponse::new(values.len(), 1, values.to_vec()).unwrap()
    }

    fn step(w: usize, h: usize, col: usize, contrast: f64) -> GrayImage {
        GrayImage::from_fn(w, h, |x, _| {
            if x < col {
                0.5 - contrast / 2.0
            } else {
                0.5 + contrast / 2.0
            }
        })
        .unwrap()
    }

    #[test]
    fn constant_response_is_zero() {
        let r = laplacian_of_smoothed(&GrayImage::filled(9, 9, 0.4).unwrap(), 1.0).unwrap();
        assert!(r.values().iter().all(|&v| v.abs() < 1e-15));
        assert!(
            mh_detect(&GrayImage::filled(9, 9, 0.4).unwrap(), &MHParams::default())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn linear_ramp_interior_is_zero() {
        let img = GrayImage::from_fn(20, 20, |x, y| 0.01 * x as f64 + 0.02 * y as f64).unwrap();
        let r = laplacian_of_smoothed(&img, 1.0).unwrap();
        // Smoothing radius 3 plus the stencil radius 1.
        for y in 4..16 {
            for x in 4..16 {
                assert!(r.get(x, y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        let img = GrayImage::filled(4, 4, 0.0).unwrap();
        assert!(laplacian_of_smoothed(&img, 0.0).is_err());
        assert!(mh_detect(&img, &MHParams::single(-1.0, 0.0)).is_err());
        assert!(mh_detect(&img, &MHParams::single(1.0, -0.1)).is_err());
        assert!(mh_detect(&img, &MHParams::with_hysteresis(1.0, 0.3, 0.2)).is_err());
    }

    // Oracle: the smoothed-step second difference evaluated directly on a
    // 32-pixel row from the kernel taps.
    #[test]
    fn step_profile_has_one_antisymmetric_crossing() {
        let (w, col, hgt) = (32usize, 16usize, 0.6);
        let k = gaussian_kernel_1d(1.0, 3).unwrap();
        let s = |x: isize| -> f64 {
            (-3..=3)
                .map(|i| {
                    let sx = (x + i).clamp(0, w as isize - 1);
                    k.at(i) * if sx < col as isize { 0.0 } else { hgt }
                })
                .sum()
        };
        let oracle: Vec<f64> = (0..w as isize)
            .map(|x| s(x - 1) + s(x + 1) - 2.0 * s(x))
            .collect();
        let sign_changes = oracle.windows(2).filter(|p| opposite(p[0], p[1])).count();
        assert_eq!(sign_changes, 1);

        let img = GrayImage::from_fn(w, 5, |x, _| if x < col { 0.0 } else { hgt }).unwrap();
        let r = laplacian_of_smoothed(&img, 1.0).unwrap();
        let got: Vec<f64> = (0..w).map(|x| r.get(x, 2)).collect();
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        for d in 0..col {
            assert!((got[col - 1 - d] + got[col + d]).abs() < 1e-12);
        }
        assert_eq!(got.windows(2).filter(|p| opposite(p[0], p[1])).count(), 1);
    }

    #[test]
    fn crossing_rule_examples() {
        assert!(zero_crossings(&row(&[0.1, 0.3, 0.2]), 0.0)
            .unwrap()
            .is_empty());
        let pair = row(&[0.4, -0.4]);
        assert_eq!(zero_crossings(&pair, 0.5).unwrap().points(), vec![(0, 0)]);
        assert!(zero_crossings(&pair, 0.9).unwrap().is_empty());
        assert!(zero_crossings(&pair, f64::INFINITY).unwrap().is_empty());
        // Smaller magnitude wins.
        assert_eq!(
            zero_crossings(&row(&[0.5, -0.1]), 0.0).unwrap().points(),
            vec![(1, 0)]
        );
        // Exact zero between opposite signs.
        assert_eq!(
            zero_crossings(&row(&[0.3, 0.0, -0.2]), 0.4)
                .unwrap()
                .points(),
            vec![(1, 0)]
        );
        assert!(zero_crossings(&row(&[0.3, 0.0, -0.2]), 0.5)
            .unwrap()
            .is_empty());
        // Zero next to a single signed value is not a crossing.
        assert!(zero_crossings(&row(&[0.3, 0.0, 0.2]), 0.0)
            .unwrap()
            .is_empty());
        // Vertical pairs: tie goes to the upper pixel.
        let col = LaplacianResponse::new(1, 2, vec![-0.2, 0.2]).unwrap();
        assert_eq!(zero_crossings(&col, 0.0).unwrap().points(), vec![(0, 0)]);
        assert!(zero_crossings(&pair, -1.0).is_err());
    }

    #[test]
    fn detects_clean_step() {
        let img = step(64, 64, 32, 0.5);
        let edges = mh_detect(&img, &MHParams::single(1.0, 0.0)).unwrap();
        for y in 0..64 {
            let xs: Vec<usize> = (0..64).filter(|&x| edges.get(x, y)).collect();
            assert!(!xs.is_empty());
            assert!(xs.iter().all(|&x| (x as isize - 32).abs() <= 1));
        }
        let hyst = mh_detect(&img, &MHParams::with_hysteresis(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(hyst, edges);
    }

    fn response(max: usize) -> impl Strategy<Value = LaplacianResponse> {
        (1..=max, 1..=max).prop_flat_map(|(w, h)| {
            proptest::collection::vec(prop_oneof![Just(0.0), -1.0..1.0f64], w * h)
                .prop_map(move |v| LaplacianResponse::new(w, h, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn raising_threshold_shrinks(resp in response(12), a in 0.0..2.0f64, b in 0.0..2.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(zero_crossings(&resp, hi).unwrap().is_subset_of(&zero_crossings(&resp, lo).unwrap()));
        }

        #[test]
        fn marks_are_sign_changes(resp in response(12)) {
            let edges = zero_crossings(&resp, 0.0).unwrap();
            let (w, h) = (resp.width() as isize, resp.height() as isize);
            let at = |x: isize, y: isize| (x >= 0 && y >= 0 && x < w && y < h).then(|| resp.get(x as usize, y as usize));
            for (x, y) in edges.points() {
                let (x, y) = (x as isize, y as isize);
                let v = resp.get(x as usize, y as usize);
                let n4 = [at(x - 1, y), at(x + 1, y), at(x, y - 1), at(x, y + 1)];
                let adjacent = n4.iter().flatten().any(|&n| opposite(v, n));
                let between = v == 0.0
                    && ((at(x - 1, y).zip(at(x + 1, y)).is_some_and(|(l, r)| opposite(l, r)))
                        || (at(x, y - 1).zip(at(x, y + 1)).is_some_and(|(u, d)| opposite(u, d))));
                prop_assert!(adjacent || between);
            }
        }

        #[test]
        fn contrast_scaling_is_exact(seed in 0u64..1000, t in prop_oneof![Just(0.5), Just(0.25), 0.1..1.0f64]) {
            let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let img = GrayImage::from_fn(12, 10, |_, _| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            }).unwrap();
            let r1 = laplacian_of_smoothed(&img, 1.0).unwrap();
            let r2 = laplacian_of_smoothed(&img.map(|v| v * t), 1.0).unwrap();
            for (a, b) in r1.values().iter().zip(r2.values()) {
                prop_assert!((a * t - b).abs() <= 1e-12);
            }
            if t == 0.5 || t == 0.25 {
                prop_assert_eq!(
                    mh_detect(&img, &MHParams::single(1.0, 0.01)).unwrap(),
                    mh_detect(&img.map(|v| v * t), &MHParams::single(1.0, 0.01 * t)).unwrap()
                );
            }
        }
    }
}
