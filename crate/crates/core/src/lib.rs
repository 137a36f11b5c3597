//! Marr-Hildreth and Canny edge detectors with a synthetic ground-truth
//! benchmark.
//!
//! - [`image`] and [`pnm`]: pixel buffers, grayscale conversion, PGM/PPM I/O
//! - [`filtering`]: Gaussian kernels, separable and dense convolution
//! - [`marr_hildreth`]: smoothed Laplacian and zero crossings
//! - [`canny`]: gradient, non-maximum suppression, hysteresis
//! - [`evaluation`]: scenes, noise, scoring and detector comparison
//! - [`cli`]: the `edgebench` command line

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canny;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod filtering;
pub mod image;
pub mod marr_hildreth;
pub mod pnm;

pub use canny::{canny_detect, CannyParams, GradientField};
pub use error::{Error, Result};
pub use image::{rgb_to_gray, EdgeMap, GrayImage, RgbImage};
pub use marr_hildreth::{mh_detect, LaplacianResponse, MHParams};
