#![cfg_attr(not(feature = "std"), no_std)]
//! Informative-importance scoring and patch sampling for super-resolution
//! training data.
//!
//! A candidate LR-HR training patch is scored by how badly plain bilinear
//! upscaling restores it: the PSNR between the bilinearly upscaled LR patch and
//! its HR ground truth. Low PSNR means the patch carries structure a linear
//! model cannot reproduce, so it is *more* informative for training a network.
//!
//! The crate is organised bottom-up:
//!
//! - [`raster`]: 8-bit and real-valued image containers, BT.601 luma.
//! - [`resample`]: bicubic (Keys, antialiased) downscale and bilinear upscale.
//! - [`integral`]: exact summed-area tables over pixel-product planes.
//! - [`importance`]: the dense per-anchor score map (integral-image fast path,
//!   sliding-window naive path, and standard-deviation / gradient alternatives).
//! - [`sampling`]: greedy, non-maximum-suppression and dart-throwing selection.
//! - [`heatmap`]: rank-normalised visualisation of a score map.
//!
//! # Features
//!
//! - `std` *(default)*: implements `std::error::Error` for [`Error`]. Without
//!   it the crate is `no_std` + `alloc`; all arithmetic goes through `libm`, so
//!   results are identical either way.
//!
//! Nothing here touches the filesystem. File formats, PNG I/O and the CLI live
//! in the `infosample` crate.

extern crate alloc;

mod error;
pub mod heatmap;
pub mod importance;
pub mod integral;
pub mod raster;
pub mod resample;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use importance::{ImportanceMap, MetricKind, PatchGeometry};
pub use raster::{FloatRaster, Raster};
pub use resample::ScaleFactor;
pub use sampling::{Manifest, SamplingConfig, Strategy};
