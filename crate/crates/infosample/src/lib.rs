//! File formats, PNG I/O, dataset pipeline and command-line front end for
//! informative patch sampling.
//!
//! The numerical work lives in [`infosample_core`]; this crate adds:
//!
//! - [`io`]: 8-bit grayscale/RGB PNG loading and saving.
//! - [`iimp`]: the binary importance-map format.
//! - [`manifest`]: manifest JSON.
//! - [`artifacts`]: crop export and heatmap images.
//! - [`bench`]: naive versus integral-image timing behind an equality gate.
//! - [`pipeline`]: whole-directory processing with a report.
//! - [`cli`]: the `infosample` binary.

pub mod artifacts;
pub mod bench;
pub mod cli;
mod error;
pub mod iimp;
pub mod io;
pub mod manifest;
pub mod pipeline;

pub use error::{Error, ExitKind, Result};
