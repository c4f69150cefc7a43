//! Physics-level simulator and optimizer for 1-bit reconfigurable intelligent
//! surfaces (RIS).
//!
//! The crate covers the full beam-sweeping pipeline:
//!
//! - [`geometry`]: coordinate conventions, element placement, wave vectors and
//!   array response vectors.
//! - [`pattern`]: element gain models, the power-domain array factor and the
//!   overall RIS radiation pattern, sampled as azimuth cuts.
//! - [`channel`]: image-method ray tracing (LoS, ground bounce, wall
//!   reflections), per-frequency channel assembly and the wideband power
//!   metric.
//! - [`config`] and [`optimizer`]: the dual-polarized binary configuration
//!   matrix, 1-bit quantization, greedy column-row scanning and an exhaustive
//!   oracle for tiny arrays.
//! - [`codebook`]: codebook construction, the row-extension transform, beam
//!   sweeping AoA estimation and frequency-selectivity reports.
//!
//! Frame: the RIS lies in the plane `x = 0` (relative to its center) with
//! broadside along `+x`, columns along `y` and rows stacked along `z`, row 0 on
//! top.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codebook;
pub mod config;
pub mod error;
pub mod geometry;
pub mod optimizer;
pub mod pattern;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
