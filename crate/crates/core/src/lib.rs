//! Probability that the treating-interference-as-noise (TIN) optimality
//! conditions hold in a finite cell-free massive MIMO network.
//!
//! The crate is layered bottom-up:
//!
//! - [`numerics`]: incomplete beta, Bessel K₁ and adaptive Gauss–Kronrod quadrature.
//! - [`geometry`]: disk-window samplers and the circle/disk intersection geometry.
//! - [`distributions`]: network configuration and the analytic distance laws.
//! - [`tin`]: the TIN condition and the analytic TIN probability.
//! - [`montecarlo`]: the network-level simulator used as ground truth.
//! - [`cli`]: experiment presets, CSV tables and run manifests.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numerics;
pub mod tin;

pub use distributions::{DerivedQuantities, NetworkConfig};
pub use error::{Error, Result};
pub use tin::{Method, TinProbabilityResult};
