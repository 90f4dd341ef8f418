//! Simulation and verification toolkit for monochromatic random waves.
//!
//! The covariance kernel is generic over the scalar type; everything built
//! on top of it works in `f64`.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod kacrice;
pub mod kernel;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};

/// Double-precision kernel used throughout the crate.
pub type Kernel = kernel::IsotropicKernel<f64>;
/// Single-precision kernel for cheap bulk evaluation.
pub type KernelF32 = kernel::IsotropicKernel<f32>;
