//! Exact classification of one-parameter homogeneous flows by summable decay
//! of matrix coefficients, and Monte Carlo checks of shrinking-target laws
//! on the modular surface `SL₂(ℤ)\SL₂(ℝ)`.

pub mod error;
pub mod experiments;
pub mod liealg;
pub mod modsurface;
pub mod rootsys;
pub mod sdclassify;

pub use error::{Error, Result};
