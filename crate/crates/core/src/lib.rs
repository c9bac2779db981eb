//! Numerical laboratory for the isometry of Gram matrices in normalized
//! random MLPs.
//!
//! * [`linalg`]: Gram matrices, log-determinants, the isometry functional.
//! * [`hermite`]: Hermite expansions of activations, β₀, dual kernels.
//! * [`meanfield`]: the infinite-width Gram recursion and its bounds.
//! * [`sim`]: finite-width random MLP forward passes.
//! * [`experiments`]: figure suites, verification batteries, CSV and SVG.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod hermite;
pub mod linalg;
pub mod meanfield;
pub mod sim;

pub use error::{Error, Result};
