//! Normalized Hermite machinery: Gaussian quadrature, coefficient
//! extraction, the non-linearity strength β₀ and dual activations.

mod activation;
mod catalog;
mod checks;
mod expansion;
mod polynomial;
pub mod quadrature;

pub use activation::{ActivationKind, ActivationSpec, CustomFn};
pub use catalog::beta0_closed_form;
pub use checks::{
    bivariate_expectation, contraction_check, dual_by_quadrature, mehler_check, unit_grid,
    ContractionPoint, ContractionReport, CONTRACTION_SLACK,
};
pub use expansion::{
    beta0, dual, expand, expand_default, reduced_dual, HermiteExpansion, DEFAULT_MAX_DEGREE,
    DEFAULT_QUAD_ORDER, TAIL_TOLERANCE,
};
pub use polynomial::{hermite_eval, hermite_values};
