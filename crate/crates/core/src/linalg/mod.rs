//! Dense symmetric-matrix machinery: Gram construction, log-determinants,
//! the isometry functional and sphere normalization.

mod gram;
pub mod io;
mod matrix;
mod normalize;

pub use gram::{
    cholesky, det_bounds, gram_from_columns, gram_from_rows, log_det_psd, spectral_summary,
    Cholesky, DetBounds, GramMatrix, SpectralSummary, PIVOT_FLOOR, PSD_TOL, SYMMETRY_TOL,
};
pub(crate) use matrix::dot;
pub use matrix::DenseMatrix;
pub use normalize::{
    center_columns, center_rows, column_norms, isometry_ratio_exact, isometry_ratio_identity,
    normalize_columns, normalize_rows, row_norms, NormStats, ZERO_NORM,
};
