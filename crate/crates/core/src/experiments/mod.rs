//! Figure suites, verification batteries and SVG output.

mod stats;
mod suites;
mod svg;
mod verify;

pub use stats::{bands_overlap, mean_se, slope};
pub use suites::{
    fit_gamma_rate, run_suite, suite_ablations, suite_gain, suite_hermite_basis,
    suite_iso_gap_activation, summarize, write_files, CsvFile, LayerSummary, RateFit, SuiteName,
    SuiteOptions, ABLATION_CENTERINGS, ABLATION_PROJECTIONS, GAINS, HERMITE_RHO0, TANH_GAINS,
};
pub use svg::{emit_svg, PlotSpec, SvgOutput};
pub use verify::{
    battery_beta_closed_forms, battery_dual_kernel, battery_gamma_iso,
    battery_hermite_nonlinearity, battery_isometry_basic, battery_isometry_normalization,
    battery_lyapunov, battery_meanfield_bounds, battery_mehler_kernel, catalog, random_correlation,
    verify_all, verify_with_gamma, VerificationReport, MANIFEST,
};

use crate::error::{Error, Result};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "ISOGAUGE_THREADS";

/// Sizes the global worker pool from `ISOGAUGE_THREADS`, if set. Returns
/// the cap applied. Results do not depend on the thread count.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(Some(n))
}
