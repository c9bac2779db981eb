//! Infinite-width Gram dynamics `G_{ℓ+1} = σ̄(G_ℓ)/σ̄(1)`, the Lyapunov
//! potential γ and its decay bounds.

mod correlation;
mod dynamics;

pub use correlation::{lyapunov_gamma, lyapunov_gamma_gram, CorrelationMatrix, UNIT_DIAGONAL_TOL};
pub use dynamics::{
    gamma_bound, isogap_bound, mf_step, run_meanfield, IsoGapBound, MeanFieldRecord,
    MeanFieldTrace, GAMMA_UNDERFLOW, LINEAR_BETA_TOL, TRACE_HEADER,
};
