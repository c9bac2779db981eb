//! Finite-width random MLPs: `x_{ℓ+1} = P(C(σ(W_ℓ x_ℓ / √d)))` with
//! configurable centering `C`, projection `P` and normalization axis.
//!
//! Samples live on the sphere of radius `√d`, so each pre-activation is a
//! standard normal at initialization. Isometry and γ are scale-invariant and
//! do not depend on this convention.

mod config;
mod network;
mod rng;

pub use config::{Centering, InputMode, MeanFieldConstants, NetworkConfig, NormAxis, Projection};
pub use network::{
    activate, activate_streamed, center, config_input, forward_layer, make_input, norm_bias,
    preprocess_input, project, run_network, run_network_outcomes, simulate_run, traces_to_csv,
    LayerTrace, RunOutcome, TRACE_HEADER,
};
pub use rng::{sample_weights, RngStream};
