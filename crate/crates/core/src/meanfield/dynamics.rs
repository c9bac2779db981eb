use std::fmt::Write as _;

use super::correlation::{lyapunov_gamma, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::hermite::{beta0, reduced_dual, HermiteExpansion};
use crate::linalg::io::format_number;
use crate::linalg::{spectral_summary, GramMatrix};

/// γ below this is treated as converged; further layers carry no
/// information.
pub const GAMMA_UNDERFLOW: f64 = 1e-300;

pub const TRACE_HEADER: &str = "layer,gamma,iso_gap,gamma_bound,iso_gap_bound,bound_valid";

/// One infinite-width layer: `G'_ij = σ̄(G_ij) / σ̄(1)` off the diagonal,
/// exactly 1 on it.
pub fn mf_step(g: &CorrelationMatrix, exp: &HermiteExpansion) -> Result<CorrelationMatrix> {
    beta0(exp)?;
    let norm = reduced_dual(exp, 1.0);
    let n = g.n();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0;
        for j in 0..i {
            let v = (reduced_dual(exp, g.get(i, j)) / norm).clamp(-1.0, 1.0);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    CorrelationMatrix::from_gram(GramMatrix::new(n, data)?)
}

/// `γ₀ β₀^{-ℓ}`, evaluated in log space.
pub fn gamma_bound(gamma0: f64, beta0: f64, layer: usize) -> f64 {
    if gamma0 == 0.0 || gamma0.is_infinite() {
        return gamma0;
    }
    gamma0 * (-(layer as f64) * beta0.ln()).exp()
}

/// β₀ within this of 1 is treated as linear: quadrature round-off must not
/// turn the identity into a contracting activation.
pub const LINEAR_BETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoGapBound {
    pub bound: f64,
    /// First layer from which the bound is asserted.
    pub valid_from: usize,
}

/// `exp(-ℓ log β₀ - n log iso₀ + log 4n)`, asserted from layer
/// `ceil((-n log iso₀ + log 4n) / β₀)` on.
pub fn isogap_bound(iso0: f64, beta0: f64, n: usize, layer: usize) -> Result<IsoGapBound> {
    if !(beta0 > 1.0 + LINEAR_BETA_TOL) {
        return Err(Error::BoundInapplicable(format!(
            "β₀ = {beta0} gives no contraction"
        )));
    }
    if !(iso0 > 0.0 && iso0 <= 1.0) {
        return Err(Error::invalid(format!(
            "initial isometry {iso0} outside (0, 1]"
        )));
    }
    let offset = -(n as f64) * iso0.ln() + (4.0 * n as f64).ln();
    Ok(IsoGapBound {
        bound: (offset - layer as f64 * beta0.ln()).exp(),
        valid_from: (offset / beta0).ceil().max(0.0) as usize,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldRecord {
    pub layer: usize,
    pub gamma: f64,
    pub iso_gap: f64,
    pub gamma_bound: f64,
    /// `+inf` when the activation has `β₀ = 1`.
    pub iso_gap_bound: f64,
    pub bound_valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldTrace {
    pub beta0: f64,
    pub records: Vec<MeanFieldRecord>,
    /// Set when γ underflowed before the requested depth.
    pub stopped_early: bool,
    pub last: CorrelationMatrix,
}

impl MeanFieldTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.layer,
                format_number(r.gamma),
                format_number(r.iso_gap),
                format_number(r.gamma_bound),
                format_number(r.iso_gap_bound),
                r.bound_valid
            );
        }
        out
    }
}

/// Iterates [`mf_step`] `depth` times from `g0`, recording γ, the isometry
/// gap and both theoretical bounds at each layer.
pub fn run_meanfield(
    g0: &CorrelationMatrix,
    exp: &HermiteExpansion,
    depth: usize,
) -> Result<MeanFieldTrace> {
    let n = g0.n();
    let s0 = spectral_summary(g0.as_gram())?;
    if !(s0.iso > 0.0) {
        return Err(Error::DegenerateInput(
            "initial correlation matrix is singular; the bounds are vacuous".into(),
        ));
    }
    let b = beta0(exp)?;
    let gamma0 = lyapunov_gamma(g0)?;
    let iso_bound = |layer| match isogap_bound(s0.iso, b, n, layer) {
        Ok(IsoGapBound { bound, valid_from }) => Ok((bound, layer >= valid_from)),
        Err(Error::BoundInapplicable(_)) => Ok((f64::INFINITY, false)),
        Err(e) => Err(e),
    };
    let mut records = Vec::with_capacity(depth + 1);
    let mut g = g0.clone();
    let mut stopped_early = false;
    for layer in 0..=depth {
        if layer > 0 {
            g = mf_step(&g, exp)?;
        }
        let gamma = lyapunov_gamma(&g)?;
        let (iso_gap_bound, bound_valid) = iso_bound(layer)?;
        records.push(MeanFieldRecord {
            layer,
            gamma,
            iso_gap: spectral_summary(g.as_gram())?.iso_gap,
            gamma_bound: gamma_bound(gamma0, b, layer),
            iso_gap_bound,
            bound_valid,
        });
        if gamma0 >= GAMMA_UNDERFLOW && gamma < GAMMA_UNDERFLOW && layer < depth {
            stopped_early = true;
            break;
        }
    }
    Ok(MeanFieldTrace {
        beta0: b,
        records,
        stopped_early,
        last: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{expand_default, ActivationSpec};

    #[test]
    fn step_examples() {
        let g = CorrelationMatrix::equicorrelation(3, 0.4).unwrap();
        let id = expand_default(&ActivationSpec::identity()).unwrap();
        let out = mf_step(&g, &id).unwrap();
        assert!(out.as_gram().max_abs_diff(g.as_gram()).unwrap() < 1e-12);

        let he2 = expand_default(&ActivationSpec::hermite(2)).unwrap();
        let out = mf_step(&CorrelationMatrix::equicorrelation(2, 0.9).unwrap(), &he2).unwrap();
        assert!((out.get(0, 1) - 0.81).abs() < 1e-12);

        let relu = expand_default(&ActivationSpec::relu()).unwrap();
        let out = mf_step(&CorrelationMatrix::identity(3), &relu).unwrap();
        assert_eq!(out, CorrelationMatrix::identity(3));
    }

    #[test]
    fn duplicated_pair_survives() {
        let relu = expand_default(&ActivationSpec::relu()).unwrap();
        let g =
            CorrelationMatrix::new(3, vec![1.0, 1.0, 0.3, 1.0, 1.0, 0.3, 0.3, 0.3, 1.0]).unwrap();
        let out = mf_step(&g, &relu).unwrap();
        assert_eq!(out.get(0, 1), 1.0);
        assert_eq!(
            spectral_summary(out.as_gram()).unwrap().iso_gap,
            f64::INFINITY
        );
    }

    #[test]
    fn constant_activation_is_degenerate() {
        let c = expand_default(&ActivationSpec::custom("one", |_| 1.0)).unwrap();
        let g = CorrelationMatrix::identity(2);
        assert!(matches!(
            mf_step(&g, &c),
            Err(Error::DegenerateActivation(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(gamma_bound(3.0, 1.0, 17), 3.0);
        assert!((gamma_bound(9.0, 2.0, 3) - 1.125).abs() < 1e-14);
        let b = (3.0 * std::f64::consts::PI - 4.0) / (2.0 * std::f64::consts::PI - 2.0);
        assert!((gamma_bound(1.0, b, 20) - 0.0088654).abs() < 1e-7);

        let r = isogap_bound(1.0, 2.0, 2, 10).unwrap();
        assert!((r.bound - 8.0 / 1024.0).abs() < 1e-15);
        let r = isogap_bound(0.9, b, 10, 60).unwrap();
        assert!(r.bound.is_finite() && r.bound > 0.0);
        assert_eq!(r.valid_from, 4);
        assert!(matches!(
            isogap_bound(0.9, 1.0, 10, 5),
            Err(Error::BoundInapplicable(_))
        ));
    }

    #[test]
    fn run_examples() {
        let g0 = CorrelationMatrix::equicorrelation(2, 0.9).unwrap();
        let he2 = expand_default(&ActivationSpec::hermite(2)).unwrap();
        let t = run_meanfield(&g0, &he2, 3).unwrap();
        let off: Vec<f64> = t
            .records
            .iter()
            .map(|r| r.gamma / (1.0 + r.gamma))
            .collect();
        for (got, want) in off.iter().zip([0.9, 0.81, 0.6561, 0.43046721]) {
            assert!((got - want).abs() < 1e-12);
        }

        let id = expand_default(&ActivationSpec::identity()).unwrap();
        let g0 = CorrelationMatrix::equicorrelation(4, 0.3).unwrap();
        let t = run_meanfield(&g0, &id, 10).unwrap();
        assert_eq!(t.records.len(), 11);
        for r in &t.records {
            assert!((r.iso_gap - t.records[0].iso_gap).abs() < 1e-12);
            assert_eq!(r.iso_gap_bound, f64::INFINITY);
            assert!(!r.bound_valid);
        }

        let relu = expand_default(&ActivationSpec::relu()).unwrap();
        let g0 = CorrelationMatrix::equicorrelation(10, 0.5).unwrap();
        let t = run_meanfield(&g0, &relu, 50).unwrap();
        for r in &t.records {
            assert!(r.gamma <= r.gamma_bound + 1e-9, "layer {}", r.layer);
        }
        assert!(t.to_csv().starts_with(TRACE_HEADER));
    }

    #[test]
    fn degenerate_start_rejected() {
        let relu = expand_default(&ActivationSpec::relu()).unwrap();
        let g0 = CorrelationMatrix::equicorrelation(2, 1.0).unwrap();
        assert!(matches!(
            run_meanfield(&g0, &relu, 3),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn underflow_stops_early() {
        let he3 = expand_default(&ActivationSpec::hermite(3)).unwrap();
        let g0 = CorrelationMatrix::equicorrelation(2, 0.5).unwrap();
        let t = run_meanfield(&g0, &he3, 40).unwrap();
        assert!(t.stopped_early);
        assert!(t.records.len() < 41);
    }
}
