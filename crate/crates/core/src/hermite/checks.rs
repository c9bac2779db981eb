use super::activation::ActivationSpec;
use super::expansion::{beta0, reduced_dual, HermiteExpansion};
use super::polynomial::hermite_eval;
use super::quadrature::gauss_hermite;
use crate::error::{Error, Result};

/// Relative slack allowed before a contraction point counts as violated.
pub const CONTRACTION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPoint {
    pub rho: f64,
    /// `r/(1-r)` with `r = |σ̄(ρ)|/σ̄(1)`.
    pub lhs: f64,
    /// `β₀⁻¹ ρ/(1-ρ)`.
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub beta0: f64,
    pub points: Vec<ContractionPoint>,
    pub pass: bool,
}

impl ContractionReport {
    /// Largest relative excess `lhs/rhs - 1` over the grid.
    pub fn worst_violation(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| p.rhs > 0.0)
            .map(|p| p.lhs / p.rhs - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks `(|σ̄(ρ)|/σ̄(1)) / (1 - |σ̄(ρ)|/σ̄(1)) ≤ β₀⁻¹ ρ/(1-ρ)` on a grid of
/// correlations in `(0, 1)`.
pub fn contraction_check(exp: &HermiteExpansion, grid: &[f64]) -> Result<ContractionReport> {
    if let Some(bad) = grid.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::invalid(format!("grid value {bad} outside (0, 1)")));
    }
    let b = beta0(exp)?;
    let norm = reduced_dual(exp, 1.0);
    let points: Vec<ContractionPoint> = grid
        .iter()
        .map(|&rho| {
            let r = reduced_dual(exp, rho).abs() / norm;
            let lhs = r / (1.0 - r);
            let rhs = rho / (1.0 - rho) / b;
            ContractionPoint {
                rho,
                lhs,
                rhs,
                pass: lhs <= rhs * (1.0 + CONTRACTION_SLACK),
            }
        })
        .collect();
    let pass = points.iter().all(|p| p.pass);
    Ok(ContractionReport {
        beta0: b,
        points,
        pass,
    })
}

/// Evenly spaced grid `{step, 2 step, …} ∩ (0, 1)`.
pub fn unit_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (1..n).map(|i| i as f64 * step).collect()
}

/// `E f(X, Y)` for standard normals with correlation `ρ`, by tensor
/// Gauss–Hermite quadrature on `X = Z₁`, `Y = ρ Z₁ + √(1-ρ²) Z₂`.
pub fn bivariate_expectation(
    rho: f64,
    quad_order: usize,
    mut f: impl FnMut(f64, f64) -> f64,
) -> f64 {
    let rule = gauss_hermite(quad_order);
    let s = (1.0 - rho * rho).max(0.0).sqrt();
    let mut total = 0.0;
    for (&z1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        let mut inner = 0.0;
        for (&z2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            inner += w2 * f(z1, rho * z1 + s * z2);
        }
        total += w1 * inner;
    }
    total
}

/// Measured `E he_j(X) he_k(Y)` against the Mehler value `ρ^j δ_jk`.
pub fn mehler_check(j: usize, k: usize, rho: f64, quad_order: usize) -> Result<(f64, f64)> {
    if j > 20 || k > 20 {
        return Err(Error::invalid("Mehler check supports degrees up to 20"));
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::invalid(format!("correlation {rho} outside (-1, 1)")));
    }
    if quad_order < 100 {
        return Err(Error::invalid("Mehler check needs quadrature order ≥ 100"));
    }
    let measured = bivariate_expectation(rho, quad_order, |x, y| {
        hermite_eval(j, x) * hermite_eval(k, y)
    });
    let expected = if j == k { rho.powi(j as i32) } else { 0.0 };
    Ok((measured, expected))
}

/// Dual activation evaluated directly from its definition,
/// `E σ(X) σ(Y)`, as an oracle independent of the Hermite coefficients.
pub fn dual_by_quadrature(act: &ActivationSpec, rho: f64, quad_order: usize) -> f64 {
    bivariate_expectation(rho, quad_order, |x, y| act.eval(x) * act.eval(y))
}
