use super::activation::ActivationSpec;
use super::polynomial::hermite_values;
use super::quadrature::{gauss_hermite, split_gaussian, QuadratureRule};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEGREE: usize = 40;
pub const DEFAULT_QUAD_ORDER: usize = 128;
/// Acceptable tail mass as a fraction of the centered power `Σ_{k≥1} c_k²`.
pub const TAIL_TOLERANCE: f64 = 1e-8;
/// Nodes per half-line for activations with a breakpoint at the origin.
const SPLIT_MIN_ORDER: usize = 256;

/// Truncated expansion `σ = Σ c_k he_k` in normalized Hermite polynomials,
/// `c_k = E[σ(X) he_k(X)]`, `X ~ N(0,1)`.
///
/// Mass beyond the truncation degree is not dropped: it is carried as
/// `tail_mass = E σ² - Σ_{k≤K} c_k²` and enters every quantity evaluated at
/// `ρ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    label: String,
    coeffs: Vec<f64>,
    tail_mass: f64,
    second_moment: f64,
}

impl HermiteExpansion {
    /// Builds an expansion from known coefficients and second moment.
    pub fn from_coefficients(
        label: impl Into<String>,
        coeffs: Vec<f64>,
        second_moment: f64,
    ) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("expansion needs at least c_0"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !second_moment.is_finite() {
            return Err(Error::invalid("non-finite Hermite coefficient"));
        }
        let total: f64 = coeffs.iter().map(|c| c * c).sum();
        Ok(Self {
            label: label.into(),
            tail_mass: (second_moment - total).max(0.0),
            coeffs,
            second_moment,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn c0(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `Σ_{k≤K} c_k²`.
    pub fn total_power(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `E σ(X)²`.
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// `Σ_{k≥1} c_k²` including the tail; equals `Var σ(X)` and `σ̄(1)`.
    pub fn centered_power(&self) -> f64 {
        self.coeffs[1..].iter().map(|c| c * c).sum::<f64>() + self.tail_mass
    }

    /// Tail mass relative to the centered power.
    pub fn tail_fraction(&self) -> f64 {
        let p = self.centered_power();
        if p > 0.0 {
            self.tail_mass / p
        } else {
            0.0
        }
    }

    /// Whether the truncation captures all but `tol` of the centered power.
    /// Activations with kinks (ReLU, step) decay algebraically and are not
    /// resolved at moderate degree; their tail is still accounted for.
    pub fn is_resolved(&self, tol: f64) -> bool {
        self.tail_fraction() <= tol
    }

    pub fn beta0(&self) -> Result<f64> {
        beta0(self)
    }

    pub fn dual(&self, rho: f64) -> f64 {
        dual(self, rho)
    }

    pub fn reduced_dual(&self, rho: f64) -> f64 {
        reduced_dual(self, rho)
    }
}

/// Expands `act` up to degree `max_degree` using a quadrature of order
/// `quad_order`.
pub fn expand(
    act: &ActivationSpec,
    max_degree: usize,
    quad_order: usize,
) -> Result<HermiteExpansion> {
    if max_degree < 1 {
        return Err(Error::invalid("max degree must be at least 1"));
    }
    if quad_order < 2 * max_degree + 2 {
        return Err(Error::invalid(format!(
            "quadrature order {quad_order} too small for degree {max_degree} (need ≥ {})",
            2 * max_degree + 2
        )));
    }
    let rule = rule_for(act, quad_order);
    let mut coeffs = vec![0.0; max_degree + 1];
    let mut he = vec![0.0; max_degree + 1];
    let mut second = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        if w == 0.0 {
            continue;
        }
        let s = act.eval(x);
        let ws = w * s;
        second += ws * s;
        hermite_values(x, &mut he);
        for (c, h) in coeffs.iter_mut().zip(&he) {
            *c += ws * h;
        }
    }
    // Mass sitting on the outermost nodes means the integrand outgrows the
    // Gaussian and the rule is not converging.
    let edge = edge_mass(&rule, act);
    if !second.is_finite()
        || coeffs.iter().any(|c| !c.is_finite())
        || edge > EDGE_MASS_LIMIT * second
    {
        return Err(Error::NotSquareIntegrable(act.to_string()));
    }
    HermiteExpansion::from_coefficients(act.to_string(), coeffs, second)
}

/// [`expand`] at the default degree and quadrature order.
pub fn expand_default(act: &ActivationSpec) -> Result<HermiteExpansion> {
    expand(act, DEFAULT_MAX_DEGREE, DEFAULT_QUAD_ORDER)
}

const EDGE_MASS_LIMIT: f64 = 1e-10;

fn edge_mass(rule: &QuadratureRule, act: &ActivationSpec) -> f64 {
    let n = rule.len();
    let k = (n / 20).max(1);
    rule.nodes[..k]
        .iter()
        .zip(&rule.weights[..k])
        .chain(rule.nodes[n - k..].iter().zip(&rule.weights[n - k..]))
        .map(|(&x, &w)| w * act.eval(x).powi(2))
        .sum()
}

fn rule_for(act: &ActivationSpec, quad_order: usize) -> std::sync::Arc<QuadratureRule> {
    match act.kind.breakpoint() {
        Some(_) => split_gaussian(quad_order.max(SPLIT_MIN_ORDER)),
        None => gauss_hermite(quad_order),
    }
}

/// Non-linearity strength `2 - c_1² / Σ_{k≥1} c_k²`, in `[1, 2]`.
pub fn beta0(exp: &HermiteExpansion) -> Result<f64> {
    let centered = exp.centered_power();
    if !(centered > 1e-13 * exp.second_moment().max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateActivation(exp.label().to_string()));
    }
    let c1 = exp.coeffs()[1];
    Ok(2.0 - c1 * c1 / centered)
}

/// `Σ_{k≥start} c_k² ρ^k` by Horner's rule.
fn power_series(coeffs: &[f64], start: usize, rho: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs[start..].iter().rev() {
        acc = acc * rho + c * c;
    }
    acc * rho.powi(start as i32)
}

/// Dual activation `σ̂(ρ) = E σ(X)σ(Y) = Σ c_k² ρ^k` for standard normals
/// with correlation `ρ ∈ [-1, 1]`. At `ρ = 1` the tail mass is added; below
/// it the tail contributes `o(ρ^K)` and is omitted.
pub fn dual(exp: &HermiteExpansion, rho: f64) -> f64 {
    let base = power_series(exp.coeffs(), 0, rho);
    if rho == 1.0 {
        base + exp.tail_mass()
    } else {
        base
    }
}

/// Mean-reduced dual `σ̄(ρ) = σ̂(ρ) - c_0² = Σ_{k≥1} c_k² ρ^k`.
pub fn reduced_dual(exp: &HermiteExpansion, rho: f64) -> f64 {
    let base = power_series(exp.coeffs(), 1, rho);
    if rho == 1.0 {
        base + exp.tail_mass()
    } else {
        base
    }
}
