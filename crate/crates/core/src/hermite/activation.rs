use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::polynomial::{hermite_eval, sqrt_factorial};
use crate::error::{Error, Result};

const SELU_SCALE: f64 = 1.050_700_987_355_480_5;
const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

/// Black-box scalar activation.
#[derive(Clone)]
pub struct CustomFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CustomFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomFn({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum ActivationKind {
    Identity,
    /// Unnormalized probabilists' Hermite polynomial `He_k`, e.g.
    /// `He_2(x) = x² - 1`.
    HermiteBasis(usize),
    Relu,
    LeakyRelu(f64),
    /// `1[x > 0]`, zero at the origin.
    Step,
    Sin,
    Exp,
    Tanh,
    Sigmoid,
    Selu,
    Custom(CustomFn),
}

impl ActivationKind {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => x,
            ActivationKind::HermiteBasis(k) => sqrt_factorial(*k) * hermite_eval(*k, x),
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::LeakyRelu(s) => {
                if x > 0.0 {
                    x
                } else {
                    s * x
                }
            }
            ActivationKind::Step => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Sin => x.sin(),
            ActivationKind::Exp => x.exp(),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Selu => {
                if x > 0.0 {
                    SELU_SCALE * x
                } else {
                    SELU_SCALE * SELU_ALPHA * x.exp_m1()
                }
            }
            ActivationKind::Custom(c) => (c.f)(x),
        }
    }

    /// Location of a jump or kink, if any. Quadrature splits there.
    pub fn breakpoint(&self) -> Option<f64> {
        match self {
            ActivationKind::Relu
            | ActivationKind::LeakyRelu(_)
            | ActivationKind::Step
            | ActivationKind::Selu => Some(0.0),
            _ => None,
        }
    }
}

/// Activation `x ↦ σ(α x)` with gain `α > 0`.
#[derive(Debug, Clone)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    gain: f64,
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind, gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::invalid(format!(
                "gain must be positive and finite, got {gain}"
            )));
        }
        if let ActivationKind::LeakyRelu(s) = kind {
            if !s.is_finite() {
                return Err(Error::invalid("leaky_relu slope must be finite"));
            }
        }
        Ok(Self { kind, gain })
    }

    /// Unit-gain activation.
    pub fn unit(kind: ActivationKind) -> Self {
        Self { kind, gain: 1.0 }
    }

    pub fn identity() -> Self {
        Self::unit(ActivationKind::Identity)
    }

    pub fn relu() -> Self {
        Self::unit(ActivationKind::Relu)
    }

    pub fn hermite(k: usize) -> Self {
        Self::unit(ActivationKind::HermiteBasis(k))
    }

    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::unit(ActivationKind::Custom(CustomFn::new(name, f)))
    }

    pub fn with_gain(self, gain: f64) -> Result<Self> {
        Self::new(self.kind, gain)
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.kind.eval(self.gain * x)
    }

    /// Name without the gain, in the syntax accepted by [`FromStr`].
    pub fn name(&self) -> String {
        match &self.kind {
            ActivationKind::Identity => "identity".into(),
            ActivationKind::HermiteBasis(k) => format!("he{k}"),
            ActivationKind::Relu => "relu".into(),
            ActivationKind::LeakyRelu(s) => format!("leaky_relu:{s}"),
            ActivationKind::Step => "step".into(),
            ActivationKind::Sin => "sin".into(),
            ActivationKind::Exp => "exp".into(),
            ActivationKind::Tanh => "tanh".into(),
            ActivationKind::Sigmoid => "sigmoid".into(),
            ActivationKind::Selu => "selu".into(),
            ActivationKind::Custom(c) => c.name.clone(),
        }
    }
}

impl fmt::Display for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gain == 1.0 {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{}@{}", self.name(), self.gain)
        }
    }
}

/// Parses `identity`, `relu`, `leaky_relu[:slope]`, `step`, `sin`, `exp`,
/// `tanh`, `sigmoid`, `selu` and `he<k>`; gain is 1.
impl FromStr for ActivationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let kind = match s.as_str() {
            "identity" | "linear" => ActivationKind::Identity,
            "relu" => ActivationKind::Relu,
            "leaky_relu" => ActivationKind::LeakyRelu(0.01),
            "step" => ActivationKind::Step,
            "sin" | "sine" => ActivationKind::Sin,
            "exp" => ActivationKind::Exp,
            "tanh" => ActivationKind::Tanh,
            "sigmoid" => ActivationKind::Sigmoid,
            "selu" => ActivationKind::Selu,
            other => {
                if let Some(slope) = other.strip_prefix("leaky_relu:") {
                    let slope = slope
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad leaky_relu slope `{slope}`")))?;
                    ActivationKind::LeakyRelu(slope)
                } else if let Some(k) = other
                    .strip_prefix("he")
                    .or_else(|| other.strip_prefix("hermite"))
                {
                    let k = k
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad Hermite degree in `{other}`")))?;
                    ActivationKind::HermiteBasis(k)
                } else {
                    return Err(Error::invalid(format!("unknown activation `{other}`")));
                }
            }
        };
        Self::new(kind, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for name in [
            "identity",
            "relu",
            "leaky_relu:0.2",
            "step",
            "sin",
            "exp",
            "tanh",
            "sigmoid",
            "selu",
            "he3",
        ] {
            let a: ActivationSpec = name.parse().unwrap();
            assert_eq!(a.name(), name);
        }
        assert!("softplus".parse::<ActivationSpec>().is_err());
        assert!("hex".parse::<ActivationSpec>().is_err());
    }

    #[test]
    fn gain_is_applied_inside() {
        let a = ActivationSpec::relu().with_gain(2.0).unwrap();
        assert_eq!(a.eval(1.5), 3.0);
        let s = ActivationSpec::unit(ActivationKind::Sin)
            .with_gain(0.5)
            .unwrap();
        assert_eq!(s.eval(2.0), 1f64.sin());
        assert!(ActivationSpec::relu().with_gain(0.0).is_err());
        assert!(ActivationSpec::relu().with_gain(f64::NAN).is_err());
    }

    #[test]
    fn hermite_basis_is_unnormalized() {
        let he2 = ActivationSpec::hermite(2);
        assert!((he2.eval(3.0) - 8.0).abs() < 1e-12);
        let he3 = ActivationSpec::hermite(3);
        assert!((he3.eval(2.0) - 2.0).abs() < 1e-12); // x³ - 3x
    }

    #[test]
    fn step_is_zero_at_origin() {
        let s = ActivationSpec::unit(ActivationKind::Step);
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1e-300), 1.0);
    }
}
