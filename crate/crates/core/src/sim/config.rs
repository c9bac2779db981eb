use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hermite::{expand_default, ActivationSpec, HermiteExpansion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Centering {
    None,
    /// Subtract the mean over the normalized axis.
    LayerMean,
    /// Subtract the constant `c₀` of the activation.
    MeanFieldC0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Projection {
    None,
    /// Rescale each vector onto the sphere of radius `√len`.
    SphereLn,
    /// Divide by `√σ̄(1)`.
    MeanFieldScale,
    /// Divide by `√σ̂(1)`.
    XavierScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormAxis {
    /// Layer normalization: each sample (column) separately.
    PerSample,
    /// Batch normalization: each feature (row) across the batch.
    PerFeature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputMode {
    Gaussian,
    /// The second sample copies the first.
    DuplicatedPair,
    /// Exact Gram equal to the equicorrelation matrix.
    Equicorrelated(f64),
}

macro_rules! keyword_enum {
    ($ty:ident, $what:literal, $($name:literal => $variant:ident),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        other,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $($ty::$variant => $name,)+
                })
            }
        }
    };
}

keyword_enum!(Centering, "centering", "none" => None, "layer_mean" => LayerMean, "mean_field_c0" => MeanFieldC0);
keyword_enum!(
    Projection, "projection",
    "none" => None, "sphere_ln" => SphereLn, "mean_field_scale" => MeanFieldScale, "xavier_scale" => XavierScale,
);
keyword_enum!(NormAxis, "norm axis", "per_sample" => PerSample, "per_feature" => PerFeature);

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputMode::Gaussian => f.write_str("gaussian"),
            InputMode::DuplicatedPair => f.write_str("duplicated_pair"),
            InputMode::Equicorrelated(r) => write!(f, "equicorrelated({r})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub width: usize,
    pub batch: usize,
    pub depth: usize,
    pub activation: ActivationSpec,
    pub centering: Centering,
    pub projection: Projection,
    pub norm_axis: NormAxis,
    pub seed: u64,
    pub runs: usize,
    pub input: InputMode,
}

impl Default for NetworkConfig {
    /// Layer-normalized ReLU MLP at `n = 10`, `d = 1000`, 50 layers, 10 runs.
    fn default() -> Self {
        Self {
            width: 1000,
            batch: 10,
            depth: 50,
            activation: ActivationSpec::relu(),
            centering: Centering::LayerMean,
            projection: Projection::SphereLn,
            norm_axis: NormAxis::PerSample,
            seed: 0,
            runs: 10,
            input: InputMode::Gaussian,
        }
    }
}

/// Activation constants needed by the mean-field centering and scaling
/// options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldConstants {
    pub c0: f64,
    /// `σ̄(1) = Var σ(X)`.
    pub reduced_norm: f64,
    /// `σ̂(1) = E σ(X)²`.
    pub dual_norm: f64,
}

impl MeanFieldConstants {
    pub fn from_expansion(exp: &HermiteExpansion) -> Result<Self> {
        let reduced_norm = exp.reduced_dual(1.0);
        if !(reduced_norm > 0.0) {
            return Err(Error::DegenerateActivation(exp.label().to_string()));
        }
        Ok(Self {
            c0: exp.c0(),
            reduced_norm,
            dual_norm: exp.dual(1.0),
        })
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.batch < 2 || self.runs < 1 {
            return Err(Error::Config(format!(
                "need width ≥ 2, batch ≥ 2, runs ≥ 1 (got {}, {}, {})",
                self.width, self.batch, self.runs
            )));
        }
        if self.input == InputMode::Gaussian && self.width < self.batch {
            return Err(Error::Config("gaussian input needs width ≥ batch".into()));
        }
        if let InputMode::Equicorrelated(rho) = self.input {
            if self.width < self.batch {
                return Err(Error::Config(
                    "equicorrelated input needs width ≥ batch".into(),
                ));
            }
            let lo = -1.0 / (self.batch as f64 - 1.0);
            if !(rho > lo && rho < 1.0) {
                return Err(Error::Config(format!("rho0 = {rho} outside ({lo}, 1)")));
            }
        }
        if self.needs_constants() {
            self.constants()?;
        }
        Ok(())
    }

    pub fn needs_constants(&self) -> bool {
        self.centering == Centering::MeanFieldC0
            || matches!(
                self.projection,
                Projection::MeanFieldScale | Projection::XavierScale
            )
    }

    /// Hermite constants of the configured activation.
    pub fn constants(&self) -> Result<MeanFieldConstants> {
        MeanFieldConstants::from_expansion(&expand_default(&self.activation)?)
    }

    /// Parses flat `key = value` text. Blank lines and `#` comments are
    /// ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = NetworkConfig::default();
        let mut gain = 1.0;
        let mut input_mode = "gaussian".to_string();
        let mut rho0 = None;
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Config(format!("line {}: {msg}", idx + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key.to_string()) {
                return Err(bad(format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            let num = |v: &str| -> Result<usize> {
                v.parse()
                    .map_err(|_| bad(format!("`{key}` must be a count, got `{v}`")))
            };
            match key {
                "width" => cfg.width = num(value)?,
                "batch" => cfg.batch = num(value)?,
                "depth" => cfg.depth = num(value)?,
                "runs" => cfg.runs = num(value)?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| bad(format!("bad seed `{value}`")))?
                }
                "activation" => {
                    cfg.activation = value.parse().map_err(|e: Error| bad(e.to_string()))?
                }
                "gain" => {
                    gain = value
                        .parse()
                        .map_err(|_| bad(format!("bad gain `{value}`")))?
                }
                "centering" => {
                    cfg.centering = value.parse().map_err(|e: Error| bad(e.to_string()))?
                }
                "projection" => {
                    cfg.projection = value.parse().map_err(|e: Error| bad(e.to_string()))?
                }
                "norm_axis" => {
                    cfg.norm_axis = value.parse().map_err(|e: Error| bad(e.to_string()))?
                }
                "input_mode" => input_mode = value.to_string(),
                "rho0" => {
                    rho0 = Some(
                        value
                            .parse::<f64>()
                            .map_err(|_| bad(format!("bad rho0 `{value}`")))?,
                    )
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        cfg.activation = cfg
            .activation
            .with_gain(gain)
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.input = match (input_mode.as_str(), rho0) {
            ("gaussian", None) => InputMode::Gaussian,
            ("duplicated_pair", None) => InputMode::DuplicatedPair,
            ("equicorrelated", Some(r)) => InputMode::Equicorrelated(r),
            ("equicorrelated", None) => {
                return Err(Error::Config("equicorrelated input needs rho0".into()))
            }
            ("gaussian" | "duplicated_pair", Some(_)) => {
                return Err(Error::Config(
                    "rho0 is only used with input_mode = equicorrelated".into(),
                ))
            }
            (other, _) => return Err(Error::Config(format!("unknown input_mode `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
