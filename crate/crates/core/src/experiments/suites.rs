use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::stats::{mean_se, slope};
use crate::error::{Error, Result};
use crate::hermite::{
    beta0_closed_form, expand, expand_default, ActivationKind, ActivationSpec, DEFAULT_MAX_DEGREE,
};
use crate::linalg::io::format_number;
use crate::meanfield::{isogap_bound, run_meanfield, CorrelationMatrix, MeanFieldTrace};
use crate::sim::{
    config_input, run_network_outcomes, Centering, InputMode, NetworkConfig, NormAxis, Projection,
    RunOutcome,
};

/// Gains swept by the gain suite.
pub const GAINS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 5.0];
/// Gains of the tanh isometry-rate simulations.
pub const TANH_GAINS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
/// Starting correlation of the mean-field Hermite-basis runs.
pub const HERMITE_RHO0: f64 = 0.999;
/// Quadrature order of the gain sweep; large gains push the mass of `σ²`
/// far into the tails.
const GAIN_QUAD_ORDER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    IsoGapActivation,
    HermiteBasis,
    Gain,
    Ablations,
}

impl SuiteName {
    pub const ALL: [SuiteName; 4] = [
        SuiteName::IsoGapActivation,
        SuiteName::HermiteBasis,
        SuiteName::Gain,
        SuiteName::Ablations,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::IsoGapActivation => "iso_gap_activation",
            SuiteName::HermiteBasis => "hermite_basis",
            SuiteName::Gain => "gain",
            SuiteName::Ablations => "ablations",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|n| n.as_str()).collect();
                Error::Config(format!(
                    "unknown suite `{s}` (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Shared knobs of every suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub width: usize,
    pub batch: usize,
    pub runs: usize,
    pub depth: usize,
    /// Off-diagonal of the equicorrelated input batch.
    pub rho0: f64,
}

impl Default for SuiteOptions {
    /// `n = 10`, `d = 1000`, 50 layers, 10 runs.
    fn default() -> Self {
        Self {
            seed: 0,
            width: 1000,
            batch: 10,
            runs: 10,
            depth: 50,
            rho0: 0.5,
        }
    }
}

impl SuiteOptions {
    /// `d = 200`, 3 runs: a quick profile with larger run noise.
    pub fn smoke() -> Self {
        Self {
            width: 200,
            runs: 3,
            ..Self::default()
        }
    }

    pub fn network(&self, activation: ActivationSpec) -> NetworkConfig {
        NetworkConfig {
            width: self.width,
            batch: self.batch,
            depth: self.depth,
            activation,
            centering: Centering::LayerMean,
            projection: Projection::SphereLn,
            norm_axis: NormAxis::PerSample,
            seed: self.seed,
            runs: self.runs,
            input: InputMode::Equicorrelated(self.rho0),
        }
    }
}

/// One CSV produced by a suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFile {
    pub name: String,
    pub content: String,
}

pub fn run_suite(name: SuiteName, opts: &SuiteOptions) -> Result<Vec<CsvFile>> {
    match name {
        SuiteName::IsoGapActivation => suite_iso_gap_activation(opts),
        SuiteName::HermiteBasis => suite_hermite_basis(opts),
        SuiteName::Gain => suite_gain(opts),
        SuiteName::Ablations => suite_ablations(opts),
    }
}

pub fn write_files(dir: &Path, files: &[CsvFile]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.content).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Per-layer aggregate over the runs that reached the layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSummary {
    pub layer: usize,
    pub mean_iso_gap: f64,
    pub se_iso_gap: f64,
    pub mean_gamma: f64,
    pub runs_ok: usize,
}

pub fn summarize(outcomes: &[RunOutcome], depth: usize) -> Vec<LayerSummary> {
    (0..=depth)
        .map(|layer| {
            let rows: Vec<_> = outcomes
                .iter()
                .filter_map(|o| o.traces.get(layer))
                .collect();
            let gaps: Vec<f64> = rows.iter().map(|t| t.iso_gap).collect();
            let gammas: Vec<f64> = rows.iter().map(|t| t.gamma).collect();
            let (mean_iso_gap, se_iso_gap) = mean_se(&gaps);
            LayerSummary {
                layer,
                mean_iso_gap,
                se_iso_gap,
                mean_gamma: mean_se(&gammas).0,
                runs_ok: rows.len(),
            }
        })
        .collect()
}

fn validate_all(configs: &[NetworkConfig]) -> Result<()> {
    configs.iter().try_for_each(NetworkConfig::validate)
}

fn simulate(cfg: &NetworkConfig) -> Result<Vec<RunOutcome>> {
    run_network_outcomes(cfg, &config_input(cfg)?)
}

/// Every run must complete in suites that report bounds.
fn simulate_strict(cfg: &NetworkConfig) -> Result<Vec<LayerSummary>> {
    let mut outcomes = simulate(cfg)?;
    if let Some(e) = outcomes.iter_mut().find_map(|o| o.failure.take()) {
        return Err(e);
    }
    Ok(summarize(&outcomes, cfg.depth))
}

fn n(x: f64) -> String {
    format_number(x)
}

/// LN-MLP isometry gap for relu, tanh and sigmoid against the decay bound.
pub fn suite_iso_gap_activation(opts: &SuiteOptions) -> Result<Vec<CsvFile>> {
    let configs: Vec<NetworkConfig> = ["relu", "tanh", "sigmoid"]
        .iter()
        .map(|a| opts.network(a.parse().expect("catalog name")))
        .collect();
    validate_all(&configs)?;
    let mut csv =
        String::from("activation,layer,mean_iso_gap,se_iso_gap,mean_gamma,bound,bound_valid\n");
    for cfg in &configs {
        let b0 = expand_default(&cfg.activation)?.beta0()?;
        let rows = simulate_strict(cfg)?;
        let iso0 = (-rows[0].mean_iso_gap).exp();
        for r in &rows {
            let (bound, valid) = match isogap_bound(iso0, b0, cfg.batch, r.layer) {
                Ok(b) => (b.bound, r.layer >= b.valid_from),
                Err(Error::BoundInapplicable(_)) => (f64::INFINITY, false),
                Err(e) => return Err(e),
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                cfg.activation,
                r.layer,
                n(r.mean_iso_gap),
                n(r.se_iso_gap),
                n(r.mean_gamma),
                n(bound),
                valid
            );
        }
    }
    Ok(vec![CsvFile {
        name: "iso_gap_activation.csv".into(),
        content: csv,
    }])
}

/// Fitted per-layer decay rate of γ in a mean-field trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub window_start: usize,
    pub window_end: usize,
}

/// Least-squares rate `-d log γ / dℓ` over the leading layers with `γ ≥ 1`
/// (some correlation at least 1/2). Near perfect correlation a pure `He_k`
/// contracts γ by exactly `k` per layer; further out the decay turns
/// super-exponential and no single rate describes it.
pub fn fit_gamma_rate(trace: &MeanFieldTrace) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = trace
        .records
        .iter()
        .take_while(|r| r.gamma >= 1.0 && r.gamma.is_finite())
        .map(|r| (r.layer as f64, r.gamma.ln()))
        .collect();
    let s = slope(&pts)?;
    Some(RateFit {
        rate: -s,
        window_start: pts[0].0 as usize,
        window_end: pts[pts.len() - 1].0 as usize,
    })
}

/// Pure Hermite activations He₁, He₂, He₃: mean-field traces, fitted
/// rates, and finite-width LN and BN runs.
pub fn suite_hermite_basis(opts: &SuiteOptions) -> Result<Vec<CsvFile>> {
    let acts: Vec<ActivationSpec> = (1..=3).map(ActivationSpec::hermite).collect();
    let configs: Vec<NetworkConfig> = acts
        .iter()
        .flat_map(|a| {
            [NormAxis::PerSample, NormAxis::PerFeature].map(|axis| NetworkConfig {
                norm_axis: axis,
                ..opts.network(a.clone())
            })
        })
        .collect();
    validate_all(&configs)?;
    let g0 = CorrelationMatrix::equicorrelation(opts.batch, HERMITE_RHO0)?;

    let mut mf =
        String::from("activation,layer,gamma,iso_gap,gamma_bound,iso_gap_bound,bound_valid\n");
    let mut rates = String::from(
        "activation,beta0,log_beta0,fitted_rate,window_start,window_end,relative_error\n",
    );
    for act in &acts {
        let exp = expand_default(act)?;
        let trace = run_meanfield(&g0, &exp, opts.depth)?;
        for r in &trace.records {
            let _ = writeln!(
                mf,
                "{},{},{},{},{},{},{}",
                act,
                r.layer,
                n(r.gamma),
                n(r.iso_gap),
                n(r.gamma_bound),
                n(r.iso_gap_bound),
                r.bound_valid
            );
        }
        let log_b = trace.beta0.ln();
        let fit = fit_gamma_rate(&trace);
        let (rate, ws, we) =
            fit.map_or((f64::NAN, 0, 0), |f| (f.rate, f.window_start, f.window_end));
        let rel = if log_b > 0.0 {
            (rate - log_b).abs() / log_b
        } else {
            (rate - log_b).abs()
        };
        let _ = writeln!(
            rates,
            "{},{},{},{},{},{},{}",
            act,
            n(trace.beta0),
            n(log_b),
            n(rate),
            ws,
            we,
            n(rel)
        );
    }

    let mut finite = String::from("activation,norm_axis,layer,mean_iso_gap,se_iso_gap\n");
    for cfg in &configs {
        for r in simulate_strict(cfg)? {
            let _ = writeln!(
                finite,
                "{},{},{},{},{}",
                cfg.activation,
                cfg.norm_axis,
                r.layer,
                n(r.mean_iso_gap),
                n(r.se_iso_gap)
            );
        }
    }
    Ok(vec![
        CsvFile {
            name: "hermite_basis_meanfield.csv".into(),
            content: mf,
        },
        CsvFile {
            name: "hermite_basis_rates.csv".into(),
            content: rates,
        },
        CsvFile {
            name: "hermite_basis_finite.csv".into(),
            content: finite,
        },
    ])
}

/// β₀ as a function of gain, and tanh isometry traces at several gains.
pub fn suite_gain(opts: &SuiteOptions) -> Result<Vec<CsvFile>> {
    let kinds = [
        ActivationKind::Relu,
        ActivationKind::Step,
        ActivationKind::Sin,
        ActivationKind::Exp,
        ActivationKind::Tanh,
        ActivationKind::Sigmoid,
        ActivationKind::Selu,
    ];
    let mut acts = Vec::new();
    for kind in &kinds {
        for &g in &GAINS {
            acts.push(ActivationSpec::new(kind.clone(), g)?);
        }
    }
    let configs: Vec<NetworkConfig> = TANH_GAINS
        .iter()
        .map(|&g| Ok(opts.network(ActivationSpec::new(ActivationKind::Tanh, g)?)))
        .collect::<Result<_>>()?;
    validate_all(&configs)?;

    let mut betas = String::from("activation,gain,beta0_quadrature,beta0_closed_form,abs_diff\n");
    for act in &acts {
        let q = expand(act, DEFAULT_MAX_DEGREE, GAIN_QUAD_ORDER)?.beta0()?;
        let closed = beta0_closed_form(act);
        let (c, d) = closed.map_or((f64::NAN, f64::NAN), |c| (c, (q - c).abs()));
        let _ = writeln!(
            betas,
            "{},{},{},{},{}",
            act.name(),
            n(act.gain()),
            n(q),
            n(c),
            n(d)
        );
    }

    let mut traces = String::from("gain,beta0,layer,mean_iso_gap,se_iso_gap\n");
    for cfg in &configs {
        let b0 = expand_default(&cfg.activation)?.beta0()?;
        for r in simulate_strict(cfg)? {
            let _ = writeln!(
                traces,
                "{},{},{},{},{}",
                n(cfg.activation.gain()),
                n(b0),
                r.layer,
                n(r.mean_iso_gap),
                n(r.se_iso_gap)
            );
        }
    }
    Ok(vec![
        CsvFile {
            name: "gain_beta0.csv".into(),
            content: betas,
        },
        CsvFile {
            name: "gain_iso_gap.csv".into(),
            content: traces,
        },
    ])
}

pub const ABLATION_CENTERINGS: [Centering; 3] = [
    Centering::None,
    Centering::LayerMean,
    Centering::MeanFieldC0,
];
pub const ABLATION_PROJECTIONS: [Projection; 3] = [
    Projection::None,
    Projection::SphereLn,
    Projection::MeanFieldScale,
];

/// Centering × projection grid. Pipelines without a projection may blow up
/// (e.g. `exp`); layers past the blow-up report only the surviving runs.
pub fn suite_ablations(opts: &SuiteOptions) -> Result<Vec<CsvFile>> {
    let mut configs = Vec::new();
    for act in ["relu", "tanh", "sigmoid", "exp"] {
        for c in ABLATION_CENTERINGS {
            for p in ABLATION_PROJECTIONS {
                configs.push(NetworkConfig {
                    centering: c,
                    projection: p,
                    ..opts.network(act.parse().expect("catalog name"))
                });
            }
        }
    }
    validate_all(&configs)?;
    let mut csv =
        String::from("activation,centering,projection,layer,mean_iso_gap,se_iso_gap,runs_ok\n");
    for cfg in &configs {
        for r in summarize(&simulate(cfg)?, cfg.depth) {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                cfg.activation,
                cfg.centering,
                cfg.projection,
                r.layer,
                n(r.mean_iso_gap),
                n(r.se_iso_gap),
                r.runs_ok
            );
        }
    }
    Ok(vec![CsvFile {
        name: "ablations.csv".into(),
        content: csv,
    }])
}
