use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermite::{
    beta0_closed_form, contraction_check, dual_by_quadrature, expand_default, mehler_check,
    unit_grid, ActivationKind, ActivationSpec, HermiteExpansion,
};
use crate::linalg::{
    det_bounds, gram_from_columns, gram_from_rows, isometry_ratio_exact, isometry_ratio_identity,
    normalize_columns, normalize_rows, spectral_summary, DenseMatrix, GramMatrix, NormStats,
};
use crate::meanfield::{isogap_bound, lyapunov_gamma, mf_step, run_meanfield, CorrelationMatrix};
use crate::sim::RngStream;

/// Batteries `verify_all` must produce, in order.
pub const MANIFEST: [&str; 10] = [
    "isometry_basic",
    "isometry_normalization",
    "gamma_iso",
    "beta_closed_forms",
    "dual_kernel",
    "hermite_nonlinearity",
    "mehler_kernel",
    "lyapunov",
    "potential_decay",
    "gram_isometry_gap",
];

const REL_TOL: f64 = 1e-8;
const SLACK: f64 = 1e-9;
const MEANFIELD_DEPTH: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest violation seen, in the battery's own units; `≤ 0` when every
    /// check held with room to spare.
    pub worst_violation: f64,
    pub pass: bool,
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} trials={} failures={} worst_violation={:.16e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.failures,
            self.worst_violation
        )
    }
}

/// Accumulates the outcome of individual checks.
struct Tally {
    name: &'static str,
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            failures: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    /// Records a check whose violation is `excess` (passes when `≤ 0`).
    fn check(&mut self, excess: f64) {
        self.trials += 1;
        if !(excess <= 0.0) {
            self.failures += 1;
        }
        self.worst = if excess.is_nan() {
            f64::NAN
        } else {
            self.worst.max(excess)
        };
    }

    fn fail(&mut self) {
        self.trials += 1;
        self.failures += 1;
        self.worst = f64::INFINITY;
    }

    fn report(self) -> VerificationReport {
        VerificationReport {
            name: self.name.to_string(),
            trials: self.trials,
            failures: self.failures,
            worst_violation: self.worst,
            pass: self.failures == 0 && self.trials > 0,
        }
    }
}

/// Activations used by the mean-field and contraction batteries.
pub fn catalog() -> Vec<ActivationSpec> {
    ["relu", "tanh", "sin", "exp", "step", "he2"]
        .iter()
        .map(|s| s.parse().expect("catalog name"))
        .collect()
}

// Streams above every network run slot, one per battery.
fn rng(seed: u64, battery: usize) -> ChaCha8Rng {
    RngStream::new(seed, (u32::MAX as u64 - 1) << 32 | battery as u64).rng()
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::new(rows, cols, data).expect("finite normals")
}

/// Random `d × n` batch with `n ≤ d ≤ 3n` and log-normal column scales.
fn random_batch(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let d = rng.random_range(n..=3 * n);
    let x = gaussian(rng, d, n);
    let scales: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal).exp())
        .collect();
    DenseMatrix::from_fn(d, n, |i, j| x.get(i, j) * scales[j]).expect("finite")
}

/// Random unit-diagonal PSD matrix: normalized Gram of Gaussian columns
/// sharing a random common component, so strong positive and negative
/// correlations both occur.
pub fn random_correlation(rng: &mut ChaCha8Rng, n: usize) -> CorrelationMatrix {
    let d = rng.random_range(n..=3 * n);
    let z = gaussian(rng, d, n);
    let u = gaussian(rng, d, 1);
    let t: f64 = rng.random_range(0.0..4.0);
    let signs: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let x = DenseMatrix::from_fn(d, n, |i, j| z.get(i, j) + signs[j] * t * u.get(i, 0))
        .expect("finite");
    let g = gram_from_columns(&x).expect("non-empty");
    CorrelationMatrix::normalize(&g).expect("nonzero columns")
}

fn iso_gap(g: &GramMatrix) -> Result<f64> {
    Ok(spectral_summary(g)?.iso_gap)
}

/// Scale invariance and range of the isometry functional.
pub fn battery_isometry_basic(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = rng(seed, 0);
    let mut t = Tally::new("isometry_basic");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let g = gram_from_columns(&random_batch(&mut rng, n))?;
        let c = 10f64.powf(rng.random_range(-3.0..3.0));
        let a = spectral_summary(&g)?.iso;
        let b = spectral_summary(&g.scaled(c))?.iso;
        t.check((a - b).abs() - 1e-10);
        t.check(-a.min(1.0 - a));
        let eye = spectral_summary(&GramMatrix::identity(n).scaled(c))?.iso;
        t.check((eye - 1.0).abs() - 1e-12);
    }
    Ok(t.report())
}

/// Sphere projection of samples (columns) or features (rows): the isometry
/// improves by at least `1 + var/mean²` of the norms, and by exactly
/// `mean(a²)/geomean(a²)`.
pub fn battery_isometry_normalization(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = rng(seed, 1);
    let mut t = Tally::new("isometry_normalization");
    for trial in 0..trials {
        let n = rng.random_range(2..=10);
        let x = random_batch(&mut rng, n);
        let (before, after, stats): (GramMatrix, GramMatrix, NormStats) = if trial % 2 == 0 {
            let (y, s) = normalize_columns(&x, 1.0)?;
            (gram_from_columns(&x)?, gram_from_columns(&y)?, s)
        } else {
            let xt = x.transpose();
            let (y, s) = normalize_rows(&xt, 1.0)?;
            (gram_from_rows(&xt)?, gram_from_rows(&y)?, s)
        };
        let log_ratio = iso_gap(&before)? - iso_gap(&after)?;
        let lower = isometry_ratio_identity(&stats)?.ln();
        let exact = isometry_ratio_exact(&stats)?.ln();
        t.check(lower - log_ratio - REL_TOL);
        t.check((log_ratio - exact).abs() - REL_TOL);
    }
    Ok(t.report())
}

/// `(1 - (n-1) m)^n ≤ det G ≤ 1 - m²` for unit-diagonal G.
pub fn battery_gamma_iso(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = rng(seed, 2);
    let mut t = Tally::new("gamma_iso");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let g = random_correlation(&mut rng, n);
        let det = spectral_summary(g.as_gram())?.log_det.exp();
        let b = det_bounds(g.as_gram())?;
        t.check(det - b.upper - 1e-12);
        if b.lower_valid {
            t.check(b.lower - det - 1e-12);
        }
    }
    Ok(t.report())
}

/// Quadrature β₀ against the closed forms at random gains.
pub fn battery_beta_closed_forms(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = rng(seed, 3);
    let mut t = Tally::new("beta_closed_forms");
    let kinds = [
        ActivationKind::Relu,
        ActivationKind::Step,
        ActivationKind::Sin,
        ActivationKind::Exp,
        ActivationKind::Identity,
        ActivationKind::HermiteBasis(2),
    ];
    let gains = trials.min(50);
    for kind in kinds {
        for i in 0..gains {
            let gain = match kind {
                ActivationKind::HermiteBasis(_) => 1.0,
                _ if i == 0 => 1.0,
                _ => rng.random_range(0.25..2.0),
            };
            let act = ActivationSpec::new(kind.clone(), gain)?;
            let closed =
                beta0_closed_form(&act).ok_or_else(|| Error::invalid("missing closed form"))?;
            t.check((expand_default(&act)?.beta0()? - closed).abs() - 1e-6);
        }
    }
    Ok(t.report())
}

/// `σ̂(ρ) = Σ c_k² ρ^k` against `E σ(X)σ(Y)` by bivariate quadrature.
pub fn battery_dual_kernel(
    trials: usize,
    seed: u64,
    expansions: &[(ActivationSpec, HermiteExpansion)],
) -> Result<VerificationReport> {
    let mut rng = rng(seed, 4);
    let mut t = Tally::new("dual_kernel");
    let smooth: Vec<&(ActivationSpec, HermiteExpansion)> = expansions
        .iter()
        .filter(|(a, _)| a.kind.breakpoint().is_none())
        .collect();
    for i in 0..trials {
        let (act, exp) = smooth[i % smooth.len()];
        let rho: f64 = rng.random_range(-0.99..0.99);
        let truncation = exp.tail_mass() * rho.abs().powi(exp.max_degree() as i32 + 1);
        let got = dual_by_quadrature(act, rho, 100);
        t.check((exp.dual(rho) - got).abs() - truncation - 1e-10 * exp.second_moment().max(1.0));
    }
    Ok(t.report())
}

/// `|σ̄(ρ)|/σ̄(1)` contraction against `β₀⁻¹ ρ/(1-ρ)` on a fixed and a
/// random grid.
pub fn battery_hermite_nonlinearity(
    trials: usize,
    seed: u64,
    expansions: &[(ActivationSpec, HermiteExpansion)],
) -> Result<VerificationReport> {
    let mut rng = rng(seed, 5);
    let mut t = Tally::new("hermite_nonlinearity");
    let mut grid = unit_grid(0.01);
    grid.extend((0..trials).map(|_| rng.random_range(1e-6..1.0 - 1e-6)));
    for (_, exp) in expansions {
        for p in contraction_check(exp, &grid)?.points {
            t.check(p.lhs / p.rhs - 1.0 - crate::hermite::CONTRACTION_SLACK);
        }
    }
    Ok(t.report())
}

/// `E he_j(X) he_k(Y) = ρ^j δ_jk`.
pub fn battery_mehler_kernel(trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut rng = rng(seed, 6);
    let mut t = Tally::new("mehler_kernel");
    for _ in 0..trials {
        let j = rng.random_range(0..=8);
        let k = if rng.random_bool(0.5) {
            j
        } else {
            rng.random_range(0..=8)
        };
        let rho = rng.random_range(-0.95..0.95);
        let (m, e) = mehler_check(j, k, rho, 100)?;
        t.check((m - e).abs() - 1e-8);
    }
    Ok(t.report())
}

/// One mean-field layer divides γ by at least β₀. `gamma` is the potential
/// under test.
pub fn battery_lyapunov(
    trials: usize,
    seed: u64,
    expansions: &[(ActivationSpec, HermiteExpansion)],
    gamma: &dyn Fn(&CorrelationMatrix) -> Result<f64>,
) -> Result<VerificationReport> {
    let mut rng = rng(seed, 7);
    let mut t = Tally::new("lyapunov");
    for _ in 0..trials {
        let n = rng.random_range(2..=10);
        let g = random_correlation(&mut rng, n);
        let before = gamma(&g)?;
        for (_, exp) in expansions {
            let after = gamma(&mf_step(&g, exp)?)?;
            let b = exp.beta0()?;
            if before.is_infinite() {
                t.check(if after.is_finite() { -1.0 } else { 0.0 });
            } else {
                t.check(after - before / b - SLACK);
            }
        }
    }
    Ok(t.report())
}

/// Mean-field traces from random starts: `γ_ℓ ≤ γ₀ β₀^{-ℓ}` at every layer
/// and the isometry-gap bound from its validity layer on.
pub fn battery_meanfield_bounds(
    trials: usize,
    seed: u64,
    expansions: &[(ActivationSpec, HermiteExpansion)],
) -> Result<(VerificationReport, VerificationReport)> {
    let mut rng = rng(seed, 8);
    let mut decay = Tally::new("potential_decay");
    let mut gap = Tally::new("gram_isometry_gap");
    for i in 0..trials {
        let n = rng.random_range(2..=10);
        let g0 = random_correlation(&mut rng, n);
        let (_, exp) = &expansions[i % expansions.len()];
        let trace = match run_meanfield(&g0, exp, MEANFIELD_DEPTH) {
            Ok(t) => t,
            // numerically singular starts carry no bound
            Err(Error::DegenerateInput(_)) => continue,
            Err(_) => {
                decay.fail();
                continue;
            }
        };
        let iso0 = (-trace.records[0].iso_gap).exp();
        for r in &trace.records {
            decay.check(r.gamma - r.gamma_bound - SLACK);
            let b = isogap_bound(iso0, trace.beta0, n, r.layer)?;
            if r.layer >= b.valid_from {
                gap.check(r.iso_gap - b.bound - SLACK);
            }
        }
    }
    Ok((decay.report(), gap.report()))
}

/// Runs every battery. The result always follows [`MANIFEST`]; a
/// missing or extra battery adds a failing `manifest` report.
pub fn verify_all(trials: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    verify_with_gamma(trials, seed, &lyapunov_gamma)
}

/// [`verify_all`] with a substitute Lyapunov potential, for sensitivity
/// checks.
pub fn verify_with_gamma(
    trials: usize,
    seed: u64,
    gamma: &dyn Fn(&CorrelationMatrix) -> Result<f64>,
) -> Result<Vec<VerificationReport>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let expansions: Vec<(ActivationSpec, HermiteExpansion)> = catalog()
        .into_iter()
        .map(|a| {
            let e = expand_default(&a)?;
            Ok((a, e))
        })
        .collect::<Result<_>>()?;
    let (decay, gap) = battery_meanfield_bounds(trials, seed, &expansions)?;
    let mut reports = vec![
        battery_isometry_basic(trials, seed)?,
        battery_isometry_normalization(trials, seed)?,
        battery_gamma_iso(trials, seed)?,
        battery_beta_closed_forms(trials, seed)?,
        battery_dual_kernel(trials, seed, &expansions)?,
        battery_hermite_nonlinearity(trials, seed, &expansions)?,
        battery_mehler_kernel(trials, seed)?,
        battery_lyapunov(trials, seed, &expansions, gamma)?,
        decay,
        gap,
    ];
    let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
    if names != MANIFEST {
        reports.push(VerificationReport {
            name: "manifest".into(),
            trials: 1,
            failures: 1,
            worst_violation: f64::INFINITY,
            pass: false,
        });
    }
    Ok(reports)
}
