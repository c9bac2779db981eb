use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{
    Centering, InputMode, MeanFieldConstants, NetworkConfig, NormAxis, Projection,
};
use super::rng::{standard_normal, RngStream};
use crate::error::{Error, Result};
use crate::hermite::ActivationSpec;
use crate::linalg::io::format_number;
use crate::linalg::{
    center_columns, center_rows, column_norms, dot, gram_from_columns, normalize_columns,
    row_norms, spectral_summary, DenseMatrix, GramMatrix, NormStats, ZERO_NORM,
};
use crate::meanfield::lyapunov_gamma_gram;

pub const TRACE_HEADER: &str = "run,layer,iso_gap,gamma,norm_bias";

/// Diagnostics of one layer of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub run: usize,
    pub layer: usize,
    pub iso_gap: f64,
    pub gamma: f64,
    /// `var/mean²` of the norms before projection.
    pub norm_bias: f64,
    /// Sample Gram matrix after the layer.
    pub gram: GramMatrix,
    pub seconds: f64,
}

/// Population variance over squared mean.
pub fn norm_bias(values: &[f64]) -> Result<f64> {
    NormStats::from_norms(values.to_vec())?.bias()
}

/// Builds a `d × n` input batch.
///
/// `Equicorrelated(ρ)` is deterministic: the columns are those of the
/// closed-form square root `√(1-ρ) I + ((√(1+(n-1)ρ) - √(1-ρ))/n) 11ᵀ`,
/// zero-padded to `d` rows.
pub fn make_input(n: usize, d: usize, stream: &RngStream, mode: InputMode) -> Result<DenseMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::invalid(
            "input needs at least one sample and one coordinate",
        ));
    }
    match mode {
        InputMode::Gaussian => Ok(DenseMatrix::from_raw(d, n, stream.normals(d * n))),
        InputMode::DuplicatedPair => {
            if n < 2 {
                return Err(Error::invalid("duplicated pair needs two samples"));
            }
            let mut x = DenseMatrix::from_raw(d, n, stream.normals(d * n));
            for i in 0..d {
                let v = x.get(i, 0);
                x.set(i, 1, v);
            }
            Ok(x)
        }
        InputMode::Equicorrelated(rho) => {
            let lo = if n > 1 { -1.0 / (n as f64 - 1.0) } else { -1.0 };
            if !(rho > lo && rho < 1.0) {
                return Err(Error::invalid(format!(
                    "equicorrelation {rho} outside ({lo}, 1)"
                )));
            }
            if d < n {
                return Err(Error::invalid("equicorrelated input needs d ≥ n"));
            }
            let a = (1.0 - rho).sqrt();
            let b = ((1.0 + (n as f64 - 1.0) * rho).sqrt() - a) / n as f64;
            DenseMatrix::from_fn(d, n, |i, j| match i {
                i if i >= n => 0.0,
                i if i == j => a + b,
                _ => b,
            })
        }
    }
}

/// `σ(W X / √d)` elementwise; the gain is part of `act`.
pub fn activate(x: &DenseMatrix, w: &DenseMatrix, act: &ActivationSpec) -> Result<DenseMatrix> {
    let scale = 1.0 / (w.cols() as f64).sqrt();
    let mut h = w.matmul(x)?;
    for v in h.as_mut_slice() {
        *v = act.eval(scale * *v);
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(h)
}

/// [`activate`] with `W = sample_weights(stream, d)`, drawing one row of
/// `W` at a time instead of materializing it. Bit-identical to the
/// materialized version.
pub fn activate_streamed(
    x: &DenseMatrix,
    stream: &RngStream,
    act: &ActivationSpec,
) -> Result<DenseMatrix> {
    let (d, n) = (x.rows(), x.cols());
    let scale = 1.0 / (d as f64).sqrt();
    let xt = x.transpose();
    let mut rng = stream.rng();
    let mut row = vec![0.0; d];
    let mut h = Vec::with_capacity(d * n);
    for _ in 0..d {
        row.iter_mut().for_each(|v| *v = standard_normal(&mut rng));
        for j in 0..n {
            h.push(act.eval(scale * dot(&row, xt.row(j))));
        }
    }
    let h = DenseMatrix::from_raw(d, n, h);
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(h)
}

pub fn center(h: &DenseMatrix, centering: Centering, axis: NormAxis, c0: f64) -> DenseMatrix {
    match (centering, axis) {
        (Centering::None, _) => h.clone(),
        (Centering::LayerMean, NormAxis::PerSample) => center_columns(h),
        (Centering::LayerMean, NormAxis::PerFeature) => center_rows(h),
        (Centering::MeanFieldC0, _) => {
            let mut out = h.clone();
            out.as_mut_slice().iter_mut().for_each(|v| *v -= c0);
            out
        }
    }
}

/// Applies the projection and returns the norms measured before it, along
/// the normalized axis.
///
/// Under batch normalization an all-zero feature stays zero, as it would
/// with the usual `ε` in the denominator; a zero sample under layer
/// normalization is an error.
pub fn project(
    h: &DenseMatrix,
    projection: Projection,
    axis: NormAxis,
    consts: Option<&MeanFieldConstants>,
) -> Result<(DenseMatrix, Vec<f64>)> {
    let norms = match axis {
        NormAxis::PerSample => column_norms(h),
        NormAxis::PerFeature => row_norms(h),
    };
    let constant = |f: fn(&MeanFieldConstants) -> f64| -> Result<DenseMatrix> {
        let c = consts.ok_or_else(|| Error::invalid("projection needs Hermite constants"))?;
        Ok(h.scaled(1.0 / f(c).sqrt()))
    };
    let out = match (projection, axis) {
        (Projection::None, _) => h.clone(),
        (Projection::MeanFieldScale, _) => constant(|c| c.reduced_norm)?,
        (Projection::XavierScale, _) => constant(|c| c.dual_norm)?,
        (Projection::SphereLn, NormAxis::PerSample) => {
            normalize_columns(h, (h.rows() as f64).sqrt())?.0
        }
        (Projection::SphereLn, NormAxis::PerFeature) => {
            let target = (h.cols() as f64).sqrt();
            let mut out = h.clone();
            let cols = h.cols();
            for (row, a) in out.as_mut_slice().chunks_mut(cols).zip(&norms) {
                if *a > ZERO_NORM {
                    let s = target / a;
                    row.iter_mut().for_each(|v| *v *= s);
                }
            }
            out
        }
    };
    Ok((out, norms))
}

/// One layer: activation, centering, projection. Returns the new batch and
/// the pre-projection norms.
pub fn forward_layer(
    x: &DenseMatrix,
    w: &DenseMatrix,
    cfg: &NetworkConfig,
    consts: Option<&MeanFieldConstants>,
) -> Result<(DenseMatrix, Vec<f64>)> {
    finish_layer(activate(x, w, &cfg.activation)?, cfg, consts)
}

fn finish_layer(
    h: DenseMatrix,
    cfg: &NetworkConfig,
    consts: Option<&MeanFieldConstants>,
) -> Result<(DenseMatrix, Vec<f64>)> {
    if cfg.centering == Centering::MeanFieldC0 && consts.is_none() {
        return Err(Error::invalid("c₀ centering needs Hermite constants"));
    }
    let h = center(
        &h,
        cfg.centering,
        cfg.norm_axis,
        consts.map_or(0.0, |c| c.c0),
    );
    let (out, norms) = project(&h, cfg.projection, cfg.norm_axis, consts)?;
    if !out.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((out, norms))
}

/// Projects the raw input onto the `√d` sphere, `x⁰ = LN(x)`.
pub fn preprocess_input(x: &DenseMatrix) -> Result<(DenseMatrix, NormStats)> {
    normalize_columns(x, (x.rows() as f64).sqrt())
}

fn record(
    run: usize,
    layer: usize,
    x: &DenseMatrix,
    norms: &[f64],
    start: Instant,
) -> Result<LayerTrace> {
    let gram = gram_from_columns(x)?;
    let iso_gap = spectral_summary(&gram)?.iso_gap;
    let gamma = lyapunov_gamma_gram(&gram)?;
    // Zero norm bias for an all-zero batch is meaningless; report NaN.
    let norm_bias = norm_bias(norms).unwrap_or(f64::NAN);
    Ok(LayerTrace {
        run,
        layer,
        iso_gap,
        gamma,
        norm_bias,
        gram,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Outcome of a single run. A run that fails part-way keeps the layers it
/// completed.
#[derive(Debug)]
pub struct RunOutcome {
    pub traces: Vec<LayerTrace>,
    pub failure: Option<Error>,
}

/// Simulates run `run` of `cfg` on the raw input `x0`.
pub fn simulate_run(
    cfg: &NetworkConfig,
    consts: Option<&MeanFieldConstants>,
    x0: &DenseMatrix,
    run: usize,
) -> RunOutcome {
    let mut traces = Vec::with_capacity(cfg.depth + 1);
    let start = Instant::now();
    let first = preprocess_input(x0)
        .and_then(|(x, stats)| Ok((record(run, 0, &x, &stats.norms, start)?, x)));
    let mut x = match first {
        Ok((t, x)) => {
            traces.push(t);
            x
        }
        Err(e) => {
            return RunOutcome {
                traces,
                failure: Some(e.at_layer(run, 0)),
            }
        }
    };
    for layer in 1..=cfg.depth {
        let start = Instant::now();
        let stream = RngStream::layer(cfg.seed, run, layer);
        let step = activate_streamed(&x, &stream, &cfg.activation)
            .and_then(|h| finish_layer(h, cfg, consts))
            .and_then(|(next, norms)| Ok((record(run, layer, &next, &norms, start)?, next)));
        match step {
            Ok((t, next)) => {
                traces.push(t);
                x = next;
            }
            Err(e) => {
                return RunOutcome {
                    traces,
                    failure: Some(e.at_layer(run, layer)),
                }
            }
        }
    }
    RunOutcome {
        traces,
        failure: None,
    }
}

/// Input batch of `cfg`, drawn from the input substream shared by all runs.
pub fn config_input(cfg: &NetworkConfig) -> Result<DenseMatrix> {
    make_input(cfg.batch, cfg.width, &RngStream::input(cfg.seed), cfg.input)
}

/// All runs of `cfg` on `x0`, in parallel, ordered by run then layer.
/// Output is independent of the number of worker threads.
pub fn run_network_outcomes(cfg: &NetworkConfig, x0: &DenseMatrix) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    if x0.rows() != cfg.width || x0.cols() != cfg.batch {
        return Err(Error::invalid(format!(
            "input is {}x{}, config expects {}x{}",
            x0.rows(),
            x0.cols(),
            cfg.width,
            cfg.batch
        )));
    }
    let consts = if cfg.needs_constants() {
        Some(cfg.constants()?)
    } else {
        None
    };
    Ok((0..cfg.runs)
        .into_par_iter()
        .map(|run| simulate_run(cfg, consts.as_ref(), x0, run))
        .collect())
}

/// [`run_network_outcomes`], failing on the first run error.
pub fn run_network(cfg: &NetworkConfig, x0: &DenseMatrix) -> Result<Vec<LayerTrace>> {
    let mut all = Vec::with_capacity(cfg.runs * (cfg.depth + 1));
    for outcome in run_network_outcomes(cfg, x0)? {
        if let Some(e) = outcome.failure {
            return Err(e);
        }
        all.extend(outcome.traces);
    }
    Ok(all)
}

pub fn traces_to_csv(traces: &[LayerTrace]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for t in traces {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t.run,
            t.layer,
            format_number(t.iso_gap),
            format_number(t.gamma),
            format_number(t.norm_bias)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::sample_weights;

    fn small(act: &str) -> NetworkConfig {
        NetworkConfig {
            width: 64,
            batch: 4,
            depth: 3,
            activation: act.parse().unwrap(),
            runs: 2,
            ..NetworkConfig::default()
        }
    }

    #[test]
    fn norm_bias_examples() {
        assert_eq!(norm_bias(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!((norm_bias(&[1.0, 2.0]).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((norm_bias(&[1.0, 1.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(norm_bias(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn input_modes() {
        let s = RngStream::input(3);
        let x = make_input(3, 5, &s, InputMode::Equicorrelated(0.5)).unwrap();
        let g = gram_from_columns(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.5 };
                assert!((g.get(i, j) - want).abs() < 1e-10);
            }
        }
        assert!(make_input(3, 5, &s, InputMode::Equicorrelated(-0.5)).is_err());
        let x = make_input(4, 16, &s, InputMode::DuplicatedPair).unwrap();
        let g = gram_from_columns(&x).unwrap();
        assert_eq!(g.get(0, 1), g.get(0, 0));
        assert_eq!(spectral_summary(&g).unwrap().iso_gap, f64::INFINITY);
    }

    #[test]
    fn sphere_projection_gives_equal_norms() {
        let cfg = NetworkConfig {
            centering: Centering::None,
            ..small("identity")
        };
        let x = make_input(4, 64, &RngStream::input(1), InputMode::Gaussian).unwrap();
        let w = sample_weights(&RngStream::new(1, 1), 64);
        let (y, _) = forward_layer(&x, &w, &cfg, None).unwrap();
        for a in column_norms(&y) {
            assert!((a - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn layer_mean_centers_columns() {
        let x = make_input(4, 64, &RngStream::input(1), InputMode::Gaussian).unwrap();
        let w = sample_weights(&RngStream::new(1, 1), 64);
        let h = activate(&x, &w, &ActivationSpec::relu()).unwrap();
        let c = center(&h, Centering::LayerMean, NormAxis::PerSample, 0.0);
        for j in 0..4 {
            assert!(c.column(j).iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn streamed_weights_match_materialized() {
        let x = make_input(3, 50, &RngStream::input(4), InputMode::Gaussian).unwrap();
        let s = RngStream::layer(4, 1, 2);
        let act = ActivationSpec::relu();
        let a = activate(&x, &sample_weights(&s, 50), &act).unwrap();
        assert_eq!(a, activate_streamed(&x, &s, &act).unwrap());
    }

    #[test]
    fn depth_zero_has_input_record_only() {
        let cfg = NetworkConfig {
            depth: 0,
            ..small("relu")
        };
        let x = config_input(&cfg).unwrap();
        let t = run_network(&cfg, &x).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|r| r.layer == 0));
    }

    #[test]
    fn zero_sample_is_reported_with_context() {
        let cfg = small("relu");
        let mut x = config_input(&cfg).unwrap();
        for i in 0..cfg.width {
            x.set(i, 2, 0.0);
        }
        let err = run_network(&cfg, &x).unwrap_err();
        assert!(matches!(err, Error::Layer { layer: 0, .. }));
        assert!(matches!(err.root(), Error::ZeroVector { index: 2 }));
    }

    #[test]
    fn mean_field_pipeline_needs_constants() {
        let cfg = NetworkConfig {
            centering: Centering::MeanFieldC0,
            ..small("relu")
        };
        let x = make_input(4, 64, &RngStream::input(1), InputMode::Gaussian).unwrap();
        let w = sample_weights(&RngStream::new(1, 1), 64);
        assert!(forward_layer(&x, &w, &cfg, None).is_err());
        let c = cfg.constants().unwrap();
        assert!((c.c0 - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!(forward_layer(&x, &w, &cfg, Some(&c)).is_ok());
    }

    #[test]
    fn csv_shape() {
        let cfg = small("tanh");
        let x = config_input(&cfg).unwrap();
        let csv = traces_to_csv(&run_network(&cfg, &x).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 4);
        assert!(lines[1].starts_with("0,0,"));
    }
}
