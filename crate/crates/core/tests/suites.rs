use std::collections::HashMap;

use isogauge_core::experiments::{
    bands_overlap, emit_svg, run_suite, suite_ablations, suite_gain, suite_hermite_basis,
    suite_iso_gap_activation, CsvFile, PlotSpec, SuiteName, SuiteOptions,
};

type Row = HashMap<String, String>;

fn rows(file: &CsvFile) -> Vec<Row> {
    let mut lines = file.content.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(str::to_string))
                .collect()
        })
        .collect()
}

fn num(r: &Row, key: &str) -> f64 {
    r[key].parse().unwrap()
}

fn file<'a>(files: &'a [CsvFile], name: &str) -> &'a CsvFile {
    files.iter().find(|f| f.name == name).unwrap()
}

#[test]
fn iso_gap_activation_rows_and_bound() {
    let opts = SuiteOptions::smoke();
    let files = suite_iso_gap_activation(&opts).unwrap();
    let all = rows(&files[0]);
    for act in ["relu", "tanh", "sigmoid"] {
        let rs: Vec<&Row> = all.iter().filter(|r| r["activation"] == act).collect();
        assert_eq!(rs.len(), opts.depth + 1);
        for w in rs.windows(2) {
            assert!(num(w[1], "bound") < num(w[0], "bound"), "{act}");
        }
    }
}

#[test]
fn relu_iso_gap_stays_under_bound_at_desk_width() {
    // at d = 200 the finite-width floor (~1e-2) meets the bound near the
    // last layers; d = 1000 leaves a margin of about 3
    let opts = SuiteOptions {
        runs: 3,
        ..SuiteOptions::default()
    };
    let all = rows(&suite_iso_gap_activation(&opts).unwrap()[0]);
    let relu: Vec<&Row> = all.iter().filter(|r| r["activation"] == "relu").collect();
    assert!(relu.iter().any(|r| r["bound_valid"] == "true"));
    for r in relu.iter().filter(|r| r["bound_valid"] == "true") {
        assert!(
            num(r, "mean_iso_gap") <= num(r, "bound"),
            "layer {}",
            r["layer"]
        );
    }
}

#[test]
fn hermite_basis_rates() {
    let files = suite_hermite_basis(&SuiteOptions::smoke()).unwrap();
    let mf = rows(file(&files, "hermite_basis_meanfield.csv"));
    let he1: Vec<f64> = mf
        .iter()
        .filter(|r| r["activation"] == "he1")
        .map(|r| num(r, "iso_gap"))
        .collect();
    assert!(he1.iter().all(|g| (g - he1[0]).abs() < 1e-9 * he1[0]));
    for (act, factor) in [("he2", 2.0), ("he3", 2.0)] {
        let g: Vec<f64> = mf
            .iter()
            .filter(|r| r["activation"] == act)
            .map(|r| num(r, "gamma"))
            .collect();
        for w in g.windows(2).filter(|w| w[0] > 1e-250) {
            assert!(
                w[1] <= w[0] / factor * (1.0 + 1e-9),
                "{act}: {} -> {}",
                w[0],
                w[1]
            );
        }
    }
    let rates = rows(file(&files, "hermite_basis_rates.csv"));
    let he2 = rates.iter().find(|r| r["activation"] == "he2").unwrap();
    assert!(num(he2, "relative_error") < 0.15);
    // He₃ cubes correlations: faster than log β₀, not within 15% of it
    let he3 = rates.iter().find(|r| r["activation"] == "he3").unwrap();
    assert!(num(he3, "fitted_rate") >= num(he3, "log_beta0"));
}

#[test]
fn gain_curves() {
    let files = suite_gain(&SuiteOptions::smoke()).unwrap();
    let betas = rows(file(&files, "gain_beta0.csv"));
    let relu: Vec<f64> = betas
        .iter()
        .filter(|r| r["activation"] == "relu")
        .map(|r| num(r, "beta0_quadrature"))
        .collect();
    assert_eq!(relu.len(), 5);
    assert!(relu.iter().all(|b| (b - relu[0]).abs() < 1e-9));
    let exp1 = betas
        .iter()
        .find(|r| r["activation"] == "exp" && num(r, "gain") == 1.0)
        .unwrap();
    assert!(num(exp1, "abs_diff") < 1e-6);
    let sin: Vec<f64> = betas
        .iter()
        .filter(|r| r["activation"] == "sin")
        .map(|r| num(r, "beta0_quadrature"))
        .collect();
    assert!(sin[0] < sin[1] && sin[0] - 1.0 < 1e-3);
    let traces = rows(file(&files, "gain_iso_gap.csv"));
    assert_eq!(traces.len(), 4 * 51);
}

#[test]
fn ablation_trends() {
    let files = suite_ablations(&SuiteOptions::smoke()).unwrap();
    let all = rows(&files[0]);
    let trace = |act: &str, c: &str, p: &str| -> Vec<(f64, f64)> {
        all.iter()
            .filter(|r| r["activation"] == act && r["centering"] == c && r["projection"] == p)
            .map(|r| (num(r, "mean_iso_gap"), num(r, "se_iso_gap")))
            .collect()
    };
    // tanh has c₀ = 0, so layer centering changes little
    let none = trace("tanh", "none", "sphere_ln");
    let centered = trace("tanh", "layer_mean", "sphere_ln");
    let overlapping = none
        .iter()
        .zip(&centered)
        .filter(|(a, b)| bands_overlap(**a, **b))
        .count();
    assert!(
        overlapping as f64 >= 0.8 * none.len() as f64,
        "{overlapping}/{}",
        none.len()
    );
    // relu without centering stalls above a floor
    let stalled = trace("relu", "none", "sphere_ln");
    assert!(stalled[40..].iter().all(|(g, _)| *g > 1.0));
    // the mean-field pipeline decays at first; finite-width norm drift
    // takes over later
    let mf = trace("relu", "mean_field_c0", "mean_field_scale");
    assert!(mf[10].0 < 0.5 * mf[0].0, "{:?}", &mf[..11]);
}

#[test]
fn suites_are_reproducible_and_plot() {
    let opts = SuiteOptions {
        depth: 10,
        ..SuiteOptions::smoke()
    };
    let a = run_suite(SuiteName::IsoGapActivation, &opts).unwrap();
    let b = run_suite(SuiteName::IsoGapActivation, &opts).unwrap();
    assert_eq!(a, b);
    let mut spec = PlotSpec::new(vec!["mean_iso_gap".into(), "bound".into()]);
    spec.logy = true;
    let out = emit_svg(&a[0].content, &spec).unwrap();
    assert_eq!(out.svg.matches("<polyline").count(), 6);
    assert!(!out.svg.contains("NaN") && !out.svg.contains("inf"));
}

#[test]
fn invalid_grid_fails_before_running() {
    let opts = SuiteOptions {
        width: 1,
        ..SuiteOptions::smoke()
    };
    for name in SuiteName::ALL {
        assert!(run_suite(name, &opts).is_err(), "{name}");
    }
}
