use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use isogauge_core::experiments::{
    configure_threads, emit_svg, run_suite, verify_all, write_files, PlotSpec, SuiteName,
    SuiteOptions,
};
use isogauge_core::hermite::{
    beta0_closed_form, expand, ActivationSpec, DEFAULT_MAX_DEGREE, DEFAULT_QUAD_ORDER,
};
use isogauge_core::linalg::io::{format_number, read_gram};
use isogauge_core::meanfield::{run_meanfield, CorrelationMatrix};
use isogauge_core::sim::{config_input, run_network, traces_to_csv, NetworkConfig};

/// Isometry of Gram matrices in normalized random MLPs.
#[derive(Parser)]
#[command(name = "isogauge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hermite expansion of an activation.
    #[command(subcommand)]
    Hermite(HermiteCmd),
    /// Infinite-width Gram dynamics.
    #[command(subcommand)]
    Meanfield(MeanfieldCmd),
    /// Finite-width simulation from a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a figure suite and writes its CSVs.
    Suite(SuiteArgs),
    /// Randomized checks of every bound; exits 1 on any failure.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Line chart of CSV columns as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated y columns.
        #[arg(long, value_delimiter = ',', required = true)]
        series: Vec<String>,
        #[arg(long)]
        logy: bool,
        #[arg(long, default_value = "layer")]
        x: String,
        /// Comma-separated columns splitting rows into lines; defaults to
        /// the text columns.
        #[arg(long, value_delimiter = ',')]
        group: Option<Vec<String>>,
    },
}

#[derive(Args)]
struct ActivationArgs {
    /// relu, tanh, sigmoid, sin, exp, step, selu, identity, leaky_relu[:s], he<k>
    #[arg(long, default_value = "relu")]
    activation: String,
    #[arg(long, default_value_t = 1.0)]
    gain: f64,
}

impl ActivationArgs {
    fn spec(&self) -> Result<ActivationSpec> {
        Ok(self
            .activation
            .parse::<ActivationSpec>()?
            .with_gain(self.gain)?)
    }
}

#[derive(Subcommand)]
enum HermiteCmd {
    /// Normalized coefficients `c_k = E[σ(X) he_k(X)]`.
    Coeffs {
        #[command(flatten)]
        act: ActivationArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        degree: usize,
        #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
        quad_order: usize,
    },
    /// Non-linearity strength β₀.
    Beta0 {
        #[command(flatten)]
        act: ActivationArgs,
        #[arg(long, default_value_t = DEFAULT_QUAD_ORDER)]
        quad_order: usize,
    },
}

#[derive(Subcommand)]
enum MeanfieldCmd {
    /// Iterates the mean-field map and prints the trace CSV.
    Run {
        #[command(flatten)]
        act: ActivationArgs,
        /// Batch size of the equicorrelated start.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.99)]
        rho0: f64,
        /// Start from this Gram file (plain CSV) instead.
        #[arg(long, conflicts_with_all = ["n", "rho0"])]
        gram: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SuiteArgs {
    /// iso_gap_activation, hermite_basis, gain, ablations
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// d = 200, 3 runs.
    #[arg(long)]
    smoke: bool,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    rho0: Option<f64>,
    /// Defaults to `results/<name>`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn hermite(cmd: HermiteCmd) -> Result<()> {
    match cmd {
        HermiteCmd::Coeffs {
            act,
            degree,
            quad_order,
        } => {
            let spec = act.spec()?;
            let e = expand(&spec, degree, quad_order)?;
            let mut out = String::from("k,coefficient\n");
            for (k, c) in e.coeffs().iter().enumerate() {
                let _ = writeln!(out, "{k},{}", format_number(*c));
            }
            print!("{out}");
            eprintln!("tail_mass = {}", format_number(e.tail_mass()));
        }
        HermiteCmd::Beta0 { act, quad_order } => {
            let spec = act.spec()?;
            let b = expand(&spec, DEFAULT_MAX_DEGREE, quad_order)?.beta0()?;
            let closed = beta0_closed_form(&spec).map_or_else(|| "nan".to_string(), format_number);
            println!("activation,gain,beta0,closed_form");
            println!(
                "{},{},{},{}",
                spec.name(),
                format_number(spec.gain()),
                format_number(b),
                closed
            );
        }
    }
    Ok(())
}

fn meanfield(cmd: MeanfieldCmd) -> Result<()> {
    let MeanfieldCmd::Run {
        act,
        n,
        rho0,
        gram,
        depth,
        out,
    } = cmd;
    let e = expand(&act.spec()?, DEFAULT_MAX_DEGREE, DEFAULT_QUAD_ORDER)?;
    let g0 = match gram {
        Some(p) => CorrelationMatrix::normalize(&read_gram(&p)?)?,
        None => CorrelationMatrix::equicorrelation(n, rho0)?,
    };
    let trace = run_meanfield(&g0, &e, depth)?;
    if trace.stopped_early {
        eprintln!(
            "γ underflowed; trace stops at layer {}",
            trace.records.len() - 1
        );
    }
    write_or_print(out.as_deref(), &trace.to_csv())
}

fn simulate(config: &Path, out: &Path) -> Result<()> {
    let cfg = NetworkConfig::load(config)?;
    let traces = run_network(&cfg, &config_input(&cfg)?)?;
    write_or_print(Some(out), &traces_to_csv(&traces))
}

fn suite(args: SuiteArgs) -> Result<()> {
    let name: SuiteName = args.name.parse()?;
    let base = if args.smoke {
        SuiteOptions::smoke()
    } else {
        SuiteOptions::default()
    };
    let opts = SuiteOptions {
        seed: args.seed,
        width: args.width.unwrap_or(base.width),
        batch: args.batch.unwrap_or(base.batch),
        runs: args.runs.unwrap_or(base.runs),
        depth: args.depth.unwrap_or(base.depth),
        rho0: args.rho0.unwrap_or(base.rho0),
    };
    let files = run_suite(name, &opts)?;
    let dir = args
        .out_dir
        .unwrap_or_else(|| Path::new("results").join(name.as_str()));
    for p in write_files(&dir, &files)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn verify(trials: usize, seed: u64) -> Result<bool> {
    let reports = verify_all(trials, seed)?;
    for r in &reports {
        println!("{r}");
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn plot(input: &Path, out: &Path, spec: PlotSpec) -> Result<()> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let svg = emit_svg(&text, &spec).with_context(|| input.display().to_string())?;
    for w in &svg.warnings {
        eprintln!("warning: {w}");
    }
    write_or_print(Some(out), &svg.svg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Hermite(cmd) => hermite(cmd)?,
        Command::Meanfield(cmd) => meanfield(cmd)?,
        Command::Simulate { config, out } => simulate(&config, &out)?,
        Command::Suite(args) => suite(args)?,
        Command::Verify { trials, seed } => {
            if !verify(trials, seed)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Plot {
            input,
            out,
            series,
            logy,
            x,
            group,
        } => plot(
            &input,
            &out,
            PlotSpec {
                x,
                series,
                group,
                logy,
            },
        )?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
