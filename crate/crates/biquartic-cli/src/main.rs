//! Command-line front end: each subcommand runs one pipeline from a JSON
//! configuration file and writes CSV/JSON (and SVG) outputs.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use biquartic::analysis::{fit_growth, GrowthLaw};
use biquartic::pipeline::{run, Mode, RunConfig};
use biquartic::series::{SeriesMeta, TimeSeries};

#[derive(Parser)]
#[command(
    name = "biquartic",
    version,
    about = "Chaos diagnostics for two coupled quartic oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (CSV, JSON, SVG).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the ensemble job pool (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Subtract the t = 0 value from every series.
    #[arg(long)]
    subtract_t0: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble-averaged classical OTOC over an energy shell.
    ClassicalOtoc(RunArgs),
    /// Ensemble-averaged quantum OTOC over an energy shell.
    QuantumOtoc(RunArgs),
    /// Classical phase-space harmonics moment.
    ClassicalM2(RunArgs),
    /// Quantum harmonics moment via number variances.
    QuantumM2(RunArgs),
    /// Sector-resolved level-spacing statistics and the distance parameter.
    Spectrum(RunArgs),
    /// Multiple-quantum-coherence echo protocol.
    Mqc(RunArgs),
    /// Crossover scan over a list of quartic coefficients.
    Scan(RunArgs),
    /// Fit a growth law to a `t,value` CSV series.
    Fit {
        /// CSV with a `t,value` table (as written by the other commands).
        #[arg(long)]
        input: PathBuf,
        /// Growth law: `exponential` or `power`.
        #[arg(long)]
        law: String,
        /// Fit window as two times.
        #[arg(long, num_args = 2)]
        window: Vec<f64>,
        /// Values are already natural logs.
        #[arg(long)]
        log_space: bool,
    },
}

fn setup_threads(n: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run_mode(mode: Mode, args: &RunArgs) -> Result<()> {
    setup_threads(args.threads)?;
    let mut cfg = RunConfig::from_path(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if cfg.mode != mode {
        bail!(
            "config declares mode {:?}, but the {:?} subcommand was invoked",
            cfg.mode,
            mode
        );
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.subtract_t0 {
        cfg.subtract_t0 = true;
    }
    let summary = run(&cfg, Some(&args.out))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn run_fit(input: &PathBuf, law: &str, window: &[f64], log_space: bool) -> Result<()> {
    let law = match law {
        "exponential" | "exp" => GrowthLaw::Exponential,
        "power" | "pow" => GrowthLaw::Power,
        other => bail!("unknown law `{other}`; use `exponential` or `power`"),
    };
    if window.len() != 2 {
        bail!("--window needs exactly two times");
    }
    let text = std::fs::read_to_string(input)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with('t') || line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(t), Some(v)) = (cols.next(), cols.next()) else {
            bail!("malformed CSV line: {line}");
        };
        times.push(t.trim().parse::<f64>()?);
        values.push(v.trim().parse::<f64>()?);
    }
    if !log_space {
        for v in &mut values {
            if *v <= 0.0 {
                bail!("non-positive value {v}; pass --log-space for log data or clean the series");
            }
            *v = v.ln();
        }
    }
    let mut meta = SeriesMeta::labeled("cli_fit");
    meta.log_space = true;
    let series = TimeSeries::new(times, values, meta)?;
    let fit = fit_growth(&series, (window[0], window[1]), law)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::ClassicalOtoc(a) => run_mode(Mode::ClassicalOtoc, a),
        Command::QuantumOtoc(a) => run_mode(Mode::QuantumOtoc, a),
        Command::ClassicalM2(a) => run_mode(Mode::ClassicalM2, a),
        Command::QuantumM2(a) => run_mode(Mode::QuantumM2, a),
        Command::Spectrum(a) => run_mode(Mode::Spectrum, a),
        Command::Mqc(a) => run_mode(Mode::Mqc, a),
        Command::Scan(a) => run_mode(Mode::Scan, a),
        Command::Fit { input, law, window, log_space } => run_fit(input, law, window, *log_space),
    }
}
