//! `shapefilter` command-line tool.
//!
//! Exit codes:
//!
//! | code | meaning                                                  |
//! |------|----------------------------------------------------------|
//! | 0    | success                                                  |
//! | 1    | unexpected failure                                       |
//! | 2    | unreadable or empty input (`EmptyInput`, bad files)      |
//! | 3    | invalid configuration or arguments                       |
//! | 4    | dimension or frame-count mismatch                        |
//! | 5    | disconnected neighbour graph (embed)                     |
//! | 6    | numerical failure on valid input (degenerate shapes etc) |
//!
//! Failures print one JSON object on stderr: `{"error": "<Kind>", ...}`.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shapefilter::Scheme;

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "shapefilter", version, about = "Temporal SRV shape filtering of mask sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter a directory of PGM masks.
    Filter(FilterArgs),
    /// Compare two PGM directories (Dice, MSE).
    Eval(EvalArgs),
    /// Isomap projection of a contours CSV.
    Embed(EmbedArgs),
    /// Write a seeded synthetic dataset.
    Synth(SynthArgs),
    /// Compute frame weights only.
    Weights(WeightsArgs),
}

#[derive(Debug, Args, Clone)]
pub struct FilterParams {
    #[arg(long, value_parser = parse_scheme, default_value = "bi3")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 0.6)]
    pub rho: f64,
    #[arg(long = "rho-pre", default_value_t = 0.05)]
    pub rho_pre: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Bi3 amplitude.
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    /// Piecewise inlier weight.
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// Outlier flags CSV (`t,flag`), required by the piecewise scheme.
    #[arg(long)]
    pub flags: Option<PathBuf>,
    /// Seconds between frames.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Input frame directory.
    #[arg(long = "in", required_unless_present = "manifest")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Replay the configuration recorded in a previous run's manifest.
    #[arg(long, conflicts_with = "input")]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub params: FilterParams,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth frame directory.
    #[arg(long)]
    pub truth: PathBuf,
    /// Frame directory under test.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write the metrics JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Contours CSV (`t,i,x,y`).
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Neighbourhood size; defaults to min(6, frames - 1).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub frames: usize,
    #[arg(long, default_value_t = 2)]
    pub outliers: usize,
    /// Radial boundary noise, pixels.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output weights CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub params: FilterParams,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: shapefilter::Error| e.to_string())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SHAPEFILTER_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("SHAPEFILTER_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::internal(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Filter(a) => commands::filter(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Embed(a) => commands::embed(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Weights(a) => commands::weights(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::config(e.to_string().trim().to_string());
            f.report();
            return ExitCode::from(f.code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code)
        }
    }
}
