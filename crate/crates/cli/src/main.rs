//! `cclb`: generate matrices, compute measures, verify relations, run sweeps
//! and simulate protocols.
//!
//! Exit codes: 0 success, 1 asserted relation violated, 2 usage or parse
//! error, 3 size or budget cap exceeded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cclb", version, about = "Communication-complexity lower-bound toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated matrix.
    Gen(GenArgs),
    /// Compute measures of one matrix.
    Measure(MeasureArgs),
    /// Check every registered relation.
    Verify(VerifyArgs),
    /// Tabulate measures along a generator family.
    Sweep(SweepArgs),
    /// Run a randomized protocol.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct CapArgs {
    /// Error parameter for the bounded-error bounds.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    eps: f64,
    /// Raise the size and effort caps.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Family name (eq, hd, gt, sip3d, pgint, hadamard) or `family:param`.
    family: String,
    #[arg(long)]
    n: Option<usize>,
    /// Hamming distance for `hd`.
    #[arg(long)]
    k: Option<usize>,
    /// Grid parameter for `sip3d`.
    #[arg(long)]
    c: Option<usize>,
    /// Plane order for `pgint`.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Matrix file or `family:param`.
    source: String,
    /// Comma-separated measure ids; all catalogued measures when omitted.
    #[arg(long, value_delimiter = ',')]
    measures: Vec<String>,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Matrix file or `family:param`.
    source: Option<String>,
    /// Verify this many seeded random matrices instead of one source.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 4)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random matrices use the +-1 convention.
    #[arg(long)]
    sign: bool,
    /// Worker threads for random suites.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    caps: CapArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    family: String,
    /// Inclusive range `a..b` or a single value.
    #[arg(long)]
    n: String,
    /// Comma-separated measure ids.
    #[arg(long, value_delimiter = ',', required = true)]
    measure: Vec<String>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print a least-squares fit of log(value) against log(n).
    #[arg(long)]
    fit: bool,
    #[command(flatten)]
    caps: CapArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// eq1bit, hd1, ip-oblivious or eq-full.
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    n: usize,
    /// Hamming distance of the simulated pair (hd1).
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Error parameter of each equality test.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long, default_value_t = 37)]
    threshold: usize,
    /// Full protocol runs for the hd1 decision rate.
    #[arg(long, default_value_t = 1000)]
    decide_trials: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Measure(a) => commands::measure(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
