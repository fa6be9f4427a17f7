//! Command-line driver: verify the building blocks, run the iteration, inspect
//! parameters and summarize reports.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use cilab_core::Error;
use clap::{Args, Parser, Subcommand};

/// Exit codes; a stable contract.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const GEOMETRY: u8 = 2;
    pub const BALL: u8 = 3;
    pub const CAPACITY: u8 = 4;
    pub const NO_SEED: u8 = 5;
    pub const USAGE: u8 = 64;
}

#[derive(Parser, Debug)]
#[command(name = "cilab", version, about = "Convex-integration laboratory for 3D Euler on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the frequency families, the geometric lemma and the Beltrami identities
    VerifyGeometry(GeometryArgs),
    /// Check the inverse divergence and its scaling probes
    VerifyOperators(OperatorArgs),
    /// Build the initial triple, take Q steps and write the stage reports
    Run(RunArgs),
    /// Parameter schedule, inequality ledger and bad-set geometry
    Params(ParamsArgs),
    /// Summarize a report directory
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct GeometryArgs {
    /// machine-readable output
    #[arg(long)]
    pub json: bool,
    /// load the families from a JSON file instead of building them
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// write the families to this JSON file
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// random matrices for the reconstruction check
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// grid for the Beltrami identities
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct OperatorArgs {
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// random fields for the identity checks
    #[arg(long, default_value_t = 50)]
    pub fields: usize,
    /// Hölder exponent of the probes
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [4u32, 8, 16])]
    pub lambdas: Vec<u32>,
    #[arg(long, default_value_t = 2)]
    pub seed: u64,
    /// write schauder.csv and commutator.csv here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0.05)]
    pub eps0: f64,
    #[arg(long, default_value_t = 4)]
    pub lambda0: u64,
    /// number of inductive steps Q
    #[arg(long, default_value_t = 1)]
    pub stages: usize,
    /// grid points per axis
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long, default_value = "run")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub substeps: usize,
    /// report samples per stage
    #[arg(long, default_value_t = 33)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub mu_scale: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub time_step: f64,
    /// also write v, p and R̊ at t = 0
    #[arg(long)]
    pub snapshots: bool,
    /// print the final summary as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ParamsArgs {
    #[arg(long, default_value_t = 0.05)]
    pub eps0: f64,
    /// seed frequency; may be given in floating-point form, e.g. 1e12
    #[arg(long, conflicts_with = "search")]
    pub lambda0: Option<f64>,
    /// search for the smallest passing λ₀
    #[arg(long)]
    pub search: bool,
    #[arg(long, default_value_t = 63)]
    pub search_max_log2: u32,
    #[arg(long, default_value_t = 8)]
    pub stages: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// cover exponent; defaults to (1 + d_min)/2
    #[arg(long)]
    pub d: Option<f64>,
    /// write params.json and params.csv here
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub dir: PathBuf,
    #[arg(long)]
    pub json: bool,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::FamilyInvariant(_)
        | Error::OutOfBall { .. }
        | Error::NegativeCoefficient { .. }
        | Error::RadiusTooSmall(_)
        | Error::NotConjugateSymmetric(_) => exit::GEOMETRY,
        Error::BallViolation { .. } => exit::BALL,
        Error::GridCapacity(_) | Error::SupportOverflow(_) => exit::CAPACITY,
        Error::NoSeed(_) | Error::SeedTooSmall { .. } => exit::NO_SEED,
        Error::InvalidArgument(_) | Error::InvalidGrid(_) => exit::USAGE,
        _ => exit::FAILURE,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CILAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CILAB_THREADS = {v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(exit::USAGE);
    }
    let result = match cli.command {
        Command::VerifyGeometry(a) => commands::verify_geometry(&a),
        Command::VerifyOperators(a) => commands::verify_operators(&a),
        Command::Run(a) => commands::run(&a),
        Command::Params(a) => commands::params(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
