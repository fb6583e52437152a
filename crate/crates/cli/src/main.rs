//! Command-line front end for the collision-model simulator.
//!
//! Verbs: `evolve` (one trajectory), `sweep` (a transmission × phase grid),
//! `tomo` (simulated tomography with Monte-Carlo error bars), `nm` (backflow
//! measure), and a hidden `verify-oracle` cross-check. Output is CSV or JSON
//! with frozen headers and 12-significant-digit numbers so runs are
//! byte-reproducible.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;
mod output;

use strobosim_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "strobosim",
    version,
    about = "Stroboscopic collision-model simulator for photonic entanglement backflow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one trajectory and write per-step observables.
    Evolve(TrajectoryArgs),
    /// Evolve every point of a transmission × phase grid.
    Sweep(TrajectoryArgs),
    /// Reconstruct each step of a trajectory from simulated coincidence
    /// counts and report Monte-Carlo error bars.
    Tomo(TomoArgs),
    /// Print the backflow measure of a trajectory with its increments.
    Nm(PhysicsArgs),
    #[command(hide = true)]
    /// Cross-validate the channel route against the explicit-mode route.
    VerifyOracle(VerifyArgs),
}

/// Step parameters shared by every verb. `--T` and `--theta` accept a single
/// value for `evolve`/`tomo`/`nm` and list (`1,0.25`) or range
/// (`start:stop:count`) grids for `sweep`; angles accept `pi`, `pi/2`, `pi/4`
/// tokens with an optional leading minus.
#[derive(Args)]
struct PhysicsArgs {
    /// Input state: bell+, bell-, or werner:<fidelity>.
    #[arg(long)]
    input: Option<String>,
    /// Beam-splitter reflectivity in [0, 1].
    #[arg(long)]
    r: Option<String>,
    /// Filter transmissivity in [0, 1].
    #[arg(long = "T")]
    transmission: Option<String>,
    /// Phase on the system arm, radians.
    #[arg(long)]
    theta: Option<String>,
    /// Parasitic transmission of the system arm in [0, 1].
    #[arg(long = "eta-s")]
    eta_s: Option<String>,
    /// Parasitic transmission of the environment arm in [0, 1].
    #[arg(long = "eta-e")]
    eta_e: Option<String>,
    /// Number of collisions (≥ 1).
    #[arg(long)]
    steps: Option<String>,
    /// JSON config file; keys mirror flag names, flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted. Relative paths are resolved against
    /// $STROBOSIM_OUT_DIR when that variable is set.
    #[arg(long)]
    output: Option<String>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TomoArgs {
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    out: OutputArgs,
    /// Coincidence shots per projector setting.
    #[arg(long)]
    shots: Option<String>,
    /// Monte-Carlo repetitions (≥ 2).
    #[arg(long)]
    mc: Option<String>,
    /// Base seed for the count sampler.
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of random configurations to compare.
    #[arg(long)]
    samples: Option<String>,
    /// Collisions per comparison (explicit route caps at 4).
    #[arg(long)]
    steps: Option<String>,
    /// Seed for the configuration sampler.
    #[arg(long)]
    seed: Option<String>,
}

/// Anything that can stop a run, mapped to an exit code at the top.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, or parameter ranges → exit 1.
    Usage(String),
    /// Numerical invariant violation inside the simulation → exit 2.
    Numerical(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidInput(_) | CoreError::CapacityExceeded(_) => {
                CliError::Usage(err.to_string())
            }
            CoreError::EmptySector { .. } | CoreError::NumericalInvariant(_) => {
                CliError::Numerical(err.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {err}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Evolve(args) => commands::evolve(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Tomo(args) => commands::tomo(args),
        Command::Nm(args) => commands::nm(args),
        Command::VerifyOracle(args) => commands::verify_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
