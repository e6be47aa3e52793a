//! `starplanet` command-line front end.

mod exit;
mod lane_emden;
mod manifest;
mod minimize;
mod sweep;
mod verify;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "starplanet", version, about = "Rotating star-planet equilibria by constrained energy minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate non-rotating Lane–Emden bodies.
    LaneEmden(LaneEmdenArgs),
    /// Solve one star-planet configuration.
    Minimize(MinimizeArgs),
    /// Run the built-in verification checks.
    Verify(VerifyArgs),
    /// Solve a grid of (J, m, gamma) points and fit the rate laws.
    Sweep(SweepArgs),
}

#[derive(clap::Args)]
pub struct LaneEmdenArgs {
    /// Adiabatic exponent.
    #[arg(long)]
    pub gamma: f64,
    /// Pressure constant K.
    #[arg(long, default_value_t = 1.0)]
    pub kpress: f64,
    /// Body mass; repeat for several bodies.
    #[arg(long = "mass", default_values_t = [1.0])]
    pub masses: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct MinimizeArgs {
    /// Solver configuration (TOML with flat keys).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Fast,
    Full,
}

#[derive(clap::Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Fast)]
    pub suite: Suite,
    /// Flip the sign of the rotational energy to prove the checks catch it.
    #[arg(long, hide = true)]
    pub inject_rotation_sign_fault: bool,
}

#[derive(clap::Args)]
pub struct SweepArgs {
    /// Sweep configuration: lists for `J`, `m`, `gamma` plus solver keys.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Concurrent solves.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::LaneEmden(a) => lane_emden::run(&a),
        Command::Minimize(a) => minimize::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Sweep(a) => sweep::run(&a),
    };
    ExitCode::from(code)
}
