//! `ratchetlab`: command-line front end for the lattice ratchet computations.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ratchetlab::{RatchetParams, Rational};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ratchetlab::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(ratchetlab::Error::InvariantViolation(_)) => 3,
            CliError::Core(ratchetlab::Error::StationaryFailed { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ratchetlab", version, about = "Exact lattice walks for flashing Brownian ratchets and Parrondo games")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "RATCHETLAB_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Flat `key = value` run config; see docs/FORMATS.md.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the potential, drift and invariant density.
    #[command(args_override_self = true)]
    Potential(commands::PotentialArgs),
    /// Game B probabilities, invariant measure and Parrondo profits.
    #[command(args_override_self = true)]
    Parrondo(commands::ParrondoArgs),
    /// Evolve a lattice distribution under the flashing schedule.
    #[command(args_override_self = true)]
    Evolve(commands::EvolveArgs),
    /// Stationary cycle chain, its law and the mean displacement per cycle.
    #[command(args_override_self = true)]
    Stationary(commands::StationaryArgs),
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Euler–Maruyama simulation of the SDEs.
    #[command(args_override_self = true)]
    Mc(commands::McArgs),
}

#[derive(Subcommand, Debug)]
enum SweepCommand {
    /// Peak statistics over drift strengths.
    #[command(args_override_self = true)]
    Lambda(commands::LambdaSweepArgs),
    /// Peak statistics over refinements.
    #[command(args_override_self = true)]
    N(commands::NSweepArgs),
    /// Stationary drift rate over a grid of phase durations.
    #[command(args_override_self = true)]
    Tau(commands::TauSweepArgs),
}

/// Shape, drift strength and phase durations shared by the model commands.
#[derive(Args, Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelArgs {
    /// Peak fraction α = l/L, e.g. `1/4`.
    #[arg(long)]
    pub alpha: Option<Rational>,
    /// Peak position l (alternative to --alpha).
    #[arg(long)]
    pub l: Option<u32>,
    /// Period L.
    #[arg(long = "L", default_value_t = 4)]
    #[serde(rename = "L")]
    pub period: u32,
    /// Drift strength λ, with γ = λ(1 − α)/2 [default: 5].
    #[arg(long, conflicts_with = "gamma")]
    pub lambda: Option<f64>,
    /// Drift strength γ directly.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Potential-off duration τ₁.
    #[arg(long, default_value = "12/5")]
    pub tau1: Rational,
    /// Potential-on duration τ₂.
    #[arg(long, default_value = "12/5")]
    pub tau2: Rational,
}

impl ModelArgs {
    fn peak(&self) -> Result<u32, CliError> {
        match (self.l, self.alpha) {
            (Some(l), Some(alpha)) if alpha.checked_mul_int(self.period as i64).and_then(|x| x.to_integer()) != Some(l as i64) => {
                Err(CliError::Usage(format!("--l {l} disagrees with --alpha {alpha} and --L {}", self.period)))
            }
            (Some(l), _) => Ok(l),
            (None, Some(alpha)) => alpha
                .checked_mul_int(self.period as i64)
                .and_then(|x| x.to_integer())
                .filter(|&l| l > 0)
                .map(|l| l as u32)
                .ok_or_else(|| CliError::Usage(format!("alpha·L = {alpha}·{} is not a positive integer", self.period))),
            (None, None) => Ok(1),
        }
    }

    pub fn params(&self) -> Result<RatchetParams, CliError> {
        let l = self.peak()?;
        let p = match (self.lambda, self.gamma) {
            (_, Some(gamma)) => RatchetParams::with_gamma(l, self.period, gamma, self.tau1, self.tau2)?,
            (lambda, None) => RatchetParams::new(l, self.period, lambda.unwrap_or(5.0), self.tau1, self.tau2)?,
        };
        Ok(p)
    }

    /// Same model with `l` and `λ` spelled out, for the emitted config.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let p = self.params()?;
        let lambda = if self.gamma.is_some() { None } else { Some(p.lambda()) };
        Ok(Self { alpha: None, l: Some(p.l()), lambda, ..self.clone() })
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let argv = config::expand_argv(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if cli.config.is_some() {
        return Err(CliError::Usage("--config must come before the subcommand".into()));
    }
    init_threads(cli.threads)?;
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Potential(a) => commands::potential(&a, out),
        Command::Parrondo(a) => commands::parrondo(&a, out),
        Command::Evolve(a) => commands::evolve(&a, out),
        Command::Stationary(a) => commands::stationary(&a, out),
        Command::Sweep(SweepCommand::Lambda(a)) => commands::sweep_lambda(&a, out),
        Command::Sweep(SweepCommand::N(a)) => commands::sweep_n(&a, out),
        Command::Sweep(SweepCommand::Tau(a)) => commands::sweep_tau(&a, out),
        Command::Mc(a) => commands::mc(&a, out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
