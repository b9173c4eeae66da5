//! `qtm`: plot data for the Carnot-point thermometer.
//!
//! Every command writes a CSV with a leading `#` manifest block, a gnuplot
//! script next to it and a JSON run manifest. Exit codes: 0 on success, 2 for
//! configuration or usage errors, 3 when a solver fails.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtm_core::Config;

#[derive(Debug, Parser)]
#[command(name = "qtm", version, about = "Carnot-point thermometry: current sweeps, precision curves, QFI and protocol runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Charge current and energy flows against T_h at fixed T_c.
    SweepCurrent(SweepArgs),
    /// Predicted protocol error ΔT_c against T_c.
    PrecisionCurve(RangeArgs),
    /// Single-shot error of a current measurement against the quantum bound.
    QfiCompare(RangeArgs),
    /// Seeded Monte Carlo runs of the bisection protocol.
    Protocol(ProtocolArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Fock,
    Gaussian,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseChoice {
    ZeroOffset,
    Independent,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key = value configuration file; built-in defaults when absent
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Run every grid point on the calling thread
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "both")]
    pub model: ModelChoice,
    /// Cold temperature; defaults to the configured tc_mk
    #[arg(long)]
    pub tc_mk: Option<f64>,
    #[arg(long, default_value_t = 40.0)]
    pub th_min_mk: f64,
    #[arg(long, default_value_t = 200.0)]
    pub th_max_mk: f64,
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RangeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub model: ModelChoice,
    #[arg(long, default_value_t = 10.0)]
    pub tc_min_mk: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tc_max_mk: f64,
    #[arg(long, default_value_t = 46)]
    pub grid: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub model: ModelChoice,
    /// True cold temperature; defaults to the configured tc_mk
    #[arg(long)]
    pub tc_mk: Option<f64>,
    /// Lower end of the T_h bracket
    #[arg(long, default_value_t = 40.0)]
    pub th_min_mk: f64,
    /// Upper end of the T_h bracket
    #[arg(long, default_value_t = 250.0)]
    pub th_max_mk: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub runs: u64,
    #[arg(long, value_enum, default_value = "zero-offset")]
    pub noise_model: NoiseChoice,
    /// Current readings averaged per bisection point
    #[arg(long, default_value_t = 1)]
    pub readings: u32,
    /// Bisection tolerance on T_h
    #[arg(long, default_value_t = 0.01)]
    pub tolerance_mk: f64,
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Classifies a library error, prefixing where it happened.
    pub fn at(context: impl std::fmt::Display, e: qtm_core::Error) -> Self {
        use qtm_core::Error as E;
        match e {
            E::Config(m) | E::Domain(m) => CliError::Config(format!("{context}: {m}")),
            E::Numerical(m) => CliError::Numerical(format!("{context}: {m}")),
            other => CliError::Numerical(format!("{context}: {other}")),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

pub fn load_config(common: &Common) -> Result<Config, CliError> {
    let cfg = match &common.config {
        Some(path) => Config::load(path).map_err(|e| CliError::at("reading config", e))?,
        None => Config::default(),
    };
    cfg.validate().map_err(|e| CliError::at("config", e))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SweepCurrent(a) => commands::sweep_current(a),
        Command::PrecisionCurve(a) => commands::precision_curve(a),
        Command::QfiCompare(a) => commands::qfi_compare(a),
        Command::Protocol(a) => commands::protocol(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtm: {e}");
            ExitCode::from(e.code())
        }
    }
}
