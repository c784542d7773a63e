//! `letfsim` — compounding-effect analysis of leveraged ETFs from the
//! command line: Monte Carlo sweeps, closed-form references, AR-GARCH
//! fitting, regime tables and rolling diagnostics, all emitted as CSV/JSON.

mod empirical_cmds;
mod fitting;
mod output;
mod regime_sim_cmd;
mod sweeps;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "letfsim",
    version,
    about = "Leveraged-ETF compounding-effect simulation and estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo + closed-form expected CE over a mean/leverage grid
    SweepLeverage(sweeps::SweepLeverageArgs),
    /// Monte Carlo + AR(1) closed-form expected CE over an autocorrelation grid
    SweepPhi(sweeps::SweepPhiArgs),
    /// Expected CE at daily/weekly/monthly rebalancing
    SweepFrequency(sweeps::SweepFrequencyArgs),
    /// Fit AR(1) or AR(1)-GARCH(1,1) to a price/return CSV
    Fit(fitting::FitArgs),
    /// Simulated CE table under fitted AR(1)-GARCH(1,1) parameters
    GarchCe(fitting::GarchCeArgs),
    /// Per-regime-window CE table (synthetic or realized LETFs)
    RegimeTable(empirical_cmds::RegimeTableArgs),
    /// Rolling-window CE and AR(1) series
    Rolling(empirical_cmds::RollingArgs),
    /// Regime-switching Monte Carlo vs occupation-mixture approximation
    RegimeSim(regime_sim_cmd::RegimeSimArgs),
}

/// Errors mapped onto process exit codes: config 2, data 3, numerical 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<letfsim::Error> for CliError {
    fn from(e: letfsim::Error) -> Self {
        use letfsim::Error as E;
        match &e {
            E::InvalidParameter(_) | E::InsufficientData { .. } => CliError::Config(e.to_string()),
            E::Data { .. }
            | E::Csv(_)
            | E::Io(_)
            | E::EmptyIntersection
            | E::EmptyWindow { .. }
            | E::EmptySeries => CliError::Data(e.to_string()),
            E::Wipeout { .. }
            | E::LetfWipeout { .. }
            | E::DegenerateBenchmark { .. }
            | E::CollapseRegime { .. }
            | E::ZeroMeanOnly { .. }
            | E::ConstantSeries
            | E::NumericalOverflow { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SweepLeverage(args) => sweeps::run_sweep_leverage(args),
        Command::SweepPhi(args) => sweeps::run_sweep_phi(args),
        Command::SweepFrequency(args) => sweeps::run_sweep_frequency(args),
        Command::Fit(args) => fitting::run_fit(args),
        Command::GarchCe(args) => fitting::run_garch_ce(args),
        Command::RegimeTable(args) => empirical_cmds::run_regime_table(args),
        Command::Rolling(args) => empirical_cmds::run_rolling(args),
        Command::RegimeSim(args) => regime_sim_cmd::run_regime_sim(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
