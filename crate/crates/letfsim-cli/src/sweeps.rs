//! Monte Carlo sweep commands: leverage grid, autocorrelation grid,
//! rebalancing frequency.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use letfsim::closed_form::expected_ce_ar1_approx;
use letfsim::models::{AR1Params, IIDParams, ModelParams};
use letfsim::series::LeverageSpec;
use letfsim::sim::{monte_carlo_ce, McConfig};

use crate::output::{grid, load_config, parse_betas, require_seed, write_output};
use crate::CliError;

const TRADING_DAYS: f64 = 252.0;

#[derive(Args)]
pub struct SweepLeverageArgs {
    /// Root seed for the deterministic path substreams
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated paths per grid point
    #[arg(long)]
    paths: Option<usize>,
    /// Trading days per path
    #[arg(long)]
    steps: Option<usize>,
    /// Daily volatility (decimal)
    #[arg(long)]
    sigma: Option<f64>,
    /// Annualized mean grid: low end
    #[arg(long, allow_hyphen_values = true)]
    mu_min: Option<f64>,
    /// Annualized mean grid: high end
    #[arg(long, allow_hyphen_values = true)]
    mu_max: Option<f64>,
    /// Annualized mean grid: number of points
    #[arg(long)]
    mu_steps: Option<usize>,
    /// Comma-separated leverage ratios
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags win on conflict
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepLeverageConfig {
    seed: Option<u64>,
    paths: Option<usize>,
    steps: Option<usize>,
    sigma: Option<f64>,
    mu_min: Option<f64>,
    mu_max: Option<f64>,
    mu_steps: Option<usize>,
    betas: Option<String>,
    out: Option<PathBuf>,
}

pub fn run_sweep_leverage(args: SweepLeverageArgs) -> Result<(), CliError> {
    let cfg: SweepLeverageConfig = load_config(&args.config)?;
    let seed = require_seed(args.seed, cfg.seed)?;
    let paths = args.paths.or(cfg.paths).unwrap_or(100_000);
    let steps = args.steps.or(cfg.steps).unwrap_or(252);
    let sigma = args.sigma.or(cfg.sigma).unwrap_or(0.01);
    let mu_min = args.mu_min.or(cfg.mu_min).unwrap_or(-0.20);
    let mu_max = args.mu_max.or(cfg.mu_max).unwrap_or(0.20);
    let mu_steps = args.mu_steps.or(cfg.mu_steps).unwrap_or(41);
    let betas = parse_betas(&args.betas.or(cfg.betas).unwrap_or_else(|| "-2,-1,2,3".into()))?;
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));

    let mut csv = String::from("mu_annual,mu_daily,beta,mc_mean,mc_stderr,mc_std,closed_form,wipeouts,n_paths\n");
    for annual in grid(mu_min, mu_max, mu_steps)? {
        let mu_daily = annual / TRADING_DAYS;
        let model = ModelParams::Iid(IIDParams::new(mu_daily, sigma).map_err(CliError::from)?);
        for &beta in &betas {
            let spec = LeverageSpec::synthetic(beta).map_err(CliError::from)?;
            let rep = monte_carlo_ce(&model, &spec, &McConfig::new(steps, paths, seed))?;
            let closed = rep.reference.map_or(String::new(), |v| v.to_string());
            writeln!(
                csv,
                "{annual},{mu_daily},{beta},{},{},{},{closed},{},{}",
                rep.mean, rep.stderr, rep.std_dev, rep.wipeouts, paths
            )
            .expect("string write");
        }
    }
    write_output(&out, "sweep_leverage.csv", csv.as_bytes())?;
    Ok(())
}

#[derive(Args)]
pub struct SweepPhiArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// AR(1) innovation standard deviation (decimal)
    #[arg(long)]
    sigma_eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi_max: Option<f64>,
    #[arg(long)]
    phi_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepPhiConfig {
    seed: Option<u64>,
    paths: Option<usize>,
    steps: Option<usize>,
    sigma_eps: Option<f64>,
    phi_min: Option<f64>,
    phi_max: Option<f64>,
    phi_steps: Option<usize>,
    betas: Option<String>,
    out: Option<PathBuf>,
}

pub fn run_sweep_phi(args: SweepPhiArgs) -> Result<(), CliError> {
    let cfg: SweepPhiConfig = load_config(&args.config)?;
    let seed = require_seed(args.seed, cfg.seed)?;
    let paths = args.paths.or(cfg.paths).unwrap_or(10_000);
    let steps = args.steps.or(cfg.steps).unwrap_or(252);
    let sigma_eps = args.sigma_eps.or(cfg.sigma_eps).unwrap_or(0.01);
    let phi_min = args.phi_min.or(cfg.phi_min).unwrap_or(-0.9);
    let phi_max = args.phi_max.or(cfg.phi_max).unwrap_or(0.9);
    let phi_steps = args.phi_steps.or(cfg.phi_steps).unwrap_or(37);
    let betas = parse_betas(&args.betas.or(cfg.betas).unwrap_or_else(|| "-2,-1,2,3".into()))?;
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));

    let mut csv = String::from("phi,beta,mc_mean,mc_stderr,mc_std,ar1_approx,wipeouts,n_paths\n");
    for phi in grid(phi_min, phi_max, phi_steps)? {
        let params = AR1Params::zero_mean(phi, sigma_eps).map_err(CliError::from)?;
        let model = ModelParams::Ar1(params);
        for &beta in &betas {
            let spec = LeverageSpec::synthetic(beta).map_err(CliError::from)?;
            let rep = monte_carlo_ce(&model, &spec, &McConfig::new(steps, paths, seed))?;
            let approx = if beta == 1 {
                0.0
            } else {
                expected_ce_ar1_approx(&params, beta, steps as u32)?
            };
            writeln!(
                csv,
                "{phi},{beta},{},{},{},{approx},{},{}",
                rep.mean, rep.stderr, rep.std_dev, rep.wipeouts, paths
            )
            .expect("string write");
        }
    }
    write_output(&out, "sweep_phi.csv", csv.as_bytes())?;
    Ok(())
}

#[derive(Args)]
pub struct SweepFrequencyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Return dynamics: iid or ar1
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Daily volatility (iid) or innovation std (ar1), decimal
    #[arg(long)]
    sigma: Option<f64>,
    /// Leverage ratio
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<i32>,
    /// Comma-separated rebalancing periods in days
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_max: Option<f64>,
    #[arg(long)]
    mu_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    phi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi_max: Option<f64>,
    #[arg(long)]
    phi_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFrequencyConfig {
    seed: Option<u64>,
    model: Option<String>,
    paths: Option<usize>,
    steps: Option<usize>,
    sigma: Option<f64>,
    beta: Option<i32>,
    blocks: Option<String>,
    mu_min: Option<f64>,
    mu_max: Option<f64>,
    mu_steps: Option<usize>,
    phi_min: Option<f64>,
    phi_max: Option<f64>,
    phi_steps: Option<usize>,
    out: Option<PathBuf>,
}

pub fn run_sweep_frequency(args: SweepFrequencyArgs) -> Result<(), CliError> {
    let cfg: SweepFrequencyConfig = load_config(&args.config)?;
    let seed = require_seed(args.seed, cfg.seed)?;
    let model_kind = args.model.or(cfg.model).unwrap_or_else(|| "iid".into());
    let paths = args.paths.or(cfg.paths).unwrap_or(10_000);
    let steps = args.steps.or(cfg.steps).unwrap_or(252);
    let sigma = args.sigma.or(cfg.sigma).unwrap_or(0.01);
    let beta = args.beta.or(cfg.beta).unwrap_or(2);
    let blocks_raw = args.blocks.or(cfg.blocks).unwrap_or_else(|| "1,5,21".into());
    let blocks: Vec<usize> = blocks_raw
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad block list '{blocks_raw}': {e}")))?;
    if blocks.iter().any(|&b| b == 0) {
        return Err(CliError::Config("blocks must be >= 1".into()));
    }
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));
    let spec = LeverageSpec::synthetic(beta).map_err(CliError::from)?;

    let mut csv = String::from("model,grid_param,grid_value,block,mc_mean,mc_stderr,mc_std,closed_form,wipeouts,n_paths\n");
    match model_kind.as_str() {
        "iid" => {
            let mu_min = args.mu_min.or(cfg.mu_min).unwrap_or(-0.20);
            let mu_max = args.mu_max.or(cfg.mu_max).unwrap_or(0.20);
            let mu_steps = args.mu_steps.or(cfg.mu_steps).unwrap_or(41);
            for annual in grid(mu_min, mu_max, mu_steps)? {
                let model =
                    ModelParams::Iid(IIDParams::new(annual / TRADING_DAYS, sigma).map_err(CliError::from)?);
                for &block in &blocks {
                    let rep =
                        monte_carlo_ce(&model, &spec, &McConfig::new(steps, paths, seed).with_block(block))?;
                    let closed = rep.reference.map_or(String::new(), |v| v.to_string());
                    writeln!(
                        csv,
                        "iid,mu_annual,{annual},{block},{},{},{},{closed},{},{}",
                        rep.mean, rep.stderr, rep.std_dev, rep.wipeouts, paths
                    )
                    .expect("string write");
                }
            }
        }
        "ar1" => {
            let phi_min = args.phi_min.or(cfg.phi_min).unwrap_or(-0.9);
            let phi_max = args.phi_max.or(cfg.phi_max).unwrap_or(0.9);
            let phi_steps = args.phi_steps.or(cfg.phi_steps).unwrap_or(37);
            for phi in grid(phi_min, phi_max, phi_steps)? {
                let model =
                    ModelParams::Ar1(AR1Params::zero_mean(phi, sigma).map_err(CliError::from)?);
                for &block in &blocks {
                    let rep =
                        monte_carlo_ce(&model, &spec, &McConfig::new(steps, paths, seed).with_block(block))?;
                    let closed = rep.reference.map_or(String::new(), |v| v.to_string());
                    writeln!(
                        csv,
                        "ar1,phi,{phi},{block},{},{},{},{closed},{},{}",
                        rep.mean, rep.stderr, rep.std_dev, rep.wipeouts, paths
                    )
                    .expect("string write");
                }
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown model '{other}'; expected iid or ar1"
            )))
        }
    }
    write_output(&out, "sweep_frequency.csv", csv.as_bytes())?;
    Ok(())
}
