//! Model-fitting commands: `fit` and `garch-ce`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use letfsim::empirical::{load_price_csv, to_returns};
use letfsim::estimation::{estimate_ar1, fit_ar1_garch, FitOptions};
use letfsim::models::{ArGarchParams, ModelParams, Scale};
use letfsim::series::{LeverageSpec, ReturnSeries};
use letfsim::sim::{monte_carlo_ce, simulate_ar1_garch, McConfig};

use crate::output::{load_config, parse_betas, require_seed, write_output};
use crate::CliError;

#[derive(Args)]
pub struct FitArgs {
    /// Input CSV: prices (date,adj_close) or returns (date,value)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input kind: prices or returns
    #[arg(long)]
    kind: Option<String>,
    /// Model: ar1-garch or ar1
    #[arg(long)]
    model: Option<String>,
    /// Unit scale the GARCH fit runs in: percent or decimal
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    input: Option<PathBuf>,
    kind: Option<String>,
    model: Option<String>,
    scale: Option<String>,
    out: Option<PathBuf>,
}

fn parse_scale(raw: &str) -> Result<Scale, CliError> {
    match raw {
        "percent" => Ok(Scale::Percent),
        "decimal" => Ok(Scale::Decimal),
        other => Err(CliError::Config(format!(
            "unknown scale '{other}'; expected percent or decimal"
        ))),
    }
}

/// Reads the input CSV into a decimal dated return series.
fn load_returns(path: &PathBuf, kind: &str) -> Result<ReturnSeries, CliError> {
    match kind {
        "prices" => Ok(to_returns(&load_price_csv(path)?)?),
        "returns" => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let mut values = Vec::new();
            let mut dates = Vec::new();
            for (i, line) in text.lines().enumerate() {
                if i == 0 {
                    let header = line.trim().to_lowercase();
                    if header != "date,value" {
                        return Err(CliError::Data(format!(
                            "{}: expected header 'date,value', got '{header}'",
                            path.display()
                        )));
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                let (d, v) = line.split_once(',').ok_or_else(|| {
                    CliError::Data(format!("{} row {}: expected 'date,value'", path.display(), i + 1))
                })?;
                dates.push(d.trim().parse().map_err(|e| {
                    CliError::Data(format!("{} row {}: bad date: {e}", path.display(), i + 1))
                })?);
                values.push(v.trim().parse().map_err(|e| {
                    CliError::Data(format!("{} row {}: bad value: {e}", path.display(), i + 1))
                })?);
            }
            Ok(ReturnSeries::with_dates(values, dates)?)
        }
        other => Err(CliError::Config(format!(
            "unknown input kind '{other}'; expected prices or returns"
        ))),
    }
}

pub fn run_fit(args: FitArgs) -> Result<(), CliError> {
    let cfg: FitConfig = load_config(&args.config)?;
    let input = args
        .input
        .or(cfg.input)
        .ok_or_else(|| CliError::Config("--input is required".into()))?;
    let kind = args.kind.or(cfg.kind).unwrap_or_else(|| "prices".into());
    let model = args.model.or(cfg.model).unwrap_or_else(|| "ar1-garch".into());
    let scale = parse_scale(&args.scale.or(cfg.scale).unwrap_or_else(|| "percent".into()))?;
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));

    let returns = load_returns(&input, &kind)?;
    let json = match model.as_str() {
        "ar1-garch" => {
            let fit = fit_ar1_garch(
                &returns,
                &FitOptions {
                    scale,
                    ..FitOptions::default()
                },
            )?;
            println!(
                "ar1-garch fit ({} obs, {}): mu={:.6} phi={:.6} omega={:.6} alpha={:.6} beta_g={:.6} loglik={:.3} converged={}",
                fit.n_obs,
                fit.scale,
                fit.params.mu,
                fit.params.phi,
                fit.params.omega,
                fit.params.alpha,
                fit.params.beta_g,
                fit.loglik,
                fit.converged
            );
            serde_json::to_string_pretty(&fit).expect("fit result serializes")
        }
        "ar1" => {
            let fit = estimate_ar1(&returns)?;
            println!(
                "ar1 fit ({} obs): phi={:.6} (se {:.6}) intercept={:.6e} sigma_eps={:.6e}",
                fit.n_obs, fit.phi, fit.se_phi, fit.intercept, fit.sigma_eps
            );
            serde_json::to_string_pretty(&fit).expect("fit result serializes")
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown model '{other}'; expected ar1-garch or ar1"
            )))
        }
    };
    write_output(&out, "fit.json", json.as_bytes())?;
    Ok(())
}

#[derive(Args)]
pub struct GarchCeArgs {
    /// JSON file holding AR(1)-GARCH(1,1) parameters
    /// {"mu":..,"phi":..,"omega":..,"alpha":..,"beta_g":..}
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Rebalancing period in days
    #[arg(long)]
    block: Option<usize>,
    /// Unit scale of the parameters: percent (divide simulated returns by
    /// 100 before compounding) or decimal
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also dump the simulated benchmark paths (one CSV row per path)
    #[arg(long)]
    dump_paths: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GarchCeConfig {
    params: Option<PathBuf>,
    betas: Option<String>,
    paths: Option<usize>,
    steps: Option<usize>,
    block: Option<usize>,
    scale: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GarchCeSummary<'a> {
    params: &'a ArGarchParams,
    scale: Scale,
    seed: u64,
    n_paths: usize,
    n_steps: usize,
    block: usize,
    rows: Vec<GarchCeRow>,
}

#[derive(Serialize)]
struct GarchCeRow {
    beta: i32,
    mean_ce: f64,
    std_ce: f64,
    stderr: f64,
    wipeouts: usize,
}

pub fn run_garch_ce(args: GarchCeArgs) -> Result<(), CliError> {
    let cfg: GarchCeConfig = load_config(&args.config)?;
    let params_path = args
        .params
        .or(cfg.params)
        .ok_or_else(|| CliError::Config("--params is required".into()))?;
    let seed = require_seed(args.seed, cfg.seed)?;
    let betas = parse_betas(&args.betas.or(cfg.betas).unwrap_or_else(|| "-2,-1,2,3".into()))?;
    let paths = args.paths.or(cfg.paths).unwrap_or(10_000);
    let steps = args.steps.or(cfg.steps).unwrap_or(252);
    let block = args.block.or(cfg.block).unwrap_or(1);
    let scale = parse_scale(&args.scale.or(cfg.scale).unwrap_or_else(|| "percent".into()))?;
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));

    let text = fs::read_to_string(&params_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", params_path.display())))?;
    let raw: ArGarchParams = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", params_path.display())))?;
    raw.validate()?;

    // the simulator's convention is percent; decimal-scale parameters are
    // mapped to their exact percent equivalents (mu*100, omega*10000)
    let percent_params = match scale {
        Scale::Percent => raw,
        Scale::Decimal => ArGarchParams::new(
            raw.mu * 100.0,
            raw.phi,
            raw.omega * 10_000.0,
            raw.alpha,
            raw.beta_g,
        )?,
    };
    let model = ModelParams::ArGarch(percent_params);

    let mut csv = String::from("beta,mean_ce,std_ce,stderr,wipeouts,n_paths,n_steps,block,scale\n");
    let mut rows = Vec::new();
    for &beta in &betas {
        let spec = LeverageSpec::synthetic(beta).map_err(CliError::from)?;
        let rep = monte_carlo_ce(&model, &spec, &McConfig::new(steps, paths, seed).with_block(block))?;
        writeln!(
            csv,
            "{beta},{},{},{},{},{paths},{steps},{block},{scale}",
            rep.mean, rep.std_dev, rep.stderr, rep.wipeouts
        )
        .expect("string write");
        println!(
            "beta={beta:+}: mean CE {:+.4}  std {:.4}  stderr {:.5}  wipeouts {}",
            rep.mean, rep.std_dev, rep.stderr, rep.wipeouts
        );
        rows.push(GarchCeRow {
            beta,
            mean_ce: rep.mean,
            std_ce: rep.std_dev,
            stderr: rep.stderr,
            wipeouts: rep.wipeouts,
        });
    }
    write_output(&out, "garch_ce.csv", csv.as_bytes())?;
    let summary = GarchCeSummary {
        params: &raw,
        scale,
        seed,
        n_paths: paths,
        n_steps: steps,
        block,
        rows,
    };
    write_output(
        &out,
        "garch_ce.json",
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes")
            .as_bytes(),
    )?;

    if args.dump_paths {
        let batch = simulate_ar1_garch(&percent_params, steps, paths, seed)?;
        let mut buf = Vec::new();
        batch.write_csv(&mut buf)?;
        write_output(&out, "garch_paths.csv", &buf)?;
        write_output(
            &out,
            "garch_paths.json",
            serde_json::to_string_pretty(&batch.summary())
                .expect("batch summary serializes")
                .as_bytes(),
        )?;
    }
    Ok(())
}
