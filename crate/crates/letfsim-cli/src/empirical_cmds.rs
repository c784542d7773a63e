//! Data-driven commands: `regime-table` and `rolling`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use letfsim::empirical::{
    load_price_csv, regime_table, rolling_ce, to_returns, RegimeWindow, RollingTarget, TableMode,
};
use letfsim::estimation::{rolling_ar1, RollingSeries};
use letfsim::series::ReturnSeries;

use crate::output::{load_config, parse_betas, write_output};
use crate::CliError;

#[derive(Args)]
pub struct RegimeTableArgs {
    /// Benchmark price CSV (date,adj_close)
    #[arg(long)]
    benchmark: Option<PathBuf>,
    /// Realized LETF price CSV as beta=path, repeatable (e.g. 2=sso.csv)
    #[arg(long = "letf", value_name = "BETA=PATH")]
    letfs: Vec<String>,
    /// JSON list of {label, start, end} windows; built-in market phases
    /// when omitted
    #[arg(long)]
    regimes: Option<PathBuf>,
    /// synthetic or realized
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegimeTableConfig {
    benchmark: Option<PathBuf>,
    letfs: Option<Vec<String>>,
    regimes: Option<PathBuf>,
    mode: Option<String>,
    betas: Option<String>,
    out: Option<PathBuf>,
}

fn load_windows(path: &Option<PathBuf>) -> Result<Vec<RegimeWindow>, CliError> {
    match path {
        None => Ok(RegimeWindow::defaults()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            let windows: Vec<RegimeWindow> = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            if windows.is_empty() {
                return Err(CliError::Config("regime window list is empty".into()));
            }
            Ok(windows)
        }
    }
}

fn load_letf_map(specs: &[String]) -> Result<BTreeMap<i32, ReturnSeries>, CliError> {
    let mut map = BTreeMap::new();
    for spec in specs {
        let (beta_raw, path) = spec.split_once('=').ok_or_else(|| {
            CliError::Config(format!("--letf expects BETA=PATH, got '{spec}'"))
        })?;
        let beta: i32 = beta_raw
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("--letf beta '{beta_raw}': {e}")))?;
        let returns = to_returns(&load_price_csv(path.trim())?)?;
        map.insert(beta, returns);
    }
    Ok(map)
}

pub fn run_regime_table(args: RegimeTableArgs) -> Result<(), CliError> {
    let cfg: RegimeTableConfig = load_config(&args.config)?;
    let benchmark = args
        .benchmark
        .or(cfg.benchmark)
        .ok_or_else(|| CliError::Config("--benchmark is required".into()))?;
    let mode = args.mode.or(cfg.mode).unwrap_or_else(|| "synthetic".into());
    let betas = parse_betas(&args.betas.or(cfg.betas).unwrap_or_else(|| "-3,-2,-1,2,3".into()))?;
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));
    let letf_specs = if args.letfs.is_empty() {
        cfg.letfs.unwrap_or_default()
    } else {
        args.letfs
    };

    let windows = load_windows(&args.regimes.or(cfg.regimes))?;
    let returns = to_returns(&load_price_csv(&benchmark)?)?;

    let table = match mode.as_str() {
        "synthetic" => regime_table(&returns, &windows, &betas, &TableMode::Synthetic)?,
        "realized" => {
            let map = load_letf_map(&letf_specs)?;
            if map.is_empty() {
                return Err(CliError::Config(
                    "realized mode needs at least one --letf BETA=PATH".into(),
                ));
            }
            regime_table(&returns, &windows, &betas, &TableMode::Realized(&map))?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown mode '{other}'; expected synthetic or realized"
            )))
        }
    };
    for label in &table.clipped {
        eprintln!("note: window '{label}' clipped to the benchmark's date range");
    }
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    write_output(&out, "regime_table.csv", &buf)?;
    Ok(())
}

#[derive(Args)]
pub struct RollingArgs {
    /// Benchmark price CSV (date,adj_close)
    #[arg(long)]
    benchmark: Option<PathBuf>,
    /// Synthetic leverage ratio for the rolling CE
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<i32>,
    /// Realized LETF price CSV (alternative to --beta)
    #[arg(long)]
    letf: Option<PathBuf>,
    /// Comma-separated window lengths in trading days
    #[arg(long)]
    windows: Option<String>,
    /// Also emit rolling AR(1) slopes of the benchmark
    #[arg(long)]
    ar1: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RollingConfig {
    benchmark: Option<PathBuf>,
    beta: Option<i32>,
    letf: Option<PathBuf>,
    windows: Option<String>,
    ar1: Option<bool>,
    out: Option<PathBuf>,
}

fn write_rolling_csv(out: &PathBuf, name: &str, series: &RollingSeries) -> Result<(), CliError> {
    let mut csv = String::from("date,value\n");
    match &series.dates {
        Some(dates) => {
            for (d, v) in dates.iter().zip(&series.values) {
                writeln!(csv, "{d},{v}").expect("string write");
            }
        }
        None => {
            for (i, v) in series.values.iter().enumerate() {
                writeln!(csv, "{i},{v}").expect("string write");
            }
        }
    }
    write_output(out, name, csv.as_bytes())?;
    Ok(())
}

pub fn run_rolling(args: RollingArgs) -> Result<(), CliError> {
    let cfg: RollingConfig = load_config(&args.config)?;
    let benchmark = args
        .benchmark
        .or(cfg.benchmark)
        .ok_or_else(|| CliError::Config("--benchmark is required".into()))?;
    let beta = args.beta.or(cfg.beta);
    let letf = args.letf.or(cfg.letf);
    let windows_raw = args.windows.or(cfg.windows).unwrap_or_else(|| "60,90,120".into());
    let emit_ar1 = args.ar1 || cfg.ar1.unwrap_or(false);
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));

    let windows: Vec<usize> = windows_raw
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad window list '{windows_raw}': {e}")))?;
    if windows.iter().any(|&w| w == 0) {
        return Err(CliError::Config("windows must be >= 1".into()));
    }

    let bench_returns = to_returns(&load_price_csv(&benchmark)?)?;
    let letf_returns = match (&beta, &letf) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--beta and --letf are mutually exclusive".into()))
        }
        (None, None) => return Err(CliError::Config("one of --beta or --letf is required".into())),
        (Some(_), None) => None,
        (None, Some(path)) => Some(to_returns(&load_price_csv(path)?)?),
    };

    for &w in &windows {
        let target = match (&beta, &letf_returns) {
            (Some(b), None) => RollingTarget::Beta(*b),
            (None, Some(series)) => RollingTarget::Series(series),
            _ => unreachable!(),
        };
        let ce = rolling_ce(&bench_returns, &target, w)?;
        write_rolling_csv(&out, &format!("rolling_ce_w{w}.csv"), &ce)?;
        if emit_ar1 {
            let phi = rolling_ar1(&bench_returns, w)?;
            write_rolling_csv(&out, &format!("rolling_ar1_w{w}.csv"), &phi)?;
        }
    }
    Ok(())
}
