//! Shared output and config-file plumbing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::CliError;

/// Reads an optional JSON config file into the per-command partial-settings
/// struct. Flags win over config values on conflict; the caller merges.
pub fn load_config<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))
        }
    }
}

/// Writes `contents` under the output directory, creating it if needed, and
/// echoes the path.
pub fn write_output(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// Seed must come from a flag or the config file; stochastic runs never
/// default to wall-clock entropy.
pub fn require_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, CliError> {
    flag.or(config).ok_or_else(|| {
        CliError::Config("--seed is required for stochastic commands (no wall-clock default)".into())
    })
}

/// Uniform grid of `steps` points over `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 || !(hi > lo) {
        return Err(CliError::Config(format!(
            "grid needs at least 2 steps and hi > lo, got [{lo}, {hi}] with {steps}"
        )));
    }
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// Comma-separated leverage list.
pub fn parse_betas(raw: &str) -> Result<Vec<i32>, CliError> {
    let betas: Result<Vec<i32>, _> = raw
        .split(',')
        .map(|t| t.trim().parse::<i32>())
        .collect();
    let betas = betas.map_err(|e| CliError::Config(format!("bad beta list '{raw}': {e}")))?;
    if betas.is_empty() || betas.contains(&0) {
        return Err(CliError::Config("beta list must be nonempty and nonzero".into()));
    }
    Ok(betas)
}
