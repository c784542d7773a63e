//! Monte Carlo path generation and batched compounding-effect estimation.
//!
//! Path `i` of any simulation depends only on `(root seed, i)` through the
//! substream scheme in [`crate::rng`], so batches are reproducible
//! regardless of generation order.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::closed_form::{expected_ce_ar1_approx, expected_ce_iid};
use crate::error::{Error, Result};
use crate::models::{AR1Params, ArGarchParams, IIDParams, ModelParams};
use crate::regime::fill_regime_grid_returns;
use crate::rng::{path_rng, Channel};
use crate::series::{ce_from_slice, LeverageSpec};
use crate::stats::{summarize, Summary};

/// Steps discarded before an AR(1)-GARCH path starts emitting, removing
/// initialization transients.
pub const GARCH_BURN_IN: usize = 250;

/// A batch of simulated return paths plus the metadata that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    n_steps: usize,
    values: Vec<f64>, // row-major, n_paths * n_steps
    seed: u64,
    model_tag: String,
}

impl PathBatch {
    pub fn n_paths(&self) -> usize {
        if self.n_steps == 0 {
            0
        } else {
            self.values.len() / self.n_steps
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_steps..(i + 1) * self.n_steps]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_steps)
    }

    /// One comma-separated row of returns per path.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for path in self.paths() {
            let mut first = true;
            for &x in path {
                if !first {
                    write!(w, ",")?;
                }
                write!(w, "{x}")?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> PathBatchSummary {
        let s = summarize(&self.values);
        PathBatchSummary {
            model_tag: self.model_tag.clone(),
            seed: self.seed,
            n_paths: self.n_paths(),
            n_steps: self.n_steps,
            cell_mean: s.mean,
            cell_std: s.std_dev,
        }
    }
}

/// Binary-free description of a [`PathBatch`].
#[derive(Debug, Clone, Serialize)]
pub struct PathBatchSummary {
    pub model_tag: String,
    pub seed: u64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub cell_mean: f64,
    pub cell_std: f64,
}

fn fill_iid(p: &IIDParams, buf: &mut [f64], rng: &mut impl Rng) {
    for x in buf {
        let z: f64 = rng.sample(StandardNormal);
        *x = p.mu + p.sigma * z;
    }
}

fn fill_ar1(p: &AR1Params, buf: &mut [f64], rng: &mut impl Rng) {
    // stationary start; x_0 itself is not emitted
    let z0: f64 = rng.sample(StandardNormal);
    let mut x = p.stationary_mean() + p.stationary_var().sqrt() * z0;
    for slot in buf {
        let z: f64 = rng.sample(StandardNormal);
        x = p.intercept + p.phi * x + p.sigma_eps * z;
        *slot = x;
    }
}

fn fill_ar_garch(p: &ArGarchParams, buf: &mut [f64], rng: &mut impl Rng) {
    let mut sig2 = p.unconditional_var();
    let mut eps_prev = 0.0f64;
    let mut x = p.stationary_mean();
    let n = buf.len();
    for t in 0..GARCH_BURN_IN + n {
        sig2 = p.omega + p.alpha * eps_prev * eps_prev + p.beta_g * sig2;
        debug_assert!(sig2 >= p.omega);
        let z: f64 = rng.sample(StandardNormal);
        let eps = sig2.sqrt() * z;
        x = p.mu + p.phi * x + eps;
        eps_prev = eps;
        if t >= GARCH_BURN_IN {
            buf[t - GARCH_BURN_IN] = x;
        }
    }
}

/// Fills `buf` with path `i` of `model` under `seed`. The single entry point
/// both batch materialization and streaming estimators go through.
fn fill_path(model: &ModelParams, buf: &mut [f64], seed: u64, path: u64) -> Result<()> {
    match model {
        ModelParams::Iid(p) => {
            fill_iid(p, buf, &mut path_rng(seed, path, Channel::Main));
        }
        ModelParams::Ar1(p) => {
            fill_ar1(p, buf, &mut path_rng(seed, path, Channel::Main));
        }
        ModelParams::ArGarch(p) => {
            fill_ar_garch(p, buf, &mut path_rng(seed, path, Channel::Main));
        }
        ModelParams::Regime(m) => {
            fill_regime_grid_returns(m, buf, seed, path)?;
        }
    }
    Ok(())
}

fn simulate_batch(model: &ModelParams, n_steps: usize, n_paths: usize, seed: u64) -> Result<PathBatch> {
    model.validate()?;
    if n_steps < 1 || n_paths < 1 {
        return Err(Error::InvalidParameter(
            "n_steps and n_paths must be >= 1".into(),
        ));
    }
    let mut values = vec![0.0f64; n_steps * n_paths];
    for i in 0..n_paths {
        fill_path(model, &mut values[i * n_steps..(i + 1) * n_steps], seed, i as u64)?;
    }
    Ok(PathBatch {
        n_steps,
        values,
        seed,
        model_tag: model.tag().to_string(),
    })
}

/// Independent Gaussian daily returns, one row per path.
pub fn simulate_iid(params: &IIDParams, n_steps: usize, n_paths: usize, seed: u64) -> Result<PathBatch> {
    simulate_batch(&ModelParams::Iid(*params), n_steps, n_paths, seed)
}

/// Stationary AR(1) paths; the first emitted value is `x_1`.
pub fn simulate_ar1(params: &AR1Params, n_steps: usize, n_paths: usize, seed: u64) -> Result<PathBatch> {
    simulate_batch(&ModelParams::Ar1(*params), n_steps, n_paths, seed)
}

/// AR(1)-GARCH(1,1) paths in the parameter unit scale (conventionally
/// percent), after a 250-step burn-in from the stationary initialization
/// `sigma_0^2 = omega/(1-alpha-beta_g)`, `eps_0 = 0`, `x_0 = mu/(1-phi)`.
pub fn simulate_ar1_garch(
    params: &ArGarchParams,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    simulate_batch(&ModelParams::ArGarch(*params), n_steps, n_paths, seed)
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Rebalancing period in steps; returns are compounded into blocks of
    /// this length (trailing partial block dropped) and the daily fee scales
    /// to `block * fee_daily`.
    pub block: usize,
    /// Clamp tracking-error draws at +/- 6 tracking sigmas.
    pub clamp_tracking: bool,
}

impl McConfig {
    pub fn new(n_steps: usize, n_paths: usize, seed: u64) -> Self {
        Self {
            n_steps,
            n_paths,
            seed,
            block: 1,
            clamp_tracking: false,
        }
    }

    pub fn with_block(mut self, block: usize) -> Self {
        self.block = block;
        self
    }
}

/// Per-path compounding effects of a simulated model with summary
/// statistics, the closed-form reference where one is exact for the
/// configuration, and the wipeout-exclusion count.
#[derive(Debug, Clone)]
pub struct CEReport {
    /// CE of every surviving path.
    pub ces: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    pub stderr: f64,
    /// Lemma-style expected value: exact for i.i.d. models at zero fee
    /// (block-compounded mean for block > 1), second-order for zero-mean
    /// AR(1) at zero fee and block 1, absent otherwise.
    pub reference: Option<f64>,
    /// Paths excluded because a benchmark or leveraged return hit -100%.
    /// Nonzero counts distort the surviving-path statistics (survivorship).
    pub wipeouts: usize,
    pub n_steps: usize,
    pub block: usize,
    pub seed: u64,
    pub model_tag: String,
    /// True when the model generates percent-unit returns that were divided
    /// by 100 before compounding.
    pub percent_scale_input: bool,
}

impl CEReport {
    pub fn summary(&self) -> Summary {
        Summary {
            n: self.ces.len(),
            mean: self.mean,
            std_dev: self.std_dev,
            stderr: self.stderr,
        }
    }
}

fn closed_form_reference(model: &ModelParams, spec: &LeverageSpec, n_steps: usize, block: usize) -> Option<f64> {
    if spec.fee_daily != 0.0 {
        return None;
    }
    match model {
        ModelParams::Iid(p) => {
            let n_blocks = (n_steps / block) as u32;
            if n_blocks == 0 {
                return None;
            }
            let mu_block = (1.0 + p.mu).powi(block as i32) - 1.0;
            expected_ce_iid(mu_block, spec.beta, n_blocks).ok()
        }
        ModelParams::Ar1(p) if p.intercept == 0.0 && block == 1 && spec.beta != 1 => {
            expected_ce_ar1_approx(p, spec.beta, n_steps as u32).ok()
        }
        _ => None,
    }
}

fn compound_blocks(src: &[f64], block: usize, dst: &mut Vec<f64>) {
    dst.clear();
    for chunk in src.chunks_exact(block) {
        let mut acc = 1.0f64;
        for &x in chunk {
            acc *= 1.0 + x;
        }
        dst.push(acc - 1.0);
    }
}

/// Simulates `model`, applies the leverage map per rebalancing period and
/// reports per-path compounding effects.
///
/// Percent-scale models (AR-GARCH) are divided by 100 before compounding;
/// the report flags this. Paths that wipe out are excluded and counted.
pub fn monte_carlo_ce(model: &ModelParams, spec: &LeverageSpec, cfg: &McConfig) -> Result<CEReport> {
    model.validate()?;
    if cfg.block < 1 {
        return Err(Error::InvalidParameter("block must be >= 1".into()));
    }
    if cfg.n_steps < cfg.block {
        return Err(Error::InsufficientData {
            required: cfg.block,
            actual: cfg.n_steps,
        });
    }
    let percent = model.percent_scale();
    let block_spec = LeverageSpec::new(
        spec.beta,
        spec.fee_daily * cfg.block as f64,
        spec.tracking_sigma,
    )?;
    let n_blocks = cfg.n_steps / cfg.block;

    let mut buf = vec![0.0f64; cfg.n_steps];
    let mut blocked = Vec::with_capacity(n_blocks);
    let mut noise = Vec::with_capacity(n_blocks);
    let mut ces = Vec::with_capacity(cfg.n_paths);
    let mut wipeouts = 0usize;

    for i in 0..cfg.n_paths {
        fill_path(model, &mut buf, cfg.seed, i as u64)?;
        if percent {
            for x in &mut buf {
                *x /= 100.0;
            }
        }
        let returns: &[f64] = if cfg.block == 1 {
            &buf
        } else {
            compound_blocks(&buf, cfg.block, &mut blocked);
            &blocked
        };
        let tracking = if spec.tracking_sigma > 0.0 {
            let mut rng = path_rng(cfg.seed, i as u64, Channel::Tracking);
            noise.clear();
            for _ in 0..returns.len() {
                let z: f64 = rng.sample(StandardNormal);
                let e = spec.tracking_sigma * z;
                noise.push(if cfg.clamp_tracking {
                    e.clamp(-6.0 * spec.tracking_sigma, 6.0 * spec.tracking_sigma)
                } else {
                    e
                });
            }
            Some(noise.as_slice())
        } else {
            None
        };
        match ce_from_slice(returns, &block_spec, tracking) {
            Ok(ce) => ces.push(ce.ce),
            Err(Error::LetfWipeout { .. }) | Err(Error::Wipeout { .. }) => wipeouts += 1,
            Err(e) => return Err(e),
        }
    }

    let s = summarize(&ces);
    Ok(CEReport {
        ces,
        mean: s.mean,
        std_dev: s.std_dev,
        stderr: s.stderr,
        reference: closed_form_reference(model, spec, cfg.n_steps, cfg.block),
        wipeouts,
        n_steps: cfg.n_steps,
        block: cfg.block,
        seed: cfg.seed,
        model_tag: model.tag().to_string(),
        percent_scale_input: percent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{compensated_sum, lag1_autocorr, sample_mean};

    #[test]
    fn same_seed_is_bit_identical() {
        let p = IIDParams::new(0.0005, 0.01).unwrap();
        let a = simulate_iid(&p, 64, 16, 9).unwrap();
        let b = simulate_iid(&p, 64, 16, 9).unwrap();
        assert_eq!(a, b);

        let g = ArGarchParams::new(0.05, -0.05, 0.04, 0.17, 0.80).unwrap();
        let a = simulate_ar1_garch(&g, 32, 4, 5).unwrap();
        let b = simulate_ar1_garch(&g, 32, 4, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn paths_depend_only_on_seed_and_index() {
        let p = IIDParams::new(0.0, 0.01).unwrap();
        let small = simulate_iid(&p, 32, 4, 123).unwrap();
        let large = simulate_iid(&p, 32, 9, 123).unwrap();
        for i in 0..4 {
            assert_eq!(small.path(i), large.path(i), "path {i} changed with batch size");
        }
    }

    #[test]
    fn degenerate_noise_pins_cells_to_mu() {
        let p = IIDParams::new(0.01, 1e-9).unwrap();
        let batch = simulate_iid(&p, 100, 10, 3).unwrap();
        for path in batch.paths() {
            for &x in path {
                assert!((x - 0.01).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn iid_cell_mean_within_clt_band() {
        let p = IIDParams::new(0.0, 0.01).unwrap();
        let batch = simulate_iid(&p, 252, 4_000, 7).unwrap();
        let m = batch.summary().cell_mean;
        let bound = 4.0 * 0.01 / (252.0f64 * 4_000.0).sqrt();
        assert!(m.abs() < bound, "cell mean {m} outside {bound}");
    }

    #[test]
    fn ar1_pooled_lag1_autocorr_tracks_phi() {
        let p = AR1Params::zero_mean(0.5, 0.01).unwrap();
        let batch = simulate_ar1(&p, 252, 2_000, 11).unwrap();
        // pooled per-path estimates
        let est = sample_mean(
            &batch
                .paths()
                .map(lag1_autocorr)
                .collect::<Vec<_>>(),
        );
        // per-path estimator has O(1/n) downward bias, ~ -(1+3*phi)/n here
        assert!(
            (est - 0.5).abs() < 0.02,
            "pooled lag-1 autocorr {est} too far from 0.5"
        );
    }

    #[test]
    fn ar1_zero_mean_sample_mean_within_band() {
        let p = AR1Params::zero_mean(-0.3, 0.01).unwrap();
        let batch = simulate_ar1(&p, 252, 2_000, 13).unwrap();
        let m = batch.summary().cell_mean;
        // stationary std with correlation-inflated stderr bound
        let sd = p.stationary_var().sqrt();
        let n_eff = (252.0f64 * 2_000.0) * (1.0 - (-0.3f64)) / (1.0 + 0.3);
        assert!(m.abs() < 4.0 * sd / n_eff.sqrt(), "mean {m}");
    }

    #[test]
    fn ar1_pooled_variance_near_stationary_value() {
        for &phi in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
            let p = AR1Params::zero_mean(phi, 0.01).unwrap();
            let batch = simulate_ar1(&p, 252, 2_000, 17).unwrap();
            let cells: Vec<f64> = batch.paths().flatten().copied().collect();
            let var = crate::stats::sample_var(&cells);
            let rel = (var - p.stationary_var()).abs() / p.stationary_var();
            assert!(rel < 0.05, "phi={phi}: pooled var off by {rel}");
        }
    }

    #[test]
    fn garch_collapses_to_ar1_when_arch_terms_vanish() {
        let g = ArGarchParams::new(0.0, 0.3, 1e-4, 0.0, 0.0).unwrap();
        let a = AR1Params::zero_mean(0.3, 0.01).unwrap();
        let bg = simulate_ar1_garch(&g, 252, 1_000, 19).unwrap();
        let ba = simulate_ar1(&a, 252, 1_000, 23).unwrap();
        let cg: Vec<f64> = bg.paths().flatten().copied().collect();
        let ca: Vec<f64> = ba.paths().flatten().copied().collect();
        let (mg, ma) = (sample_mean(&cg), sample_mean(&ca));
        let (vg, va) = (crate::stats::sample_var(&cg), crate::stats::sample_var(&ca));
        assert!((mg - ma).abs() < 4e-4, "means {mg} vs {ma}");
        assert!((vg / va - 1.0).abs() < 0.05, "vars {vg} vs {va}");
    }

    #[test]
    fn garch_pooled_std_matches_stationary_value() {
        // Table-1-scale parameters, percent units
        let g = ArGarchParams::new(0.0918, -0.0490, 0.0357, 0.1747, 0.7969).unwrap();
        let batch = simulate_ar1_garch(&g, 252, 2_000, 29).unwrap();
        let cells: Vec<f64> = batch.paths().flatten().copied().collect();
        let sd = crate::stats::sample_var(&cells).sqrt();
        let expect = (g.unconditional_var() / (1.0 - g.phi * g.phi)).sqrt();
        assert!(
            (sd / expect - 1.0).abs() < 0.10,
            "pooled std {sd} vs stationary {expect}"
        );
    }

    #[test]
    fn mc_ce_iid_zero_mean_is_centered_on_zero() {
        let model = ModelParams::Iid(IIDParams::new(0.0, 0.01).unwrap());
        let spec = LeverageSpec::synthetic(2).unwrap();
        let rep = monte_carlo_ce(&model, &spec, &McConfig::new(252, 20_000, 31)).unwrap();
        assert_eq!(rep.wipeouts, 0);
        assert_eq!(rep.reference, Some(0.0));
        assert!(rep.mean.abs() < 4.0 * rep.stderr, "mean {} stderr {}", rep.mean, rep.stderr);
    }

    #[test]
    fn mc_ce_ar1_sign_follows_phi() {
        let spec = LeverageSpec::synthetic(2).unwrap();
        for &phi in &[0.5, -0.5] {
            let model = ModelParams::Ar1(AR1Params::zero_mean(phi, 0.01).unwrap());
            let rep = monte_carlo_ce(&model, &spec, &McConfig::new(252, 5_000, 37)).unwrap();
            assert!(
                rep.mean.signum() == phi.signum() && rep.mean.abs() > 4.0 * rep.stderr,
                "phi={phi}: mean {} stderr {}",
                rep.mean,
                rep.stderr
            );
        }
    }

    #[test]
    fn mc_ce_matches_series_route_on_a_path() {
        // streaming estimator and the ce-core series route agree exactly
        let model = ModelParams::Ar1(AR1Params::zero_mean(0.2, 0.01).unwrap());
        let spec = LeverageSpec::new(2, 0.0001, 0.0).unwrap();
        let cfg = McConfig::new(64, 3, 41).with_block(5);
        let rep = monte_carlo_ce(&model, &spec, &cfg).unwrap();

        let batch = simulate_ar1(&AR1Params::zero_mean(0.2, 0.01).unwrap(), 64, 3, 41).unwrap();
        for (i, path) in batch.paths().enumerate() {
            let daily = crate::series::ReturnSeries::new(path.to_vec()).unwrap();
            let blocked = crate::series::aggregate_periods(&daily, 5).unwrap();
            let block_spec = LeverageSpec::new(2, 0.0005, 0.0).unwrap();
            let ce = crate::series::compounding_effect(&blocked, &block_spec, None).unwrap();
            assert!((rep.ces[i] - ce.ce).abs() < 1e-15);
        }
    }

    #[test]
    fn mc_ce_counts_wipeouts() {
        // sigma large enough in decimal units that 3x leverage wipes out often
        let model = ModelParams::Iid(IIDParams::new(0.0, 0.4).unwrap());
        let spec = LeverageSpec::synthetic(3).unwrap();
        let rep = monte_carlo_ce(&model, &spec, &McConfig::new(32, 500, 43)).unwrap();
        assert!(rep.wipeouts > 0, "expected wipeouts at sigma=0.4, beta=3");
        assert_eq!(rep.ces.len() + rep.wipeouts, 500);
    }

    #[test]
    fn mc_ce_block_invariance_for_iid() {
        // same paths, three rebalancing frequencies: paired differences stay
        // inside two joint standard errors for independent returns
        let model = ModelParams::Iid(IIDParams::new(0.10 / 252.0, 0.01).unwrap());
        let spec = LeverageSpec::synthetic(2).unwrap();
        let reports: Vec<CEReport> = [1usize, 5, 21]
            .iter()
            .map(|&b| monte_carlo_ce(&model, &spec, &McConfig::new(210, 20_000, 47).with_block(b)).unwrap())
            .collect();
        for a in 0..3 {
            for b in a + 1..3 {
                let joint = (reports[a].stderr.powi(2) + reports[b].stderr.powi(2)).sqrt();
                assert!(
                    (reports[a].mean - reports[b].mean).abs() < 2.0 * joint,
                    "blocks {a}/{b}: means {} vs {}",
                    reports[a].mean,
                    reports[b].mean
                );
            }
        }
    }

    #[test]
    fn tracking_noise_keeps_mean_within_band_and_respects_clamp() {
        let model = ModelParams::Iid(IIDParams::new(0.0, 0.01).unwrap());
        let spec = LeverageSpec::new(2, 0.0, 0.001).unwrap();
        let cfg = McConfig::new(128, 5_000, 53);
        let plain = monte_carlo_ce(&model, &spec, &cfg).unwrap();
        let clamped = monte_carlo_ce(&model, &spec, &McConfig { clamp_tracking: true, ..cfg }).unwrap();
        assert!(plain.mean.abs() < 4.0 * plain.stderr);
        // clamping at 6 sigma rarely binds; the estimates stay close
        assert!((plain.mean - clamped.mean).abs() < 4.0 * plain.stderr);
    }

    #[test]
    fn path_batch_csv_shape() {
        let p = IIDParams::new(0.0, 0.01).unwrap();
        let batch = simulate_iid(&p, 4, 3, 59).unwrap();
        let mut out = Vec::new();
        batch.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 4);
    }

    #[test]
    fn reference_for_blocked_iid_uses_block_mean() {
        let mu = 0.001;
        let model = ModelParams::Iid(IIDParams::new(mu, 0.01).unwrap());
        let spec = LeverageSpec::synthetic(2).unwrap();
        let rep = monte_carlo_ce(&model, &spec, &McConfig::new(20, 10, 61).with_block(5)).unwrap();
        let mu_b = (1.0f64 + mu).powi(5) - 1.0;
        let expect = expected_ce_iid(mu_b, 2, 4).unwrap();
        assert_eq!(rep.reference, Some(expect));
    }

    #[test]
    fn order_insensitive_reduction() {
        let model = ModelParams::Iid(IIDParams::new(0.0, 0.01).unwrap());
        let spec = LeverageSpec::synthetic(2).unwrap();
        let rep = monte_carlo_ce(&model, &spec, &McConfig::new(64, 2_000, 67)).unwrap();
        let mut rev = rep.ces.clone();
        rev.reverse();
        let fwd_mean = compensated_sum(rep.ces.iter().copied()) / rep.ces.len() as f64;
        let rev_mean = compensated_sum(rev.iter().copied()) / rev.len() as f64;
        assert!((fwd_mean - rev_mean).abs() < 1e-10);
    }
}
