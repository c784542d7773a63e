//! Continuous-time Markov regime switching: exact chain simulation,
//! occupation measures, and regime-modulated geometric Brownian motion for
//! benchmark and leveraged price paths.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::models::RegimeModel;
use crate::rng::{path_rng, Channel};
use crate::series::LeverageSpec;

/// Default number of grid points per unit of time when a continuous-time
/// path is discretized into a return series.
pub const GRID_PER_UNIT: usize = 252;

/// A realized chain trajectory on `[0, horizon]`: `states[k]` holds on
/// `[times[k], times[k+1])` and the last state holds to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimePath {
    states: Vec<usize>,
    times: Vec<f64>,
    horizon: f64,
}

impl RegimePath {
    pub fn from_parts(states: Vec<usize>, times: Vec<f64>, horizon: f64) -> Result<Self> {
        if states.is_empty() || states.len() != times.len() {
            return Err(Error::InvalidParameter(
                "states and jump times must pair up and be nonempty".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter("first jump time must be 0".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) || *times.last().unwrap() >= horizon {
            return Err(Error::InvalidParameter(
                "jump times must increase strictly and stay below the horizon".into(),
            ));
        }
        Ok(Self {
            states,
            times,
            horizon,
        })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_jumps(&self) -> usize {
        self.states.len() - 1
    }

    /// Constant-regime segments as `(state, t0, t1)`.
    pub fn segments(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.states.len()).map(move |k| {
            let t1 = if k + 1 < self.times.len() {
                self.times[k + 1]
            } else {
                self.horizon
            };
            (self.states[k], self.times[k], t1)
        })
    }
}

/// Exact continuous-time Markov chain sample: holding time in state i is
/// Exponential(-q_ii) and the next state j != i is drawn with probability
/// q_ij / (-q_ii). States with zero exit rate absorb.
pub(crate) fn sample_chain(model: &RegimeModel, horizon: f64, rng: &mut impl Rng) -> RegimePath {
    let mut state = sample_index(&model.initial, rng.random::<f64>());
    let mut states = vec![state];
    let mut times = vec![0.0];
    let mut t = 0.0;
    loop {
        let rate = -model.q[state][state];
        if rate <= 0.0 {
            break; // absorbing
        }
        t += Exp::new(rate).expect("positive rate").sample(rng);
        if t >= horizon {
            break;
        }
        // next state among j != state, weights q[state][j] / rate
        let u: f64 = rng.random::<f64>() * rate;
        let mut acc = 0.0;
        let mut next = state;
        for (j, &w) in model.q[state].iter().enumerate() {
            if j == state {
                continue;
            }
            acc += w;
            if u < acc {
                next = j;
                break;
            }
        }
        if next == state {
            // numerical slack in the row sum; take the last positive-rate state
            next = model.q[state]
                .iter()
                .enumerate()
                .rev()
                .find(|&(j, &w)| j != state && w > 0.0)
                .map(|(j, _)| j)
                .unwrap_or(state);
            if next == state {
                break;
            }
        }
        state = next;
        states.push(state);
        times.push(t);
    }
    RegimePath {
        states,
        times,
        horizon,
    }
}

fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// One exact chain trajectory on `[0, horizon]` under the given seed.
pub fn simulate_markov_chain(model: &RegimeModel, horizon: f64, seed: u64) -> Result<RegimePath> {
    model.clone().validate_and_normalize()?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    Ok(sample_chain(model, horizon, &mut path_rng(seed, 0, Channel::Regime)))
}

/// Fraction of `[0, horizon]` the path spends in each state. Compensated
/// accumulation keeps the components summing to 1 within 1e-12 even for
/// rapidly switching paths.
pub fn occupation_fractions(path: &RegimePath, n_states: usize) -> Vec<f64> {
    let mut acc = vec![0.0f64; n_states];
    let mut comp = vec![0.0f64; n_states];
    for (state, t0, t1) in path.segments() {
        let dt = t1 - t0;
        let t = acc[state] + dt;
        comp[state] += if acc[state].abs() >= dt.abs() {
            (acc[state] - t) + dt
        } else {
            (dt - t) + acc[state]
        };
        acc[state] = t;
    }
    acc.iter()
        .zip(&comp)
        .map(|(&a, &c)| (a + c) / path.horizon())
        .collect()
}

/// Terminal outcome of one paired benchmark/LETF regime-GBM path.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeLetfSample {
    /// Realized occupation fractions of the driving chain.
    pub occupation: Vec<f64>,
    /// `S_T / S_0`.
    pub gross_etf: f64,
    /// `L_T / L_0` under continuous rebalancing at the spec's leverage with
    /// the fee as a continuous drag.
    pub gross_letf: f64,
}

impl RegimeLetfSample {
    /// Continuous-time compounding effect
    /// `(L_T/L_0 - 1) - beta * (S_T/S_0 - 1)`.
    pub fn ce(&self, beta: i32) -> f64 {
        (self.gross_letf - 1.0) - f64::from(beta) * (self.gross_etf - 1.0)
    }
}

/// Simulates paired benchmark and LETF terminal values under regime-GBM.
///
/// Both legs share the regime path and the Brownian increments (exact
/// per-segment sampling); with `beta = 1` and zero fee the legs coincide
/// bitwise. The continuous model has no tracking-error term, so
/// `tracking_sigma` is ignored here.
pub fn simulate_regime_letf(
    model: &RegimeModel,
    spec: &LeverageSpec,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<RegimeLetfSample>> {
    model.clone().validate_and_normalize()?;
    if !(horizon > 0.0) || n_paths < 1 {
        return Err(Error::InvalidParameter(
            "horizon must be positive and n_paths >= 1".into(),
        ));
    }
    let b = f64::from(spec.beta);
    let mut out = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let chain = sample_chain(model, horizon, &mut path_rng(seed, i as u64, Channel::Regime));
        let mut diffusion = path_rng(seed, i as u64, Channel::Diffusion);
        let mut log_s = 0.0f64;
        let mut log_l = 0.0f64;
        for (state, t0, t1) in chain.segments() {
            let dt = t1 - t0;
            if dt <= 0.0 {
                continue;
            }
            let mu = model.mus[state];
            let sig = model.sigmas[state];
            let bsig = b * sig;
            let z: f64 = diffusion.sample(StandardNormal);
            let sqrt_dt = dt.sqrt();
            log_s += (mu - 0.5 * sig * sig) * dt + sig * sqrt_dt * z;
            log_l += (b * mu - 0.5 * bsig * bsig) * dt + bsig * sqrt_dt * z;
        }
        log_l -= spec.fee_daily * horizon;
        out.push(RegimeLetfSample {
            occupation: occupation_fractions(&chain, model.n_regimes()),
            gross_etf: log_s.exp(),
            gross_letf: log_l.exp(),
        });
    }
    Ok(out)
}

/// One discretized regime-GBM benchmark path.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeGbmPath {
    pub regimes: RegimePath,
    /// `S_t / S_0` on the uniform grid, starting at 1.
    pub prices: Vec<f64>,
    /// Simple returns over each grid step.
    pub returns: Vec<f64>,
}

/// Simulates regime-GBM price paths with exact within-segment sampling and
/// emits prices and simple returns on a uniform grid of `grid_per_unit`
/// points per unit time.
pub fn simulate_regime_gbm(
    model: &RegimeModel,
    horizon: f64,
    grid_per_unit: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<RegimeGbmPath>> {
    model.clone().validate_and_normalize()?;
    if !(horizon > 0.0) || n_paths < 1 || grid_per_unit < 1 {
        return Err(Error::InvalidParameter(
            "horizon, grid_per_unit and n_paths must be positive".into(),
        ));
    }
    let n_grid = ((grid_per_unit as f64) * horizon).round().max(1.0) as usize;
    let mut out = Vec::with_capacity(n_paths);
    for i in 0..n_paths {
        let chain = sample_chain(model, horizon, &mut path_rng(seed, i as u64, Channel::Regime));
        let mut diffusion = path_rng(seed, i as u64, Channel::Diffusion);
        let mut returns = vec![0.0f64; n_grid];
        grid_log_increments(model, &chain, horizon, &mut returns, &mut diffusion);
        let mut prices = Vec::with_capacity(n_grid + 1);
        let mut log_price = 0.0f64;
        prices.push(1.0);
        for r in &mut returns {
            log_price += *r;
            prices.push(log_price.exp());
            *r = r.exp() - 1.0;
        }
        out.push(RegimeGbmPath {
            regimes: chain,
            prices,
            returns,
        });
    }
    Ok(out)
}

/// Writes exact log increments over each grid step into `buf`, splitting
/// steps at regime boundaries and drawing one Gaussian per constant-regime
/// piece.
fn grid_log_increments(
    model: &RegimeModel,
    chain: &RegimePath,
    horizon: f64,
    buf: &mut [f64],
    rng: &mut impl Rng,
) {
    let n_grid = buf.len();
    let dt = horizon / n_grid as f64;
    let times = chain.times();
    let states = chain.states();
    let mut seg = 0usize;
    for (k, slot) in buf.iter_mut().enumerate() {
        let t0 = k as f64 * dt;
        let t1 = if k + 1 == n_grid { horizon } else { (k + 1) as f64 * dt };
        let mut inc = 0.0f64;
        let mut lo = t0;
        loop {
            while seg + 1 < times.len() && times[seg + 1] <= lo {
                seg += 1;
            }
            let seg_end = if seg + 1 < times.len() { times[seg + 1] } else { horizon };
            let hi = seg_end.min(t1);
            let piece = hi - lo;
            if piece > 0.0 {
                let mu = model.mus[states[seg]];
                let sig = model.sigmas[states[seg]];
                let z: f64 = rng.sample(StandardNormal);
                inc += (mu - 0.5 * sig * sig) * piece + sig * piece.sqrt() * z;
            }
            if hi >= t1 {
                break;
            }
            lo = hi;
            seg += 1;
        }
        *slot = inc;
    }
}

/// Grid returns of regime-GBM path `path_index`, used by the generic Monte
/// Carlo layer. The horizon is `buf.len() / GRID_PER_UNIT` time units.
pub(crate) fn fill_regime_grid_returns(
    model: &RegimeModel,
    buf: &mut [f64],
    seed: u64,
    path: u64,
) -> Result<()> {
    let horizon = buf.len() as f64 / GRID_PER_UNIT as f64;
    let chain = sample_chain(model, horizon, &mut path_rng(seed, path, Channel::Regime));
    let mut diffusion = path_rng(seed, path, Channel::Diffusion);
    grid_log_increments(model, &chain, horizon, buf, &mut diffusion);
    for r in buf {
        *r = r.exp() - 1.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{sample_mean, summarize};

    fn two_state(rate: f64) -> RegimeModel {
        RegimeModel::new(
            vec![0.1, -0.1],
            vec![0.2, 0.3],
            vec![vec![-rate, rate], vec![rate, -rate]],
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn single_regime_never_jumps() {
        let m = RegimeModel::single(0.05, 0.2).unwrap();
        let path = simulate_markov_chain(&m, 3.0, 1).unwrap();
        assert_eq!(path.states(), &[0]);
        assert_eq!(path.n_jumps(), 0);
        assert_eq!(occupation_fractions(&path, 1), vec![1.0]);
    }

    #[test]
    fn same_seed_reproduces_jump_sequence() {
        let m = two_state(5.0);
        let a = simulate_markov_chain(&m, 2.0, 99).unwrap();
        let b = simulate_markov_chain(&m, 2.0, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_fast_chain_jump_count() {
        let m = two_state(100.0);
        let counts: Vec<f64> = (0..200u64)
            .map(|i| {
                let chain = sample_chain(&m, 1.0, &mut path_rng(3, i, Channel::Regime));
                chain.n_jumps() as f64
            })
            .collect();
        let mean = sample_mean(&counts);
        assert!((mean - 100.0).abs() < 4.0 * 10.0, "mean jump count {mean}");
    }

    #[test]
    fn occupation_fractions_sum_to_one() {
        let m = two_state(50.0);
        for i in 0..100u64 {
            let chain = sample_chain(&m, 1.0, &mut path_rng(7, i, Channel::Regime));
            let occ = occupation_fractions(&chain, 2);
            let total: f64 = occ.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "path {i}: sum {total}");
            assert!(occ.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn occupation_of_half_time_jump_is_half_half() {
        let path = RegimePath::from_parts(vec![0, 1], vec![0.0, 0.5], 1.0).unwrap();
        let occ = occupation_fractions(&path, 2);
        assert_eq!(occ, vec![0.5, 0.5]);
    }

    #[test]
    fn letf_with_unit_beta_coincides_with_benchmark() {
        let m = two_state(3.0);
        let spec = LeverageSpec::synthetic(1).unwrap();
        for s in simulate_regime_letf(&m, &spec, 1.5, 50, 11).unwrap() {
            assert_eq!(s.gross_etf, s.gross_letf);
        }
    }

    #[test]
    fn deterministic_limit_matches_exponential_drift() {
        let m = RegimeModel::single(0.08, 1e-9).unwrap();
        let spec = LeverageSpec::synthetic(2).unwrap();
        let samples = simulate_regime_letf(&m, &spec, 1.0, 5, 13).unwrap();
        for s in samples {
            assert!((s.gross_etf - 0.08f64.exp()).abs() < 1e-6);
            assert!((s.gross_letf - 0.16f64.exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn single_regime_gross_mean_matches_lognormal_mean() {
        let m = RegimeModel::single(0.08, 0.2).unwrap();
        let spec = LeverageSpec::synthetic(2).unwrap();
        let samples = simulate_regime_letf(&m, &spec, 1.0, 20_000, 17).unwrap();
        let gross: Vec<f64> = samples.iter().map(|s| s.gross_etf).collect();
        let s = summarize(&gross);
        let expect = 0.08f64.exp();
        assert!(
            (s.mean - expect).abs() < 4.0 * s.stderr,
            "mean {} vs {expect} (stderr {})",
            s.mean,
            s.stderr
        );
    }

    #[test]
    fn fee_enters_as_continuous_drag() {
        let m = RegimeModel::single(0.08, 1e-9).unwrap();
        let spec = LeverageSpec::new(2, 0.01, 0.0).unwrap();
        let samples = simulate_regime_letf(&m, &spec, 2.0, 2, 19).unwrap();
        for s in samples {
            assert!((s.gross_letf - (0.16f64 * 2.0 - 0.02).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_returns_compose_to_terminal_price() {
        let m = two_state(4.0);
        for path in simulate_regime_gbm(&m, 1.0, 252, 20, 23).unwrap() {
            let mut acc = 1.0f64;
            for &r in &path.returns {
                acc *= 1.0 + r;
            }
            let terminal = *path.prices.last().unwrap();
            assert!(
                (acc - terminal).abs() < 1e-12 * terminal.abs().max(1.0),
                "compose {acc} vs terminal {terminal}"
            );
            assert_eq!(path.prices.len(), path.returns.len() + 1);
        }
    }

    #[test]
    fn grid_route_and_batch_route_agree() {
        let m = two_state(4.0);
        let gbm = simulate_regime_gbm(&m, 1.0, GRID_PER_UNIT, 5, 29).unwrap();
        let mut buf = vec![0.0f64; GRID_PER_UNIT];
        for (i, path) in gbm.iter().enumerate() {
            fill_regime_grid_returns(&m, &mut buf, 29, i as u64).unwrap();
            assert_eq!(buf, path.returns, "path {i}");
        }
    }
}
