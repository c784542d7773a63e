//! Closed-form expressions for the expected compounding effect.
//!
//! Covers the exact i.i.d. formula, the second-order autocorrelation
//! expansion with fees, the AR(1) approximation and its Q factor, the
//! regime-mixture approximation with its per-regime kernel, the sign
//! classifier, and the single-regime value.

use crate::error::{Error, Result};
use crate::models::AR1Params;
use crate::stats::compensated_sum;

/// Mean and uncentered second moments `gamma_k = E[x_t * x_{t+k}]` of a
/// strictly stationary return process. `gammas[k-1]` holds lag k.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovSpec {
    pub mu: f64,
    pub gammas: Vec<f64>,
}

impl AutocovSpec {
    pub fn new(mu: f64, gammas: Vec<f64>) -> Self {
        Self { mu, gammas }
    }
}

/// Exact expected compounding effect for independent returns with mean `mu`
/// over `n` periods: `[(1 + beta*mu)^n - 1] - beta*[(1 + mu)^n - 1]`.
///
/// Nonnegative for every integer `beta` outside {0, 1}, zero at `mu = 0`
/// and at `n = 1`.
pub fn expected_ce_iid(mu: f64, beta: i32, n: u32) -> Result<f64> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be nonzero".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("horizon n must be >= 1".into()));
    }
    let b = f64::from(beta);
    let beta_mu = b * mu;
    if beta_mu <= -1.0 {
        return Err(Error::CollapseRegime { beta_mu });
    }
    if mu <= -1.0 {
        return Err(Error::CollapseRegime { beta_mu: mu });
    }
    let value = ((1.0 + beta_mu).powi(n as i32) - 1.0) - b * ((1.0 + mu).powi(n as i32) - 1.0);
    if beta != 1 {
        assert!(
            value >= -1e-12,
            "expected CE must be nonnegative for beta={beta}, mu={mu}, n={n}: {value}"
        );
    }
    Ok(value)
}

/// Second-order expansion of the expected compounding effect under strict
/// stationarity with fees:
/// `-n*f + sum_{k=1}^{n-1} (n-k) * (beta*(beta-1)*gamma_k - 2*beta*f*mu)
///  + C(n,2)*f^2`.
///
/// `gamma_k` is the *uncentered* second moment, so the i.i.d.-with-drift
/// case is `gamma_k = mu^2`. The `O(n^3 M^3)` remainder is dropped.
pub fn expected_ce_autocorr(spec: &AutocovSpec, beta: i32, fee: f64, n: u32) -> Result<f64> {
    if beta == 0 {
        return Err(Error::InvalidParameter("beta must be nonzero".into()));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("horizon n must be >= 1".into()));
    }
    let lags = (n - 1) as usize;
    if spec.gammas.len() < lags {
        return Err(Error::InsufficientData {
            required: lags,
            actual: spec.gammas.len(),
        });
    }
    let b = f64::from(beta);
    let nf = f64::from(n);
    let second_order = compensated_sum((1..n).map(|k| {
        let weight = f64::from(n - k);
        weight * (b * (b - 1.0) * spec.gammas[(k - 1) as usize] - 2.0 * b * fee * spec.mu)
    }));
    Ok(-nf * fee + second_order + nf * (nf - 1.0) / 2.0 * fee * fee)
}

/// Uncentered second moments of a zero-mean stationary AR(1):
/// `gamma_k = phi^k * sigma^2 / (1 - phi^2)` for k = 1..max_lag.
pub fn ar1_gammas(params: &AR1Params, max_lag: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if params.intercept != 0.0 {
        return Err(Error::ZeroMeanOnly {
            intercept: params.intercept,
        });
    }
    let var = params.stationary_var();
    let mut out = Vec::with_capacity(max_lag);
    let mut phi_pow = 1.0;
    for _ in 0..max_lag {
        phi_pow *= params.phi;
        out.push(phi_pow * var);
    }
    Ok(out)
}

/// `Q = (n-1) + (n-2)*phi + ... + phi^(n-2)`, strictly positive for every
/// `|phi| < 1` and `n >= 2`.
pub fn q_factor(phi: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("q factor needs n >= 2".into()));
    }
    if phi.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "|phi| must be < 1, got {phi}"
        )));
    }
    let mut phi_pow = 1.0;
    let q = compensated_sum((1..n).map(|k| {
        let term = f64::from(n - k) * phi_pow;
        phi_pow *= phi;
        term
    }));
    assert!(q > 0.0, "Q must be positive for |phi|<1, got {q} at phi={phi}, n={n}");
    Ok(q)
}

/// Second-order expected compounding effect for a zero-mean AR(1):
/// `(beta^2 - beta) * sigma^2/(1 - phi^2) * phi * Q`.
///
/// The sign equals the sign of `phi` for every integer `beta` outside
/// {0, 1}. Returns 0 for `n < 2` (a single period never compounds).
pub fn expected_ce_ar1_approx(params: &AR1Params, beta: i32, n: u32) -> Result<f64> {
    params.validate()?;
    if params.intercept != 0.0 {
        return Err(Error::ZeroMeanOnly {
            intercept: params.intercept,
        });
    }
    if beta == 0 || beta == 1 {
        return Err(Error::InvalidParameter(
            "beta must be an integer outside {0, 1}".into(),
        ));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let b = f64::from(beta);
    let value = (b * b - b) * params.stationary_var() * params.phi * q_factor(params.phi, n)?;
    assert!(
        value == 0.0 || value.signum() == params.phi.signum(),
        "CE sign must follow phi: phi={}, value={value}",
        params.phi
    );
    Ok(value)
}

/// Per-regime compounding kernel
/// `Phi_j(t; beta, f) = exp((beta*mu_j - f) * t) - beta * exp(mu_j * t)`.
pub fn phi_kernel(mu_j: f64, beta: i32, fee: f64, t: f64) -> f64 {
    let b = f64::from(beta);
    ((b * mu_j - fee) * t).exp() - b * (mu_j * t).exp()
}

/// Occupation-weighted inputs of the regime-mixture approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMix {
    pis: Vec<f64>,
    mus: Vec<f64>,
    t: f64,
    beta: i32,
    fee: f64,
}

const OCCUPATION_TOL: f64 = 1e-9;

impl RegimeMix {
    /// Occupation vectors off 1 by at most 1e-9 are renormalized; larger
    /// deviations are rejected.
    pub fn new(pis: Vec<f64>, mus: Vec<f64>, t: f64, beta: i32, fee: f64) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidParameter("beta must be nonzero".into()));
        }
        if pis.len() != mus.len() || pis.is_empty() {
            return Err(Error::InvalidParameter(
                "occupation vector and drifts must pair up and be nonempty".into(),
            ));
        }
        if pis.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "occupation entries must be nonnegative".into(),
            ));
        }
        if mus.iter().any(|m| !m.is_finite()) || !t.is_finite() || t < 0.0 || !fee.is_finite() {
            return Err(Error::InvalidParameter("mix inputs must be finite, t >= 0".into()));
        }
        let total: f64 = compensated_sum(pis.iter().copied());
        if (total - 1.0).abs() > OCCUPATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "occupation vector sums to {total}, expected 1 within {OCCUPATION_TOL}"
            )));
        }
        let pis = pis.into_iter().map(|p| p / total).collect();
        Ok(Self {
            pis,
            mus,
            t,
            beta,
            fee,
        })
    }

    pub fn pis(&self) -> &[f64] {
        &self.pis
    }

    /// Occupation-weighted kernel sum `sum_j pi_j * Phi_j`.
    fn kernel_mix(&self) -> f64 {
        compensated_sum(
            self.pis
                .iter()
                .zip(&self.mus)
                .map(|(&pi, &mu)| pi * phi_kernel(mu, self.beta, self.fee, self.t)),
        )
    }
}

/// Regime-mixture approximation of the expected compounding effect:
/// `sum_j pi_j(t) * Phi_j(t; beta, f) + (beta - 1)`.
pub fn expected_ce_regime(mix: &RegimeMix) -> f64 {
    mix.kernel_mix() + (f64::from(mix.beta) - 1.0)
}

/// Sign classification of the expected compounding effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CeSign {
    Positive,
    Negative,
    Zero,
}

impl std::fmt::Display for CeSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CeSign::Positive => write!(f, "positive"),
            CeSign::Negative => write!(f, "negative"),
            CeSign::Zero => write!(f, "zero"),
        }
    }
}

/// Classifies the expected compounding effect by comparing the occupation
/// kernel mix against `1 - beta` with tolerance `eps`. Use 1e-10 in exact
/// contexts and the Monte Carlo standard error in estimated contexts.
pub fn ce_sign_regime(mix: &RegimeMix, eps: f64) -> CeSign {
    let gap = mix.kernel_mix() - (1.0 - f64::from(mix.beta));
    if gap > eps {
        CeSign::Positive
    } else if gap < -eps {
        CeSign::Negative
    } else {
        CeSign::Zero
    }
}

/// Expected compounding effect when the chain never leaves regime j and
/// there is no fee: `exp(beta*mu_j*t) - beta*exp(mu_j*t) + (beta - 1)`.
///
/// Nonnegative for all inputs, zero exactly at `t = 0` or `mu_j = 0`.
pub fn ce_single_regime(mu_j: f64, beta: i32, t: f64) -> Result<f64> {
    if beta == 0 || beta == 1 {
        return Err(Error::InvalidParameter(
            "beta must be an integer outside {0, 1}".into(),
        ));
    }
    if !mu_j.is_finite() || !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter("mu_j finite and t >= 0 required".into()));
    }
    let b = f64::from(beta);
    let value = (b * mu_j * t).exp() - b * (mu_j * t).exp() + (b - 1.0);
    assert!(
        value >= -1e-12,
        "single-regime CE must be nonnegative: mu={mu_j}, beta={beta}, t={t} -> {value}"
    );
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_ce_is_zero_at_zero_mean_and_single_period() {
        for beta in [-3, -2, -1, 2, 3] {
            assert_eq!(expected_ce_iid(0.0, beta, 252).unwrap(), 0.0);
            assert!(expected_ce_iid(0.0123, beta, 1).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn iid_ce_matches_two_point_dp_oracle() {
        // Oracle: exact expectation over a two-point i.i.d. distribution
        // {mu+d, mu-d} with equal weights, computed by dynamic programming
        // over the count of up-moves. Independence makes E[prod] = (E[1+x])^n,
        // so the oracle must agree with the formula to rounding.
        let mu = 0.20 / 252.0;
        let d = 0.01;
        let beta = 3;
        let n = 252u32;

        let mut e_letf = 0.0f64;
        let mut e_etf = 0.0f64;
        // binomial weights over k up-moves, log-space for stability
        let ln_half = 0.5f64.ln();
        let mut ln_choose = 0.0f64; // ln C(n,0)
        for k in 0..=n {
            if k > 0 {
                ln_choose += (f64::from(n - k + 1)).ln() - f64::from(k).ln();
            }
            let w = (ln_choose + f64::from(n) * ln_half).exp();
            let up = f64::from(k);
            let down = f64::from(n - k);
            let b = f64::from(beta);
            e_letf += w
                * (1.0 + b * (mu + d)).powf(up)
                * (1.0 + b * (mu - d)).powf(down);
            e_etf += w * (1.0 + (mu + d)).powf(up) * (1.0 + (mu - d)).powf(down);
        }
        let oracle = (e_letf - 1.0) - f64::from(beta) * (e_etf - 1.0);
        let formula = expected_ce_iid(mu, beta, n).unwrap();
        assert!(formula >= 0.0);
        assert!(
            (formula - oracle).abs() < 1e-9,
            "formula {formula} vs oracle {oracle}"
        );
    }

    #[test]
    fn iid_ce_rejects_collapse() {
        assert!(matches!(
            expected_ce_iid(-0.4, 3, 10),
            Err(Error::CollapseRegime { .. })
        ));
    }

    #[test]
    fn autocorr_formula_zero_cases() {
        let spec = AutocovSpec::new(0.0, vec![0.0; 9]);
        for beta in [-3, -2, 2, 3] {
            assert_eq!(expected_ce_autocorr(&spec, beta, 0.0, 10).unwrap(), 0.0);
        }
    }

    #[test]
    fn autocorr_formula_fee_only() {
        // -10*1e-4 + C(10,2)*1e-8 = -0.00099955
        let spec = AutocovSpec::new(0.0, vec![0.0; 9]);
        let v = expected_ce_autocorr(&spec, 2, 0.0001, 10).unwrap();
        assert!((v - (-0.00099955)).abs() < 1e-15);
    }

    #[test]
    fn autocorr_formula_single_lag() {
        let mut gammas = vec![0.0; 2];
        gammas[0] = 5e-5;
        let spec = AutocovSpec::new(0.0, gammas);
        let v = expected_ce_autocorr(&spec, 2, 0.0, 3).unwrap();
        assert!((v - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn autocorr_formula_requires_enough_lags() {
        let spec = AutocovSpec::new(0.0, vec![0.0; 3]);
        assert!(expected_ce_autocorr(&spec, 2, 0.0, 10).is_err());
    }

    #[test]
    fn ar1_gammas_values() {
        let p = AR1Params::zero_mean(0.5, 0.01).unwrap();
        let g = ar1_gammas(&p, 3).unwrap();
        assert!((g[0] - 0.5 * 1e-4 / 0.75).abs() < 1e-18);
        assert!((g[0] - 6.667e-5).abs() < 1e-8);

        let p = AR1Params::zero_mean(0.0, 0.01).unwrap();
        assert!(ar1_gammas(&p, 5).unwrap().iter().all(|&g| g == 0.0));

        let p = AR1Params::zero_mean(-0.5, 0.01).unwrap();
        let g = ar1_gammas(&p, 2).unwrap();
        assert!(g[0] < 0.0);
        assert!((g[1] - 0.25 * 1e-4 / 0.75).abs() < 1e-18);
    }

    #[test]
    fn ar1_gammas_rejects_nonzero_intercept() {
        let p = AR1Params::new(0.5, 0.01, 0.001).unwrap();
        assert!(matches!(ar1_gammas(&p, 3), Err(Error::ZeroMeanOnly { .. })));
    }

    #[test]
    fn q_factor_values() {
        assert_eq!(q_factor(0.0, 5).unwrap(), 4.0);
        assert!((q_factor(0.999999, 4).unwrap() - 6.0).abs() < 1e-4);
        assert!((q_factor(-0.5, 4).unwrap() - 2.25).abs() < 1e-15);
        assert!(q_factor(0.5, 1).is_err());
    }

    #[test]
    fn ar1_approx_values() {
        let p = AR1Params::zero_mean(0.3, 0.01).unwrap();
        let v = expected_ce_ar1_approx(&p, 2, 3).unwrap();
        let expect = 2.0 * (1e-4 / 0.91) * 0.3 * 2.3;
        assert!((v - expect).abs() < 1e-18);
        assert!((v - 1.5165e-4).abs() < 1e-8);

        let p0 = AR1Params::zero_mean(0.0, 0.01).unwrap();
        assert_eq!(expected_ce_ar1_approx(&p0, 2, 5).unwrap(), 0.0);
    }

    #[test]
    fn ar1_approx_agrees_with_autocorr_route() {
        // the two formulas are algebraically identical at f = 0
        for &(phi, sigma, beta, n) in &[
            (0.5, 0.01, 2, 10u32),
            (-0.7, 0.02, -2, 252),
            (0.9, 0.005, 3, 1000),
            (-0.3, 0.015, -3, 500),
        ] {
            let p = AR1Params::zero_mean(phi, sigma).unwrap();
            let direct = expected_ce_ar1_approx(&p, beta, n).unwrap();
            let spec = AutocovSpec::new(0.0, ar1_gammas(&p, (n - 1) as usize).unwrap());
            let via_gammas = expected_ce_autocorr(&spec, beta, 0.0, n).unwrap();
            let denom = direct.abs().max(1e-300);
            assert!(
                ((direct - via_gammas) / denom).abs() < 1e-14,
                "phi={phi} beta={beta} n={n}: {direct} vs {via_gammas}"
            );
        }
    }

    #[test]
    fn phi_kernel_values() {
        assert!((phi_kernel(0.0, 2, 0.0, 1.0) - (1.0 - 2.0)).abs() < 1e-15);
        assert!((phi_kernel(0.123, 5, 0.01, 0.0) - (1.0 - 5.0)).abs() < 1e-15);
        let v = phi_kernel(0.08, 2, 0.0, 1.0);
        let expect = 0.16f64.exp() - 2.0 * 0.08f64.exp();
        assert_eq!(v, expect);
        assert!((v - (-0.9930632643581069)).abs() < 1e-15);
    }

    #[test]
    fn regime_mix_single_regime_matches_corollary() {
        let mix = RegimeMix::new(vec![1.0], vec![0.08], 1.0, 2, 0.0).unwrap();
        let v = expected_ce_regime(&mix);
        let expect = 0.16f64.exp() - 2.0 * 0.08f64.exp() + 1.0;
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.0069367356418931).abs() < 1e-15);
    }

    #[test]
    fn regime_mix_zero_drift_is_zero() {
        let mix = RegimeMix::new(vec![0.25; 4], vec![0.0; 4], 2.0, 3, 0.0).unwrap();
        assert!(expected_ce_regime(&mix).abs() < 1e-12);
    }

    #[test]
    fn regime_mix_two_regime_value() {
        let mix = RegimeMix::new(vec![0.5, 0.5], vec![0.1, -0.1], 1.0, 2, 0.0).unwrap();
        let v = expected_ce_regime(&mix);
        let expect = 0.5 * (0.2f64.exp() - 2.0 * 0.1f64.exp())
            + 0.5 * ((-0.2f64).exp() - 2.0 * (-0.1f64).exp())
            + 1.0;
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.0100584195074686).abs() < 1e-13);
    }

    #[test]
    fn regime_mix_renormalizes_tiny_slack_and_rejects_large() {
        let ok = RegimeMix::new(vec![0.5, 0.5 + 5e-10], vec![0.1, -0.1], 1.0, 2, 0.0).unwrap();
        assert!((compensated_sum(ok.pis().iter().copied()) - 1.0).abs() < 1e-15);
        assert!(RegimeMix::new(vec![0.5, 0.6], vec![0.1, -0.1], 1.0, 2, 0.0).is_err());
    }

    #[test]
    fn sign_classifier_cases() {
        let pos = RegimeMix::new(vec![1.0], vec![0.05], 1.0, 2, 0.0).unwrap();
        assert_eq!(ce_sign_regime(&pos, 1e-10), CeSign::Positive);

        let zero = RegimeMix::new(vec![1.0], vec![0.0], 1.0, 2, 0.0).unwrap();
        assert_eq!(ce_sign_regime(&zero, 1e-10), CeSign::Zero);

        // fee dominates the drift
        let neg = RegimeMix::new(vec![1.0], vec![0.05], 1.0, 2, 0.5).unwrap();
        assert_eq!(ce_sign_regime(&neg, 1e-10), CeSign::Negative);
        let v = expected_ce_regime(&neg);
        assert!(v < 0.0, "fee-dominated CE should be negative, got {v}");
    }

    #[test]
    fn single_regime_values() {
        assert_eq!(ce_single_regime(0.3, 2, 0.0).unwrap(), 0.0);
        assert_eq!(ce_single_regime(0.0, -2, 3.0).unwrap(), 0.0);
        let v = ce_single_regime(-0.1, -2, 1.0).unwrap();
        let expect = 0.2f64.exp() + 2.0 * (-0.1f64).exp() - 3.0;
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.0310775942320889).abs() < 1e-13);
        assert!(ce_single_regime(0.1, 1, 1.0).is_err());
        assert!(ce_single_regime(0.1, 0, 1.0).is_err());
    }

    #[test]
    fn single_regime_nonnegative_on_grid() {
        for &beta in &[-3, -2, -1, 2, 3] {
            for i in 0..=20 {
                let mu = -0.5 + f64::from(i) * 0.05;
                for j in 0..=10 {
                    let t = f64::from(j) * 0.5;
                    let v = ce_single_regime(mu, beta, t).unwrap();
                    assert!(v >= -1e-12);
                    if t == 0.0 || mu == 0.0 {
                        assert!(v.abs() < 1e-12);
                    }
                }
            }
        }
    }
}
