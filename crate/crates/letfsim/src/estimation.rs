//! AR(1) least squares, the GARCH filter and Gaussian likelihood, and the
//! constrained AR(1)-GARCH(1,1) maximum-likelihood fit with Hessian-based
//! standard errors.
//!
//! GARCH fitting conventionally operates on percent returns (1.0 = 1%);
//! decimal-to-percent conversion belongs at this module's boundary and the
//! convention is recorded in the fit result.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{AR1Params, ArGarchParams, Scale};
use crate::optim::{invert, nelder_mead, numerical_hessian, NmOptions};
use crate::series::ReturnSeries;
use crate::stats::{compensated_sum, lag1_autocorr, sample_mean, sample_var};

const MIN_AR1_OBS: usize = 30;
const PERSISTENCE_CAP: f64 = 1.0 - 1e-6;

/// Ordinary-least-squares AR(1) fit of `x_t` on `(1, x_{t-1})`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Ar1Fit {
    pub phi: f64,
    pub intercept: f64,
    /// Residual standard deviation.
    pub sigma_eps: f64,
    pub se_phi: f64,
    pub se_intercept: f64,
    pub n_obs: usize,
}

impl Ar1Fit {
    pub fn params(&self) -> Result<AR1Params> {
        AR1Params::new(self.phi, self.sigma_eps, self.intercept)
    }
}

/// OLS estimate of the AR(1) slope and intercept with standard errors.
pub fn estimate_ar1(series: &ReturnSeries) -> Result<Ar1Fit> {
    let x = series.values();
    if x.len() < MIN_AR1_OBS {
        return Err(Error::InsufficientData {
            required: MIN_AR1_OBS,
            actual: x.len(),
        });
    }
    let n = x.len() - 1; // regression pairs (x_{t-1}, x_t)
    let lag = &x[..x.len() - 1];
    let cur = &x[1..];
    let mean_lag = sample_mean(lag);
    let mean_cur = sample_mean(cur);
    let sxx = compensated_sum(lag.iter().map(|&v| (v - mean_lag) * (v - mean_lag)));
    if sxx < 1e-300 {
        return Err(Error::ConstantSeries);
    }
    let sxy = compensated_sum(
        lag.iter()
            .zip(cur)
            .map(|(&l, &c)| (l - mean_lag) * (c - mean_cur)),
    );
    let phi = sxy / sxx;
    let intercept = mean_cur - phi * mean_lag;
    let ss_res = compensated_sum(
        lag.iter()
            .zip(cur)
            .map(|(&l, &c)| {
                let r = c - intercept - phi * l;
                r * r
            }),
    );
    let dof = (n - 2) as f64;
    let s2 = ss_res / dof;
    let se_phi = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / n as f64 + mean_lag * mean_lag / sxx)).sqrt();
    Ok(Ar1Fit {
        phi,
        intercept,
        sigma_eps: s2.sqrt(),
        se_phi,
        se_intercept,
        n_obs: n,
    })
}

/// AR(1) residuals and conditional variances of the observations `x` under
/// `params`. `x` must be in the params' unit scale (conventionally percent).
///
/// The first observation conditions the recursion and does not contribute:
/// `eps_t = x_t - mu - phi*x_{t-1}` for t = 2..n. The variance recursion is
/// seeded at the sample variance of the residuals (floored at `omega` so
/// every `sigma_t^2 >= omega`).
pub fn garch_filter(params: &ArGarchParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    filter_unchecked(params, x)
}

fn filter_unchecked(params: &ArGarchParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: x.len(),
        });
    }
    let n = x.len() - 1;
    let mut eps = Vec::with_capacity(n);
    for t in 1..x.len() {
        eps.push(x[t] - params.mu - params.phi * x[t - 1]);
    }
    let seed = if n >= 2 {
        sample_var(&eps).max(params.omega)
    } else {
        params.omega
    };
    let mut sigma2 = Vec::with_capacity(n);
    let mut s2 = seed;
    sigma2.push(s2);
    for t in 1..n {
        s2 = params.omega + params.alpha * eps[t - 1] * eps[t - 1] + params.beta_g * s2;
        sigma2.push(s2);
    }
    Ok((eps, sigma2))
}

/// Gaussian negative log-likelihood
/// `0.5 * sum_t [ log(2 pi sigma_t^2) + eps_t^2 / sigma_t^2 ]`
/// over the usable observations t = 2..n. `x` must be in the params' unit
/// scale.
pub fn garch_neg_loglik(params: &ArGarchParams, x: &[f64]) -> Result<f64> {
    params.validate()?;
    nll_unchecked(params, x)
}

/// Likelihood kernel without the stationarity checks, so the Hessian can be
/// probed next to parameter-space boundaries. Non-finite terms and
/// nonpositive variances surface as numerical overflow.
fn nll_unchecked(params: &ArGarchParams, x: &[f64]) -> Result<f64> {
    let (eps, sigma2) = filter_unchecked(params, x)?;
    const LN_2PI: f64 = 1.8378770664093453;
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    for (i, (&e, &s2)) in eps.iter().zip(&sigma2).enumerate() {
        if !(s2 > 0.0) {
            return Err(Error::NumericalOverflow { index: i });
        }
        let term = 0.5 * (LN_2PI + s2.ln() + e * e / s2);
        if !term.is_finite() {
            return Err(Error::NumericalOverflow { index: i });
        }
        let t = acc + term;
        comp += if acc.abs() >= term.abs() {
            (acc - t) + term
        } else {
            (term - t) + acc
        };
        acc = t;
    }
    Ok(acc + comp)
}

/// Per-parameter standard errors of an AR(1)-GARCH(1,1) fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GarchStdErrors {
    pub mu: f64,
    pub phi: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta_g: f64,
}

/// Maximum-likelihood AR(1)-GARCH(1,1) fit.
#[derive(Debug, Clone, Serialize)]
pub struct GarchFit {
    pub params: ArGarchParams,
    /// Inverse-Hessian standard errors (plain, not sandwich).
    pub std_errors: GarchStdErrors,
    /// Maximized log-likelihood.
    pub loglik: f64,
    pub converged: bool,
    pub n_obs: usize,
    /// Unit convention of the fitted series.
    pub scale: Scale,
}

/// Optimizer budget for [`fit_ar1_garch`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Simplex-size tolerance.
    pub tol: f64,
    /// Restarts of the simplex from the current optimum.
    pub restarts: usize,
    /// Recorded in the result; the optimizer itself is scale-agnostic.
    pub scale: Scale,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 4_000,
            tol: 1e-6,
            restarts: 1,
            scale: Scale::Percent,
        }
    }
}

// Unconstrained optimizer coordinates:
//   theta = (mu, atanh(phi), ln(omega), logit(persistence/cap), logit(share))
// with alpha = persistence * share, beta_g = persistence * (1 - share).
// The transforms enforce omega > 0, alpha, beta_g >= 0,
// alpha + beta_g <= cap < 1 and |phi| < 1 exactly.
fn theta_to_params(theta: &[f64]) -> ArGarchParams {
    let persistence = PERSISTENCE_CAP * sigmoid(theta[3]);
    let share = sigmoid(theta[4]);
    ArGarchParams {
        mu: theta[0],
        phi: theta[1].tanh(),
        omega: theta[2].exp(),
        alpha: persistence * share,
        beta_g: persistence * (1.0 - share),
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Fits AR(1)-GARCH(1,1) to a decimal return series, converting to the
/// target scale (conventionally percent, where the usual parameter
/// magnitudes live) at this boundary. The fitted scale is recorded in the
/// result.
pub fn fit_ar1_garch(series: &ReturnSeries, opts: &FitOptions) -> Result<GarchFit> {
    match opts.scale {
        Scale::Decimal => fit_ar1_garch_values(series.values(), opts),
        Scale::Percent => {
            let percent: Vec<f64> = series.values().iter().map(|&v| v * 100.0).collect();
            fit_ar1_garch_values(&percent, opts)
        }
    }
}

/// Fits AR(1)-GARCH(1,1) by Gaussian MLE under the stationarity constraints
/// to observations already in the target unit scale, starting from sample
/// moments (mean, lag-1 autocorrelation, alpha = 0.1, beta_g = 0.8, omega
/// matching the residual variance).
///
/// Non-convergence is reported through `converged = false`, not an error;
/// standard errors are NaN when the Hessian is not positive definite.
pub fn fit_ar1_garch_values(x: &[f64], opts: &FitOptions) -> Result<GarchFit> {
    if x.len() < MIN_AR1_OBS {
        return Err(Error::InsufficientData {
            required: MIN_AR1_OBS,
            actual: x.len(),
        });
    }

    // warm start from sample moments
    let mu0 = sample_mean(x);
    let phi0 = lag1_autocorr(x).clamp(-0.9, 0.9);
    let (alpha0, beta0) = (0.1, 0.8);
    let resid_var = {
        let mut acc = 0.0;
        for t in 1..x.len() {
            let r = x[t] - mu0 - phi0 * (x[t - 1] - mu0);
            acc += r * r;
        }
        (acc / (x.len() - 1) as f64).max(1e-12)
    };
    let omega0 = ((1.0 - alpha0 - beta0) * resid_var).max(1e-12);
    let theta0 = vec![
        mu0,
        phi0.atanh(),
        omega0.ln(),
        logit(((alpha0 + beta0) / PERSISTENCE_CAP).clamp(1e-6, 1.0 - 1e-6)),
        logit(alpha0 / (alpha0 + beta0)),
    ];

    let objective = |theta: &[f64]| -> f64 {
        let p = theta_to_params(theta);
        nll_unchecked(&p, x).unwrap_or(f64::INFINITY)
    };

    let nm_opts = NmOptions {
        x_tol: opts.tol,
        f_tol: 1e-10,
        max_iter: opts.max_iter,
    };
    let scale = vec![0.02f64.max(mu0.abs() * 0.2), 0.05, 0.3, 0.3, 0.3];
    let mut result = nelder_mead(objective, &theta0, &scale, &nm_opts);
    for _ in 0..opts.restarts {
        let rescale: Vec<f64> = scale.iter().map(|s| s * 0.1).collect();
        let again = nelder_mead(objective, &result.x, &rescale, &nm_opts);
        if again.fx <= result.fx {
            result = again;
        }
    }
    let initial_nll = objective(&theta0);
    debug_assert!(result.fx <= initial_nll + 1e-9);

    let params = theta_to_params(&result.x);
    let nll_opt = result.fx;

    // curvature in the original parameter space
    let nll_point = |p: &[f64]| -> f64 {
        let params = ArGarchParams {
            mu: p[0],
            phi: p[1],
            omega: p[2],
            alpha: p[3],
            beta_g: p[4],
        };
        nll_unchecked(&params, x).unwrap_or(f64::INFINITY)
    };
    let point = [params.mu, params.phi, params.omega, params.alpha, params.beta_g];
    let hessian = numerical_hessian(nll_point, &point, 1e-4);

    let mut converged = result.converged;
    let std_errors = match invert(&hessian) {
        Some(cov) => {
            let diag: Vec<f64> = (0..5).map(|i| cov[i][i]).collect();
            if diag.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                converged = false;
                GarchStdErrors {
                    mu: f64::NAN,
                    phi: f64::NAN,
                    omega: f64::NAN,
                    alpha: f64::NAN,
                    beta_g: f64::NAN,
                }
            } else {
                GarchStdErrors {
                    mu: diag[0].sqrt(),
                    phi: diag[1].sqrt(),
                    omega: diag[2].sqrt(),
                    alpha: diag[3].sqrt(),
                    beta_g: diag[4].sqrt(),
                }
            }
        }
        None => {
            converged = false;
            GarchStdErrors {
                mu: f64::NAN,
                phi: f64::NAN,
                omega: f64::NAN,
                alpha: f64::NAN,
                beta_g: f64::NAN,
            }
        }
    };

    Ok(GarchFit {
        params,
        std_errors,
        loglik: -nll_opt,
        converged,
        n_obs: x.len() - 1,
        scale: opts.scale,
    })
}

/// A windowed statistic stamped at each window's last observation.
#[derive(Debug, Clone, Serialize)]
pub struct RollingSeries {
    pub window: usize,
    pub dates: Option<Vec<NaiveDate>>,
    pub values: Vec<f64>,
}

impl RollingSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// AR(1) slope over every sliding window (stride 1) of `window`
/// observations.
pub fn rolling_ar1(series: &ReturnSeries, window: usize) -> Result<RollingSeries> {
    if window < MIN_AR1_OBS {
        return Err(Error::InvalidParameter(format!(
            "window must be >= {MIN_AR1_OBS}"
        )));
    }
    let n = series.len();
    if n < window {
        return Err(Error::InsufficientData {
            required: window,
            actual: n,
        });
    }
    let mut values = Vec::with_capacity(n - window + 1);
    for start in 0..=(n - window) {
        let slice = ReturnSeries::new(series.values()[start..start + window].to_vec())?;
        values.push(estimate_ar1(&slice)?.phi);
    }
    let dates = series
        .dates()
        .map(|d| d[window - 1..].to_vec());
    Ok(RollingSeries {
        window,
        dates,
        values,
    })
}
