//! Return-dynamics model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit convention of a return sample: decimal (0.01 = 1%) or percent
/// (1.0 = 1%).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Decimal,
    Percent,
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scale::Decimal => write!(f, "decimal"),
            Scale::Percent => write!(f, "percent"),
        }
    }
}

/// Independent Gaussian returns with per-period mean and volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IIDParams {
    pub mu: f64,
    pub sigma: f64,
}

impl IIDParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter("iid params must be finite".into()));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// AR(1) returns `x_t = c + phi * x_{t-1} + eps_t` with Gaussian
/// innovations of standard deviation `sigma_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AR1Params {
    pub phi: f64,
    pub sigma_eps: f64,
    #[serde(default)]
    pub intercept: f64,
}

impl AR1Params {
    pub fn new(phi: f64, sigma_eps: f64, intercept: f64) -> Result<Self> {
        let p = Self {
            phi,
            sigma_eps,
            intercept,
        };
        p.validate()?;
        Ok(p)
    }

    /// Zero-intercept AR(1).
    pub fn zero_mean(phi: f64, sigma_eps: f64) -> Result<Self> {
        Self::new(phi, sigma_eps, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() || !self.sigma_eps.is_finite() || !self.intercept.is_finite() {
            return Err(Error::InvalidParameter("ar1 params must be finite".into()));
        }
        if self.phi.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|phi| must be < 1 for stationarity, got {}",
                self.phi
            )));
        }
        if self.sigma_eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma_eps must be positive, got {}",
                self.sigma_eps
            )));
        }
        Ok(())
    }

    /// Stationary mean `c / (1 - phi)`.
    pub fn stationary_mean(&self) -> f64 {
        self.intercept / (1.0 - self.phi)
    }

    /// Stationary variance `sigma_eps^2 / (1 - phi^2)`.
    pub fn stationary_var(&self) -> f64 {
        self.sigma_eps * self.sigma_eps / (1.0 - self.phi * self.phi)
    }
}

/// AR(1)-GARCH(1,1) returns:
/// `x_t = mu + phi * x_{t-1} + eps_t`, `eps_t = sigma_t * z_t`,
/// `sigma_t^2 = omega + alpha * eps_{t-1}^2 + beta_g * sigma_{t-1}^2`.
///
/// The GARCH variance-persistence coefficient is named `beta_g` to avoid
/// collision with the leverage ratio. Parameters are conventionally in
/// percent units (see [`crate::sim::monte_carlo_ce`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArGarchParams {
    pub mu: f64,
    pub phi: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta_g: f64,
}

impl ArGarchParams {
    pub fn new(mu: f64, phi: f64, omega: f64, alpha: f64, beta_g: f64) -> Result<Self> {
        let p = Self {
            mu,
            phi,
            omega,
            alpha,
            beta_g,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.phi, self.omega, self.alpha, self.beta_g];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("garch params must be finite".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.alpha < 0.0 || self.beta_g < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha and beta_g must be nonnegative, got alpha={} beta_g={}",
                self.alpha, self.beta_g
            )));
        }
        if self.alpha + self.beta_g >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha + beta_g must be < 1 for covariance stationarity, got {}",
                self.alpha + self.beta_g
            )));
        }
        if self.phi.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|phi| must be < 1, got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Unconditional innovation variance `omega / (1 - alpha - beta_g)`.
    pub fn unconditional_var(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta_g)
    }

    /// Stationary mean of the AR(1) level equation.
    pub fn stationary_mean(&self) -> f64 {
        self.mu / (1.0 - self.phi)
    }
}

/// Regime-switching geometric Brownian motion: a continuous-time Markov
/// chain with generator `q` modulates per-regime drift and volatility
/// (per unit time and per sqrt unit time respectively).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeModel {
    pub mus: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// M x M generator; off-diagonal entries are switch rates, rows sum to 0.
    pub q: Vec<Vec<f64>>,
    /// Initial regime distribution; entries >= 0 summing to 1.
    pub initial: Vec<f64>,
}

const PROB_SUM_TOL: f64 = 1e-9;

impl RegimeModel {
    pub fn new(mus: Vec<f64>, sigmas: Vec<f64>, q: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let mut m = Self {
            mus,
            sigmas,
            q,
            initial,
        };
        m.validate_and_normalize()?;
        Ok(m)
    }

    /// One regime held forever.
    pub fn single(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![mu], vec![sigma], vec![vec![0.0]], vec![1.0])
    }

    pub fn n_regimes(&self) -> usize {
        self.mus.len()
    }

    pub fn validate_and_normalize(&mut self) -> Result<()> {
        let m = self.mus.len();
        if m == 0 {
            return Err(Error::InvalidParameter("at least one regime required".into()));
        }
        if self.sigmas.len() != m || self.q.len() != m || self.initial.len() != m {
            return Err(Error::InvalidParameter(
                "mus, sigmas, q and initial must agree on the regime count".into(),
            ));
        }
        if self.mus.iter().chain(&self.sigmas).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("regime params must be finite".into()));
        }
        if self.sigmas.iter().any(|&s| s <= 0.0) {
            return Err(Error::InvalidParameter("regime sigmas must be positive".into()));
        }
        for (i, row) in self.q.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidParameter("generator must be square".into()));
            }
            let mut sum = 0.0;
            for (j, &rate) in row.iter().enumerate() {
                if !rate.is_finite() {
                    return Err(Error::InvalidParameter("generator must be finite".into()));
                }
                if i != j && rate < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "generator off-diagonal q[{i}][{j}] = {rate} is negative"
                    )));
                }
                sum += rate;
            }
            if sum.abs() > PROB_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "generator row {i} sums to {sum}, expected 0"
                )));
            }
        }
        if self.initial.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "initial distribution entries must be nonnegative".into(),
            ));
        }
        let total: f64 = self.initial.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "initial distribution sums to {total}, expected 1"
            )));
        }
        // renormalize away the <= 1e-9 slack so downstream sampling is exact
        for p in &mut self.initial {
            *p /= total;
        }
        Ok(())
    }
}

/// Everything a path simulator needs, tagged by dynamics family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Iid(IIDParams),
    Ar1(AR1Params),
    ArGarch(ArGarchParams),
    Regime(RegimeModel),
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Iid(p) => p.validate(),
            ModelParams::Ar1(p) => p.validate(),
            ModelParams::ArGarch(p) => p.validate(),
            ModelParams::Regime(m) => m.clone().validate_and_normalize(),
        }
    }

    /// Short tag used in reports and path-batch metadata.
    pub fn tag(&self) -> &'static str {
        match self {
            ModelParams::Iid(_) => "iid",
            ModelParams::Ar1(_) => "ar1",
            ModelParams::ArGarch(_) => "ar1_garch",
            ModelParams::Regime(_) => "regime",
        }
    }

    /// Returns generated by this model are in percent units and must be
    /// divided by 100 before compounding.
    pub fn percent_scale(&self) -> bool {
        matches!(self, ModelParams::ArGarch(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_rejects_nonpositive_sigma() {
        assert!(IIDParams::new(0.0, 0.0).is_err());
        assert!(IIDParams::new(0.0, -0.1).is_err());
        assert!(IIDParams::new(0.0, 1e-9).is_ok());
    }

    #[test]
    fn ar1_rejects_unit_root() {
        assert!(AR1Params::zero_mean(1.0, 0.01).is_err());
        assert!(AR1Params::zero_mean(-1.0, 0.01).is_err());
        assert!(AR1Params::zero_mean(0.999, 0.01).is_ok());
    }

    #[test]
    fn garch_requires_covariance_stationarity() {
        assert!(ArGarchParams::new(0.0, 0.0, 0.1, 0.5, 0.5).is_err());
        assert!(ArGarchParams::new(0.0, 0.0, 0.1, 0.2, 0.7).is_ok());
        assert!(ArGarchParams::new(0.0, 0.0, 0.0, 0.2, 0.7).is_err());
    }

    #[test]
    fn garch_unconditional_variance() {
        let p = ArGarchParams::new(0.0, 0.0, 0.0357, 0.1747, 0.7969).unwrap();
        assert!((p.unconditional_var() - 0.0357 / 0.0284).abs() < 1e-10);
    }

    #[test]
    fn regime_model_validates_generator() {
        let bad = RegimeModel::new(
            vec![0.1, -0.1],
            vec![0.2, 0.2],
            vec![vec![-1.0, 0.5], vec![1.0, -1.0]],
            vec![0.5, 0.5],
        );
        assert!(bad.is_err(), "row sum != 0 must be rejected");

        let good = RegimeModel::new(
            vec![0.1, -0.1],
            vec![0.2, 0.2],
            vec![vec![-1.0, 1.0], vec![2.0, -2.0]],
            vec![0.5, 0.5],
        );
        assert!(good.is_ok());
    }

    #[test]
    fn model_params_json_round_trip() {
        let m = ModelParams::Regime(
            RegimeModel::new(
                vec![0.15, -0.1],
                vec![0.15, 0.3],
                vec![vec![-0.5, 0.5], vec![0.25, -0.25]],
                vec![1.0, 0.0],
            )
            .unwrap(),
        );
        let json = serde_json::to_string(&m).unwrap();
        let back: ModelParams = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert!(json.contains("\"model\":\"regime\""));
    }
}
