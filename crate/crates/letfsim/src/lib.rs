//! Compounding-effect analytics for leveraged ETFs.
//!
//! A daily-rebalanced leveraged fund compounds `beta` times the benchmark's
//! per-period return, so over multiple periods its cumulative return drifts
//! away from `beta` times the benchmark's cumulative return. This crate
//! measures, simulates and predicts that drift:
//!
//! * [`series`] — return series, leveraged return construction with fees and
//!   tracking error, cumulative returns, the compounding effect, effective
//!   leverage, and rebalancing-period aggregation.
//! * [`closed_form`] — analytic expectations: the exact i.i.d. formula, the
//!   second-order autocorrelation expansion, the AR(1) approximation with
//!   its Q factor, the regime-mixture approximation, a sign classifier and
//!   the single-regime value.
//! * [`sim`] — deterministic Monte Carlo over i.i.d., AR(1), AR(1)-GARCH(1,1)
//!   and regime-switching dynamics with per-path substream seeding.
//! * [`regime`] — continuous-time Markov chains, occupation measures and
//!   regime-modulated geometric Brownian motion.
//! * [`estimation`] — AR(1) least squares, GARCH filtering and the
//!   constrained AR(1)-GARCH(1,1) maximum-likelihood fit.
//! * [`empirical`] — price-CSV ingestion, date alignment, synthetic LETFs,
//!   regime-window tables and rolling compounding effects.

pub mod closed_form;
pub mod empirical;
pub mod error;
pub mod estimation;
pub mod models;
pub mod optim;
pub mod regime;
pub mod rng;
pub mod series;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use models::{AR1Params, ArGarchParams, IIDParams, ModelParams, RegimeModel, Scale};
pub use series::{
    aggregate_periods, apply_leverage, compounding_effect, cumulative_return, effective_leverage,
    CEResult, LeverageSpec, ReturnSeries,
};
