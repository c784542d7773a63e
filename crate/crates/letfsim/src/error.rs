//! Crate-wide error type.

use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced by series construction, simulation, estimation and data
/// ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// Operation requires a nonempty return series.
    #[error("empty return series")]
    EmptySeries,

    /// A benchmark return at or below -100%: the underlying is wiped out.
    #[error("return {value} at index {index} is at or below -100%")]
    Wipeout { index: usize, value: f64 },

    /// A leveraged return at or below -100%: the leveraged position is wiped
    /// out. `date` is set when the series carries dates.
    #[error("leveraged return {value} at index {index}{} is at or below -100%", fmt_date(.date))]
    LetfWipeout {
        index: usize,
        value: f64,
        date: Option<NaiveDate>,
    },

    /// Effective leverage is undefined when the benchmark cumulative return
    /// is numerically zero.
    #[error("degenerate benchmark: cumulative return {value} is within {tol} of zero")]
    DegenerateBenchmark { value: f64, tol: f64 },

    /// `beta * mu <= -1`: the expected leveraged gross return is nonpositive
    /// and the closed-form expectation is meaningless.
    #[error("collapse regime: beta*mu = {beta_mu} <= -1")]
    CollapseRegime { beta_mu: f64 },

    /// Closed-form AR(1) second moments are only implemented for the
    /// zero-intercept (zero-mean) parameterization.
    #[error("zero-mean only: AR(1) intercept must be 0, got {intercept}")]
    ZeroMeanOnly { intercept: f64 },

    /// The lagged regressor has no variance, so the AR(1) slope is undefined.
    #[error("constant series: lagged regressor variance is zero")]
    ConstantSeries,

    /// A likelihood or filter recursion produced a non-finite value.
    #[error("numerical overflow at observation {index}")]
    NumericalOverflow { index: usize },

    /// Invalid model or operation parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Too few observations for the requested operation.
    #[error("insufficient data: need at least {required}, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// Malformed input data file.
    #[error("data error in {path} (row {row}): {reason}")]
    Data {
        path: String,
        row: usize,
        reason: String,
    },

    /// Two dated series share no dates.
    #[error("empty date intersection between series")]
    EmptyIntersection,

    /// A regime window contains no observations.
    #[error("no data in window '{label}'")]
    EmptyWindow { label: String },

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV parse failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn fmt_date(date: &Option<NaiveDate>) -> String {
    match date {
        Some(d) => format!(" ({d})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
