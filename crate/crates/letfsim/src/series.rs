//! Return series, leveraged return construction and the compounding effect.
//!
//! Returns are simple per-period returns in decimal units (0.01 = 1%)
//! everywhere in this crate; percent scaling exists only at the estimation
//! and reporting boundary.

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance below which a cumulative benchmark return is treated
/// as zero when computing effective leverage.
pub const BENCHMARK_TOL: f64 = 1e-12;

/// An ordered sequence of simple returns, optionally date-stamped.
///
/// Invariants enforced at construction: every value is finite and > -1
/// (limited liability), and dates, when present, are strictly increasing and
/// aligned 1:1 with the values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    dates: Option<Vec<NaiveDate>>,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_values(&values)?;
        Ok(Self {
            values,
            dates: None,
        })
    }

    pub fn with_dates(values: Vec<f64>, dates: Vec<NaiveDate>) -> Result<Self> {
        validate_values(&values)?;
        if dates.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "dates length {} != values length {}",
                dates.len(),
                values.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "dates must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            values,
            dates: Some(dates),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sub-series with dates in `[start, end]` (inclusive). Only defined for
    /// dated series.
    pub fn slice_by_date(&self, start: NaiveDate, end: NaiveDate) -> Result<ReturnSeries> {
        let dates = self
            .dates
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("series has no dates".into()))?;
        let lo = dates.partition_point(|d| *d < start);
        let hi = dates.partition_point(|d| *d <= end);
        Ok(ReturnSeries {
            values: self.values[lo..hi].to_vec(),
            dates: Some(dates[lo..hi].to_vec()),
        })
    }
}

fn validate_values(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite return at index {index}"
            )));
        }
        if value <= -1.0 {
            return Err(Error::Wipeout { index, value });
        }
    }
    Ok(())
}

/// Leverage ratio, daily fee and tracking-error scale of an LETF return map
/// `x -> beta*x - fee + e_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeverageSpec {
    pub beta: i32,
    pub fee_daily: f64,
    pub tracking_sigma: f64,
}

impl LeverageSpec {
    pub fn new(beta: i32, fee_daily: f64, tracking_sigma: f64) -> Result<Self> {
        if beta == 0 {
            return Err(Error::InvalidParameter("leverage beta must be nonzero".into()));
        }
        if !fee_daily.is_finite() || fee_daily < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "daily fee must be nonnegative, got {fee_daily}"
            )));
        }
        if !tracking_sigma.is_finite() || tracking_sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tracking sigma must be nonnegative, got {tracking_sigma}"
            )));
        }
        Ok(Self {
            beta,
            fee_daily,
            tracking_sigma,
        })
    }

    /// Frictionless replication: no fee, no tracking error.
    pub fn synthetic(beta: i32) -> Result<Self> {
        Self::new(beta, 0.0, 0.0)
    }
}

/// Compounding effect of one leveraged path against its benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CEResult {
    /// `r_letf - beta * r_etf`.
    pub ce: f64,
    pub r_letf: f64,
    pub r_etf: f64,
    pub n_periods: usize,
}

/// Cumulative simple return `prod(1 + x_t) - 1`.
pub fn cumulative_return(series: &ReturnSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut acc = 1.0f64;
    for &x in series.values() {
        acc *= 1.0 + x;
    }
    Ok(acc - 1.0)
}

/// Element-wise leveraged returns `beta*x_t - fee + e_t`.
///
/// `tracking_draws`, when given, must pair 1:1 with the series; the draws
/// are used as the `e_t` sequence and `e_t = 0` otherwise. Errors with the
/// offending index (and date, when available) if any output is at or below
/// -100%.
pub fn apply_leverage(
    series: &ReturnSeries,
    spec: &LeverageSpec,
    tracking_draws: Option<&[f64]>,
) -> Result<ReturnSeries> {
    if let Some(draws) = tracking_draws {
        if draws.len() != series.len() {
            return Err(Error::InvalidParameter(format!(
                "tracking draws length {} != series length {}",
                draws.len(),
                series.len()
            )));
        }
    }
    let beta = f64::from(spec.beta);
    let mut out = Vec::with_capacity(series.len());
    for (index, &x) in series.values().iter().enumerate() {
        let e = tracking_draws.map_or(0.0, |d| d[index]);
        let value = beta * x - spec.fee_daily + e;
        if value <= -1.0 {
            return Err(Error::LetfWipeout {
                index,
                value,
                date: series.dates().map(|d| d[index]),
            });
        }
        out.push(value);
    }
    match series.dates() {
        Some(dates) => ReturnSeries::with_dates(out, dates.to_vec()),
        None => ReturnSeries::new(out),
    }
}

/// Compounding effect `CE_n = R^LETF - beta * R^ETF` of a benchmark series
/// under a leverage spec.
pub fn compounding_effect(
    etf: &ReturnSeries,
    spec: &LeverageSpec,
    tracking_draws: Option<&[f64]>,
) -> Result<CEResult> {
    let letf = apply_leverage(etf, spec, tracking_draws)?;
    let r_letf = cumulative_return(&letf)?;
    let r_etf = cumulative_return(etf)?;
    Ok(CEResult {
        ce: r_letf - f64::from(spec.beta) * r_etf,
        r_letf,
        r_etf,
        n_periods: etf.len(),
    })
}

/// Realized ratio of cumulative LETF return to cumulative benchmark return.
pub fn effective_leverage(etf: &ReturnSeries, letf: &ReturnSeries) -> Result<f64> {
    let r_etf = cumulative_return(etf)?;
    let r_letf = cumulative_return(letf)?;
    if r_etf.abs() < BENCHMARK_TOL {
        return Err(Error::DegenerateBenchmark {
            value: r_etf,
            tol: BENCHMARK_TOL,
        });
    }
    Ok(r_letf / r_etf)
}

/// Compound consecutive non-overlapping blocks of `block` periods into one
/// period each. The trailing partial block is dropped; `block = 1` is the
/// identity. Dated series are stamped at each block's last date.
pub fn aggregate_periods(daily: &ReturnSeries, block: usize) -> Result<ReturnSeries> {
    if block < 1 {
        return Err(Error::InvalidParameter("block must be >= 1".into()));
    }
    if daily.len() < block {
        return Err(Error::InsufficientData {
            required: block,
            actual: daily.len(),
        });
    }
    if block == 1 {
        return Ok(daily.clone());
    }
    let n_blocks = daily.len() / block;
    let mut values = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let mut acc = 1.0f64;
        for &x in &daily.values()[b * block..(b + 1) * block] {
            acc *= 1.0 + x;
        }
        values.push(acc - 1.0);
    }
    match daily.dates() {
        Some(dates) => {
            let block_dates = (0..n_blocks).map(|b| dates[(b + 1) * block - 1]).collect();
            ReturnSeries::with_dates(values, block_dates)
        }
        None => ReturnSeries::new(values),
    }
}

/// Compounding effect computed directly from a slice of benchmark returns.
/// Same arithmetic as [`compounding_effect`] without an intermediate series
/// allocation; the streaming Monte Carlo layer runs on this.
pub(crate) fn ce_from_slice(
    etf: &[f64],
    spec: &LeverageSpec,
    tracking_draws: Option<&[f64]>,
) -> Result<CEResult> {
    if etf.is_empty() {
        return Err(Error::EmptySeries);
    }
    let beta = f64::from(spec.beta);
    let mut prod_l = 1.0f64;
    let mut prod_e = 1.0f64;
    for (index, &x) in etf.iter().enumerate() {
        let e = tracking_draws.map_or(0.0, |d| d[index]);
        let lev = beta * x - spec.fee_daily + e;
        if lev <= -1.0 {
            return Err(Error::LetfWipeout {
                index,
                value: lev,
                date: None,
            });
        }
        prod_l *= 1.0 + lev;
        prod_e *= 1.0 + x;
    }
    let r_letf = prod_l - 1.0;
    let r_etf = prod_e - 1.0;
    Ok(CEResult {
        ce: r_letf - beta * r_etf,
        r_letf,
        r_etf,
        n_periods: etf.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> ReturnSeries {
        ReturnSeries::new(values.to_vec()).unwrap()
    }

    #[test]
    fn cumulative_return_two_period_example() {
        // +6% then -4% compounds to +1.76%
        let r = cumulative_return(&series(&[0.06, -0.04])).unwrap();
        assert!((r - 0.0176).abs() < 1e-12);
    }

    #[test]
    fn cumulative_return_identity_and_product_cases() {
        assert_eq!(cumulative_return(&series(&[0.0])).unwrap(), 0.0);
        let r = cumulative_return(&series(&[0.01; 5])).unwrap();
        assert!((r - (1.01f64.powi(5) - 1.0)).abs() < 1e-15);
        assert!((r - 0.0510100501).abs() < 1e-10);
    }

    #[test]
    fn cumulative_return_rejects_empty() {
        assert!(matches!(
            cumulative_return(&series(&[])),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn construction_rejects_wipeout_values() {
        let err = ReturnSeries::new(vec![0.01, -1.0]).unwrap_err();
        assert!(matches!(err, Error::Wipeout { index: 1, .. }));
    }

    #[test]
    fn apply_leverage_doubles_returns() {
        let spec = LeverageSpec::synthetic(2).unwrap();
        let out = apply_leverage(&series(&[0.06, -0.04]), &spec, None).unwrap();
        assert_eq!(out.values(), &[0.12, -0.08]);
    }

    #[test]
    fn apply_leverage_unit_beta_is_identity() {
        let spec = LeverageSpec::synthetic(1).unwrap();
        let s = series(&[0.01, -0.02, 0.005]);
        let out = apply_leverage(&s, &spec, None).unwrap();
        assert_eq!(out.values(), s.values());
    }

    #[test]
    fn apply_leverage_with_fee_and_noise() {
        let spec = LeverageSpec::new(3, 0.0001, 0.0).unwrap();
        let out = apply_leverage(&series(&[0.01]), &spec, Some(&[0.0005])).unwrap();
        assert!((out.values()[0] - 0.0304).abs() < 1e-15);
    }

    #[test]
    fn apply_leverage_reports_wipeout_index_and_date() {
        let spec = LeverageSpec::synthetic(-3).unwrap();
        let dates = vec![
            NaiveDate::from_ymd_opt(2020, 3, 12).unwrap(),
            NaiveDate::from_ymd_opt(2020, 3, 13).unwrap(),
        ];
        let s = ReturnSeries::with_dates(vec![0.01, 0.40], dates).unwrap();
        match apply_leverage(&s, &spec, None) {
            Err(Error::LetfWipeout { index, date, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(date, NaiveDate::from_ymd_opt(2020, 3, 13));
            }
            other => panic!("expected wipeout, got {other:?}"),
        }
    }

    #[test]
    fn compounding_effect_two_period_example() {
        let spec = LeverageSpec::synthetic(2).unwrap();
        let ce = compounding_effect(&series(&[0.06, -0.04]), &spec, None).unwrap();
        assert!((ce.r_letf - 0.0304).abs() < 1e-12);
        assert!((ce.r_etf - 0.0176).abs() < 1e-12);
        assert!((ce.ce + 0.0048).abs() < 1e-12);
        assert_eq!(ce.n_periods, 2);
    }

    #[test]
    fn compounding_effect_single_period_is_zero() {
        for beta in [-3, -2, -1, 2, 3, 5] {
            let spec = LeverageSpec::synthetic(beta).unwrap();
            let ce = compounding_effect(&series(&[0.0123]), &spec, None).unwrap();
            assert!(ce.ce.abs() < 1e-15, "beta={beta} ce={}", ce.ce);
        }
    }

    #[test]
    fn effective_leverage_example() {
        let etf = series(&[0.06, -0.04]);
        let spec = LeverageSpec::synthetic(2).unwrap();
        let letf = apply_leverage(&etf, &spec, None).unwrap();
        let lev = effective_leverage(&etf, &letf).unwrap();
        assert!((lev - 0.0304 / 0.0176).abs() < 1e-12);
        assert!((lev - 1.7273).abs() < 1e-4);
    }

    #[test]
    fn effective_leverage_of_series_against_itself_is_one() {
        let s = series(&[0.01, 0.02, -0.005]);
        assert!((effective_leverage(&s, &s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn effective_leverage_triple_frictionless() {
        let etf = series(&[0.01, 0.01]);
        let spec = LeverageSpec::synthetic(3).unwrap();
        let letf = apply_leverage(&etf, &spec, None).unwrap();
        let expect = (1.03f64 * 1.03 - 1.0) / (1.01f64 * 1.01 - 1.0);
        assert!((effective_leverage(&etf, &letf).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 3.0298507).abs() < 1e-6);
    }

    #[test]
    fn effective_leverage_rejects_flat_benchmark() {
        let etf = series(&[0.0, 0.0]);
        let letf = series(&[0.01, 0.01]);
        assert!(matches!(
            effective_leverage(&etf, &letf),
            Err(Error::DegenerateBenchmark { .. })
        ));
    }

    #[test]
    fn aggregate_periods_pairs() {
        let out = aggregate_periods(&series(&[0.01, 0.02, 0.03, 0.04]), 2).unwrap();
        assert!((out.values()[0] - 0.0302).abs() < 1e-12);
        assert!((out.values()[1] - 0.0712).abs() < 1e-12);
    }

    #[test]
    fn aggregate_periods_block_one_is_identity() {
        let s = series(&[0.1, -0.05, 0.02]);
        assert_eq!(aggregate_periods(&s, 1).unwrap(), s);
    }

    #[test]
    fn aggregate_periods_drops_trailing_partial_block() {
        let out = aggregate_periods(&series(&[0.1, -0.1, 0.05]), 2).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.values()[0] - (1.1 * 0.9 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn aggregate_periods_rejects_zero_block() {
        assert!(aggregate_periods(&series(&[0.01]), 0).is_err());
    }

    #[test]
    fn aggregate_periods_stamps_block_end_dates() {
        let dates: Vec<NaiveDate> = (1..=4)
            .map(|d| NaiveDate::from_ymd_opt(2021, 1, d).unwrap())
            .collect();
        let s = ReturnSeries::with_dates(vec![0.01, 0.02, 0.03, 0.04], dates).unwrap();
        let out = aggregate_periods(&s, 2).unwrap();
        let expect = [
            NaiveDate::from_ymd_opt(2021, 1, 2).unwrap(),
            NaiveDate::from_ymd_opt(2021, 1, 4).unwrap(),
        ];
        assert_eq!(out.dates().unwrap(), &expect);
    }

    #[test]
    fn ce_from_slice_matches_series_route() {
        let vals = [0.013, -0.007, 0.021, 0.0, -0.004];
        let spec = LeverageSpec::new(3, 0.0001, 0.0).unwrap();
        let a = ce_from_slice(&vals, &spec, None).unwrap();
        let b = compounding_effect(&series(&vals), &spec, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slice_by_date_is_inclusive() {
        let dates: Vec<NaiveDate> = (1..=5)
            .map(|d| NaiveDate::from_ymd_opt(2022, 6, d).unwrap())
            .collect();
        let s = ReturnSeries::with_dates(vec![0.01, 0.02, 0.03, 0.04, 0.05], dates).unwrap();
        let cut = s
            .slice_by_date(
                NaiveDate::from_ymd_opt(2022, 6, 2).unwrap(),
                NaiveDate::from_ymd_opt(2022, 6, 4).unwrap(),
            )
            .unwrap();
        assert_eq!(cut.values(), &[0.02, 0.03, 0.04]);
    }
}
