//! Price-CSV ingestion, return construction, date alignment, synthetic
//! LETFs, regime-window compounding tables and rolling compounding effects.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::RollingSeries;
use crate::series::{
    apply_leverage, compounding_effect, cumulative_return, LeverageSpec, ReturnSeries,
};

/// Dated adjusted-close prices, sorted ascending with unique dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PricedSeries {
    pub fn new(mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if rows.iter().any(|&(_, p)| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("prices must be positive".into()));
        }
        rows.sort_by_key(|&(d, _)| d);
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate dates".into()));
        }
        let (dates, prices) = rows.into_iter().unzip();
        Ok(Self { dates, prices })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Reads a `date,adj_close` CSV (ISO-8601 dates, decimal prices) into a
/// sorted [`PricedSeries`]. Malformed rows are reported with their file row
/// number; zero/negative prices and duplicate dates are rejected.
pub fn load_price_csv<P: AsRef<Path>>(path: P) -> Result<PricedSeries> {
    let path_str = path.as_ref().display().to_string();
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    {
        let headers = reader.headers()?;
        let names: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
        if names.len() < 2 || names[0] != "date" || names[1] != "adj_close" {
            return Err(Error::Data {
                path: path_str,
                row: 1,
                reason: format!("expected header 'date,adj_close', got '{}'", names.join(",")),
            });
        }
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based file row behind the header
        let record = record?;
        let date_field = record.get(0).unwrap_or("").trim();
        let price_field = record.get(1).unwrap_or("").trim();
        let date: NaiveDate = date_field.parse().map_err(|_| Error::Data {
            path: path_str.clone(),
            row,
            reason: format!("unparseable date '{date_field}'"),
        })?;
        let price: f64 = price_field.parse().map_err(|_| Error::Data {
            path: path_str.clone(),
            row,
            reason: format!("unparseable price '{price_field}'"),
        })?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::Data {
                path: path_str.clone(),
                row,
                reason: format!("non-positive price {price}"),
            });
        }
        rows.push((date, price));
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|&(d, _)| d);
    if let Some(w) = sorted.windows(2).position(|w| w[0].0 == w[1].0) {
        let dup = sorted[w].0;
        let row = rows.iter().position(|&(d, _)| d == dup).map(|i| i + 2).unwrap_or(0);
        return Err(Error::Data {
            path: path_str,
            row,
            reason: format!("duplicate date {dup}"),
        });
    }
    PricedSeries::new(rows)
}

/// Daily simple returns `p_t / p_{t-1} - 1`, stamped at date t.
pub fn to_returns(prices: &PricedSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: prices.len(),
        });
    }
    let mut values = Vec::with_capacity(prices.len() - 1);
    for w in prices.prices().windows(2) {
        values.push(w[1] / w[0] - 1.0);
    }
    ReturnSeries::with_dates(values, prices.dates()[1..].to_vec())
}

/// Inner join of two dated series on their dates, order preserved.
pub fn align(a: &ReturnSeries, b: &ReturnSeries) -> Result<(ReturnSeries, ReturnSeries)> {
    let da = a
        .dates()
        .ok_or_else(|| Error::InvalidParameter("align needs dated series".into()))?;
    let db = b
        .dates()
        .ok_or_else(|| Error::InvalidParameter("align needs dated series".into()))?;
    let in_b: std::collections::BTreeSet<NaiveDate> = db.iter().copied().collect();
    let mut dates = Vec::new();
    let mut va = Vec::new();
    for (i, d) in da.iter().enumerate() {
        if in_b.contains(d) {
            dates.push(*d);
            va.push(a.values()[i]);
        }
    }
    if dates.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let lookup: BTreeMap<NaiveDate, f64> = db.iter().copied().zip(b.values().iter().copied()).collect();
    let vb: Vec<f64> = dates.iter().map(|d| lookup[d]).collect();
    Ok((
        ReturnSeries::with_dates(va, dates.clone())?,
        ReturnSeries::with_dates(vb, dates)?,
    ))
}

/// Frictionless leveraged replication of a benchmark series (or with the
/// fee/tracking the spec carries); dates are preserved and wipeouts are
/// reported with their date.
pub fn synthetic_letf(etf: &ReturnSeries, spec: &LeverageSpec) -> Result<ReturnSeries> {
    apply_leverage(etf, spec, None)
}

/// A labelled analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeWindow {
    pub label: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl RegimeWindow {
    pub fn new(label: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidParameter(format!(
                "window start {start} must precede end {end}"
            )));
        }
        Ok(Self {
            label: label.into(),
            start,
            end,
        })
    }

    /// Six commonly studied market phases, month-start to month-end.
    pub fn defaults() -> Vec<RegimeWindow> {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
        vec![
            RegimeWindow::new("Financial Crisis", d(2007, 10, 1), d(2009, 3, 31)).unwrap(),
            RegimeWindow::new("Post-Crisis Recovery", d(2009, 4, 1), d(2013, 3, 31)).unwrap(),
            RegimeWindow::new("Sideways Market", d(2014, 2, 1), d(2015, 9, 30)).unwrap(),
            RegimeWindow::new("COVID-19 Pandemic", d(2020, 2, 1), d(2020, 3, 31)).unwrap(),
            RegimeWindow::new("Post-COVID Recovery", d(2020, 4, 1), d(2021, 12, 31)).unwrap(),
            RegimeWindow::new("2022 Bear Market", d(2022, 1, 1), d(2022, 12, 31)).unwrap(),
        ]
    }
}

/// Where the leveraged leg of a regime table comes from.
#[derive(Debug, Clone)]
pub enum TableMode<'a> {
    /// Frictionless beta-scaled replication of the benchmark.
    Synthetic,
    /// Realized LETF return series keyed by leverage ratio; betas without a
    /// series render as absent cells.
    Realized(&'a BTreeMap<i32, ReturnSeries>),
}

/// Compounding effects per (window, beta). `None` cells mark products with
/// no data in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct CeTable {
    pub windows: Vec<RegimeWindow>,
    pub betas: Vec<i32>,
    /// Row-major over windows; `cells[w][b]` pairs `windows[w]` with
    /// `betas[b]`.
    pub cells: Vec<Vec<Option<f64>>>,
    /// Windows clipped to the benchmark's date range.
    pub clipped: Vec<String>,
}

impl CeTable {
    /// CSV rows `regime,start,end,beta=..,..` with `---` for absent cells.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        write!(w, "regime,start,end")?;
        for b in &self.betas {
            write!(w, ",beta={b}")?;
        }
        writeln!(w)?;
        for (win, row) in self.windows.iter().zip(&self.cells) {
            write!(w, "{},{},{}", win.label, win.start, win.end)?;
            for cell in row {
                match cell {
                    Some(v) => write!(w, ",{v}")?,
                    None => write!(w, ",---")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Compounding effect of each regime window at each leverage ratio.
///
/// Synthetic mode replicates the benchmark frictionlessly; realized mode
/// aligns the supplied LETF series to the benchmark inside the window and
/// compares cumulative returns. Windows reaching outside the data range are
/// clipped (and recorded); windows with no benchmark data at all error.
pub fn regime_table(
    benchmark: &ReturnSeries,
    windows: &[RegimeWindow],
    betas: &[i32],
    mode: &TableMode<'_>,
) -> Result<CeTable> {
    let dates = benchmark
        .dates()
        .ok_or_else(|| Error::InvalidParameter("regime table needs a dated benchmark".into()))?;
    let (first, last) = (dates[0], dates[dates.len() - 1]);
    let mut cells = Vec::with_capacity(windows.len());
    let mut clipped = Vec::new();
    for win in windows {
        if win.start < first || win.end > last {
            clipped.push(win.label.clone());
        }
        let slice = benchmark.slice_by_date(win.start, win.end)?;
        if slice.is_empty() {
            return Err(Error::EmptyWindow {
                label: win.label.clone(),
            });
        }
        let mut row = Vec::with_capacity(betas.len());
        for &beta in betas {
            let cell = match mode {
                TableMode::Synthetic => {
                    let spec = LeverageSpec::synthetic(beta)?;
                    Some(compounding_effect(&slice, &spec, None)?.ce)
                }
                TableMode::Realized(map) => match map.get(&beta) {
                    Some(letf) => realized_window_ce(&slice, letf, beta, win)?,
                    None => None,
                },
            };
            row.push(cell);
        }
        cells.push(row);
    }
    Ok(CeTable {
        windows: windows.to_vec(),
        betas: betas.to_vec(),
        cells,
        clipped,
    })
}

fn realized_window_ce(
    bench_slice: &ReturnSeries,
    letf: &ReturnSeries,
    beta: i32,
    win: &RegimeWindow,
) -> Result<Option<f64>> {
    let letf_slice = letf.slice_by_date(win.start, win.end)?;
    if letf_slice.is_empty() {
        return Ok(None);
    }
    // a product that does not span the benchmark's window (launched late,
    // delisted early) has no continuous series for it: absent cell
    let bench_dates = bench_slice.dates().expect("windowed slice of a dated series");
    let letf_dates = letf_slice.dates().expect("windowed slice of a dated series");
    if letf_dates[0] > bench_dates[0] || letf_dates[letf_dates.len() - 1] < bench_dates[bench_dates.len() - 1] {
        return Ok(None);
    }
    let (bench, letf) = match align(bench_slice, &letf_slice) {
        Ok(pair) => pair,
        Err(Error::EmptyIntersection) => return Ok(None),
        Err(e) => return Err(e),
    };
    let r_letf = cumulative_return(&letf)?;
    let r_etf = cumulative_return(&bench)?;
    Ok(Some(r_letf - f64::from(beta) * r_etf))
}

/// Leveraged leg of a rolling compounding-effect pass.
#[derive(Debug, Clone)]
pub enum RollingTarget<'a> {
    /// Synthetic frictionless replication at this leverage.
    Beta(i32),
    /// Realized LETF returns, aligned to the benchmark by date.
    Series(&'a ReturnSeries),
}

/// Compounding effect over every sliding window (stride 1), stamped at the
/// window's last date when the benchmark is dated.
pub fn rolling_ce(
    benchmark: &ReturnSeries,
    target: &RollingTarget<'_>,
    window: usize,
) -> Result<RollingSeries> {
    if window < 1 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    let (bench, letf): (ReturnSeries, Option<ReturnSeries>) = match target {
        RollingTarget::Beta(_) => (benchmark.clone(), None),
        RollingTarget::Series(letf) => {
            let (b, l) = align(benchmark, letf)?;
            (b, Some(l))
        }
    };
    let n = bench.len();
    if n < window {
        return Err(Error::InsufficientData {
            required: window,
            actual: n,
        });
    }
    let mut values = Vec::with_capacity(n - window + 1);
    for start in 0..=(n - window) {
        let bench_win = &bench.values()[start..start + window];
        let ce = match (&target, &letf) {
            (RollingTarget::Beta(beta), None) => {
                let spec = LeverageSpec::synthetic(*beta)?;
                crate::series::ce_from_slice(bench_win, &spec, None)?.ce
            }
            (RollingTarget::Series(_), Some(letf)) => {
                let letf_win = &letf.values()[start..start + window];
                let beta = infer_beta(bench_win, letf_win);
                let r_letf: f64 = letf_win.iter().fold(1.0, |acc, &x| acc * (1.0 + x)) - 1.0;
                let r_etf: f64 = bench_win.iter().fold(1.0, |acc, &x| acc * (1.0 + x)) - 1.0;
                r_letf - beta * r_etf
            }
            _ => unreachable!(),
        };
        values.push(ce);
    }
    let dates = bench.dates().map(|d| d[window - 1..].to_vec());
    Ok(RollingSeries {
        window,
        dates,
        values,
    })
}

/// Daily-return regression slope of the realized LETF on the benchmark,
/// rounded to the nearest nonzero integer leverage.
fn infer_beta(bench: &[f64], letf: &[f64]) -> f64 {
    let mb = crate::stats::sample_mean(bench);
    let ml = crate::stats::sample_mean(letf);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&b, &l) in bench.iter().zip(letf) {
        sxx += (b - mb) * (b - mb);
        sxy += (b - mb) * (l - ml);
    }
    if sxx <= 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let rounded = slope.round();
    if rounded == 0.0 {
        slope.signum().max(-1.0).min(1.0)
    } else {
        rounded
    }
}
