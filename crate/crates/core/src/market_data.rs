//! Price ingestion and the return/volatility transforms derived from it.

use std::io::Read;
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Adjusted-close prices for one ticker on strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub ticker: String,
    timestamps: Vec<NaiveDate>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, timestamps: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(invalid(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!("timestamps not strictly increasing at {}", w[1])));
        }
        if let Some(p) = prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Data(format!("price {p} is not positive")));
        }
        Ok(Self {
            ticker: ticker.into(),
            timestamps,
            prices,
        })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Index range of the rows whose date lies in `range`.
    pub fn indices_in(&self, range: DateRange) -> Range<usize> {
        let lo = self.timestamps.partition_point(|d| *d < range.start);
        let hi = self.timestamps.partition_point(|d| *d <= range.end);
        lo..hi.max(lo)
    }

    pub fn slice(&self, rows: Range<usize>) -> Self {
        Self {
            ticker: self.ticker.clone(),
            timestamps: self.timestamps[rows.clone()].to_vec(),
            prices: self.prices[rows].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub timestamps: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    /// Returns without dates, e.g. synthetic draws.
    pub fn from_values(values: Vec<f64>) -> Self {
        let base = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let timestamps = (0..values.len())
            .map(|i| base + chrono::Days::new(i as u64))
            .collect();
        Self { timestamps, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilitySeries {
    pub timestamps: Vec<NaiveDate>,
    pub values: Vec<f64>,
    pub window: usize,
    pub annualization_factor: f64,
}

/// Inclusive calendar-date interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(invalid(format!("empty date range {start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }
}

impl std::str::FromStr for DateRange {
    type Err = Error;

    /// Parses `yyyy-mm-dd..yyyy-mm-dd`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| invalid(format!("date range `{s}` must look like A..B")))?;
        let parse = |t: &str| {
            NaiveDate::parse_from_str(t.trim(), "%Y-%m-%d")
                .map_err(|e| invalid(format!("bad date `{t}`: {e}")))
        };
        DateRange::new(parse(a)?, parse(b)?)
    }
}

impl std::fmt::Display for DateRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Column names used when reading price CSVs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub date_col: String,
    pub price_col: String,
    /// Optional observed-volatility column carried alongside the prices.
    pub vol_col: Option<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date_col: "date".into(),
            price_col: "adj_close".into(),
            vol_col: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCsv {
    pub series: PriceSeries,
    /// Rows dropped because the price was missing, unparseable or not positive.
    pub dropped: usize,
    /// Values of the volatility column, row-aligned with `series`.
    pub volatility: Option<Vec<f64>>,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let ticker = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, schema, ticker).map_err(|e| e.context(path.display().to_string()))
}

pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, ticker: impl Into<String>) -> Result<LoadedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("required column `{name}` absent")))
    };
    let date_idx = column(&schema.date_col)?;
    let price_idx = column(&schema.price_col)?;
    let vol_idx = schema.vol_col.as_deref().map(column).transpose()?;

    let mut rows: Vec<(NaiveDate, f64, f64)> = Vec::new();
    let mut dropped = 0;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|e| {
            Error::Data(format!("row {}: unparseable date `{raw_date}`: {e}", line + 2))
        })?;
        let price = parse_positive(record.get(price_idx));
        let vol = match vol_idx {
            Some(i) => parse_nonnegative(record.get(i)),
            None => Some(0.0),
        };
        match (price, vol) {
            (Some(p), Some(v)) => rows.push((date, p, v)),
            _ => dropped += 1,
        }
    }
    if rows.len() < 2 {
        return Err(Error::Data(format!("need at least 2 valid rows, found {}", rows.len())));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Data(format!("duplicate date {}", w[0].0)));
    }
    let volatility = vol_idx.map(|_| rows.iter().map(|r| r.2).collect());
    let series = PriceSeries::new(
        ticker,
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
    )?;
    Ok(LoadedCsv {
        series,
        dropped,
        volatility,
    })
}

fn parse_positive(field: Option<&str>) -> Option<f64> {
    field
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|p| p.is_finite() && *p > 0.0)
}

fn parse_nonnegative(field: Option<&str>) -> Option<f64> {
    field
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|p| p.is_finite() && *p >= 0.0)
}

/// Writes `date,adj_close` rows, the canonical schema.
pub fn write_csv(series: &PriceSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "adj_close"])?;
    for (d, p) in series.timestamps.iter().zip(&series.prices) {
        w.write_record([d.to_string(), p.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// `values[i] = ln(p[i+1] / p[i])`, dated at the later observation.
pub fn log_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    if p.len() < 2 {
        return Err(invalid(format!("need at least 2 prices, got {}", p.len())));
    }
    let values = p.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries {
        timestamps: p.timestamps[1..].to_vec(),
        values,
    })
}

/// Sample standard deviation (divisor n-1) over a trailing window, scaled by
/// `sqrt(annualization)`. Each value is dated at the last return in its window.
pub fn rolling_volatility(r: &ReturnSeries, window: usize, annualization: f64) -> Result<VolatilitySeries> {
    if window < 2 {
        return Err(invalid(format!("window must be at least 2, got {window}")));
    }
    if r.len() < window {
        return Err(invalid(format!(
            "window {window} larger than return series of length {}",
            r.len()
        )));
    }
    if !(annualization > 0.0) {
        return Err(invalid("annualization factor must be positive"));
    }
    let scale = annualization.sqrt();
    let values = r
        .values
        .windows(window)
        .map(|w| sample_std(w) * scale)
        .collect();
    Ok(VolatilitySeries {
        timestamps: r.timestamps[window - 1..].to_vec(),
        values,
        window,
        annualization_factor: annualization,
    })
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn sample_std(xs: &[f64]) -> f64 {
    sample_var(xs).max(0.0).sqrt()
}

/// Prices observed on the dates of `vol`, i.e. the `(S, V)` pairs the
/// reaction model is fitted to.
pub fn align_prices(p: &PriceSeries, vol: &VolatilitySeries) -> Result<Vec<f64>> {
    vol.timestamps
        .iter()
        .map(|d| {
            p.timestamps
                .binary_search(d)
                .map(|i| p.prices[i])
                .map_err(|_| Error::Data(format!("no price on {d}")))
        })
        .collect()
}

/// Rows inside `train` and inside `test`. Ranges must not overlap and
/// `train` must end before `test` starts.
pub fn split(p: &PriceSeries, train: DateRange, test: DateRange) -> Result<(PriceSeries, PriceSeries)> {
    if train.end >= test.start {
        return Err(invalid(format!("train range {train} must end before test range {test}")));
    }
    let tr = p.indices_in(train);
    let te = p.indices_in(test);
    if tr.is_empty() {
        return Err(Error::Data(format!("no rows in train range {train}")));
    }
    if te.is_empty() {
        return Err(Error::Data(format!("no rows in test range {test}")));
    }
    Ok((p.slice(tr), p.slice(te)))
}
