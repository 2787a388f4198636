//! Series ingestion and preparation: CSV loading, gap filling, outlier
//! flagging, min-max scaling, windowing and chronological splitting.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complete, ordered series of real observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub values: Vec<f64>,
    /// Seconds since the Unix epoch, strictly increasing when present.
    pub timestamps: Option<Vec<i64>>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
            timestamps: None,
        }
    }

    pub fn with_timestamps(mut self, timestamps: Vec<i64>) -> Result<Self> {
        check_timestamps(&timestamps, self.values.len())?;
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Marks the given indices as missing so they can be re-filled by
    /// [`interpolate_missing`].
    pub fn mask(&self, indices: &BTreeSet<usize>) -> RawSeries {
        RawSeries {
            name: self.name.clone(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| (!indices.contains(&i)).then_some(v))
                .collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            name: self.name.clone(),
            values,
            timestamps: self.timestamps.clone(),
        }
    }
}

/// A series as read from disk, where any cell may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub name: String,
    pub values: Vec<Option<f64>>,
    pub timestamps: Option<Vec<i64>>,
}

impl RawSeries {
    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Converts to a complete series, failing if any value is missing.
    pub fn into_complete(self) -> Result<TimeSeries> {
        if let Some(index) = self.values.iter().position(Option::is_none) {
            return Err(Error::invalid(format!(
                "series {} has a missing value at index {index}",
                self.name
            )));
        }
        Ok(TimeSeries {
            name: self.name,
            values: self.values.into_iter().flatten().collect(),
            timestamps: self.timestamps,
        })
    }
}

/// Fixed-length input window, oldest value first.
#[derive(Debug, Clone, PartialEq)]
pub struct Window(Vec<f64>);

impl Window {
    pub fn new(points: Vec<f64>) -> Self {
        Self(points)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops the oldest value and appends `value`; the length is unchanged.
    pub fn push(&mut self, value: f64) {
        if self.0.is_empty() {
            return;
        }
        self.0.remove(0);
        self.0.push(value);
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

impl From<&[f64]> for Window {
    fn from(points: &[f64]) -> Self {
        Self(points.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min: f64,
    pub max: f64,
}

impl ScalingParams {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::NonFinite("series values"));
        }
        if max <= min {
            return Err(Error::DegenerateRange(min));
        }
        Ok(Self { min, max })
    }

    /// Like [`ScalingParams::fit`], but a constant series maps onto `[c, c + 1]`
    /// so it normalizes to all zeros instead of failing.
    pub fn fit_or_unit(values: &[f64]) -> Result<Self> {
        match Self::fit(values) {
            Err(Error::DegenerateRange(c)) => Ok(Self { min: c, max: c + 1.0 }),
            other => other,
        }
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn scale(&self, x: f64) -> f64 {
        (x - self.min) / self.range()
    }

    pub fn unscale(&self, x: f64) -> f64 {
        x * self.range() + self.min
    }
}

/// Column selector: a header name or a zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl ColumnRef {
    /// Parses a user-supplied selector. Purely numeric text is an index.
    pub fn parse(s: &str) -> Self {
        s.trim()
            .parse::<usize>()
            .map(ColumnRef::Index)
            .unwrap_or_else(|_| ColumnRef::Name(s.trim().to_string()))
    }

    fn resolve(&self, headers: &csv::StringRecord, path: &Path) -> Result<usize> {
        match self {
            ColumnRef::Name(name) => headers.iter().position(|h| h.trim() == name),
            ColumnRef::Index(i) => (*i < headers.len()).then_some(*i),
        }
        .ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: self.to_string(),
        })
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "#{i}"),
            ColumnRef::Name(n) => write!(f, "{n:?}"),
        }
    }
}

fn is_missing_token(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "?")
}

/// Loads one value column (and optionally a timestamp column) from a
/// comma-delimited file with a single header row.
pub fn load_csv(
    path: impl AsRef<Path>,
    value_column: &ColumnRef,
    timestamp_column: Option<&ColumnRef>,
) -> Result<RawSeries> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let value_idx = value_column.resolve(&headers, path)?;
    let ts_idx = timestamp_column
        .map(|c| c.resolve(&headers, path))
        .transpose()?;

    let mut values = Vec::new();
    let mut timestamps = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let cell = record.get(value_idx).unwrap_or("").trim();
        values.push(if is_missing_token(cell) {
            None
        } else {
            cell.parse::<f64>().ok().filter(|v| v.is_finite())
        });
        if let Some(ti) = ts_idx {
            let raw = record.get(ti).unwrap_or("").trim();
            let ts = parse_timestamp(raw).ok_or_else(|| Error::Row {
                path: path.to_path_buf(),
                row: row + 2,
                message: format!("unparseable timestamp {raw:?}"),
            })?;
            timestamps.push(ts);
        }
    }
    if values.iter().all(Option::is_none) {
        return Err(Error::NoRows {
            path: path.to_path_buf(),
        });
    }
    let timestamps = match ts_idx {
        Some(_) => {
            check_timestamps(&timestamps, values.len())?;
            Some(timestamps)
        }
        None => None,
    };
    let name = match value_column {
        ColumnRef::Name(n) => n.clone(),
        ColumnRef::Index(i) => headers.get(*i).unwrap_or_default().trim().to_string(),
    };
    Ok(RawSeries {
        name,
        values,
        timestamps,
    })
}

fn parse_timestamp(raw: &str) -> Option<i64> {
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

fn check_timestamps(ts: &[i64], len: usize) -> Result<()> {
    if ts.len() != len {
        return Err(Error::LengthMismatch {
            left: ts.len(),
            right: len,
        });
    }
    if let Some(i) = ts.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "timestamps not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

/// Fills every missing position with the mean of the valid values among its
/// `n` nearest neighbors on each side.
///
/// With all `2n` neighbors present this is exactly the symmetric average
/// `sum(x[t-i] + x[t+i]) / 2n`. A position lacking any valid neighbor within
/// distance `n` on either side is an error.
pub fn interpolate_missing(series: &RawSeries, n: usize) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::invalid("interpolation neighborhood must be >= 1"));
    }
    let vals = &series.values;
    let mut out = Vec::with_capacity(vals.len());
    for (t, v) in vals.iter().enumerate() {
        if let Some(v) = v {
            out.push(*v);
            continue;
        }
        let left: Vec<f64> = (1..=n)
            .filter_map(|i| t.checked_sub(i).and_then(|j| vals[j]))
            .collect();
        let right: Vec<f64> = (1..=n)
            .filter_map(|i| vals.get(t + i).copied().flatten())
            .collect();
        for (side, found) in [("left", &left), ("right", &right)] {
            if found.is_empty() {
                return Err(Error::BoundaryGap {
                    index: t,
                    neighbors: n,
                    side,
                });
            }
        }
        let sum: f64 = left.iter().chain(right.iter()).sum();
        out.push(sum / (left.len() + right.len()) as f64);
    }
    Ok(TimeSeries {
        name: series.name.clone(),
        values: out,
        timestamps: series.timestamps.clone(),
    })
}

/// Indices whose distance from the sample mean exceeds `k` sample standard
/// deviations. Degenerate series yield no flags.
pub fn flag_outliers(series: &TimeSeries, k: f64) -> BTreeSet<usize> {
    let xs = &series.values;
    let n = xs.len();
    if n < 2 {
        return BTreeSet::new();
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    if !(std > 0.0) {
        return BTreeSet::new();
    }
    xs.iter()
        .enumerate()
        .filter(|(_, x)| (*x - mean).abs() > k * std)
        .map(|(i, _)| i)
        .collect()
}

pub fn normalize_minmax(series: &TimeSeries) -> Result<(TimeSeries, ScalingParams)> {
    let params = ScalingParams::fit(&series.values)?;
    Ok((normalize_with(series, &params), params))
}

/// Scales a series with previously fitted parameters (e.g. a test split with
/// the training split's range). Output may fall outside `[0, 1]`.
pub fn normalize_with(series: &TimeSeries, params: &ScalingParams) -> TimeSeries {
    series.with_values(series.values.iter().map(|&x| params.scale(x)).collect())
}

pub fn denormalize(values: &[f64], params: &ScalingParams) -> Vec<f64> {
    values.iter().map(|&x| params.unscale(x)).collect()
}

/// `(window ending at t, value at t + 1)` pairs in chronological order.
pub fn sliding_windows(series: &TimeSeries, window: usize) -> Result<Vec<(Window, f64)>> {
    if window == 0 {
        return Err(Error::invalid("window size must be >= 1"));
    }
    if series.len() <= window {
        return Err(Error::TooShort {
            len: series.len(),
            required: window,
        });
    }
    Ok(series
        .values
        .windows(window + 1)
        .map(|w| (Window::from(&w[..window]), w[window]))
        .collect())
}

/// Chronological split; the first `floor(fraction * n)` points train.
pub fn train_test_split(
    series: &TimeSeries,
    train_fraction: f64,
    window: usize,
) -> Result<(TimeSeries, TimeSeries)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = series.len();
    let cut = (train_fraction * n as f64).floor() as usize;
    let shortest = cut.min(n - cut);
    if shortest <= window {
        return Err(Error::TooShort {
            len: shortest,
            required: window,
        });
    }
    let split = |range: std::ops::Range<usize>| TimeSeries {
        name: series.name.clone(),
        values: series.values[range.clone()].to_vec(),
        timestamps: series.timestamps.as_ref().map(|t| t[range].to_vec()),
    };
    Ok((split(0..cut), split(cut..n)))
}

/// Unbiased sample variance; zero for fewer than two points.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}
