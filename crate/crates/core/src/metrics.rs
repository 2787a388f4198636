//! Forecast accuracy metrics and the Ljung-Box portmanteau test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::chi_square_sf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    /// Percent; `None` when every actual value is zero.
    pub mape: Option<f64>,
    pub mape_skipped: usize,
    /// `None` when the actual values are constant.
    pub r2: Option<f64>,
    pub n: usize,
}

impl MetricsReport {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        let mse = mse(actual, predicted)?;
        let m = mape(actual, predicted);
        let (mape, mape_skipped) = match m {
            Ok(v) => (Some(v.value), v.skipped),
            Err(_) => (None, actual.len()),
        };
        Ok(Self {
            mse,
            rmse: mse.sqrt(),
            mae: mae(actual, predicted)?,
            mape,
            mape_skipped,
            r2: r2(actual, predicted).ok(),
            n: actual.len(),
        })
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Mse => Some(self.mse),
            Metric::Rmse => Some(self.rmse),
            Metric::Mae => Some(self.mae),
            Metric::Mape => self.mape,
            Metric::R2 => self.r2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mse,
    Rmse,
    Mae,
    Mape,
    R2,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Mse, Metric::Rmse, Metric::Mae, Metric::Mape, Metric::R2];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Rmse => "rmse",
            Metric::Mae => "mae",
            Metric::Mape => "mape",
            Metric::R2 => "r2",
        }
    }
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let ss: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(ss / actual.len() as f64)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    mse(actual, predicted).map(f64::sqrt)
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(s / actual.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mape {
    pub value: f64,
    pub skipped: usize,
}

/// Mean absolute percentage error over the non-zero actual values.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<Mape> {
    check(actual, predicted)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (a, p) in actual.iter().zip(predicted) {
        if *a == 0.0 {
            continue;
        }
        sum += ((a - p) / a).abs();
        used += 1;
    }
    if used == 0 {
        return Err(Error::Undefined("MAPE: every actual value is zero"));
    }
    Ok(Mape {
        value: 100.0 * sum / used as f64,
        skipped: actual.len() - used,
    })
}

pub fn r2(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check(actual, predicted)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Undefined("R2: actual values are constant"));
    }
    let ss_res: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

struct Centered {
    dev: Vec<f64>,
    ss: f64,
}

fn centered(series: &[f64]) -> Result<Centered> {
    if series.is_empty() {
        return Err(Error::Empty);
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let ss: f64 = dev.iter().map(|d| d * d).sum();
    if !(ss > 0.0) {
        return Err(Error::Undefined("autocorrelation of a zero-variance series"));
    }
    Ok(Centered { dev, ss })
}

impl Centered {
    fn rho(&self, lag: usize) -> f64 {
        let d = &self.dev;
        let num: f64 = d[..d.len() - lag].iter().zip(&d[lag..]).map(|(a, b)| a * b).sum();
        num / self.ss
    }
}

pub fn autocorrelation(series: &[f64], lag: usize) -> Result<f64> {
    if lag >= series.len() {
        return Err(Error::invalid(format!(
            "lag {lag} must be below the series length {}",
            series.len()
        )));
    }
    Ok(centered(series)?.rho(lag))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub q: f64,
    pub h: usize,
    pub p_value: f64,
    /// Autocorrelations at lags `1..=h`.
    pub autocorrs: Vec<f64>,
}

pub fn ljung_box(residuals: &[f64], h: usize) -> Result<LjungBoxResult> {
    if h == 0 {
        return Err(Error::invalid("lag count must be >= 1"));
    }
    let n = residuals.len();
    if n <= h {
        return Err(Error::invalid(format!(
            "lag count {h} must be below the series length {n}"
        )));
    }
    let c = centered(residuals)?;
    let autocorrs: Vec<f64> = (1..=h).map(|r| c.rho(r)).collect();
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * autocorrs
            .iter()
            .enumerate()
            .map(|(i, rho)| rho * rho / (nf - (i + 1) as f64))
            .sum::<f64>();
    Ok(LjungBoxResult {
        q,
        h,
        p_value: chi_square_sf(q, h as f64).clamp(0.0, 1.0),
        autocorrs,
    })
}
