//! Fixed-variance baseline and the dataset-by-model benchmark grid.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::GarchParams;
use crate::metrics::{ljung_box, LjungBoxResult, Metric, MetricsReport};
use crate::pipeline::{rolling_forecast, train_model, ModelConfig, TrainedModel, VarianceSpec};
use crate::seed::derive_seed;
use crate::series::{
    flag_outliers, interpolate_missing, sample_variance, train_test_split, ColumnRef, RawSeries,
    ScalingParams, TimeSeries,
};

/// Same pipeline with the variance interval frozen at the training sample
/// variance and no GARCH parameters optimized.
pub fn fixed_variance_baseline(series: &TimeSeries, config: &ModelConfig) -> Result<TrainedModel> {
    Ok(train_model(series, config, VarianceSpec::Fixed)?.0)
}

/// Sample variance of the series after the min-max scaling training applies.
pub fn normalized_sample_variance(series: &TimeSeries) -> Result<f64> {
    let scaling = ScalingParams::fit_or_unit(&series.values)?;
    let xs: Vec<f64> = series.values.iter().map(|&x| scaling.scale(x)).collect();
    Ok(sample_variance(&xs))
}

/// GARCH parameters that keep the variance constant at the normalized
/// training sample variance.
pub fn pinned_constant_garch(series: &TimeSeries) -> Result<GarchParams> {
    let s2 = normalized_sample_variance(series)?;
    Ok(GarchParams {
        omega: s2.max(crate::garch::OMEGA_FLOOR),
        alpha1: 0.0,
        beta1: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    It2fisGarch,
    FixedVariance,
    /// Scores a two-column (actual, predicted) file; `{dataset}` in the path
    /// is replaced by the dataset name.
    External { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ModelKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub raw: RawSeries,
}

impl Dataset {
    pub fn from_series(series: TimeSeries) -> Self {
        Self {
            name: series.name.clone(),
            raw: RawSeries {
                name: series.name,
                values: series.values.into_iter().map(Some).collect(),
                timestamps: series.timestamps,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub model: ModelConfig,
    pub train_fraction: f64,
    /// Neighbors averaged on each side when filling missing values.
    pub interpolate_neighbors: usize,
    /// Replace points more than `k` sample deviations from the mean.
    pub outlier_k: Option<f64>,
    pub ljung_box_lags: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            train_fraction: 0.8,
            interpolate_neighbors: 1,
            outlier_k: None,
            ljung_box_lags: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub origin_index: usize,
    pub representative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub model: String,
    pub seed: u64,
    pub metrics: Option<MetricsReport>,
    pub ljung_box: Option<LjungBoxResult>,
    pub training_mse: Option<f64>,
    /// Share of one-step actuals inside `prediction +/- sqrt(q_high * point variance)`.
    pub coverage: Option<f64>,
    pub trace: Vec<TracePoint>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub config: BenchmarkConfig,
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub cells: Vec<CellResult>,
}

impl BenchmarkReport {
    pub fn cell(&self, dataset: &str, model: &str) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.model == model)
    }

    pub fn all_failed(&self) -> bool {
        self.cells.iter().all(|c| !c.is_ok())
    }

    /// One metric as a dataset-by-model CSV table; blank cells are failures
    /// or undefined values.
    pub fn grid_csv(&self, metric: Metric) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |source| Error::Csv {
            path: PathBuf::from("<grid>"),
            source,
        };
        let mut header = vec!["dataset".to_string()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for d in &self.datasets {
            let mut row = vec![d.clone()];
            for m in &self.models {
                let v = self
                    .cell(d, m)
                    .and_then(|c| c.metrics.as_ref())
                    .and_then(|r| r.get(metric));
                row.push(v.map(|x| format!("{x}")).unwrap_or_default());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
    }
}

pub fn trace_csv(trace: &[TracePoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in trace {
        w.serialize(p).map_err(|source| Error::Csv {
            path: PathBuf::from("<trace>"),
            source,
        })?;
    }
    if trace.is_empty() {
        w.write_record(["origin_index", "representative_error"])
            .map_err(|source| Error::Csv {
                path: PathBuf::from("<trace>"),
                source,
            })?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// Fills gaps and optionally replaces outliers.
pub fn preprocess(raw: &RawSeries, config: &BenchmarkConfig) -> Result<TimeSeries> {
    let series = interpolate_missing(raw, config.interpolate_neighbors)?;
    match config.outlier_k {
        Some(k) => {
            let flagged = flag_outliers(&series, k);
            if flagged.is_empty() {
                Ok(series)
            } else {
                interpolate_missing(&series.mask(&flagged), config.interpolate_neighbors)
            }
        }
        None => Ok(series),
    }
}

/// Runs every (dataset, model) cell. Cell failures are recorded, not raised.
pub fn benchmark(
    datasets: &[Dataset],
    models: &[ModelSpec],
    config: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    if datasets.is_empty() || models.is_empty() {
        return Err(Error::invalid("benchmark needs at least one dataset and one model"));
    }
    config.model.validate()?;
    let jobs: Vec<(&Dataset, &ModelSpec)> = datasets
        .iter()
        .flat_map(|d| models.iter().map(move |m| (d, m)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|(d, m)| run_cell(d, m, config))
        .collect();
    Ok(BenchmarkReport {
        seed: config.model.seed,
        config: config.clone(),
        datasets: datasets.iter().map(|d| d.name.clone()).collect(),
        models: models.iter().map(|m| m.name.clone()).collect(),
        cells,
    })
}

fn cell_seed(master: u64, dataset: &str, model: &str) -> u64 {
    derive_seed(master, &format!("{dataset}|{model}"))
}

fn run_cell(dataset: &Dataset, model: &ModelSpec, config: &BenchmarkConfig) -> CellResult {
    let seed = cell_seed(config.model.seed, &dataset.name, &model.name);
    let mut cell = CellResult {
        dataset: dataset.name.clone(),
        model: model.name.clone(),
        seed,
        metrics: None,
        ljung_box: None,
        training_mse: None,
        coverage: None,
        trace: Vec::new(),
        error: None,
    };
    let outcome = match &model.kind {
        ModelKind::It2fisGarch => {
            evaluate_builtin(dataset, config, seed, VarianceSpec::Garch { init: config.model.initial_garch, pinned: false })
        }
        ModelKind::FixedVariance => evaluate_builtin(dataset, config, seed, VarianceSpec::Fixed),
        ModelKind::External { path } => evaluate_external(&expand_path(path, &dataset.name), config),
    };
    match outcome {
        Ok(e) => {
            cell.metrics = Some(e.metrics);
            cell.ljung_box = e.ljung_box;
            cell.training_mse = e.training_mse;
            cell.coverage = e.coverage;
            cell.trace = e.trace;
        }
        Err(err) => cell.error = Some(err.to_string()),
    }
    cell
}

fn expand_path(path: &Path, dataset: &str) -> PathBuf {
    PathBuf::from(path.to_string_lossy().replace("{dataset}", dataset))
}

struct Evaluation {
    metrics: MetricsReport,
    ljung_box: Option<LjungBoxResult>,
    training_mse: Option<f64>,
    coverage: Option<f64>,
    trace: Vec<TracePoint>,
}

/// Test-segment forecasts of a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct TestForecasts {
    /// Flattened (origin, step) pairs in normalized units.
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    /// One-step-ahead residuals, one per origin.
    pub one_step_residuals: Vec<f64>,
    /// Share of one-step residuals within `sqrt(q_high * point variance)`.
    pub coverage: f64,
    pub trace: Vec<TracePoint>,
}

/// Rolling forecasts from every origin whose full horizon lies in the test
/// segment. Origins index the concatenated train and test series.
pub fn forecast_test_segment(
    model: &TrainedModel,
    train: &TimeSeries,
    test: &TimeSeries,
    steps: usize,
) -> Result<TestForecasts> {
    let xs: Vec<f64> = train
        .values
        .iter()
        .chain(&test.values)
        .map(|&x| model.scaling.scale(x))
        .collect();
    let split = train.len();
    if test.len() < steps {
        return Err(Error::TooShort {
            len: test.len(),
            required: steps - 1,
        });
    }
    let last = xs.len() - 1 - steps;
    let origins = rolling_forecast(model, &xs, split - 1, last, steps)?;
    let mut out = TestForecasts {
        actual: Vec::with_capacity(origins.len() * steps),
        predicted: Vec::with_capacity(origins.len() * steps),
        one_step_residuals: Vec::with_capacity(origins.len()),
        coverage: 0.0,
        trace: Vec::with_capacity(origins.len()),
    };
    let mut covered = 0usize;
    for o in &origins {
        let mut se = 0.0;
        for (k, p) in o.result.points.iter().enumerate() {
            let a = xs[o.origin + 1 + k];
            out.actual.push(a);
            out.predicted.push(*p);
            se += (a - p) * (a - p);
        }
        let residual = xs[o.origin + 1] - o.result.points[0];
        let half_width = (model.bounds.q_high * o.result.variances[0].point).sqrt();
        covered += usize::from(residual.abs() <= half_width);
        out.one_step_residuals.push(residual);
        out.trace.push(TracePoint {
            origin_index: o.origin,
            representative_error: se / steps as f64,
        });
    }
    out.coverage = covered as f64 / origins.len().max(1) as f64;
    Ok(out)
}

fn evaluate_builtin(
    dataset: &Dataset,
    config: &BenchmarkConfig,
    seed: u64,
    spec: VarianceSpec,
) -> Result<Evaluation> {
    let series = preprocess(&dataset.raw, config)?;
    let w = config.model.window;
    let (train, test) = train_test_split(&series, config.train_fraction, w)?;
    let model_config = ModelConfig {
        seed,
        ..config.model.clone()
    };
    let (model, _) = train_model(&train, &model_config, spec)?;
    let f = forecast_test_segment(&model, &train, &test, model_config.steps)?;
    Ok(Evaluation {
        metrics: MetricsReport::compute(&f.actual, &f.predicted)?,
        ljung_box: ljung_box(&f.one_step_residuals, config.ljung_box_lags).ok(),
        training_mse: Some(model.training_mse),
        coverage: Some(f.coverage),
        trace: f.trace,
    })
}

/// Reads a headed two-column (actual, predicted) file.
pub fn load_prediction_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = crate::series::load_csv(path, &ColumnRef::Index(0), None)?;
    let p = crate::series::load_csv(path, &ColumnRef::Index(1), None)?;
    let mut actual = Vec::with_capacity(a.values.len());
    let mut predicted = Vec::with_capacity(a.values.len());
    for (i, (x, y)) in a.values.iter().zip(&p.values).enumerate() {
        match (x, y) {
            (Some(x), Some(y)) => {
                actual.push(*x);
                predicted.push(*y);
            }
            _ => {
                return Err(Error::Row {
                    path: path.to_path_buf(),
                    row: i + 1,
                    message: "missing actual or predicted value".into(),
                })
            }
        }
    }
    Ok((actual, predicted))
}

fn evaluate_external(path: &Path, config: &BenchmarkConfig) -> Result<Evaluation> {
    let (actual, predicted) = load_prediction_pairs(path)?;
    let residuals: Vec<f64> = actual.iter().zip(&predicted).map(|(a, p)| a - p).collect();
    Ok(Evaluation {
        metrics: MetricsReport::compute(&actual, &predicted)?,
        ljung_box: ljung_box(&residuals, config.ljung_box_lags).ok(),
        training_mse: None,
        coverage: None,
        trace: residuals
            .iter()
            .enumerate()
            .map(|(i, r)| TracePoint {
                origin_index: i,
                representative_error: r * r,
            })
            .collect(),
    })
}
