//! Run configuration: a flat TOML document with command-line overrides.

use std::path::{Path, PathBuf};

use it2garch::optimize::OptimizerKind;
use it2garch::pipeline::{EpsilonMode, InitialVarianceMode};
use it2garch::{BenchmarkConfig, GarchParams, ModelConfig, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub window: usize,
    pub steps: usize,
    pub confidence: f64,
    pub iterations: usize,
    pub sets_per_input: usize,
    pub sigma_floor: f64,
    pub initial_variance_mode: InitialVarianceMode,
    pub optimizer: OptimizerKind,
    pub epsilon_mode: EpsilonMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_garch: Option<GarchParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_persistence: Option<f64>,

    pub value_column: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_column: Option<String>,
    pub interpolate_neighbors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outlier_k: Option<f64>,

    pub train_fraction: f64,
    pub ljung_box_lags: usize,

    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub mean: f64,
    pub n: usize,

    pub datasets: Vec<DatasetEntry>,
    pub models: Vec<ModelSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = ModelConfig::default();
        let b = BenchmarkConfig::default();
        Self {
            seed: m.seed,
            out_dir: PathBuf::from("out"),
            window: m.window,
            steps: m.steps,
            confidence: m.confidence,
            iterations: m.iterations,
            sets_per_input: m.sets_per_input,
            sigma_floor: m.sigma_floor,
            initial_variance_mode: m.initial_variance_mode,
            optimizer: m.optimizer,
            epsilon_mode: m.epsilon_mode,
            initial_garch: m.initial_garch,
            max_persistence: m.max_persistence,
            value_column: "0".into(),
            timestamp_column: None,
            interpolate_neighbors: b.interpolate_neighbors,
            outlier_k: b.outlier_k,
            train_fraction: b.train_fraction,
            ljung_box_lags: b.ljung_box_lags,
            omega: 0.05,
            alpha1: 0.3,
            beta1: 0.6,
            mean: 0.0,
            n: 600,
            datasets: Vec::new(),
            models: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            window: self.window,
            sets_per_input: self.sets_per_input,
            confidence: self.confidence,
            steps: self.steps,
            iterations: self.iterations,
            seed: self.seed,
            initial_variance_mode: self.initial_variance_mode,
            sigma_floor: self.sigma_floor,
            optimizer: self.optimizer,
            epsilon_mode: self.epsilon_mode,
            initial_garch: self.initial_garch,
            max_persistence: self.max_persistence,
        }
    }

    pub fn benchmark_config(&self) -> BenchmarkConfig {
        BenchmarkConfig {
            model: self.model_config(),
            train_fraction: self.train_fraction,
            interpolate_neighbors: self.interpolate_neighbors,
            outlier_k: self.outlier_k,
            ljung_box_lags: self.ljung_box_lags,
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Internal(format!("config serialization: {e}")))
    }

    /// Writes `effective_config.toml` into the output directory.
    pub fn write_effective(&self) -> Result<(), CliError> {
        crate::commands::write_file(&self.out_dir.join("effective_config.toml"), &self.to_toml()?)
    }
}
