//! GARCH(1,1) variance intervals driving the Gaussian sets of an interval
//! type-2 fuzzy forecaster, with a benchmark harness.
//!
//! Data flows `series` → `pipeline::train` → `pipeline::forecast_multi`, and
//! `benchmark` runs that end to end against the fixed-variance baseline.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod benchmark;
pub mod error;
pub mod fuzzy;
pub mod garch;
pub mod metrics;
pub mod optimize;
pub mod pipeline;
pub mod seed;
pub mod series;
pub mod special;

pub use benchmark::{
    benchmark, fixed_variance_baseline, BenchmarkConfig, BenchmarkReport, CellResult, Dataset,
    ModelKind, ModelSpec, TracePoint,
};
pub use error::{Error, Result};
pub use fuzzy::{
    FiringInterval, FuzzyOutputInterval, FuzzyRule, GaussianIT2Set, IntervalMembership,
    MembershipGrid, RuleBase,
};
pub use garch::{ChiSquareBounds, GarchParams, ResidualState, VarianceInterval};
pub use metrics::{ljung_box, LjungBoxResult, Metric, MetricsReport};
pub use optimize::{OptimizeOutcome, OptimizerKind, SearchSpace};
pub use pipeline::{
    forecast_multi, forecast_step, train, train_model, EpsilonMode, ForecastResult,
    InitialVarianceMode, ModelConfig, TrainedModel, TrainingReport, VarianceSpec, VarianceTrack,
};
pub use series::{RawSeries, ScalingParams, TimeSeries, Window};
