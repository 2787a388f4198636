//! Training and rolling multi-step forecasting for the GARCH-driven interval
//! type-2 fuzzy model.
//!
//! One inference step, in normalized units:
//!
//! 1. variance interval for the step from the previous point variance,
//! 2. three-sigma interval Gaussian sets around the step's center,
//! 3. membership grid of the window against those sets,
//! 4. max-firing rule selection, fuzzy output interval and midpoint.
//!
//! Training first walks the training windows once with the initial
//! parameters to collect one antecedent per window (the rule structure),
//! then minimizes the one-step MSE over the GARCH parameters and every
//! rule's consequent coefficients with that structure frozen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{
    build_sets, classify_antecedent, defuzzify, fuzzy_output, FuzzyOutputInterval, MembershipGrid,
    RuleBase, DEFAULT_SETS_PER_INPUT,
};
use crate::garch::{
    make_bounds, residual_update, variance_interval_step, variance_step, ChiSquareBounds,
    GarchParams, ResidualState, VarianceInterval, OMEGA_FLOOR,
};
use crate::optimize::{optimize_grid, optimize_params, OptimizeOutcome, OptimizerKind, SearchSpace};
use crate::seed::{derive_seed, rng_for};
use crate::series::{sample_variance, ScalingParams, TimeSeries, Window};

pub const MODEL_SCHEMA: &str = "it2garch.model/v1";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialVarianceMode {
    /// Sample variance of the first window.
    #[default]
    Sample,
    /// Start the recursion from zero variance.
    Zero,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonMode {
    /// Unit squared shock beyond the last observation.
    #[default]
    Expected,
    /// Seeded standard normal shocks beyond the last observation.
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub window: usize,
    pub sets_per_input: usize,
    pub confidence: f64,
    pub steps: usize,
    pub iterations: usize,
    pub seed: u64,
    pub initial_variance_mode: InitialVarianceMode,
    pub sigma_floor: f64,
    pub optimizer: OptimizerKind,
    pub epsilon_mode: EpsilonMode,
    /// Starting GARCH parameters; `None` derives them from the training data.
    pub initial_garch: Option<GarchParams>,
    /// Candidates with `alpha1 + beta1` above this are rejected.
    pub max_persistence: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            window: 5,
            sets_per_input: DEFAULT_SETS_PER_INPUT,
            confidence: 0.95,
            steps: 1,
            iterations: 3000,
            seed: 0,
            initial_variance_mode: InitialVarianceMode::Sample,
            sigma_floor: 1e-8,
            optimizer: OptimizerKind::HillClimb,
            epsilon_mode: EpsilonMode::Expected,
            initial_garch: None,
            max_persistence: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.steps == 0 || self.sets_per_input == 0 {
            return Err(Error::invalid("window, steps and sets_per_input must be >= 1"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("optimizer budget must be >= 1"));
        }
        if !(self.sigma_floor > 0.0) {
            return Err(Error::invalid("sigma floor must be positive"));
        }
        if let Some(g) = &self.initial_garch {
            g.validate()?;
        }
        make_bounds(self.confidence).map(|_| ())
    }
}

/// Where the per-step variance interval comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum VarianceTrack {
    /// GARCH(1,1) recursion with chi-square bounds.
    Garch,
    /// One static interval for every step.
    Fixed { interval: VarianceInterval },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub sigma_floor_hits: usize,
    pub zero_firing_fallbacks: usize,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.sigma_floor_hits += other.sigma_floor_hits;
        self.zero_firing_fallbacks += other.zero_firing_fallbacks;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: String,
    pub garch: GarchParams,
    pub variance_track: VarianceTrack,
    pub rulebase: RuleBase,
    pub config: ModelConfig,
    pub scaling: ScalingParams,
    pub bounds: ChiSquareBounds,
    /// Standardized innovation that seeds the residual recursion.
    pub initial_epsilon: f64,
    pub training_mse: f64,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value
            .get("schema")
            .and_then(|s| s.as_str())
            .unwrap_or("<missing>");
        if found != MODEL_SCHEMA {
            return Err(Error::Schema {
                expected: MODEL_SCHEMA.to_string(),
                found: found.to_string(),
            });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn window(&self) -> usize {
        self.config.window
    }

    /// Residual state at the start of a normalized series.
    pub fn initial_state(&self, normalized: &[f64]) -> ResidualState {
        initial_state(&self.config, normalized, self.initial_epsilon)
    }

    fn engine(&self) -> Engine<'_> {
        engine_with(self, &self.rulebase)
    }
}

/// Output of a single inference step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub prediction: f64,
    pub interval: FuzzyOutputInterval,
    pub variance: VarianceInterval,
    /// Point variance for this step and a unit expected shock; replace
    /// `epsilon` with the realized residual once the observation is known.
    pub new_state: ResidualState,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub points: Vec<f64>,
    pub intervals: Vec<FuzzyOutputInterval>,
    pub variances: Vec<VarianceInterval>,
    pub diagnostics: Diagnostics,
    /// Input window used at each step.
    #[serde(skip)]
    pub windows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub initial_mse: f64,
    pub final_mse: f64,
    pub evaluations: usize,
    pub accepted_moves: usize,
    /// Objective at the start point followed by each accepted value.
    pub accepted_trace: Vec<f64>,
    pub rules: usize,
    pub training_steps: usize,
}

fn engine_with<'a>(model: &'a TrainedModel, rulebase: &'a RuleBase) -> Engine<'a> {
    Engine {
        garch: model.garch,
        track: &model.variance_track,
        rulebase,
        bounds: &model.bounds,
        sets: model.config.sets_per_input,
        floor: model.config.sigma_floor,
    }
}

struct Engine<'a> {
    garch: GarchParams,
    track: &'a VarianceTrack,
    rulebase: &'a RuleBase,
    bounds: &'a ChiSquareBounds,
    sets: usize,
    floor: f64,
}

impl Engine<'_> {
    fn variance(&self, state: &ResidualState) -> Result<VarianceInterval> {
        match self.track {
            VarianceTrack::Garch => variance_interval_step(&self.garch, state.variance, self.bounds),
            VarianceTrack::Fixed { interval } => Ok(*interval),
        }
    }

    fn next_variance(&self, state: &ResidualState) -> Result<f64> {
        match self.track {
            VarianceTrack::Garch => {
                variance_step(&self.garch, state.epsilon * state.epsilon, state.variance)
            }
            VarianceTrack::Fixed { interval } => Ok(interval.point),
        }
    }

    fn step(&self, window: &Window, state: &ResidualState, center: f64) -> Result<StepOutcome> {
        let variance = self.variance(state)?;
        let sets = build_sets(center, &variance, self.sets, self.floor);
        let grid = MembershipGrid::evaluate(window, &sets);
        let sel = self.rulebase.select_rules(&grid)?;
        let interval = fuzzy_output(
            self.rulebase.rule(sel.upper_rule),
            sel.upper_firing,
            self.rulebase.rule(sel.lower_rule),
            sel.lower_firing,
            window,
        );
        let prediction = defuzzify(&interval);
        if !prediction.is_finite() {
            return Err(Error::NonFinite("prediction"));
        }
        let diagnostics = Diagnostics {
            sigma_floor_hits: 0,
            zero_firing_fallbacks: usize::from(sel.all_zero()),
        };
        Ok(StepOutcome {
            prediction,
            interval,
            variance,
            new_state: ResidualState {
                epsilon: 1.0,
                variance: self.next_variance(state)?,
            },
            diagnostics,
        })
    }

    /// One step against a known observation; returns the prediction and the
    /// state carrying the realized residual.
    fn observe(
        &self,
        window: &Window,
        state: &ResidualState,
        actual: f64,
        diag: &mut Diagnostics,
    ) -> Result<(f64, ResidualState)> {
        let out = self.step(window, state, estimate_center_train(window))?;
        diag.merge(&out.diagnostics);
        let sigma = out.new_state.variance.sqrt();
        let sigma = if sigma > 0.0 { sigma } else { self.floor };
        let r = residual_update(actual, out.prediction, sigma, self.floor)?;
        diag.sigma_floor_hits += usize::from(r.floored);
        Ok((
            out.prediction,
            ResidualState {
                epsilon: r.epsilon,
                variance: out.new_state.variance,
            },
        ))
    }

    /// One-step predictions over every window of `xs`, in order.
    fn replay(&self, xs: &[f64], window: usize, init: ResidualState) -> Result<(Vec<f64>, Diagnostics)> {
        let mut state = init;
        let mut diag = Diagnostics::default();
        let mut preds = Vec::with_capacity(xs.len().saturating_sub(window));
        for t in window..xs.len() {
            let w = Window::from(&xs[t - window..t]);
            let (pred, next) = self.observe(&w, &state, xs[t], &mut diag)?;
            preds.push(pred);
            state = next;
        }
        Ok((preds, diag))
    }
}

/// Center of the sets during training: the window mean.
pub fn estimate_center_train(window: &Window) -> f64 {
    window.mean()
}

/// Center of the sets for a forecast step: the previous step's prediction.
pub fn estimate_center_predict(prev_prediction: f64) -> f64 {
    prev_prediction
}

fn initial_state(config: &ModelConfig, normalized: &[f64], epsilon: f64) -> ResidualState {
    let variance = match config.initial_variance_mode {
        InitialVarianceMode::Sample => {
            sample_variance(&normalized[..config.window.min(normalized.len())])
        }
        InitialVarianceMode::Zero => 0.0,
    };
    ResidualState { epsilon, variance }
}

pub fn forecast_step(
    model: &TrainedModel,
    window: &Window,
    state: &ResidualState,
    center: f64,
) -> Result<StepOutcome> {
    check_window(model, window)?;
    if !(state.variance >= 0.0) {
        return Err(Error::invalid("state variance must be >= 0"));
    }
    model.engine().step(window, state, center)
}

fn check_window(model: &TrainedModel, window: &Window) -> Result<()> {
    if window.len() != model.window() {
        return Err(Error::invalid(format!(
            "window has {} points, model expects {}",
            window.len(),
            model.window()
        )));
    }
    Ok(())
}

/// Rolling forecast of `steps` values past the end of `window`.
///
/// The first step is centered on the window mean, later steps on the previous
/// prediction. Each prediction is appended to the window (the oldest value is
/// dropped) and the variance recursion continues with an expected unit shock,
/// or a seeded random one in stochastic mode.
pub fn forecast_multi(
    model: &TrainedModel,
    window: &Window,
    state: &ResidualState,
    steps: usize,
) -> Result<ForecastResult> {
    check_window(model, window)?;
    if steps == 0 {
        return Err(Error::invalid("steps must be >= 1"));
    }
    let engine = model.engine();
    let mut rng = match model.config.epsilon_mode {
        EpsilonMode::Expected => None,
        EpsilonMode::Stochastic => Some(ChaCha8Rng::seed_from_u64(horizon_seed(model, window, state))),
    };
    let mut window = window.clone();
    let mut state = *state;
    let mut center = estimate_center_train(&window);
    let mut result = ForecastResult {
        points: Vec::with_capacity(steps),
        intervals: Vec::with_capacity(steps),
        variances: Vec::with_capacity(steps),
        diagnostics: Diagnostics::default(),
        windows: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        let out = engine.step(&window, &state, center)?;
        result.windows.push(window.as_slice().to_vec());
        result.points.push(out.prediction);
        result.intervals.push(out.interval);
        result.variances.push(out.variance);
        result.diagnostics.merge(&out.diagnostics);
        state = out.new_state;
        if let Some(rng) = rng.as_mut() {
            state.epsilon = StandardNormal.sample(rng);
        }
        window.push(out.prediction);
        center = estimate_center_predict(out.prediction);
    }
    Ok(result)
}

fn horizon_seed(model: &TrainedModel, window: &Window, state: &ResidualState) -> u64 {
    let mut label = String::from("horizon");
    for v in window.as_slice().iter().chain([state.epsilon, state.variance].iter()) {
        label.push_str(&format!(":{:x}", v.to_bits()));
    }
    derive_seed(model.config.seed, &label)
}

/// Forecasts from every window of a normalized series.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginForecast {
    /// Index of the newest value in the origin window.
    pub origin: usize,
    pub result: ForecastResult,
}

/// Filters a normalized series with the model, issuing a `steps`-ahead
/// forecast from every origin `t >= first_origin` (index of the newest window
/// value). Between origins the residual state is updated with the realized
/// observation.
pub fn rolling_forecast(
    model: &TrainedModel,
    normalized: &[f64],
    first_origin: usize,
    last_origin: usize,
    steps: usize,
) -> Result<Vec<OriginForecast>> {
    let w = model.window();
    if normalized.len() < w {
        return Err(Error::TooShort {
            len: normalized.len(),
            required: w - 1,
        });
    }
    let last_origin = last_origin.min(normalized.len() - 1);
    let engine = model.engine();
    let mut state = model.initial_state(normalized);
    let mut diag = Diagnostics::default();
    let mut out = Vec::new();
    for t in (w - 1)..=last_origin {
        let window = Window::from(&normalized[t + 1 - w..=t]);
        if t >= first_origin {
            out.push(OriginForecast {
                origin: t,
                result: forecast_multi(model, &window, &state, steps)?,
            });
        }
        if t + 1 < normalized.len() && t < last_origin {
            state = engine.observe(&window, &state, normalized[t + 1], &mut diag)?.1;
        }
    }
    Ok(out)
}

/// How the variance track is set up for training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceSpec {
    /// GARCH recursion; `pinned` keeps the starting parameters fixed.
    Garch { init: Option<GarchParams>, pinned: bool },
    /// Constant interval built from the training sample variance.
    Fixed,
}

/// GARCH start point derived from the data: unconditional variance equal to
/// the sample variance with persistence 0.9.
pub fn default_initial_garch(sample_var: f64) -> GarchParams {
    GarchParams {
        omega: (0.1 * sample_var).max(OMEGA_FLOOR),
        alpha1: 0.1,
        beta1: 0.8,
    }
}

/// Initial consequent of every rule: the window average.
fn initial_coeffs(window: usize) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(std::iter::repeat_n(1.0 / window as f64, window))
        .collect()
}

pub fn train(series: &TimeSeries, config: &ModelConfig) -> Result<TrainedModel> {
    Ok(train_model(
        series,
        config,
        VarianceSpec::Garch {
            init: config.initial_garch,
            pinned: false,
        },
    )?
    .0)
}

/// Trains on a series in original units.
pub fn train_model(
    series: &TimeSeries,
    config: &ModelConfig,
    spec: VarianceSpec,
) -> Result<(TrainedModel, TrainingReport)> {
    config.validate()?;
    let w = config.window;
    if series.len() <= w + 1 {
        return Err(Error::TooShort {
            len: series.len(),
            required: w + 1,
        });
    }
    if series.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training series"));
    }
    let scaling = ScalingParams::fit_or_unit(&series.values)?;
    let xs: Vec<f64> = series.values.iter().map(|&x| scaling.scale(x)).collect();
    let bounds = make_bounds(config.confidence)?;
    let initial_epsilon: f64 = StandardNormal.sample(&mut rng_for(config.seed, "initial-epsilon"));
    let s2 = sample_variance(&xs);

    let (garch, track, optimize_garch) = match spec {
        VarianceSpec::Garch { init, pinned } => (
            init.unwrap_or_else(|| default_initial_garch(s2)),
            VarianceTrack::Garch,
            !pinned,
        ),
        VarianceSpec::Fixed => {
            let pinned = GarchParams {
                omega: s2.max(OMEGA_FLOOR),
                alpha1: 0.0,
                beta1: 0.0,
            };
            let interval = variance_interval_step(&pinned, pinned.omega, &bounds)?;
            (pinned, VarianceTrack::Fixed { interval }, false)
        }
    };
    garch.validate()?;

    let mut model = TrainedModel {
        schema: MODEL_SCHEMA.to_string(),
        garch,
        variance_track: track,
        rulebase: RuleBase::new(w, config.sets_per_input),
        config: config.clone(),
        scaling,
        bounds,
        initial_epsilon,
        training_mse: f64::NAN,
    };
    let init_state = model.initial_state(&xs);
    model.rulebase = build_rule_structure(&model, &xs, init_state)?;

    let offset = if optimize_garch { 3 } else { 0 };
    let mut init = Vec::with_capacity(offset + model.rulebase.coefficient_count());
    if optimize_garch {
        init.extend([garch.omega, garch.alpha1, garch.beta1]);
    }
    init.extend(model.rulebase.coefficients());

    let mut space = SearchSpace::around(&init);
    space.scales.iter_mut().skip(offset).for_each(|s| *s = 0.05);
    if optimize_garch {
        space.scales[0] = 0.5 * garch.omega;
        space.scales[1] = 0.05;
        space.scales[2] = 0.05;
        space.lower_bounds[0] = OMEGA_FLOOR;
        space.lower_bounds[1] = 0.0;
        space.lower_bounds[2] = 0.0;
    }

    let targets = &xs[w..];
    let xs_ref = &xs;
    let mut candidate = model.clone();
    let objective = move |v: &[f64]| -> f64 {
        if apply_vector(&mut candidate, v, optimize_garch).is_err() {
            return f64::INFINITY;
        }
        match candidate.engine().replay(xs_ref, w, init_state) {
            Ok((preds, _)) => mse_unchecked(targets, &preds),
            Err(_) => f64::INFINITY,
        }
    };
    let outcome: OptimizeOutcome = match config.optimizer {
        OptimizerKind::HillClimb => optimize_params(
            objective,
            &init,
            config.iterations,
            derive_seed(config.seed, "optimizer"),
            &space,
        )?,
        OptimizerKind::CoordinateGrid => optimize_grid(objective, &init, config.iterations, &space)?,
    };
    apply_vector(&mut model, &outcome.best, optimize_garch)?;
    model.training_mse = outcome.best_value;

    let report = TrainingReport {
        initial_mse: outcome.accepted[0],
        final_mse: outcome.best_value,
        evaluations: outcome.evaluations,
        accepted_moves: outcome.accepted_moves(),
        accepted_trace: outcome.accepted,
        rules: model.rulebase.len(),
        training_steps: targets.len(),
    };
    Ok((model, report))
}

fn apply_vector(model: &mut TrainedModel, v: &[f64], with_garch: bool) -> Result<()> {
    let coeffs = if with_garch {
        model.garch = GarchParams {
            omega: v[0],
            alpha1: v[1],
            beta1: v[2],
        }
        .project();
        if let Some(cap) = model.config.max_persistence {
            if model.garch.persistence() > cap {
                return Err(Error::invalid("persistence above the configured cap"));
            }
        }
        &v[3..]
    } else {
        v
    };
    model.rulebase.set_coefficients(coeffs)
}

/// Walks the training windows with the starting parameters, retaining the
/// max-firing antecedent of each window as a rule.
fn build_rule_structure(model: &TrainedModel, xs: &[f64], init: ResidualState) -> Result<RuleBase> {
    let w = model.window();
    let mut rulebase = RuleBase::new(w, model.config.sets_per_input);
    let coeffs = initial_coeffs(w);
    let mut state = init;
    let mut diag = Diagnostics::default();
    for t in w..xs.len() {
        let window = Window::from(&xs[t - w..t]);
        let variance = engine_with(model, &rulebase).variance(&state)?;
        let sets = build_sets(
            estimate_center_train(&window),
            &variance,
            model.config.sets_per_input,
            model.config.sigma_floor,
        );
        let antecedent = classify_antecedent(&window, &sets);
        rulebase.retain_rule(antecedent, coeffs.clone())?;
        let probe = engine_with(model, &rulebase);
        state = probe.observe(&window, &state, xs[t], &mut diag)?.1;
    }
    Ok(rulebase)
}

/// One-step predictions of the model over its own training series, with the
/// same initial state training used.
pub fn replay_training(model: &TrainedModel, series: &TimeSeries) -> Result<Vec<f64>> {
    let xs: Vec<f64> = series.values.iter().map(|&x| model.scaling.scale(x)).collect();
    let init = model.initial_state(&xs);
    Ok(model.engine().replay(&xs, model.window(), init)?.0)
}

fn mse_unchecked(actual: &[f64], predicted: &[f64]) -> f64 {
    actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / actual.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::FuzzyRule;
    use crate::garch::simulate_garch;

    fn small_config() -> ModelConfig {
        ModelConfig {
            window: 3,
            iterations: 200,
            seed: 5,
            ..ModelConfig::default()
        }
    }

    /// A model with one rule whose consequent is the constant `c`.
    fn constant_rule_model(c: f64, w: usize) -> TrainedModel {
        let mut rb = RuleBase::new(w, 3);
        let mut coeffs = vec![0.0; w + 1];
        coeffs[0] = c;
        rb.retain_rule(vec![1; w], coeffs).unwrap();
        TrainedModel {
            schema: MODEL_SCHEMA.into(),
            garch: GarchParams::new(0.1, 0.1, 0.8).unwrap(),
            variance_track: VarianceTrack::Garch,
            rulebase: rb,
            config: ModelConfig {
                window: w,
                ..ModelConfig::default()
            },
            scaling: ScalingParams { min: 0.0, max: 1.0 },
            bounds: make_bounds(0.95).unwrap(),
            initial_epsilon: 0.0,
            training_mse: 0.0,
        }
    }

    #[test]
    fn center_estimates() {
        assert_eq!(estimate_center_train(&Window::new(vec![1.0, 2.0, 3.0])), 2.0);
        assert_eq!(estimate_center_train(&Window::new(vec![4.5; 4])), 4.5);
        assert_eq!(estimate_center_train(&Window::new(vec![-1.0, 1.0])), 0.0);
        assert_eq!(estimate_center_predict(0.42), 0.42);
        assert_eq!(estimate_center_predict(0.0), 0.0);
        assert_eq!(estimate_center_predict(-3.5), -3.5);
    }

    #[test]
    fn step_with_constant_consequent() {
        let model = constant_rule_model(2.0, 2);
        let window = Window::new(vec![0.3, 0.5]);
        let state = ResidualState { epsilon: 0.5, variance: 0.2 };
        let out = forecast_step(&model, &window, &state, 0.4).unwrap();
        // single rule: both bounds use the same rule, F_low <= F_high
        let variance = variance_interval_step(&model.garch, 0.2, &model.bounds).unwrap();
        let sets = build_sets(0.4, &variance, 3, 1e-8);
        let grid = MembershipGrid::evaluate(&window, &sets);
        let f = crate::fuzzy::firing_strength(model.rulebase.rule(0), &grid);
        assert!((out.prediction - 2.0 * (f.low + f.high) / 2.0).abs() < 1e-15);
        assert_eq!(out.variance, variance);
        assert_eq!(out.new_state.variance, variance_step(&model.garch, 0.25, 0.2).unwrap());
        let again = forecast_step(&model, &window, &state, 0.4).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn step_rejects_bad_window() {
        let model = constant_rule_model(1.0, 3);
        let state = ResidualState { epsilon: 0.0, variance: 0.1 };
        assert!(forecast_step(&model, &Window::new(vec![0.0; 2]), &state, 0.0).is_err());
        assert!(forecast_multi(&model, &Window::new(vec![0.0; 3]), &state, 0).is_err());
    }

    #[test]
    fn multi_step_splices_predictions() {
        let mut model = constant_rule_model(0.0, 3);
        model.rulebase = {
            let mut rb = RuleBase::new(3, 3);
            rb.retain_rule(vec![1; 3], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
            rb
        };
        let window = Window::new(vec![0.2, 0.4, 0.6]);
        let state = ResidualState { epsilon: 0.3, variance: 0.05 };
        let one = forecast_multi(&model, &window, &state, 1).unwrap();
        let step = forecast_step(&model, &window, &state, window.mean()).unwrap();
        assert_eq!(one.points, vec![step.prediction]);
        let three = forecast_multi(&model, &window, &state, 3).unwrap();
        assert_eq!(three.windows[1], vec![0.4, 0.6, three.points[0]]);
        assert_eq!(three.windows[2], vec![0.6, three.points[0], three.points[1]]);
        assert_eq!(&three.points[..1], &one.points[..]);
        for (p, iv) in three.points.iter().zip(&three.intervals) {
            assert!(iv.low <= *p && *p <= iv.high);
        }
        assert_eq!(three.variances.len(), 3);
    }

    #[test]
    fn train_is_deterministic_and_monotone() {
        let series = simulate_garch(&GarchParams::new(0.05, 0.3, 0.6).unwrap(), 0.0, 120, 1).unwrap();
        let cfg = small_config();
        let (a, report) = train_model(&series, &cfg, VarianceSpec::Garch { init: None, pinned: false }).unwrap();
        let b = train(&series, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(report.final_mse <= report.initial_mse);
        assert!(report.accepted_trace.windows(2).all(|w| w[1] < w[0]));
        assert!(a.rulebase.len() <= report.training_steps);
        assert!(a.rulebase.len() <= 3usize.pow(3));
    }

    #[test]
    fn training_mse_matches_replay() {
        let series = simulate_garch(&GarchParams::new(0.05, 0.3, 0.6).unwrap(), 1.0, 150, 9).unwrap();
        let model = train(&series, &small_config()).unwrap();
        let preds = replay_training(&model, &series).unwrap();
        let xs: Vec<f64> = series.values.iter().map(|&x| model.scaling.scale(x)).collect();
        assert_eq!(mse_unchecked(&xs[3..], &preds), model.training_mse);
    }

    #[test]
    fn constant_series_fits_exactly() {
        let series = TimeSeries::new("c", vec![4.2; 60]);
        let model = train(&series, &small_config()).unwrap();
        assert!(model.training_mse < 1e-4);
        let xs = vec![model.scaling.scale(4.2); 3];
        let state = model.initial_state(&xs);
        let out = forecast_step(&model, &Window::new(xs.clone()), &state, xs[0]).unwrap();
        assert!((model.scaling.unscale(out.prediction) - 4.2).abs() < 1e-6);
        let multi = forecast_multi(&model, &Window::new(xs), &state, 6).unwrap();
        assert!(multi.points.iter().all(|p| (model.scaling.unscale(*p) - 4.2).abs() < 1e-6));
    }

    #[test]
    fn train_guards() {
        let short = TimeSeries::new("s", vec![1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(train(&short, &small_config()), Err(Error::TooShort { .. })));
        let ok = TimeSeries::new("s", (0..20).map(f64::from).collect());
        let zero_budget = ModelConfig { iterations: 0, ..small_config() };
        assert!(train(&ok, &zero_budget).is_err());
    }

    #[test]
    fn model_json_round_trip_and_schema_check() {
        let series = simulate_garch(&GarchParams::new(0.05, 0.3, 0.6).unwrap(), 0.0, 80, 2).unwrap();
        let model = train(&series, &small_config()).unwrap();
        let json = model.to_json().unwrap();
        let back = TrainedModel::from_json(&json).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json().unwrap(), json);
        let bad = json.replace(MODEL_SCHEMA, "it2garch.model/v0");
        assert!(matches!(TrainedModel::from_json(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn stochastic_mode_is_seeded() {
        let mut model = constant_rule_model(0.5, 2);
        model.config.epsilon_mode = EpsilonMode::Stochastic;
        let w = Window::new(vec![0.4, 0.5]);
        let s = ResidualState { epsilon: 0.1, variance: 0.05 };
        let a = forecast_multi(&model, &w, &s, 5).unwrap();
        let b = forecast_multi(&model, &w, &s, 5).unwrap();
        assert_eq!(a, b);
        let expected = {
            let mut m = model.clone();
            m.config.epsilon_mode = EpsilonMode::Expected;
            forecast_multi(&m, &w, &s, 5).unwrap()
        };
        assert_ne!(a.variances, expected.variances);
    }

    #[test]
    fn rolling_forecast_shapes() {
        let model = constant_rule_model(0.5, 2);
        let xs = [0.1, 0.2, 0.3, 0.4, 0.5];
        let all = rolling_forecast(&model, &xs, 0, usize::MAX, 2).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].origin, 1);
        assert_eq!(all.last().unwrap().origin, 4);
        let tail = rolling_forecast(&model, &xs, 3, usize::MAX, 2).unwrap();
        assert_eq!(tail.len(), 2);
        assert_eq!(tail[0], all[2]);
    }

    #[test]
    fn zero_firing_is_counted() {
        let mut rb = RuleBase::new(1, 3);
        rb.retain_rule(vec![0], vec![1.0, 0.0]).unwrap();
        let mut model = constant_rule_model(0.0, 1);
        model.rulebase = rb;
        model.variance_track = VarianceTrack::Fixed {
            interval: VarianceInterval::constant(1e-6),
        };
        let _ = FuzzyRule::new(vec![0], vec![0.0, 0.0]);
        let out = forecast_step(
            &model,
            &Window::new(vec![1e6]),
            &ResidualState { epsilon: 0.0, variance: 0.0 },
            0.0,
        )
        .unwrap();
        assert_eq!(out.diagnostics.zero_firing_fallbacks, 1);
        assert_eq!(out.prediction, 0.0);
    }
}
