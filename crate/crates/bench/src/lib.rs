//! Shared fixtures for the criterion benchmarks.

use it2garch::garch::simulate_garch;
use it2garch::{GarchParams, ModelConfig, ResidualState, TimeSeries, TrainedModel, Window};

pub fn garch_series(n: usize, seed: u64) -> TimeSeries {
    let params = GarchParams::new(0.05, 0.3, 0.6).expect("valid parameters");
    simulate_garch(&params, 0.0, n, seed).expect("n > 0")
}

/// A model trained briefly on a simulated series, with the window and state
/// at the end of that series.
pub fn trained_fixture(n: usize, window: usize, iterations: usize) -> (TrainedModel, Window, ResidualState) {
    let series = garch_series(n, 1);
    let config = ModelConfig {
        window,
        iterations,
        seed: 1,
        ..ModelConfig::default()
    };
    let model = it2garch::train(&series, &config).expect("fixture trains");
    let xs: Vec<f64> = series.values.iter().map(|v| model.scaling.scale(*v)).collect();
    let state = model.initial_state(&xs);
    (model, Window::new(xs[xs.len() - window..].to_vec()), state)
}
