//! File-backed workflows: load, clean, train, persist, forecast, score.

use std::io::Write;

use it2garch::benchmark::{benchmark, load_prediction_pairs, preprocess, trace_csv};
use it2garch::garch::simulate_garch;
use it2garch::metrics::Metric;
use it2garch::series::{load_csv, ColumnRef};
use it2garch::*;

fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
    path
}

#[test]
fn csv_gaps_are_filled_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate_garch(&GarchParams::new(0.05, 0.3, 0.6).unwrap(), 1.0, 80, 7).unwrap();
    let mut body = String::from("date,value\n");
    for (i, v) in sim.values.iter().enumerate() {
        let cell = if i == 10 || i == 40 { "NA".to_string() } else { v.to_string() };
        body.push_str(&format!("2024-01-{:02} 00:00:{:02},{cell}\n", 1 + i / 60, i % 60));
    }
    let path = write_file(&dir, "series.csv", &body);
    let raw = load_csv(&path, &ColumnRef::Name("value".into()), Some(&ColumnRef::Index(0))).unwrap();
    assert_eq!(raw.missing_count(), 2);
    let series = preprocess(&raw, &BenchmarkConfig::default()).unwrap();
    assert_eq!(series.values[10], (sim.values[9] + sim.values[11]) / 2.0);
    assert_eq!(series.values[11], sim.values[11]);
    let cfg = ModelConfig { window: 4, iterations: 100, ..ModelConfig::default() };
    let model = train(&series, &cfg).unwrap();
    assert!(model.training_mse.is_finite());
}

#[test]
fn persisted_model_forecasts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let series = simulate_garch(&GarchParams::new(0.05, 0.3, 0.6).unwrap(), 0.0, 150, 3).unwrap();
    let cfg = ModelConfig { window: 4, steps: 3, iterations: 200, seed: 9, ..ModelConfig::default() };
    let model = train(&series, &cfg).unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, model.to_json().unwrap()).unwrap();
    let loaded = TrainedModel::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let xs: Vec<f64> = series.values.iter().map(|v| model.scaling.scale(*v)).collect();
    let window = Window::new(xs[xs.len() - 4..].to_vec());
    let state = model.initial_state(&xs);
    assert_eq!(
        forecast_multi(&model, &window, &state, 5).unwrap(),
        forecast_multi(&loaded, &window, &state, 5).unwrap()
    );
}

#[test]
fn external_predictions_are_scored_alongside_builtins() {
    let dir = tempfile::tempdir().unwrap();
    write_file(&dir, "preds-alpha.csv", "actual,predicted\n1,1.1\n2,1.8\n4,4\n3,3.3\n");
    let pairs = load_prediction_pairs(&dir.path().join("preds-alpha.csv")).unwrap();
    assert_eq!(pairs.0, vec![1.0, 2.0, 4.0, 3.0]);

    let mut sim = simulate_garch(&GarchParams::new(0.05, 0.3, 0.6).unwrap(), 0.0, 100, 1).unwrap();
    sim.name = "alpha".into();
    let models = vec![
        ModelSpec { name: "it2fis-garch".into(), kind: ModelKind::It2fisGarch },
        ModelSpec { name: "fixed".into(), kind: ModelKind::FixedVariance },
        ModelSpec {
            name: "external".into(),
            kind: ModelKind::External { path: dir.path().join("preds-{dataset}.csv") },
        },
    ];
    let mut config = BenchmarkConfig::default();
    config.model.window = 3;
    config.model.iterations = 50;
    config.ljung_box_lags = 2;
    let report = benchmark(&[Dataset::from_series(sim)], &models, &config).unwrap();
    let ext = report.cell("alpha", "external").unwrap();
    let m = ext.metrics.unwrap();
    assert_eq!(m.n, 4);
    assert!((m.mae - 0.15).abs() < 1e-12);
    assert!(report.cells.iter().all(CellResult::is_ok));
    let grid = report.grid_csv(Metric::Mae).unwrap();
    assert!(grid.starts_with("dataset,it2fis-garch,fixed,external\nalpha,"));
    assert_eq!(trace_csv(&ext.trace).unwrap().lines().count(), 5);
    let json = serde_json::to_string(&report).unwrap();
    let back: BenchmarkReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}
