use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use it2garch::benchmark::{benchmark as run_grid, preprocess, trace_csv};
use it2garch::garch::simulate_garch;
use it2garch::metrics::{ljung_box, Metric};
use it2garch::pipeline::rolling_forecast;
use it2garch::series::{load_csv, sample_variance, ColumnRef, RawSeries};
use it2garch::{Dataset, GarchParams, TimeSeries, TrainedModel, VarianceSpec};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))
}

fn load_series(cfg: &RunConfig, path: &Path) -> Result<RawSeries, CliError> {
    let ts = cfg.timestamp_column.as_deref().map(ColumnRef::parse);
    Ok(load_csv(path, &ColumnRef::parse(&cfg.value_column), ts.as_ref())?)
}

fn load_clean(cfg: &RunConfig, path: &Path) -> Result<TimeSeries, CliError> {
    Ok(preprocess(&load_series(cfg, path)?, &cfg.benchmark_config())?)
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let params = GarchParams::new(cfg.omega, cfg.alpha1, cfg.beta1)?;
    let series = simulate_garch(&params, cfg.mean, cfg.n, cfg.seed)?;
    let mut csv = String::from("index,value\n");
    for (i, v) in series.values.iter().enumerate() {
        let _ = writeln!(csv, "{i},{v}");
    }
    let out = cfg.out_dir.join("series.csv");
    write_file(&out, &csv)?;
    cfg.write_effective()?;
    let mean = series.values.iter().sum::<f64>() / series.len() as f64;
    println!("wrote {} points to {}", series.len(), out.display());
    println!("sample mean     {mean:.6}");
    println!("sample variance {:.6}", sample_variance(&series.values));
    Ok(())
}

#[derive(Serialize)]
struct TrainingSummary<'a> {
    data: &'a Path,
    points: usize,
    rules: usize,
    training_mse: f64,
    initial_mse: f64,
    evaluations: usize,
    accepted_moves: usize,
    wall_time_secs: f64,
    garch: GarchParams,
    accepted_trace: &'a [f64],
}

pub fn train(cfg: &RunConfig, data: &Path) -> Result<(), CliError> {
    let series = load_clean(cfg, data)?;
    let start = Instant::now();
    let (model, report) = it2garch::train_model(
        &series,
        &cfg.model_config(),
        VarianceSpec::Garch {
            init: cfg.initial_garch,
            pinned: false,
        },
    )?;
    let wall = start.elapsed().as_secs_f64();
    write_file(&cfg.out_dir.join("model.json"), &model.to_json()?)?;
    let summary = TrainingSummary {
        data,
        points: series.len(),
        rules: report.rules,
        training_mse: model.training_mse,
        initial_mse: report.initial_mse,
        evaluations: report.evaluations,
        accepted_moves: report.accepted_moves,
        wall_time_secs: wall,
        garch: model.garch,
        accepted_trace: &report.accepted_trace,
    };
    write_file(&cfg.out_dir.join("training_report.json"), &to_json(&summary)?)?;
    cfg.write_effective()?;
    println!("training mse    {:.6e}", model.training_mse);
    println!("initial mse     {:.6e}", report.initial_mse);
    println!("accepted moves  {} of {}", report.accepted_moves, report.evaluations);
    println!("rules           {}", report.rules);
    println!(
        "garch           omega={:.6} alpha1={:.6} beta1={:.6}",
        model.garch.omega, model.garch.alpha1, model.garch.beta1
    );
    println!("wall time       {wall:.2}s");
    Ok(())
}

pub fn predict(cfg: &RunConfig, model_path: &Path, data: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(model_path).map_err(|source| CliError::Io {
        path: model_path.to_path_buf(),
        source,
    })?;
    let model = TrainedModel::from_json(&text)?;
    let series = load_clean(cfg, data)?;
    let w = model.window();
    if series.len() < w {
        return Err(CliError::Data(format!(
            "{}: {} points, the model needs a window of {w}",
            data.display(),
            series.len()
        )));
    }
    let xs: Vec<f64> = series.values.iter().map(|v| model.scaling.scale(*v)).collect();
    let origins = rolling_forecast(&model, &xs, w - 1, xs.len() - 1, cfg.steps)?;
    let s = model.scaling;
    let r2 = s.range() * s.range();
    let mut csv = String::from(
        "origin_index,step,prediction,interval_low,interval_high,variance_low,variance_point,variance_high\n",
    );
    for o in &origins {
        let f = &o.result;
        for k in 0..f.points.len() {
            let (p, iv, v) = (f.points[k], f.intervals[k], f.variances[k]);
            if !(iv.low <= p && p <= iv.high) {
                return Err(CliError::Internal(format!(
                    "prediction outside its interval at origin {}",
                    o.origin
                )));
            }
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                o.origin,
                k + 1,
                s.unscale(p),
                s.unscale(iv.low),
                s.unscale(iv.high),
                v.lower * r2,
                v.point * r2,
                v.upper * r2
            );
        }
    }
    let out = cfg.out_dir.join("predictions.csv");
    write_file(&out, &csv)?;
    cfg.write_effective()?;
    println!("{} origins x {} steps written to {}", origins.len(), cfg.steps, out.display());
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn rebase(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn benchmark(cfg: &RunConfig, base: &Path) -> Result<(), CliError> {
    if cfg.datasets.is_empty() || cfg.models.is_empty() {
        return Err(CliError::Usage(
            "benchmark needs a --config listing at least one [[datasets]] and one [[models]] entry".into(),
        ));
    }
    let mut datasets = Vec::with_capacity(cfg.datasets.len());
    for d in &cfg.datasets {
        let mut local = cfg.clone();
        if let Some(c) = &d.value_column {
            local.value_column = c.clone();
        }
        if let Some(c) = &d.timestamp_column {
            local.timestamp_column = Some(c.clone());
        }
        let mut raw = load_series(&local, &rebase(base, &d.path))?;
        raw.name = d.name.clone();
        datasets.push(Dataset {
            name: d.name.clone(),
            raw,
        });
    }
    let models: Vec<_> = cfg
        .models
        .iter()
        .map(|m| {
            let mut m = m.clone();
            if let it2garch::ModelKind::External { path } = &mut m.kind {
                *path = rebase(base, path);
            }
            m
        })
        .collect();
    let report = run_grid(&datasets, &models, &cfg.benchmark_config())?;

    let out = &cfg.out_dir;
    write_file(&out.join("report.json"), &to_json(&report)?)?;
    for metric in Metric::ALL {
        write_file(&out.join(format!("grid_{}.csv", metric.name())), &report.grid_csv(metric)?)?;
    }
    for c in report.cells.iter().filter(|c| c.is_ok()) {
        let name = format!("{}__{}.csv", sanitize(&c.dataset), sanitize(&c.model));
        write_file(&out.join("traces").join(name), &trace_csv(&c.trace)?)?;
    }
    cfg.write_effective()?;

    println!("{:<20} {:<20} {:>12} {:>12} {:>10}", "dataset", "model", "mse", "mae", "lb p");
    for c in &report.cells {
        match (&c.metrics, &c.error) {
            (Some(m), _) => println!(
                "{:<20} {:<20} {:>12.6} {:>12.6} {:>10}",
                c.dataset,
                c.model,
                m.mse,
                m.mae,
                c.ljung_box
                    .as_ref()
                    .map(|l| format!("{:.4}", l.p_value))
                    .unwrap_or_else(|| "-".into())
            ),
            (None, Some(e)) => println!("{:<20} {:<20} failed: {e}", c.dataset, c.model),
            (None, None) => {}
        }
    }
    if report.all_failed() {
        return Err(CliError::Data("every benchmark cell failed".into()));
    }
    Ok(())
}

pub fn diagnose(cfg: &RunConfig, residuals: &Path) -> Result<(), CliError> {
    let series = load_series(cfg, residuals)?.into_complete()?;
    let lb = ljung_box(&series.values, cfg.ljung_box_lags)?;
    let mut table = String::from("lag,autocorrelation\n");
    for (i, r) in lb.autocorrs.iter().enumerate() {
        let _ = writeln!(table, "{},{r}", i + 1);
    }
    write_file(&cfg.out_dir.join("ljung_box.json"), &to_json(&lb)?)?;
    write_file(&cfg.out_dir.join("autocorrelations.csv"), &table)?;
    cfg.write_effective()?;
    println!("Q        {:.6}", lb.q);
    println!("df       {}", lb.h);
    println!("p-value  {:.6e}", lb.p_value);
    println!("lag  rho");
    for (i, r) in lb.autocorrs.iter().enumerate() {
        println!("{:>3}  {r:+.6}", i + 1);
    }
    Ok(())
}
