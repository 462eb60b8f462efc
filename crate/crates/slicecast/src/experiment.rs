//! One-shot experiment driver: generate a trace, then for every
//! (app, view) pair build features, train, forecast, and evaluate,
//! leaving all stage artifacts on disk. Re-running with the same config
//! and seed reproduces identical numeric outputs.

use std::path::{Path, PathBuf};

use crate::chart::{line_chart, scatter_chart, ScatterPoint};
use crate::config::ExperimentConfig;
use crate::eval::{compare_scenarios, evaluate, EvalEntry, EvalReport, FailureNote, ReportMeta};
use crate::features::{
    apps_by_traffic, joint_features, mno_features, split, target_series, vertical_features,
    FeatureMatrix, Scaler, TargetSeries, ViewKind,
};
use crate::forecast::lstm::{lstm_train, rolling_forecast, LstmModel, TrainConfig};
use crate::forecast::make_windows;
use crate::synth::generate_trace;
use crate::trace::{write_trace_file, Trace};
use crate::{Error, Result};

/// Default number of apps studied when the config names none.
const DEFAULT_APP_COUNT: usize = 3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable per-(app, view) training seed so pairs are independent but the
/// whole experiment stays a pure function of the config seed.
fn pair_seed(base: u64, app: &str, view: ViewKind) -> u64 {
    let mut acc = splitmix64(base);
    for b in app.bytes() {
        acc = splitmix64(acc ^ b as u64);
    }
    splitmix64(acc ^ view as u64)
}

/// Everything `run_experiment` leaves behind, for callers that want to
/// inspect results programmatically.
pub struct ExperimentOutcome {
    pub report: EvalReport,
    pub out_dir: PathBuf,
    pub apps: Vec<String>,
}

fn pair_stem(app: &str, view: ViewKind) -> String {
    format!("{app}_{view}")
}

struct PairArtifacts {
    entry: EvalEntry,
}

#[allow(clippy::too_many_arguments)]
fn run_pair(
    cfg: &ExperimentConfig,
    trace: &Trace,
    mno: Option<&FeatureMatrix>,
    target: &TargetSeries,
    app: &str,
    view: ViewKind,
    train_cfg: &TrainConfig,
    out_dir: &Path,
) -> std::result::Result<PairArtifacts, (String, Error)> {
    let stage = |name: &str| name.to_string();
    let stem = pair_stem(app, view);

    let features = match view {
        ViewKind::Mno => mno.expect("mno features precomputed").clone(),
        ViewKind::Vertical => vertical_features(trace, app, cfg.agg, cfg.demand_mode)
            .map_err(|e| (stage("features"), e))?,
        ViewKind::Joint => {
            let vert = vertical_features(trace, app, cfg.agg, cfg.demand_mode)
                .map_err(|e| (stage("features"), e))?;
            joint_features(mno.expect("mno features precomputed"), &vert)
                .map_err(|e| (stage("features"), e))?
        }
    };
    crate::io::write_features_file(&features, &out_dir.join(format!("features_{stem}.csv")))
        .map_err(|e| (stage("features"), e))?;

    let (train_f, train_y, _test_f, test_y) =
        split(&features, target, &cfg.split).map_err(|e| (stage("split"), e))?;

    let feature_scaler = Scaler::fit(&train_f).map_err(|e| (stage("scale"), e))?;
    let target_scaler = Scaler::fit_vector(&train_y).map_err(|e| (stage("scale"), e))?;
    let scaled_full = feature_scaler.apply(&features);
    let scaled_train = FeatureMatrix {
        column_names: scaled_full.column_names.clone(),
        values: scaled_full.values[..cfg.split.train_periods].to_vec(),
    };
    let scaled_train_y: Vec<f64> = train_y.iter().map(|&v| target_scaler.apply_scalar(v)).collect();

    let windows = make_windows(&scaled_train, &scaled_train_y, train_cfg.window_len)
        .map_err(|e| (stage("windows"), e))?;
    let trained = lstm_train(&windows, train_cfg).map_err(|e| (stage("train"), e))?;

    let model = LstmModel {
        params: trained.params,
        window_len: train_cfg.window_len,
        feature_scaler,
        target_scaler,
    };
    std::fs::write(out_dir.join(format!("model_{stem}.txt")), model.to_text())
        .map_err(|e| (stage("train"), Error::Io(e)))?;

    let predicted = rolling_forecast(
        &model.params,
        &scaled_full,
        &model.target_scaler,
        &cfg.split,
        model.window_len,
    )
    .map_err(|e| (stage("forecast"), e))?;
    crate::io::write_forecast_file(
        cfg.split.train_periods,
        &predicted,
        &out_dir.join(format!("forecast_{stem}.csv")),
    )
    .map_err(|e| (stage("forecast"), e))?;

    // Actual-vs-predicted overlay data and chart for this pair.
    let mut overlay = String::from("period,y,yhat\n");
    for (j, (y, yhat)) in test_y.iter().zip(&predicted).enumerate() {
        overlay.push_str(&format!("{},{},{}\n", cfg.split.train_periods + j, y, yhat));
    }
    std::fs::write(out_dir.join(format!("actual_vs_predicted_{stem}.csv")), overlay)
        .map_err(|e| (stage("report"), Error::Io(e)))?;
    let svg = line_chart(
        &format!("{app} ({view}): actual vs predicted"),
        "test period",
        "bytes/hour",
        &[("actual", test_y.as_slice()), ("predicted", predicted.as_slice())],
    );
    std::fs::write(out_dir.join(format!("chart_{stem}.svg")), svg)
        .map_err(|e| (stage("report"), Error::Io(e)))?;

    let entry = evaluate(app, view, &test_y, &predicted).map_err(|e| (stage("evaluate"), e))?;
    Ok(PairArtifacts { entry })
}

/// Runs the full study. Failing (app, view) pairs are recorded in the
/// report's failure list; the remaining pairs still run.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;

    let trace = generate_trace(&cfg.generator)?;
    write_trace_file(&trace, &out_dir.join("trace.csv"))?;

    let apps: Vec<String> = if cfg.apps_under_study.is_empty() {
        apps_by_traffic(&trace, cfg.demand_mode)
            .into_iter()
            .take(DEFAULT_APP_COUNT)
            .map(|(app, _)| app)
            .collect()
    } else {
        cfg.apps_under_study.clone()
    };
    if apps.is_empty() {
        return Err(Error::Config("trace contains no apps to study".into()));
    }

    let mut views = cfg.views.clone();
    views.sort();

    let needs_mno = views.iter().any(|v| matches!(v, ViewKind::Mno | ViewKind::Joint));
    let mno = needs_mno.then(|| mno_features(&trace, cfg.demand_mode));

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for app in &apps {
        let target = match target_series(&trace, app, cfg.demand_mode) {
            Ok(t) => t,
            Err(e) => {
                for &view in &views {
                    failures.push(FailureNote {
                        app_id: app.clone(),
                        view,
                        stage: "target".into(),
                        message: e.to_string(),
                    });
                }
                continue;
            }
        };
        crate::io::write_target_file(&target, &out_dir.join(format!("target_{app}.csv")))?;
        for &view in &views {
            let mut train_cfg = cfg.train.clone();
            train_cfg.seed = pair_seed(cfg.train.seed, app, view);
            match run_pair(cfg, &trace, mno.as_ref(), &target, app, view, &train_cfg, out_dir) {
                Ok(pair) => entries.push(pair.entry),
                Err((stage, e)) => failures.push(FailureNote {
                    app_id: app.clone(),
                    view,
                    stage,
                    message: e.to_string(),
                }),
            }
        }
    }

    let report = EvalReport {
        meta: ReportMeta {
            split: cfg.split,
            engine: "lstm".into(),
            seed: cfg.generator.seed,
            demand_mode: cfg.demand_mode.to_string(),
            failures,
        },
        entries,
    }
    .finalize()?;

    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(out_dir.join("report.json"), json)?;

    if !report.entries.is_empty() {
        let (table, scatter) = compare_scenarios(&report)?;
        std::fs::write(out_dir.join("comparison.csv"), table)?;
        std::fs::write(out_dir.join("scatter.csv"), scatter)?;
        let points: Vec<ScatterPoint> = report
            .entries
            .iter()
            .map(|e| ScatterPoint {
                app_id: e.app_id.clone(),
                view_marker: e.view.to_string(),
                w: e.w,
                u: e.u,
            })
            .collect();
        let svg = scatter_chart("unused capability vs scale-up events", &points);
        std::fs::write(out_dir.join("scatter.svg"), svg)?;
    }
    Ok(ExperimentOutcome { report, out_dir: out_dir.to_path_buf(), apps })
}
