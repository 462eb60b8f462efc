//! `slicecast` — generate synthetic slice traces, build stakeholder
//! feature views, train forecasters, and score provisioning decisions.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 training
//! divergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slicecast::config::{
    default_experiment, load_experiment_config, load_generator_config, load_train_config,
};
use slicecast::eval::{compare_scenarios, evaluate, EvalReport, ReportMeta};
use slicecast::features::{
    joint_features, mno_features, split, target_series, vertical_features, DemandMode, Scaler,
    SplitSpec, ViewKind,
};
use slicecast::forecast::holt_winters::{holt_winters_fit, HwModel};
use slicecast::forecast::lstm::{lstm_train, rolling_forecast, LstmModel, TrainConfig};
use slicecast::forecast::make_windows;
use slicecast::forecast::naive::{seasonal_naive, DEFAULT_SEASON};
use slicecast::features::{FeatureMatrix, TargetSeries};
use slicecast::synth::generate_trace;
use slicecast::trace::{load_trace_file, summarize, write_trace_file};
use slicecast::{Error, Result};

#[derive(Parser)]
#[command(
    name = "slicecast",
    version,
    about = "Per-app network-slice traffic forecasting and provisioning evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace from a generator config file.
    Generate {
        /// TOML config with a [generator] section.
        #[arg(long)]
        config: PathBuf,
        /// Output trace CSV.
        #[arg(long)]
        out: PathBuf,
        /// Seed override; also honored from SLICECAST_SEED.
        #[arg(long, env = "SLICECAST_SEED")]
        seed: Option<u64>,
    },
    /// Print summary statistics of a trace.
    Summarize {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Build a stakeholder feature matrix (and optionally the target series).
    Features(FeaturesArgs),
    /// Train a forecasting model on a feature/target pair.
    Train(TrainArgs),
    /// Forecast the test window with a trained model.
    #[command(name = "forecast")]
    ForecastCmd(ForecastArgs),
    /// Score a forecast against actual demand.
    Evaluate(EvaluateArgs),
    /// Emit the comparison table and scatter data from a report.
    Compare {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        table_out: PathBuf,
        #[arg(long)]
        scatter_out: PathBuf,
    },
    /// Run the full three-scenario study end to end.
    Experiment {
        /// Experiment TOML; defaults to the built-in three-app study.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "experiment_out")]
        out_dir: PathBuf,
        /// Seed override; also honored from SLICECAST_SEED.
        #[arg(long, env = "SLICECAST_SEED")]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    trace: PathBuf,
    /// mno, vertical, or joint.
    #[arg(long)]
    view: ViewKind,
    /// App id; required for vertical and joint views or when writing a target.
    #[arg(long)]
    app: Option<String>,
    /// Tile aggregation factor for the vertical view.
    #[arg(long, default_value_t = 8)]
    agg: u32,
    /// dl or dl+ul.
    #[arg(long, default_value = "dl+ul")]
    mode: DemandMode,
    #[arg(long)]
    out: PathBuf,
    /// Also write the app's target series here.
    #[arg(long)]
    target_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// TRAIN:TEST period counts, e.g. 504:168.
    #[arg(long, default_value = "504:168")]
    split: SplitSpec,
    /// lstm, hw, or naive.
    #[arg(long, default_value = "lstm")]
    engine: String,
    /// Optional TOML with LSTM hyperparameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Season length for hw/naive engines.
    #[arg(long, default_value_t = DEFAULT_SEASON)]
    season: usize,
    /// Holt-Winters smoothing parameters.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    #[arg(long, default_value_t = 0.3)]
    gamma: f64,
    #[arg(long, env = "SLICECAST_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV (required for lstm models).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Target CSV (required for naive models).
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value = "504:168")]
    split: SplitSpec,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Actual demand (target CSV); the trailing n periods are scored,
    /// where n is the forecast length.
    #[arg(long)]
    actual: PathBuf,
    #[arg(long)]
    forecast: PathBuf,
    #[arg(long, default_value = "app")]
    app: String,
    #[arg(long, default_value = "mno")]
    view: ViewKind,
    #[arg(long, default_value = "unknown")]
    engine: String,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_generate(config: PathBuf, out: PathBuf, seed: Option<u64>) -> Result<()> {
    let mut cfg = load_generator_config(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let trace = generate_trace(&cfg)?;
    write_trace_file(&trace, &out)?;
    let m = trace.meta();
    println!(
        "wrote {} records over {} periods to {}",
        trace.records().len(),
        m.duration_periods,
        out.display()
    );
    Ok(())
}

fn cmd_summarize(trace_path: PathBuf) -> Result<()> {
    let trace = load_trace_file(&trace_path)?;
    let m = summarize(&trace);
    println!("Metric              Value");
    println!("Duration (periods)  {}", m.duration_periods);
    println!("Records             {}", trace.records().len());
    println!("Unique users        {}", m.n_users);
    println!("Unique cells        {}", m.n_cells);
    println!("Unique apps         {}", m.n_apps);
    println!("Unique tiles        {}", m.n_tiles);
    println!("Total traffic (B)   {}", m.total_traffic_bytes);
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let trace = load_trace_file(&args.trace)?;
    let need_app = args.view != ViewKind::Mno || args.target_out.is_some();
    if need_app && args.app.is_none() {
        return Err(Error::Config(format!("view {} requires --app", args.view)));
    }
    let matrix = match args.view {
        ViewKind::Mno => mno_features(&trace, args.mode),
        ViewKind::Vertical => {
            vertical_features(&trace, args.app.as_deref().unwrap(), args.agg, args.mode)?
        }
        ViewKind::Joint => {
            let mno = mno_features(&trace, args.mode);
            let vert =
                vertical_features(&trace, args.app.as_deref().unwrap(), args.agg, args.mode)?;
            joint_features(&mno, &vert)?
        }
    };
    slicecast::io::write_features_file(&matrix, &args.out)?;
    println!("wrote {} x {} features to {}", matrix.n_rows(), matrix.n_cols(), args.out.display());
    if let Some(target_out) = args.target_out {
        let target = target_series(&trace, args.app.as_deref().unwrap(), args.mode)?;
        slicecast::io::write_target_file(&target, &target_out)?;
        println!("wrote target series to {}", target_out.display());
    }
    Ok(())
}

fn load_pair(
    features_path: &PathBuf,
    target_path: &PathBuf,
) -> Result<(FeatureMatrix, TargetSeries)> {
    let features = slicecast::io::read_features_file(features_path)?;
    let target_values = slicecast::io::read_target_file(target_path)?;
    let target = TargetSeries { app_id: "app".into(), values: target_values };
    Ok((features, target))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let (features, target) = load_pair(&args.features, &args.target)?;
    let model_text = match args.engine.as_str() {
        "lstm" => {
            let mut train_cfg = match &args.config {
                Some(path) => load_train_config(path)?,
                None => TrainConfig::default(),
            };
            if let Some(seed) = args.seed {
                train_cfg.seed = seed;
            }
            let (train_f, train_y, _, _) = split(&features, &target, &args.split)?;
            let feature_scaler = Scaler::fit(&train_f)?;
            let target_scaler = Scaler::fit_vector(&train_y)?;
            let scaled_train = feature_scaler.apply(&train_f);
            let scaled_y: Vec<f64> =
                train_y.iter().map(|&v| target_scaler.apply_scalar(v)).collect();
            let windows = make_windows(&scaled_train, &scaled_y, train_cfg.window_len)?;
            let trained = lstm_train(&windows, &train_cfg)?;
            LstmModel {
                params: trained.params,
                window_len: train_cfg.window_len,
                feature_scaler,
                target_scaler,
            }
            .to_text()
        }
        "hw" => {
            let (_, train_y, _, _) = split(&features, &target, &args.split)?;
            holt_winters_fit(&train_y, args.season, args.alpha, args.beta, args.gamma)?.to_text()
        }
        "naive" => format!("slicecast-naive v1\n{}\n", args.season),
        other => return Err(Error::Config(format!("unknown engine `{other}`"))),
    };
    std::fs::write(&args.model_out, model_text)?;
    println!("wrote {} model to {}", args.engine, args.model_out.display());
    Ok(())
}

fn cmd_forecast(args: ForecastArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.model)?;
    let header = text.lines().next().unwrap_or("");
    let values = match header {
        "slicecast-lstm v1" => {
            let model = LstmModel::from_text(&text)?;
            let features_path = args
                .features
                .as_ref()
                .ok_or_else(|| Error::Config("lstm forecasting requires --features".into()))?;
            let features = slicecast::io::read_features_file(features_path)?;
            let scaled = model.feature_scaler.apply(&features);
            rolling_forecast(
                &model.params,
                &scaled,
                &model.target_scaler,
                &args.split,
                model.window_len,
            )?
        }
        "slicecast-hw v1" => HwModel::from_text(&text)?.forecast(args.split.test_periods),
        "slicecast-naive v1" => {
            let season: usize = text
                .lines()
                .nth(1)
                .and_then(|l| l.trim().parse().ok())
                .ok_or_else(|| Error::Model("bad naive model file".into()))?;
            let target_path = args
                .target
                .as_ref()
                .ok_or_else(|| Error::Config("naive forecasting requires --target".into()))?;
            let values = slicecast::io::read_target_file(target_path)?;
            let target = TargetSeries { app_id: "app".into(), values };
            seasonal_naive(&target, &args.split, season)?
        }
        other => return Err(Error::Model(format!("unknown model header `{other}`"))),
    };
    slicecast::io::write_forecast_file(args.split.train_periods, &values, &args.out)?;
    println!("wrote {}-period forecast to {}", values.len(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let actual = slicecast::io::read_target_file(&args.actual)?;
    let forecast = slicecast::io::read_forecast_file(&args.forecast)?;
    let n = forecast.len();
    if actual.len() < n {
        return Err(Error::Shape(format!(
            "actual series ({}) shorter than forecast ({n})",
            actual.len()
        )));
    }
    let y = &actual[actual.len() - n..];
    let entry = evaluate(&args.app, args.view, y, &forecast)?;
    let train_periods = actual.len() - n;
    let report = EvalReport {
        meta: ReportMeta {
            split: SplitSpec { train_periods: train_periods.max(1), test_periods: n },
            engine: args.engine,
            seed: 0,
            demand_mode: "dl+ul".into(),
            failures: vec![],
        },
        entries: vec![entry],
    }
    .finalize()?;
    std::fs::write(&args.out, serde_json::to_string_pretty(&report)?)?;
    println!("wrote report to {}", args.out.display());
    Ok(())
}

fn cmd_compare(report: PathBuf, table_out: PathBuf, scatter_out: PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(&report)?;
    let report: EvalReport = serde_json::from_str(&text)?;
    let (table, scatter) = compare_scenarios(&report)?;
    std::fs::write(&table_out, table)?;
    std::fs::write(&scatter_out, scatter)?;
    println!("wrote {} and {}", table_out.display(), scatter_out.display());
    Ok(())
}

fn cmd_experiment(config: Option<PathBuf>, out_dir: PathBuf, seed: Option<u64>) -> Result<()> {
    let mut cfg = match config {
        Some(path) => load_experiment_config(&path)?,
        None => default_experiment(42),
    };
    if let Some(seed) = seed {
        cfg.generator.seed = seed;
        cfg.train.seed = seed;
    }
    let outcome = slicecast::experiment::run_experiment(&cfg, &out_dir)?;
    println!(
        "studied apps: {} | {} entries, {} failures | artifacts in {}",
        outcome.apps.join(", "),
        outcome.report.entries.len(),
        outcome.report.meta.failures.len(),
        out_dir.display()
    );
    for e in &outcome.report.entries {
        println!(
            "  {:<12} {:<8} rmse={:.3e} w={:.3e} u={} u_frac={:.3}",
            e.app_id, e.view.to_string(), e.rmse, e.w, e.u, e.u_frac
        );
    }
    for f in &outcome.report.meta.failures {
        eprintln!("  FAILED {} {} at {}: {}", f.app_id, f.view, f.stage, f.message);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, out, seed } => cmd_generate(config, out, seed),
        Command::Summarize { trace } => cmd_summarize(trace),
        Command::Features(args) => cmd_features(args),
        Command::Train(args) => cmd_train(args),
        Command::ForecastCmd(args) => cmd_forecast(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare { report, table_out, scatter_out } => {
            cmd_compare(report, table_out, scatter_out)
        }
        Command::Experiment { config, out_dir, seed } => cmd_experiment(config, out_dir, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successes; anything else is a usage error.
            if e.use_stderr() {
                eprintln!("error: {}", e.render().to_string().lines().next().unwrap_or("usage"));
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
