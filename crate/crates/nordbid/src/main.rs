//! Command-line front-end: ingestion, forecasting, droop simulation, bid
//! optimization and experiment runs driven by one TOML config.
//!
//! Exit codes: 0 on success, 2 on configuration/data errors, 3 on solver
//! failures. Set NORDBID_LOG=info (or debug) for progress output on stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use nordbid::config::{load_config, ConfigError, RunConfig};
use nordbid::droop::{build_meb, DroopError, MebTable};
use nordbid::experiment::{
    run_spec, write_experiment_csv, ExperimentError, ExperimentSpec,
};
use nordbid::forecast::{
    backtest, summarize, write_backtest_csv, BacktestOptions, ForecastError,
};
use nordbid::market_data::{
    load_frequency_csv, load_hourly_csv, to_log_revenue, MarketDataError, SeriesMarket,
};
use nordbid::milp::{branch_and_bound, export_lp_text, MilpError, MilpStatus};
use nordbid::model::{
    build_instance, settle, validate_solution, InstanceError, MilpInstance, ModelError, Scenario,
};

#[derive(Parser)]
#[command(name = "nordbid", version, about = "Nordic multi-market BESS bidding toolkit")]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(short, long, global = true, default_value = "nordbid.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the configured hourly CSVs; write cleaned series
    /// and per-row rejection reports.
    Ingest,
    /// Run the rolling weekly backtest and write per-week CSVs plus a JSON
    /// summary per market.
    Forecast,
    /// Convert the configured frequency trace into market energy blocks.
    SimulateMeb,
    /// Build and solve the scheduling model for the configured scenario set.
    Optimize,
    /// Run the configured study design over synthetic seasonal scenarios.
    Experiment,
    /// Write the scheduling model as an LP-format file without solving it.
    ExportLp,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] MarketDataError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Droop(#[from] DroopError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("solver failed: {0}")]
    Solver(#[from] MilpError),
    #[error("scheduling instance is infeasible")]
    Infeasible,
    #[error("solver hit its limits before finding any feasible schedule")]
    NoIncumbent,
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config is missing required setting: {0}")]
    MissingSetting(&'static str),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) | CliError::Infeasible | CliError::NoIncumbent => 3,
            CliError::Experiment(ExperimentError::Milp(_))
            | CliError::Experiment(ExperimentError::Infeasible { .. }) => 3,
            _ => 2,
        }
    }
}

fn log_enabled() -> bool {
    static ENABLED: OnceLock<bool> = OnceLock::new();
    *ENABLED.get_or_init(|| {
        matches!(
            std::env::var("NORDBID_LOG").as_deref(),
            Ok("info") | Ok("debug") | Ok("trace")
        )
    })
}

macro_rules! info {
    ($($arg:tt)*) => {
        if log_enabled() {
            eprintln!($($arg)*);
        }
    };
}

/// Collects every emitted file and its SHA-256, then writes a manifest so
/// runs are auditable and diffable.
struct Emitter {
    dir: PathBuf,
    command: &'static str,
    files: BTreeMap<String, String>,
}

impl Emitter {
    fn new(output_dir: &Path, command: &'static str) -> Result<Self, CliError> {
        let dir = output_dir.join(command);
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Emitter {
            dir,
            command,
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let digest = Sha256::digest(bytes);
        self.files.insert(name.to_string(), format!("{digest:x}"));
        info!("wrote {}", path.display());
        Ok(path)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    fn finish(self, seed: u64) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            seed: u64,
            files: &'a BTreeMap<String, String>,
        }
        let manifest = Manifest {
            command: self.command,
            seed,
            files: &self.files,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
        bytes.push(b'\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, &bytes).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

/// The hourly inputs the config declares, as (market, path) pairs.
fn hourly_inputs(config: &RunConfig) -> Vec<(SeriesMarket, PathBuf)> {
    let mut inputs = Vec::new();
    if let Some(path) = &config.data.spot_csv {
        inputs.push((SeriesMarket::Spot, path.clone()));
    }
    if let Some(path) = &config.data.fcr_n_csv {
        inputs.push((SeriesMarket::FcrN, path.clone()));
    }
    inputs
}

fn cmd_ingest(config: &RunConfig) -> Result<(), CliError> {
    let inputs = hourly_inputs(config);
    if inputs.is_empty() {
        return Err(CliError::MissingSetting("data.spot_csv or data.fcr_n_csv"));
    }
    let schema = config.data.schema.to_schema();
    let mut emitter = Emitter::new(&config.output_dir, "ingest")?;
    for zone in &config.zones {
        for (market, path) in &inputs {
            info!("ingesting {} / {market} from {}", zone, path.display());
            let (series, rejections) = load_hourly_csv(path, &schema, zone, *market)?;
            let (log_revenue, transform_rejections) =
                to_log_revenue(&series, config.zone_offset_hours);
            emitter.write_json(&format!("{zone}_{market}_series.json"), &series)?;
            emitter.write_json(&format!("{zone}_{market}_log_revenue.json"), &log_revenue)?;
            let mut buf = Vec::new();
            rejections.write_jsonl(&mut buf).expect("vec write");
            transform_rejections.write_jsonl(&mut buf).expect("vec write");
            emitter.write(&format!("{zone}_{market}_rejections.jsonl"), &buf)?;
        }
    }
    emitter.finish(config.seed)
}

fn cmd_forecast(config: &RunConfig) -> Result<(), CliError> {
    let inputs = hourly_inputs(config);
    if inputs.is_empty() {
        return Err(CliError::MissingSetting("data.spot_csv or data.fcr_n_csv"));
    }
    let schema = config.data.schema.to_schema();
    let opts = BacktestOptions {
        train_len: config.gam.train_hours,
        horizon: config.gam.horizon_hours,
        log_scale: config.gam.log_scale_mape,
        gcv: config.gam.gcv,
    };
    let mut emitter = Emitter::new(&config.output_dir, "forecast")?;
    for zone in &config.zones {
        for (market, path) in &inputs {
            info!("backtesting {} / {market}", zone);
            let (series, _) = load_hourly_csv(path, &schema, zone, *market)?;
            let (log_revenue, _) = to_log_revenue(&series, config.zone_offset_hours);
            let report = backtest(&log_revenue, &opts)?;
            let mut csv = Vec::new();
            write_backtest_csv(&report, &mut csv).expect("vec write");
            emitter.write(&format!("{zone}_{market}_weeks.csv"), &csv)?;
            emitter.write_json(&format!("{zone}_{market}_summary.json"), &summarize(&report))?;
        }
    }
    emitter.finish(config.seed)
}

fn cmd_simulate_meb(config: &RunConfig) -> Result<(), CliError> {
    let path = config
        .data
        .frequency_csv
        .as_ref()
        .ok_or(CliError::MissingSetting("data.frequency_csv"))?;
    let trace = load_frequency_csv(path)?;
    let structure = config.bids.to_structure(&[]);
    let table = build_meb(
        &trace,
        &structure.pairs,
        config.bess.step_minutes,
        trace.hours(),
        &config.droop,
    )?;
    let mut emitter = Emitter::new(&config.output_dir, "simulate-meb")?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv).expect("vec write");
    emitter.write("meb.csv", &csv)?;
    emitter.finish(config.seed)
}

/// Loads the scenario set and resolves each scenario's frequency trace
/// relative to the scenario file.
fn load_scenarios(config: &RunConfig) -> Result<Vec<Scenario>, CliError> {
    let path = config
        .data
        .scenarios_json
        .as_ref()
        .ok_or(CliError::MissingSetting("data.scenarios_json"))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut scenarios: Vec<Scenario> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(ConfigError::Invalid(format!(
            "cannot parse scenario set {}: {e}",
            path.display()
        ))))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for scenario in &mut scenarios {
        let trace_path = scenario.frequency_trace.as_ref().ok_or(CliError::Config(
            ConfigError::Invalid("scenario lacks a frequency_trace path".into()),
        ))?;
        let resolved = if Path::new(trace_path).is_relative() {
            base.join(trace_path)
        } else {
            PathBuf::from(trace_path)
        };
        scenario.trace = Some(load_frequency_csv(&resolved)?);
    }
    Ok(scenarios)
}

fn build_configured_instance(config: &RunConfig) -> Result<MilpInstance, CliError> {
    let scenarios = load_scenarios(config)?;
    let structure = config.bids.to_structure(&scenarios);
    let mut mebs: Vec<MebTable> = Vec::with_capacity(scenarios.len());
    for scenario in &scenarios {
        let trace = scenario.trace.as_ref().expect("trace loaded");
        mebs.push(build_meb(
            trace,
            &structure.pairs,
            config.bess.step_minutes,
            config.bess.horizon_hours as usize,
            &config.droop,
        )?);
    }
    Ok(build_instance(&config.bess, &structure, &scenarios, &mebs)?)
}

fn cmd_optimize(config: &RunConfig) -> Result<(), CliError> {
    let inst = build_configured_instance(config)?;
    info!(
        "solving instance: {} vars, {} rows",
        inst.lp.var_names.len(),
        inst.lp.rows.len()
    );
    let res = branch_and_bound(&inst.lp, &config.solver)?;
    if res.status == MilpStatus::Infeasible {
        return Err(CliError::Infeasible);
    }
    if res.values.is_empty() {
        return Err(CliError::NoIncumbent);
    }
    let solution = inst.extract_solution(&res.values);
    let validation = validate_solution(&solution, &inst);
    let settlement = settle(&solution, &inst);

    #[derive(Serialize)]
    struct SolveReport {
        status: MilpStatus,
        objective: f64,
        bound: f64,
        node_count: usize,
        violations: usize,
    }
    let mut emitter = Emitter::new(&config.output_dir, "optimize")?;
    emitter.write_json("solution.json", &solution)?;
    emitter.write_json("settlement.json", &settlement)?;
    emitter.write_json(
        "solve.json",
        &SolveReport {
            status: res.status,
            objective: res.objective,
            bound: res.bound,
            node_count: res.node_count,
            violations: validation.violations.len(),
        },
    )?;
    if !validation.is_clean() {
        emitter.write_json("violations.json", &validation)?;
    }
    emitter.finish(config.seed)
}

fn cmd_experiment(config: &RunConfig) -> Result<(), CliError> {
    let spec = ExperimentSpec {
        name: format!("{:?}-{:?}", config.experiment.regime, config.bids.mode),
        regime: config.experiment.regime,
        price_basis: config.experiment.price_basis,
        bid_mode: config.bids.mode,
        soc_mode: config.experiment.soc_mode,
        horizon_weeks: config.experiment.horizon_weeks,
        scenarios_per_day: config.experiment.scenarios_per_day,
        step_minutes: config.experiment.step_minutes,
        seed: config.seed,
    };
    info!("running experiment {}", spec.name);
    let report = run_spec(&spec, &config.solver)?;
    let mut emitter = Emitter::new(&config.output_dir, "experiment")?;
    emitter.write_json("report.json", &report)?;
    let mut csv = Vec::new();
    write_experiment_csv(&report, &mut csv).expect("vec write");
    emitter.write("report.csv", &csv)?;
    emitter.finish(config.seed)
}

fn cmd_export_lp(config: &RunConfig) -> Result<(), CliError> {
    let inst = build_configured_instance(config)?;
    let text = export_lp_text(&inst.lp).map_err(|e| {
        CliError::Config(ConfigError::Invalid(format!("LP export failed: {e}")))
    })?;
    let mut emitter = Emitter::new(&config.output_dir, "export-lp")?;
    emitter.write("instance.lp", text.as_bytes())?;
    emitter.finish(config.seed)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(&cli.config)?;
    match cli.command {
        Command::Ingest => cmd_ingest(&config),
        Command::Forecast => cmd_forecast(&config),
        Command::SimulateMeb => cmd_simulate_meb(&config),
        Command::Optimize => cmd_optimize(&config),
        Command::Experiment => cmd_experiment(&config),
        Command::ExportLp => cmd_export_lp(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(err.exit_code())
        }
    }
}
