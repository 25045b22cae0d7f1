//! TOML run configuration shared by all CLI subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::droop::DroopConfig;
use crate::experiment::{BidMode, PriceBasis, ScenarioRegime, SocMode};
use crate::market_data::CsvSchema;
use crate::milp::SolveOptions;
use crate::model::{BessParams, BidStructure};
use crate::spline::GcvOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("referenced path does not exist: {0}")]
    MissingPath(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Input data locations. All paths are optional so each subcommand can
/// demand only what it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DataPaths {
    /// Hourly spot price/volume CSV.
    pub spot_csv: Option<PathBuf>,
    /// Hourly FCR-N price/volume CSV.
    pub fcr_n_csv: Option<PathBuf>,
    /// Minute-resolution grid frequency CSV.
    pub frequency_csv: Option<PathBuf>,
    /// Scenario set JSON for the optimizer.
    pub scenarios_json: Option<PathBuf>,
    /// Column names of the hourly CSVs.
    pub schema: SchemaConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemaConfig {
    pub timestamp: String,
    pub price: String,
    pub volume: String,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            timestamp: "timestamp".into(),
            price: "price".into(),
            volume: "volume".into(),
        }
    }
}

impl SchemaConfig {
    pub fn to_schema(&self) -> CsvSchema {
        CsvSchema {
            timestamp: self.timestamp.clone(),
            price: self.price.clone(),
            volume: self.volume.clone(),
        }
    }
}

/// Forecasting settings: training window, smoothing-parameter search and
/// scoring scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GamConfig {
    /// Training window length in hours.
    pub train_hours: usize,
    /// Forecast horizon in hours.
    pub horizon_hours: usize,
    /// Score MAPE on log revenues instead of level revenues.
    pub log_scale_mape: bool,
    pub gcv: GcvOptions,
}

impl Default for GamConfig {
    fn default() -> Self {
        GamConfig {
            train_hours: 336,
            horizon_hours: 168,
            log_scale_mape: false,
            gcv: GcvOptions::default(),
        }
    }
}

/// Bid structure settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BidConfig {
    pub mode: BidMode,
    /// Frequency bid size for single mode (MW).
    pub freq_mw: f64,
    /// Spot bid quantity for single mode (MWh).
    pub spot_mwh: f64,
    /// Price cap; when absent it defaults to 1.5x the largest clearing
    /// price in the scenario set.
    pub bid_max: Option<f64>,
    pub bid_min: f64,
    pub epsilon: f64,
}

impl Default for BidConfig {
    fn default() -> Self {
        BidConfig {
            mode: BidMode::Single,
            freq_mw: 0.9,
            spot_mwh: 0.8,
            bid_max: None,
            bid_min: 0.0,
            epsilon: 1e-3,
        }
    }
}

impl BidConfig {
    /// Resolves the structure against a scenario set (for the default cap).
    pub fn to_structure(&self, scenarios: &[crate::model::Scenario]) -> BidStructure {
        let bid_max = self
            .bid_max
            .unwrap_or_else(|| BidStructure::default_bid_max(scenarios));
        let mut structure = match self.mode {
            BidMode::Single => BidStructure::single_bid(self.freq_mw, self.spot_mwh, bid_max),
            BidMode::Multi => BidStructure::multi_bid(bid_max),
        };
        structure.bid_min = self.bid_min;
        structure.epsilon = self.epsilon;
        structure
    }
}

/// Settings for the `experiment` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub regime: ScenarioRegime,
    pub price_basis: PriceBasis,
    pub soc_mode: SocMode,
    pub horizon_weeks: usize,
    pub scenarios_per_day: usize,
    pub step_minutes: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            regime: ScenarioRegime::MidweekNPeaks,
            price_basis: PriceBasis::Original,
            soc_mode: SocMode::FixedEnd,
            horizon_weeks: 1,
            scenarios_per_day: 1,
            step_minutes: 60,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data: DataPaths,
    /// Bidding zones, e.g. DK2.
    pub zones: Vec<String>,
    /// Hour offset of zone-local time from UTC.
    pub zone_offset_hours: i32,
    pub gam: GamConfig,
    pub bess: BessParams,
    pub bids: BidConfig,
    pub droop: DroopConfig,
    pub solver: SolveOptions,
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    /// Seed for all stochastic scenario generation.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: DataPaths::default(),
            zones: vec!["DK2".into()],
            zone_offset_hours: 1,
            gam: GamConfig::default(),
            // Hourly steps keep day-scale instances within the embedded
            // solver's comfort zone; finer grids are opt-in.
            bess: BessParams {
                step_minutes: 60,
                ..BessParams::default()
            },
            bids: BidConfig::default(),
            droop: DroopConfig::default(),
            // Day-scale instances carry an inherent delivery-gating
            // integrality gap that is slow to prove away; half a percent is
            // plenty for scheduling decisions.
            solver: SolveOptions {
                rel_gap: 5e-3,
                node_limit: Some(5_000),
                ..SolveOptions::default()
            },
            experiment: ExperimentConfig::default(),
            output_dir: PathBuf::from("out"),
            seed: 42,
        }
    }
}

impl RunConfig {
    /// Checks structural settings and that every referenced input exists.
    /// The output directory is created on demand later, not required here.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for path in [
            &self.data.spot_csv,
            &self.data.fcr_n_csv,
            &self.data.frequency_csv,
            &self.data.scenarios_json,
        ]
        .into_iter()
        .flatten()
        {
            if !path.exists() {
                return Err(ConfigError::MissingPath(path.display().to_string()));
            }
        }
        if self.zones.is_empty() {
            return Err(ConfigError::Invalid("no zones configured".into()));
        }
        if self.gam.train_hours < 168 {
            return Err(ConfigError::Invalid(format!(
                "training window {} h is shorter than one week",
                self.gam.train_hours
            )));
        }
        self.bess
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.droop
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: RunConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    // Paths in the file are relative to the file's directory.
    let base = path.parent().unwrap_or(Path::new("."));
    let rebase = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
    let mut config = config;
    config.data.spot_csv = rebase(config.data.spot_csv);
    config.data.fcr_n_csv = rebase(config.data.fcr_n_csv);
    config.data.frequency_csv = rebase(config.data.frequency_csv);
    config.data.scenarios_json = rebase(config.data.scenarios_json);
    if config.output_dir.is_relative() {
        config.output_dir = base.join(&config.output_dir);
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let config = RunConfig::default();
        let text = toml::to_string(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.seed, config.seed);
        assert_eq!(back.gam.train_hours, 336);
        assert_eq!(back.bids.epsilon, 1e-3);
    }

    #[test]
    fn empty_file_yields_defaults() {
        let config: RunConfig = toml::from_str("").unwrap();
        assert_eq!(config.zones, vec!["DK2".to_string()]);
        assert_eq!(config.bess.horizon_hours, 24);
    }

    #[test]
    fn missing_referenced_path_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[data]\nspot_csv = \"nope.csv\"\n").unwrap();
        match load_config(&path) {
            Err(ConfigError::MissingPath(p)) => assert!(p.ends_with("nope.csv")),
            other => panic!("expected MissingPath, got {other:?}"),
        }
    }

    #[test]
    fn relative_paths_resolve_against_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("freq.csv"), "timestamp,hz\n").unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[data]\nfrequency_csv = \"freq.csv\"\n").unwrap();
        let config = load_config(&path).unwrap();
        assert_eq!(
            config.data.frequency_csv.unwrap(),
            dir.path().join("freq.csv")
        );
    }

    #[test]
    fn short_training_window_is_invalid() {
        let config = RunConfig {
            gam: GamConfig {
                train_hours: 100,
                ..GamConfig::default()
            },
            ..RunConfig::default()
        };
        assert!(matches!(config.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn bid_config_resolves_mode_and_cap() {
        let single = BidConfig::default().to_structure(&[]);
        assert_eq!(single.pairs.len(), 4);
        let multi = BidConfig {
            mode: BidMode::Multi,
            bid_max: Some(200.0),
            ..BidConfig::default()
        }
        .to_structure(&[]);
        assert_eq!(multi.pairs.len(), 12);
        assert_eq!(multi.bid_max, 200.0);
    }
}
