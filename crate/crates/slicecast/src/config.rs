//! TOML configuration files for the generator and the experiment driver.
//! Keys mirror the config struct field names.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::{DemandMode, SplitSpec, ViewKind};
use crate::forecast::lstm::TrainConfig;
use crate::synth::{self, GeneratorConfig};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
struct GeneratorFile {
    generator: GeneratorConfig,
}

pub fn load_generator_config(path: &Path) -> Result<GeneratorConfig> {
    let text = std::fs::read_to_string(path)?;
    let file: GeneratorFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    file.generator.validate()?;
    Ok(file.generator)
}

pub fn load_train_config(path: &Path) -> Result<TrainConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: TrainConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Full three-scenario study configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    /// Apps to forecast; empty means the three highest-traffic apps.
    #[serde(default)]
    pub apps_under_study: Vec<String>,
    #[serde(default = "default_views")]
    pub views: Vec<ViewKind>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub split: SplitSpec,
    /// Tile aggregation factor for the vertical view.
    #[serde(default = "default_agg")]
    pub agg: u32,
    #[serde(default)]
    pub demand_mode: DemandMode,
}

fn default_views() -> Vec<ViewKind> {
    vec![ViewKind::Mno, ViewKind::Vertical, ViewKind::Joint]
}

fn default_agg() -> u32 {
    8
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.train.validate()?;
        if self.views.is_empty() {
            return Err(Error::Config("views must be non-empty".into()));
        }
        let mut views = self.views.clone();
        views.sort();
        views.dedup();
        if views.len() != self.views.len() {
            return Err(Error::Config("views must be distinct".into()));
        }
        if self.agg < 1 {
            return Err(Error::Config("agg must be >= 1".into()));
        }
        for app in &self.apps_under_study {
            if !self.generator.apps.iter().any(|p| &p.app_id == app) {
                return Err(Error::Config(format!(
                    "app `{app}` under study is not in the generator config"
                )));
            }
        }
        if self.split.total() != self.generator.duration_periods() as usize {
            return Err(Error::Config(format!(
                "split {}:{} does not cover the generated {} periods",
                self.split.train_periods,
                self.split.test_periods,
                self.generator.duration_periods()
            )));
        }
        Ok(())
    }
}

/// Built-in default: three apps, three scenarios, four synthetic weeks.
pub fn default_experiment(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        generator: synth::default_config(seed),
        apps_under_study: Vec::new(),
        views: default_views(),
        train: TrainConfig { seed, ..TrainConfig::default() },
        split: SplitSpec::default(),
        agg: default_agg(),
        demand_mode: DemandMode::default(),
    }
}

pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
