use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SetupKind;
use crate::farm_env::{EnvSettings, FarmLayout, LayoutPattern, RewardMode, DEFAULT_EPISODE_LENGTH};
use crate::ppo::PpoHyperparams;
use crate::predictor::{DatasetSpec, TrainOptions};
use crate::wind_field::WindConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub pattern: LayoutPattern,
    pub turbines: usize,
    pub seed: u64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            pattern: LayoutPattern::Default,
            turbines: 8,
            seed: 0,
        }
    }
}

impl LayoutConfig {
    pub fn build(&self) -> Result<FarmLayout> {
        FarmLayout::generate(self.pattern, self.turbines, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    pub repeats: usize,
    /// Environment steps per repeat.
    pub steps: u64,
    /// Sample actions instead of taking the most probable one.
    pub stochastic: bool,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            repeats: 20,
            steps: DEFAULT_EPISODE_LENGTH,
            stochastic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub turbine_counts: Vec<usize>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            turbine_counts: vec![8, 16, 24],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub neighbours: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            neighbours: vec![0, 1, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnnConfig {
    /// Default-layout turbine counts the dataset is generated on.
    pub turbine_counts: Vec<usize>,
    pub dataset: DatasetSpec,
    pub train: TrainOptions,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self {
            turbine_counts: vec![8, 16, 24],
            dataset: DatasetSpec::default(),
            train: TrainOptions::default(),
        }
    }
}

/// Everything needed to reproduce a run. Serialized verbatim as the config
/// echo in every run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub setup: SetupKind,
    /// Communication neighbours; defaults to 4 for communicating setups.
    pub neighbours: Option<usize>,
    pub comm_cost: f64,
    pub episode_length: u64,
    pub seeds: Vec<u64>,
    pub reward_mode: RewardMode,
    /// Frozen predictor checkpoint, required by communicating setups.
    pub predictor: Option<PathBuf>,
    pub layout: LayoutConfig,
    pub wind: WindConfig,
    pub ppo: PpoHyperparams,
    pub inference: InferenceConfig,
    pub scaling: ScalingConfig,
    pub sweep: SweepConfig,
    pub gnn: GnnConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Profile::Desk.defaults()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 2e5 training steps, 3 seeds, 20 one-episode evaluation runs.
    Desk,
    /// 2e6 training steps, 10 seeds, 20 evaluation runs of 1e6 steps.
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!(
                "unknown profile {other:?} (expected desk or paper)"
            ))),
        }
    }
}

impl Profile {
    pub fn defaults(self) -> ExperimentConfig {
        let (max_steps, seeds, steps) = match self {
            Profile::Desk => (200_000, (0..3).collect(), DEFAULT_EPISODE_LENGTH),
            Profile::Paper => (2_000_000, (0..10).collect(), 1_000_000),
        };
        ExperimentConfig {
            setup: SetupKind::MultiAgent,
            neighbours: None,
            comm_cost: 0.0125,
            episode_length: DEFAULT_EPISODE_LENGTH,
            seeds,
            reward_mode: RewardMode::default(),
            predictor: None,
            layout: LayoutConfig::default(),
            wind: WindConfig::default(),
            ppo: PpoHyperparams {
                max_steps,
                ..Default::default()
            },
            inference: InferenceConfig {
                steps,
                ..Default::default()
            },
            scaling: ScalingConfig::default(),
            sweep: SweepConfig::default(),
            gnn: GnnConfig::default(),
        }
    }

    /// Layers profile defaults, then the file (if any), then dotted
    /// `key=value` overrides, and validates the result.
    pub fn resolve(self, file: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
        let mut value = toml::Value::try_from(self.defaults()).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            let table: toml::Value =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            merge_values(&mut value, table);
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: ExperimentConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Recursively merges `overlay` into `base`; tables merge, everything else
/// replaces.
pub fn merge_values(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_values(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies one `a.b.c=value` override. The value is parsed as a TOML literal
/// and falls back to a plain string.
pub fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override {assignment:?} has an empty key")));
    }
    let raw = raw.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

impl ExperimentConfig {
    pub fn neighbours(&self) -> usize {
        self.neighbours.unwrap_or(self.setup.default_neighbours())
    }

    pub fn env_settings(&self) -> EnvSettings {
        EnvSettings {
            episode_length: self.episode_length,
            reward_mode: self.reward_mode,
            communication: self.setup.communicates(),
            neighbours: self.neighbours(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.wind.validate()?;
        if !self.wind.outpaces_turbines() {
            return Err(Error::Config(format!(
                "wind.main_rotation_step_max ({}) must exceed wind.turbine_rotation_step ({})",
                self.wind.main_rotation_step_max, self.wind.turbine_rotation_step
            )));
        }
        self.ppo.validate()?;
        if self.layout.turbines == 0 {
            return Err(Error::Config("layout.turbines must be positive".into()));
        }
        if self.episode_length == 0 {
            return Err(Error::Config("episode_length must be positive".into()));
        }
        if !(self.comm_cost >= 0.0 && self.comm_cost.is_finite()) {
            return Err(Error::Config("comm_cost must be a non-negative number".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if !self.setup.communicates() && self.neighbours.is_some_and(|k| k > 0) {
            return Err(Error::Config(format!(
                "setup {} does not communicate; neighbours must be 0",
                self.setup
            )));
        }
        if self.inference.repeats == 0 || self.inference.steps == 0 {
            return Err(Error::Config(
                "inference.repeats and inference.steps must be positive".into(),
            ));
        }
        if self.scaling.turbine_counts.contains(&0) || self.gnn.turbine_counts.contains(&0) {
            return Err(Error::Config("turbine counts must be positive".into()));
        }
        Ok(())
    }

    /// Resolved config as TOML text.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}
