use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{InferenceRow, SetupKind};
use crate::checkpoint;
use crate::ppo::{EpisodeRecord, PolicyNet, SummaryRow, ValueNet};
use crate::{Error, Result};

/// Column order of `metrics.csv`.
pub const METRICS_HEADER: [&str; 7] = [
    "step",
    "mean_cumulative_reward",
    "value_loss",
    "policy_loss",
    "entropy",
    "comm_count",
    "episodes",
];

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub fn write_metrics(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            fmt(r.mean_cumulative_reward),
            fmt(r.value_loss),
            fmt(r.policy_loss),
            fmt(r.entropy),
            fmt(r.comm_count),
            r.episodes.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_episodes(path: &Path, episodes: &[EpisodeRecord], seed_column: Option<&[u64]>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![
        "episode",
        "end_step",
        "cumulative_reward",
        "base_reward",
        "comm_cost",
        "comm_count",
        "mean_angle_delta",
    ];
    if seed_column.is_some() {
        header.insert(0, "seed");
    }
    w.write_record(&header)?;
    for (i, e) in episodes.iter().enumerate() {
        let mut row = vec![
            e.episode.to_string(),
            e.end_step.to_string(),
            fmt(e.cumulative_reward),
            fmt(e.base_reward),
            fmt(e.comm_cost),
            fmt(e.comm_count),
            fmt(e.mean_angle_delta),
        ];
        if let Some(seeds) = seed_column {
            row.insert(0, seeds[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_inference(path: &Path, rows: &[InferenceRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "seed",
        "repeat",
        "episodes",
        "mean_reward",
        "std_reward",
        "mean_base_reward",
        "mean_comm_cost",
        "mean_comm_count",
        "mean_angle_delta",
    ])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.repeat.to_string(),
            r.episodes.to_string(),
            fmt(r.mean_reward),
            fmt(r.std_reward),
            fmt(r.mean_base_reward),
            fmt(r.mean_comm_cost),
            fmt(r.mean_comm_count),
            fmt(r.mean_angle_delta),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Sidecar describing a policy checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyMeta {
    pub setup: SetupKind,
    pub turbines: usize,
    pub neighbours: usize,
    pub obs_dim: usize,
    pub branches: Vec<usize>,
    pub seed: u64,
    pub total_steps: u64,
    pub policy_hash: String,
}

/// Writes `policy.bin`, `value.bin` and `policy.meta.toml` into `dir`.
pub fn save_policy(dir: &Path, policy: &PolicyNet, value: &ValueNet, meta: &PolicyMeta) -> Result<()> {
    checkpoint::save(policy.net(), &dir.join("policy.bin"))?;
    checkpoint::save(value.net(), &dir.join("value.bin"))?;
    let text = toml::to_string_pretty(meta).map_err(|e| Error::Config(e.to_string()))?;
    let path = dir.join("policy.meta.toml");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn load_policy(dir: &Path) -> Result<(PolicyNet, PolicyMeta)> {
    let meta_path = dir.join("policy.meta.toml");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: PolicyMeta = toml::from_str(&text).map_err(|e| Error::Format {
        path: meta_path.clone(),
        reason: e.to_string(),
    })?;
    let net = checkpoint::load(&dir.join("policy.bin"))?;
    let policy = PolicyNet::from_parts(net, meta.branches.clone())?;
    if policy.obs_dim() != meta.obs_dim {
        return Err(Error::Format {
            path: meta_path,
            reason: "metadata does not match the network".into(),
        });
    }
    Ok((policy, meta))
}
