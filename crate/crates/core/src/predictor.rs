//! Frozen wind predictor.
//!
//! A 4→32→32→2 tanh network maps a turbine's pooled inbox vector and its
//! current local wind to the local wind `delay` steps ahead. It is trained
//! offline on wind-only episodes in which every turbine broadcasts each step,
//! then frozen: [`PredictorNet`] has no mutating API.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkpoint;
use crate::comm_graph::{pool_inbox, Mailboxes, Message, NeighborGraph};
use crate::farm_env::FarmLayout;
use crate::geom::{angle_between_degrees, Vec2};
use crate::nn::{Activation, Adam, Mlp};
use crate::rng::{self, streams};
use crate::wind_field::{WindConfig, WindState};
use crate::{Error, Result};

pub const INPUT_DIM: usize = 4;
pub const HIDDEN: usize = 32;
pub const DEFAULT_DELAY: u64 = 20;
const NORM_FLOOR: f64 = 1e-9;

/// Trained, immutable predictor. Cheap to share behind an `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorNet {
    net: Mlp,
}

impl PredictorNet {
    /// Freezes a 4→…→2 network.
    pub fn freeze(net: Mlp) -> Result<Self> {
        if net.input_dim() != INPUT_DIM || net.output_dim() != 2 {
            return Err(Error::Contract(format!(
                "predictor must map 4 inputs to 2 outputs, got {:?}",
                net.sizes()
            )));
        }
        Ok(Self { net })
    }

    pub fn is_frozen(&self) -> bool {
        true
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn param_hash(&self) -> String {
        self.net.param_hash()
    }

    pub fn raw(&self, wnv: Vec2, local_wind: Vec2) -> Vec2 {
        let out = self.net.forward(&[wnv.x, wnv.y, local_wind.x, local_wind.y]);
        Vec2::new(out[0], out[1])
    }

    /// Unit-length forecast. A degenerate (near zero) output falls back to
    /// the current local wind.
    pub fn predict(&self, wnv: Vec2, local_wind: Vec2) -> Vec2 {
        self.raw(wnv, local_wind)
            .normalized()
            .filter(|v| v.norm() > NORM_FLOOR)
            .or_else(|| local_wind.normalized())
            .unwrap_or(Vec2::new(1.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorSample {
    /// `[wnv.x, wnv.y, wind.x, wind.y]` at step `t`.
    pub input: [f64; 4],
    /// Unit local wind at `t + delay`.
    pub target: Vec2,
}

impl PredictorSample {
    pub fn wnv(&self) -> Vec2 {
        Vec2::new(self.input[0], self.input[1])
    }

    pub fn local_wind(&self) -> Vec2 {
        Vec2::new(self.input[2], self.input[3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub delay: u64,
    pub episodes: usize,
    pub episode_length: u64,
    pub neighbours: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            delay: DEFAULT_DELAY,
            episodes: 6,
            episode_length: 2000,
            neighbours: 4,
            seed: 0,
        }
    }
}

/// Simulates wind-only episodes on every layout and records one sample per
/// turbine per step.
pub fn generate_dataset(
    layouts: &[FarmLayout],
    wind_config: &WindConfig,
    spec: &DatasetSpec,
) -> Result<Vec<PredictorSample>> {
    if spec.delay == 0 {
        return Err(Error::Contract("prediction delay must be at least one step".into()));
    }
    let mut samples = Vec::new();
    for (li, layout) in layouts.iter().enumerate() {
        layout.validate()?;
        let graph = NeighborGraph::build(&layout.positions, spec.neighbours);
        for episode in 0..spec.episodes {
            let episode_seed = rng::derive(spec.seed, ((li as u64) << 32) | episode as u64);
            let config = WindConfig {
                seed: rng::derive(episode_seed, streams::DATASET),
                ..wind_config.clone()
            };
            episode_samples(layout, &graph, config, spec, &mut samples)?;
        }
    }
    Ok(samples)
}

fn episode_samples(
    layout: &FarmLayout,
    graph: &NeighborGraph,
    config: WindConfig,
    spec: &DatasetSpec,
    out: &mut Vec<PredictorSample>,
) -> Result<()> {
    let n = layout.turbine_count();
    let total = (spec.episode_length + spec.delay) as usize;
    let mut wind = WindState::new(config, true)?;
    let mut mail = Mailboxes::new(n);
    let mut winds: Vec<Vec<Vec2>> = Vec::with_capacity(total);
    let mut pooled: Vec<Vec<Vec2>> = Vec::with_capacity(spec.episode_length as usize);
    for t in 0..total {
        if t > 0 {
            wind.step();
            mail.advance();
        }
        let now: Vec<Vec2> = layout
            .positions
            .iter()
            .map(|&p| wind.sample_local_wind(p))
            .collect::<Result<_>>()?;
        if t < spec.episode_length as usize {
            pooled.push(
                (0..n)
                    .map(|i| pool_inbox(layout.positions[i], &mail.take(i), layout.farm_width))
                    .collect(),
            );
        }
        for (i, &w) in now.iter().enumerate() {
            let message = Message {
                sender_position: layout.positions[i],
                sender_wind: w,
                sent_at: t as u64,
            };
            mail.deliver(graph, i, message)?;
        }
        winds.push(now);
    }
    let delay = spec.delay as usize;
    for t in 0..spec.episode_length as usize {
        for i in 0..n {
            let (w, d) = (pooled[t][i], winds[t][i]);
            out.push(PredictorSample {
                input: [w.x, w.y, d.x, d.y],
                target: winds[t + delay][i],
            });
        }
    }
    Ok(())
}

/// SHA-256 over the sample bytes, for provenance in the sidecar.
pub fn dataset_hash(samples: &[PredictorSample]) -> String {
    let mut h = Sha256::new();
    for s in samples {
        for v in s.input.iter().chain([s.target.x, s.target.y].iter()) {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 15,
            learning_rate: 1e-3,
            batch_size: 64,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training-set MSE after each epoch.
    pub train_loss: Vec<f64>,
    pub held_out_loss: f64,
    pub held_out_angular_error: f64,
    pub persistence_angular_error: f64,
    pub train_samples: usize,
    pub held_out_samples: usize,
}

impl TrainReport {
    /// Relative improvement of the predictor over persistence.
    pub fn gain(&self) -> f64 {
        1.0 - self.held_out_angular_error / self.persistence_angular_error
    }
}

/// Mean over the batch of `‖o − t‖²`, and its gradient.
pub fn mse_loss_and_grad(net: &Mlp, batch: &[PredictorSample]) -> (f64, Vec<f64>) {
    let mut grads = vec![0.0; net.param_count()];
    let mut loss = 0.0;
    let scale = 1.0 / batch.len().max(1) as f64;
    for s in batch {
        let trace = net.forward_trace(&s.input);
        let out = trace.output();
        let e = [out[0] - s.target.x, out[1] - s.target.y];
        loss += (e[0] * e[0] + e[1] * e[1]) * scale;
        net.backward(&trace, &[2.0 * e[0] * scale, 2.0 * e[1] * scale], &mut grads);
    }
    (loss, grads)
}

pub fn mse(net: &Mlp, samples: &[PredictorSample]) -> f64 {
    let scale = 1.0 / samples.len().max(1) as f64;
    samples
        .iter()
        .map(|s| {
            let out = net.forward(&s.input);
            ((out[0] - s.target.x).powi(2) + (out[1] - s.target.y).powi(2)) * scale
        })
        .sum()
}

/// Splits a dataset deterministically into (train, held-out). The held-out
/// part is the tail, so episodes stay mostly intact.
pub fn split(samples: &[PredictorSample], holdout_fraction: f64) -> (&[PredictorSample], &[PredictorSample]) {
    let held = ((samples.len() as f64) * holdout_fraction.clamp(0.0, 1.0)).round() as usize;
    let held = held.min(samples.len().saturating_sub(1));
    samples.split_at(samples.len() - held)
}

/// Mini-batch Adam on MSE; returns the frozen net and losses.
pub fn train_offline(dataset: &[PredictorSample], options: &TrainOptions) -> Result<(PredictorNet, TrainReport)> {
    if dataset.is_empty() {
        return Err(Error::Contract("cannot train a predictor on an empty dataset".into()));
    }
    if options.batch_size == 0 || options.epochs == 0 || options.learning_rate.is_nan() || options.learning_rate <= 0.0
    {
        return Err(Error::Config(
            "predictor epochs, batch size and learning rate must be positive".into(),
        ));
    }
    let (train, held) = split(dataset, options.holdout_fraction);
    let held = if held.is_empty() { train } else { held };
    let mut init_rng = rng::stream(options.seed, streams::PREDICTOR_INIT);
    let mut shuffle_rng = rng::stream(options.seed, streams::SHUFFLE);
    let mut net = Mlp::new(&[INPUT_DIM, HIDDEN, HIDDEN, 2], Activation::Tanh, &mut init_rng);
    let mut adam = Adam::new(net.param_count());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch = Vec::with_capacity(options.batch_size);
    let mut train_loss = Vec::with_capacity(options.epochs);
    for _ in 0..options.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(options.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i]));
            let (_, grads) = mse_loss_and_grad(&net, &batch);
            adam.step(net.params_mut(), &grads, options.learning_rate);
        }
        train_loss.push(mse(&net, train));
    }
    let net = PredictorNet::freeze(checkpoint::round_trip(&net))?;
    let report = TrainReport {
        train_loss,
        held_out_loss: mse(net.net(), held),
        held_out_angular_error: mean_angular_error(&net, held),
        persistence_angular_error: persistence_angular_error(held),
        train_samples: train.len(),
        held_out_samples: held.len(),
    };
    Ok((net, report))
}

/// Mean unsigned angle in degrees between the forecast and the target.
pub fn mean_angular_error(net: &PredictorNet, samples: &[PredictorSample]) -> f64 {
    mean_of(samples, |s| {
        angle_between_degrees(net.predict(s.wnv(), s.local_wind()), s.target)
    })
}

/// Same metric for the forecast "the wind will not change".
pub fn persistence_angular_error(samples: &[PredictorSample]) -> f64 {
    mean_of(samples, |s| angle_between_degrees(s.local_wind(), s.target))
}

fn mean_of(samples: &[PredictorSample], f: impl Fn(&PredictorSample) -> f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(f).sum::<f64>() / samples.len() as f64
}

/// Sidecar written next to a predictor checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorMeta {
    pub delay: u64,
    pub neighbours: usize,
    pub samples: usize,
    pub dataset_hash: String,
    pub param_hash: String,
    pub held_out_angular_error: f64,
    pub persistence_angular_error: f64,
    pub wind: WindConfig,
}

pub fn meta_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("meta.toml")
}

pub fn save(net: &PredictorNet, meta: &PredictorMeta, path: &Path) -> Result<()> {
    checkpoint::save(net.net(), path)?;
    let text = toml::to_string_pretty(meta).map_err(|e| Error::Format {
        path: meta_path(path),
        reason: e.to_string(),
    })?;
    let mp = meta_path(path);
    std::fs::write(&mp, text).map_err(|e| Error::io(&mp, e))
}

/// Loads a checkpoint; the sidecar is read when present.
pub fn load(path: &Path) -> Result<(PredictorNet, Option<PredictorMeta>)> {
    let net = PredictorNet::freeze(checkpoint::load(path)?)?;
    let mp = meta_path(path);
    let meta = match std::fs::read_to_string(&mp) {
        Ok(text) => Some(toml::from_str(&text).map_err(|e| Error::Format {
            path: mp.clone(),
            reason: e.to_string(),
        })?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(&mp, e)),
    };
    Ok((net, meta))
}
