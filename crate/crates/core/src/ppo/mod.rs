//! PPO-Clip written against [`crate::nn`].
//!
//! All agents of a setup share one policy and one value network. Each agent
//! contributes its own trajectory segments (cut every `time_horizon` steps)
//! to a common buffer, and an update runs once the buffer holds
//! `buffer_size` transitions.

mod gae;
mod loss;
mod policy;
pub(crate) mod trainer;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use gae::{compute_gae, discounted_returns};
pub use loss::{clipped_surrogate, minibatch_gradients, minibatch_loss, LossStats, LossWeights};
pub use policy::{entropy, log_softmax, softmax, PolicyNet, ValueNet};
pub use trainer::{
    ppo_update, train_loop, AgentEnv, EpisodeRecord, Learner, StepFeedback, SummaryRow, TrainOutcome, Transition,
    UpdateStats,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoHyperparams {
    pub batch_size: usize,
    pub buffer_size: usize,
    pub learning_rate: f64,
    /// Entropy bonus coefficient.
    pub beta: f64,
    /// Clip range.
    pub epsilon: f64,
    /// GAE smoothing.
    pub lambda: f64,
    pub gamma: f64,
    pub num_epoch: usize,
    pub time_horizon: usize,
    /// Agent-steps summed over all agents.
    pub max_steps: u64,
    pub hidden_units: usize,
    pub num_layers: usize,
    pub summary_freq: u64,
    pub value_coef: f64,
    pub normalize_advantages: bool,
}

impl Default for PpoHyperparams {
    fn default() -> Self {
        Self {
            batch_size: 32,
            buffer_size: 256,
            learning_rate: 3e-4,
            beta: 0.005,
            epsilon: 0.2,
            lambda: 0.95,
            gamma: 0.9,
            num_epoch: 3,
            time_horizon: 3,
            max_steps: 2_000_000,
            hidden_units: 20,
            num_layers: 3,
            summary_freq: 16_000,
            value_coef: 0.5,
            normalize_advantages: true,
        }
    }
}

impl PpoHyperparams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("batch_size", self.batch_size),
            ("buffer_size", self.buffer_size),
            ("num_epoch", self.num_epoch),
            ("time_horizon", self.time_horizon),
            ("hidden_units", self.hidden_units),
            ("num_layers", self.num_layers),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("ppo.{name} must be positive")));
        }
        if self.max_steps == 0 || self.summary_freq == 0 {
            return Err(Error::Config(
                "ppo.max_steps and ppo.summary_freq must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("ppo.learning_rate must be positive".into()));
        }
        if !(self.beta >= 0.0 && self.value_coef >= 0.0) {
            return Err(Error::Config("ppo.beta and ppo.value_coef must be non-negative".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config("ppo.epsilon must lie in (0, 1)".into()));
        }
        for (name, v) in [("gamma", self.gamma), ("lambda", self.lambda)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("ppo.{name} must lie in (0, 1]")));
            }
        }
        if self.batch_size > self.buffer_size {
            return Err(Error::Config("ppo.batch_size cannot exceed ppo.buffer_size".into()));
        }
        Ok(())
    }

    /// Linearly decayed learning rate at `progress` ∈ [0, 1].
    pub fn learning_rate_at(&self, progress: f64) -> f64 {
        self.learning_rate * (1.0 - progress.clamp(0.0, 1.0))
    }
}
