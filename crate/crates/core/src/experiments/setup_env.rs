use std::sync::Arc;

use super::{apply_comm_cost, ExperimentConfig, SetupKind, SetupShape};
use crate::farm_env::{EnvSettings, EnvStepResult, FarmEnv, FarmLayout, RewardMode, RotationAction};
use crate::ppo::{AgentEnv, StepFeedback};
use crate::predictor::PredictorNet;
use crate::rng::{self, streams};
use crate::wind_field::WindConfig;
use crate::{Error, Result};

/// A [`FarmEnv`] seen through one setup: agent grouping, action decoding and
/// communication costs. Episode `e` of a run seeded `seed` is always the
/// same episode.
#[derive(Debug, Clone)]
pub struct SetupEnv {
    setup: SetupKind,
    shape: SetupShape,
    layout: FarmLayout,
    wind: WindConfig,
    settings: EnvSettings,
    predictor: Option<Arc<PredictorNet>>,
    comm_cost: f64,
    seed: u64,
    episode: u64,
    env: FarmEnv,
    last: Option<EnvStepResult>,
    last_costs: Vec<f64>,
}

impl SetupEnv {
    pub fn new(
        cfg: &ExperimentConfig,
        layout: FarmLayout,
        predictor: Option<Arc<PredictorNet>>,
        seed: u64,
    ) -> Result<Self> {
        let settings = cfg.env_settings();
        let shape = cfg.setup.shape(layout.turbine_count(), settings.neighbours);
        let env_seed = rng::derive(rng::derive(seed, streams::ENV), 0);
        let env = FarmEnv::reset(layout.clone(), &cfg.wind, env_seed, settings.clone(), predictor.clone())?;
        Ok(Self {
            setup: cfg.setup,
            shape,
            layout,
            wind: cfg.wind.clone(),
            settings,
            predictor,
            comm_cost: cfg.comm_cost,
            seed,
            episode: 0,
            last: None,
            last_costs: vec![0.0; env.turbine_count()],
            env,
        })
    }

    pub fn setup(&self) -> SetupKind {
        self.setup
    }

    pub fn shape(&self) -> &SetupShape {
        &self.shape
    }

    pub fn farm(&self) -> &FarmEnv {
        &self.env
    }

    pub fn farm_mut(&mut self) -> &mut FarmEnv {
        &mut self.env
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn last_result(&self) -> Option<&EnvStepResult> {
        self.last.as_ref()
    }

    /// Communication cost each turbine paid at the last step.
    pub fn last_costs(&self) -> &[f64] {
        &self.last_costs
    }

    /// Cost charged to the training reward per send. Under per-share rewards
    /// every term is split across the turbines, so the cost is too.
    fn training_cost(&self) -> f64 {
        match self.settings.reward_mode {
            RewardMode::Shared => self.comm_cost,
            RewardMode::PerShare => self.comm_cost / self.env.turbine_count() as f64,
        }
    }

    /// Decodes per-agent branch choices into rotations and send flags.
    pub fn decode(&self, actions: &[Vec<usize>]) -> Result<(Vec<RotationAction>, Vec<bool>)> {
        let n = self.env.turbine_count();
        if actions.len() != self.shape.agents {
            return Err(Error::Contract(format!(
                "{} expects {} agents' actions, got {}",
                self.setup,
                self.shape.agents,
                actions.len()
            )));
        }
        let rotation = |i: usize| {
            RotationAction::from_index(i).ok_or_else(|| Error::Contract(format!("rotation choice {i} out of range")))
        };
        let check = |a: &Vec<usize>| {
            if a.len() != self.shape.branches.len() {
                return Err(Error::Contract(format!(
                    "{} actions need {} branches, got {}",
                    self.setup,
                    self.shape.branches.len(),
                    a.len()
                )));
            }
            Ok(())
        };
        match self.setup {
            SetupKind::SingleAgent => {
                check(&actions[0])?;
                Ok((
                    actions[0].iter().map(|&a| rotation(a)).collect::<Result<_>>()?,
                    Vec::new(),
                ))
            }
            SetupKind::MultiAgent => {
                actions.iter().try_for_each(check)?;
                Ok((
                    actions.iter().map(|a| rotation(a[0])).collect::<Result<_>>()?,
                    Vec::new(),
                ))
            }
            SetupKind::MaBroadcasting => {
                actions.iter().try_for_each(check)?;
                Ok((
                    actions.iter().map(|a| rotation(a[0])).collect::<Result<_>>()?,
                    vec![true; n],
                ))
            }
            SetupKind::MaByChoice => {
                actions.iter().try_for_each(check)?;
                Ok((
                    actions.iter().map(|a| rotation(a[0])).collect::<Result<_>>()?,
                    actions.iter().map(|a| a[1] == 1).collect(),
                ))
            }
        }
    }

    /// Steps the farm with already decoded actions.
    pub fn step_decoded(&mut self, rotations: &[RotationAction], sends: &[bool]) -> Result<StepFeedback> {
        let n = self.env.turbine_count();
        let result = self.env.step(rotations, sends)?;
        let paid = apply_comm_cost(self.setup, &vec![0.0; n], sends, 1.0);
        self.last_costs = paid.iter().map(|c| -c * self.comm_cost).collect();
        let rewards = match self.setup {
            SetupKind::SingleAgent => vec![result.collective_efficiency],
            _ => apply_comm_cost(self.setup, &result.per_agent_rewards, sends, self.training_cost()),
        };
        let comm_cost = self.last_costs.iter().sum::<f64>() / n as f64;
        let feedback = StepFeedback {
            rewards,
            score: result.collective_efficiency - comm_cost,
            efficiency: result.collective_efficiency,
            comm_cost,
            comm_count: result.messages_delivered.iter().sum::<usize>() as f64 / n as f64,
            mean_angle_delta: self.env.turbines().iter().map(|t| t.angle_delta()).sum::<f64>() / n as f64,
            done: result.done,
        };
        self.last = Some(result);
        Ok(feedback)
    }
}

impl AgentEnv for SetupEnv {
    fn agent_count(&self) -> usize {
        self.shape.agents
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        let per_turbine = self.env.observations();
        match self.setup {
            SetupKind::SingleAgent => {
                // all current frames, then all previous frames
                let f = self.shape.obs_per_turbine;
                let current = per_turbine.iter().flat_map(|o| o[..f].iter().copied());
                let previous = per_turbine.iter().flat_map(|o| o[f..].iter().copied());
                vec![current.chain(previous).collect()]
            }
            _ => per_turbine.to_vec(),
        }
    }

    fn step(&mut self, actions: &[Vec<usize>]) -> Result<StepFeedback> {
        let (rotations, sends) = self.decode(actions)?;
        self.step_decoded(&rotations, &sends)
    }

    fn reset(&mut self) -> Result<()> {
        self.episode += 1;
        let env_seed = rng::derive(rng::derive(self.seed, streams::ENV), self.episode);
        self.env = FarmEnv::reset(
            self.layout.clone(),
            &self.wind,
            env_seed,
            self.settings.clone(),
            self.predictor.clone(),
        )?;
        self.last = None;
        Ok(())
    }
}
