use std::sync::Arc;

use super::{ExperimentConfig, SetupEnv, SetupKind};
use crate::farm_env::{trace_header, trace_row, FarmEnv, FarmLayout, RotationAction};
use crate::geom::signed_delta_degrees;
use crate::ppo::trainer::EpisodeAccumulator;
use crate::ppo::{AgentEnv, EpisodeRecord, PolicyNet, StepFeedback};
use crate::predictor::PredictorNet;
use crate::rng::{self, streams, SimRng};
use crate::{Error, Result};

/// What chooses the actions during inference.
#[derive(Debug, Clone)]
pub enum Controller {
    /// A trained policy, most probable action unless `stochastic`.
    Policy { policy: Arc<PolicyNet>, stochastic: bool },
    /// Scripted: rotate toward facing against the local wind; never sends
    /// by choice.
    Oracle,
}

/// Rotation that brings each turbine closer to facing against its local
/// wind; holds still once within half a step.
pub fn oracle_actions(farm: &FarmEnv) -> Vec<RotationAction> {
    let step = farm.wind().config().turbine_rotation_step;
    farm.turbines()
        .iter()
        .map(|t| {
            let target = t.local_wind.degrees() + 180.0;
            let delta = signed_delta_degrees(t.orientation_angle, target);
            if delta > step / 2.0 {
                RotationAction::Right
            } else if delta < -step / 2.0 {
                RotationAction::Left
            } else {
                RotationAction::Still
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionStep {
    pub feedback: StepFeedback,
    /// Set when this step finished an episode.
    pub episode: Option<EpisodeRecord>,
}

/// A running evaluation: no learning, episodes restart automatically.
/// Shared by batch inference and the live server so both produce the same
/// trace for the same seed.
#[derive(Debug, Clone)]
pub struct InferenceSession {
    env: SetupEnv,
    controller: Controller,
    rng: SimRng,
    acc: EpisodeAccumulator,
    cumulative: f64,
    last_efficiency: f64,
    episodes: u64,
}

impl InferenceSession {
    pub fn new(
        cfg: &ExperimentConfig,
        layout: FarmLayout,
        predictor: Option<Arc<PredictorNet>>,
        controller: Controller,
        seed: u64,
    ) -> Result<Self> {
        let env = SetupEnv::new(cfg, layout, predictor, seed)?;
        if let Controller::Policy { policy, .. } = &controller {
            let shape = env.shape();
            if policy.obs_dim() != shape.input_dim() || policy.branches() != shape.branches.as_slice() {
                return Err(Error::Contract(format!(
                    "checkpoint expects {} inputs and branches {:?}; {} on {} turbines needs {} and {:?}",
                    policy.obs_dim(),
                    policy.branches(),
                    cfg.setup,
                    shape.turbines,
                    shape.input_dim(),
                    shape.branches
                )));
            }
        }
        Ok(Self {
            env,
            controller,
            rng: rng::stream(seed, streams::INFERENCE),
            acc: EpisodeAccumulator::default(),
            cumulative: 0.0,
            last_efficiency: 0.0,
            episodes: 0,
        })
    }

    /// Session for evaluation repeat `repeat` of a run seeded `seed`.
    pub fn for_repeat(
        cfg: &ExperimentConfig,
        layout: FarmLayout,
        predictor: Option<Arc<PredictorNet>>,
        controller: Controller,
        seed: u64,
        repeat: u64,
    ) -> Result<Self> {
        let s = rng::derive(rng::derive(seed, streams::INFERENCE), repeat);
        Self::new(cfg, layout, predictor, controller, s)
    }

    pub fn env(&self) -> &SetupEnv {
        &self.env
    }

    /// Operator access between steps (e.g. pinning the wind).
    pub fn env_mut(&mut self) -> &mut SetupEnv {
        &mut self.env
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative
    }

    pub fn last_efficiency(&self) -> f64 {
        self.last_efficiency
    }

    pub fn episodes_finished(&self) -> u64 {
        self.episodes
    }

    /// Starts a fresh episode, keeping any wind pin.
    pub fn reset_episode(&mut self) -> Result<()> {
        let pin = self.env.farm().wind().pinned();
        self.env.reset()?;
        if let Some(angle) = pin {
            self.env.farm_mut().wind_mut().pin(angle);
        }
        self.acc = EpisodeAccumulator::default();
        self.cumulative = 0.0;
        Ok(())
    }

    pub fn step(&mut self) -> Result<SessionStep> {
        if self.env.farm().is_done() {
            self.reset_episode()?;
        }
        let feedback = match &self.controller {
            Controller::Oracle => {
                let rotations = oracle_actions(self.env.farm());
                let sends = if self.env.setup() == SetupKind::MaBroadcasting {
                    vec![true; rotations.len()]
                } else {
                    Vec::new()
                };
                self.env.step_decoded(&rotations, &sends)?
            }
            Controller::Policy { policy, stochastic } => {
                let actions = self
                    .env
                    .observations()
                    .iter()
                    .map(|o| {
                        if *stochastic {
                            policy.act(o, &mut self.rng).map(|(a, _)| a)
                        } else {
                            policy.greedy(o)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.env.step(&actions)?
            }
        };
        self.acc.add(&feedback);
        self.cumulative += feedback.score;
        self.last_efficiency = feedback.efficiency;
        let episode = feedback.done.then(|| {
            let record = self.acc.finish(self.episodes, self.env.farm().step_index());
            self.episodes += 1;
            record
        });
        Ok(SessionStep { feedback, episode })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceRow {
    pub seed: u64,
    pub repeat: u64,
    pub episodes: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_base_reward: f64,
    pub mean_comm_cost: f64,
    pub mean_comm_count: f64,
    pub mean_angle_delta: f64,
}

/// Runs `cfg.inference.repeats` sessions of `cfg.inference.steps` steps each
/// and summarises the completed episodes of every repeat.
pub fn evaluate(
    cfg: &ExperimentConfig,
    layout: &FarmLayout,
    predictor: Option<Arc<PredictorNet>>,
    controller: &Controller,
    seed: u64,
) -> Result<(Vec<InferenceRow>, Vec<EpisodeRecord>)> {
    if cfg.inference.steps < cfg.episode_length {
        return Err(Error::Config(format!(
            "inference.steps ({}) is shorter than one episode ({})",
            cfg.inference.steps, cfg.episode_length
        )));
    }
    let mut rows = Vec::with_capacity(cfg.inference.repeats);
    let mut all = Vec::new();
    for repeat in 0..cfg.inference.repeats as u64 {
        let mut session =
            InferenceSession::for_repeat(cfg, layout.clone(), predictor.clone(), controller.clone(), seed, repeat)?;
        let mut episodes = Vec::new();
        for _ in 0..cfg.inference.steps {
            if let Some(e) = session.step()?.episode {
                episodes.push(e);
            }
        }
        rows.push(summarise(seed, repeat, &episodes));
        all.extend(episodes);
    }
    Ok((rows, all))
}

/// Writes a per-step CSV trace (efficiency, angle deltas, base rewards) of
/// the first `steps` steps of a session.
pub fn write_trace(session: &mut InferenceSession, steps: u64, path: &std::path::Path) -> Result<()> {
    let n = session.env().farm().turbine_count();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trace_header(n))?;
    for _ in 0..steps {
        session.step()?;
        let env = session.env();
        let result = env.last_result().expect("a step was just taken");
        w.write_record(trace_row(env.farm(), result, &result.per_agent_rewards))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn summarise(seed: u64, repeat: u64, episodes: &[EpisodeRecord]) -> InferenceRow {
    let n = episodes.len().max(1) as f64;
    let mean = |f: fn(&EpisodeRecord) -> f64| episodes.iter().map(f).sum::<f64>() / n;
    let mean_reward = mean(|e| e.cumulative_reward);
    let var = episodes
        .iter()
        .map(|e| (e.cumulative_reward - mean_reward).powi(2))
        .sum::<f64>()
        / n;
    InferenceRow {
        seed,
        repeat,
        episodes: episodes.len(),
        mean_reward,
        std_reward: var.sqrt(),
        mean_base_reward: mean(|e| e.base_reward),
        mean_comm_cost: mean(|e| e.comm_cost),
        mean_comm_count: mean(|e| e.comm_count),
        mean_angle_delta: mean(|e| e.mean_angle_delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Profile;

    #[test]
    fn oracle_turns_toward_opposition() {
        let cfg = Profile::Desk.defaults();
        let mut s = InferenceSession::new(&cfg, FarmLayout::grid(8).unwrap(), None, Controller::Oracle, 1).unwrap();
        let before: f64 = s.env().farm().turbines().iter().map(|t| t.angle_delta()).sum();
        for _ in 0..200 {
            s.step().unwrap();
        }
        let after: f64 = s.env().farm().turbines().iter().map(|t| t.angle_delta()).sum();
        assert!(after > before || after > 8.0 * 170.0);
    }

    #[test]
    fn policy_shape_is_checked() {
        let cfg = Profile::Desk.defaults();
        let hp = crate::ppo::PpoHyperparams::default();
        let wrong = PolicyNet::new(12, &[3], &hp, &mut rng::stream(0, 0));
        let c = Controller::Policy {
            policy: Arc::new(wrong),
            stochastic: false,
        };
        assert!(matches!(
            InferenceSession::new(&cfg, FarmLayout::grid(8).unwrap(), None, c, 0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn evaluation_counts_and_determinism() {
        let mut cfg = Profile::Desk.defaults();
        cfg.episode_length = 100;
        cfg.inference.repeats = 3;
        cfg.inference.steps = 250;
        let layout = FarmLayout::grid(8).unwrap();
        let (rows, eps) = evaluate(&cfg, &layout, None, &Controller::Oracle, 5).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.episodes == 2));
        assert_eq!(eps.len(), 6);
        assert_eq!(evaluate(&cfg, &layout, None, &Controller::Oracle, 5).unwrap().0, rows);
    }
}
