use rand::seq::SliceRandom;

use super::gae::compute_gae;
use super::loss::{minibatch_gradients, LossStats, LossWeights};
use super::policy::{PolicyNet, ValueNet};
use super::PpoHyperparams;
use crate::nn::Adam;
use crate::rng::{self, streams, SimRng};
use crate::{Error, Result};

/// One buffered agent step with its GAE targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub actions: Vec<usize>,
    /// Joint log-probability under the policy that acted.
    pub log_prob: f64,
    pub value: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Environment as seen by the trainer: a fixed set of agents acting in
/// lockstep.
pub trait AgentEnv {
    fn agent_count(&self) -> usize;
    fn observations(&self) -> Vec<Vec<f64>>;
    fn step(&mut self, actions: &[Vec<usize>]) -> Result<StepFeedback>;
    /// Starts the next episode.
    fn reset(&mut self) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFeedback {
    /// Training reward per agent, costs included.
    pub rewards: Vec<f64>,
    /// Increment of the reported episode reward: efficiency minus the mean
    /// per-turbine communication cost.
    pub score: f64,
    pub efficiency: f64,
    /// Mean per-turbine communication cost paid this step.
    pub comm_cost: f64,
    /// Mean per-turbine messages delivered this step.
    pub comm_count: f64,
    pub mean_angle_delta: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u64,
    /// Agent-step counter when the episode ended.
    pub end_step: u64,
    pub cumulative_reward: f64,
    pub base_reward: f64,
    pub comm_cost: f64,
    pub comm_count: f64,
    pub mean_angle_delta: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeAccumulator {
    steps: u64,
    score: f64,
    base: f64,
    cost: f64,
    comm: f64,
    angle: f64,
}

impl EpisodeAccumulator {
    pub(crate) fn add(&mut self, fb: &StepFeedback) {
        self.steps += 1;
        self.score += fb.score;
        self.base += fb.efficiency;
        self.cost += fb.comm_cost;
        self.comm += fb.comm_count;
        self.angle += fb.mean_angle_delta;
    }

    pub(crate) fn finish(&mut self, episode: u64, end_step: u64) -> EpisodeRecord {
        let acc = std::mem::take(self);
        EpisodeRecord {
            episode,
            end_step,
            cumulative_reward: acc.score,
            base_reward: acc.base,
            comm_cost: acc.cost,
            comm_count: acc.comm,
            mean_angle_delta: acc.angle / acc.steps.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub losses: LossStats,
    pub minibatches: usize,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub step: u64,
    pub mean_cumulative_reward: f64,
    pub value_loss: f64,
    pub policy_loss: f64,
    pub entropy: f64,
    pub comm_count: f64,
    /// Episodes finished inside this summary window.
    pub episodes: usize,
}

/// Policy and value networks with their optimizers.
#[derive(Debug, Clone)]
pub struct Learner {
    pub policy: PolicyNet,
    pub value: ValueNet,
    policy_adam: Adam,
    value_adam: Adam,
}

impl Learner {
    pub fn new(obs_dim: usize, branches: &[usize], hp: &PpoHyperparams, seed: u64) -> Self {
        let policy = PolicyNet::new(obs_dim, branches, hp, &mut rng::stream(seed, streams::POLICY_INIT));
        let value = ValueNet::new(obs_dim, hp, &mut rng::stream(seed, streams::VALUE_INIT));
        Self::from_nets(policy, value)
    }

    pub fn from_nets(policy: PolicyNet, value: ValueNet) -> Self {
        Self {
            policy_adam: Adam::new(policy.net().param_count()),
            value_adam: Adam::new(value.net().param_count()),
            policy,
            value,
        }
    }
}

/// Runs `num_epoch` passes of shuffled mini-batch Adam over `buffer` and
/// clears it. The transitions' log-probabilities are the old policy, so the
/// snapshot θ_old is replaced implicitly by the next collection.
pub fn ppo_update(
    learner: &mut Learner,
    buffer: &mut Vec<Transition>,
    hp: &PpoHyperparams,
    progress: f64,
    rng: &mut SimRng,
) -> Result<UpdateStats> {
    if buffer.len() < hp.buffer_size {
        return Err(Error::Contract(format!(
            "update needs {} transitions, buffer holds {}",
            hp.buffer_size,
            buffer.len()
        )));
    }
    if hp.normalize_advantages {
        let n = buffer.len() as f64;
        let mean = buffer.iter().map(|t| t.advantage).sum::<f64>() / n;
        let var = buffer.iter().map(|t| (t.advantage - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt() + 1e-8;
        for t in buffer.iter_mut() {
            t.advantage = (t.advantage - mean) / std;
        }
    }
    let weights = LossWeights {
        epsilon: hp.epsilon,
        surrogate: 1.0,
        value: hp.value_coef,
        entropy: hp.beta,
    };
    let lr = hp.learning_rate_at(progress);
    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut sum = LossStats::default();
    let mut minibatches = 0;
    for _ in 0..hp.num_epoch {
        order.shuffle(rng);
        for chunk in order.chunks_exact(hp.batch_size) {
            let batch: Vec<&Transition> = chunk.iter().map(|&i| &buffer[i]).collect();
            let (stats, gp, gv) = minibatch_gradients(&learner.policy, &learner.value, &batch, &weights);
            learner.policy_adam.step(learner.policy.net_mut().params_mut(), &gp, lr);
            learner.value_adam.step(learner.value.net_mut().params_mut(), &gv, lr);
            sum.policy_loss += stats.policy_loss;
            sum.value_loss += stats.value_loss;
            sum.entropy += stats.entropy;
            minibatches += 1;
        }
    }
    buffer.clear();
    let k = minibatches.max(1) as f64;
    Ok(UpdateStats {
        losses: LossStats {
            policy_loss: sum.policy_loss / k,
            value_loss: sum.value_loss / k,
            entropy: sum.entropy / k,
        },
        minibatches,
        learning_rate: lr,
    })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub learner: Learner,
    pub summaries: Vec<SummaryRow>,
    pub episodes: Vec<EpisodeRecord>,
    pub total_steps: u64,
    pub updates: usize,
}

#[derive(Default)]
struct Segment {
    obs: Vec<Vec<f64>>,
    actions: Vec<Vec<usize>>,
    log_probs: Vec<f64>,
    values: Vec<f64>,
    rewards: Vec<f64>,
}

impl Segment {
    fn len(&self) -> usize {
        self.rewards.len()
    }

    fn flush(&mut self, bootstrap: f64, hp: &PpoHyperparams, out: &mut Vec<Transition>) -> Result<()> {
        let (adv, ret) = compute_gae(&self.rewards, &self.values, bootstrap, hp.gamma, hp.lambda)?;
        for i in 0..self.len() {
            out.push(Transition {
                obs: std::mem::take(&mut self.obs[i]),
                actions: std::mem::take(&mut self.actions[i]),
                log_prob: self.log_probs[i],
                value: self.values[i],
                advantage: adv[i],
                ret: ret[i],
            });
        }
        *self = Segment::default();
        Ok(())
    }
}

#[derive(Default)]
struct Window {
    rewards: Vec<f64>,
    comm: Vec<f64>,
    losses: Vec<LossStats>,
}

/// Collects experience from `envs` with one shared policy until
/// `hp.max_steps` agent-steps, updating whenever the buffer fills.
///
/// Episodes end only by the step limit, which is a truncation: segments
/// cut by an episode end bootstrap from `V(s_T)` like any other cut.
pub fn train_loop<E: AgentEnv>(
    envs: &mut [E],
    obs_dim: usize,
    branches: &[usize],
    hp: &PpoHyperparams,
    seed: u64,
) -> Result<TrainOutcome> {
    hp.validate()?;
    if envs.is_empty() {
        return Err(Error::Contract("training needs at least one environment".into()));
    }
    let mut learner = Learner::new(obs_dim, branches, hp, seed);
    let mut act_rng = rng::stream(seed, streams::ACTIONS);
    let mut shuffle_rng = rng::stream(seed, streams::SHUFFLE);

    let mut segments: Vec<Vec<Segment>> = envs
        .iter()
        .map(|e| (0..e.agent_count()).map(|_| Segment::default()).collect())
        .collect();
    let mut accumulators = vec![EpisodeAccumulator::default(); envs.len()];
    let mut buffer = Vec::with_capacity(hp.buffer_size + 64);
    let mut episodes = Vec::new();
    let mut summaries = Vec::new();
    let mut window = Window::default();
    let mut last = SummaryRow {
        step: 0,
        mean_cumulative_reward: f64::NAN,
        value_loss: f64::NAN,
        policy_loss: f64::NAN,
        entropy: f64::NAN,
        comm_count: f64::NAN,
        episodes: 0,
    };
    let mut steps = 0u64;
    let mut updates = 0usize;
    let mut next_summary = hp.summary_freq;

    while steps < hp.max_steps {
        for (e, env) in envs.iter_mut().enumerate() {
            let obs = env.observations();
            let mut actions = Vec::with_capacity(obs.len());
            for (agent, o) in obs.iter().enumerate() {
                let (a, lps) = learner.policy.act(o, &mut act_rng)?;
                let seg = &mut segments[e][agent];
                seg.values.push(learner.value.value(o));
                seg.log_probs.push(lps.iter().sum());
                seg.actions.push(a.clone());
                seg.obs.push(o.clone());
                actions.push(a);
            }
            let fb = env.step(&actions)?;
            steps += obs.len() as u64;
            accumulators[e].add(&fb);
            let next_obs = env.observations();
            for (agent, seg) in segments[e].iter_mut().enumerate() {
                seg.rewards.push(fb.rewards[agent]);
                if fb.done || seg.len() >= hp.time_horizon {
                    let bootstrap = learner.value.value(&next_obs[agent]);
                    seg.flush(bootstrap, hp, &mut buffer)?;
                }
            }
            if fb.done {
                let record = accumulators[e].finish(episodes.len() as u64, steps);
                window.rewards.push(record.cumulative_reward);
                window.comm.push(record.comm_count);
                episodes.push(record);
                env.reset()?;
            }
            if buffer.len() >= hp.buffer_size {
                let progress = steps as f64 / hp.max_steps as f64;
                let stats = ppo_update(&mut learner, &mut buffer, hp, progress, &mut shuffle_rng)?;
                window.losses.push(stats.losses);
                updates += 1;
            }
            while steps >= next_summary {
                last = summarize(next_summary, &window, &last);
                log::debug!(
                    "step {} reward {:.2} value_loss {:.4}",
                    last.step,
                    last.mean_cumulative_reward,
                    last.value_loss
                );
                summaries.push(last.clone());
                window = Window::default();
                next_summary += hp.summary_freq;
            }
        }
    }
    Ok(TrainOutcome {
        learner,
        summaries,
        episodes,
        total_steps: steps,
        updates,
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Window means; a window without episodes or updates carries the previous
/// value forward.
fn summarize(step: u64, w: &Window, last: &SummaryRow) -> SummaryRow {
    let losses = |f: fn(&LossStats) -> f64| mean(&w.losses.iter().map(f).collect::<Vec<_>>());
    SummaryRow {
        step,
        mean_cumulative_reward: mean(&w.rewards).unwrap_or(last.mean_cumulative_reward),
        value_loss: losses(|l| l.value_loss).unwrap_or(last.value_loss),
        policy_loss: losses(|l| l.policy_loss).unwrap_or(last.policy_loss),
        entropy: losses(|l| l.entropy).unwrap_or(last.entropy),
        comm_count: mean(&w.comm).unwrap_or(last.comm_count),
        episodes: w.rewards.len(),
    }
}
