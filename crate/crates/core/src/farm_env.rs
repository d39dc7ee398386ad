//! The wind farm as a decentralised, partially observable environment.
//!
//! Each turbine sees its own orientation and local wind (and, when the farm
//! communicates, the predictor's forecast built from its inbox), stacked with
//! the previous frame. All turbines share one efficiency signal.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::comm_graph::{pool_inbox, Mailboxes, Message, NeighborGraph};
use crate::geom::{angle_between_degrees, wrap_degrees, Vec2};
use crate::predictor::PredictorNet;
use crate::rng::{self, streams};
use crate::wind_field::{WindConfig, WindState};
use crate::{Error, Result};

/// Frames concatenated into one observation.
pub const STACK_SIZE: usize = 2;
/// Orientation (2) + local wind (2).
pub const BASE_FEATURES: usize = 4;
/// Base features + predicted wind (2).
pub const COMM_FEATURES: usize = 6;
pub const DEFAULT_EPISODE_LENGTH: u64 = 2000;
const GRID_SPACING: f64 = 0.2;
const RANDOM_MIN_SEPARATION: f64 = 0.08;
const RANDOM_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutPattern {
    Default,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarmLayout {
    pub pattern: LayoutPattern,
    pub positions: Vec<Vec2>,
    /// Normalisation constant for distances; positions live in the unit square.
    pub farm_width: f64,
}

impl FarmLayout {
    pub fn generate(pattern: LayoutPattern, turbines: usize, seed: u64) -> Result<Self> {
        match pattern {
            LayoutPattern::Default => Self::grid(turbines),
            LayoutPattern::Random => Self::random(turbines, seed),
        }
    }

    /// Centred grid with 0.2 spacing: 8 → 2×4, 16 → 4×4, 24 → 4×6.
    pub fn grid(turbines: usize) -> Result<Self> {
        if turbines == 0 {
            return Err(Error::Config("a farm needs at least one turbine".into()));
        }
        let rows = ((turbines as f64).sqrt().floor() as usize).max(1);
        let cols = turbines.div_ceil(rows);
        let span = rows.max(cols).saturating_sub(1).max(1) as f64;
        let spacing = GRID_SPACING.min(1.0 / span);
        let positions = (0..turbines)
            .map(|i| {
                let (r, c) = (i / cols, i % cols);
                Vec2::new(
                    0.5 + (c as f64 - (cols - 1) as f64 / 2.0) * spacing,
                    0.5 + (r as f64 - (rows - 1) as f64 / 2.0) * spacing,
                )
            })
            .collect();
        let layout = Self {
            pattern: LayoutPattern::Default,
            positions,
            farm_width: 1.0,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Uniform positions with a minimum pairwise separation, by rejection.
    pub fn random(turbines: usize, seed: u64) -> Result<Self> {
        if turbines == 0 {
            return Err(Error::Config("a farm needs at least one turbine".into()));
        }
        let mut rng = rng::stream(seed, streams::LAYOUT);
        let mut positions: Vec<Vec2> = Vec::with_capacity(turbines);
        let mut attempts = 0usize;
        while positions.len() < turbines {
            attempts += 1;
            if attempts > 200_000 {
                return Err(Error::Config(format!(
                    "cannot place {turbines} turbines with separation {RANDOM_MIN_SEPARATION}"
                )));
            }
            let p = Vec2::new(
                rng.gen_range(RANDOM_MARGIN..=1.0 - RANDOM_MARGIN),
                rng.gen_range(RANDOM_MARGIN..=1.0 - RANDOM_MARGIN),
            );
            if positions.iter().all(|q| q.distance(p) >= RANDOM_MIN_SEPARATION) {
                positions.push(p);
            }
        }
        Ok(Self {
            pattern: LayoutPattern::Random,
            positions,
            farm_width: 1.0,
        })
    }

    pub fn turbine_count(&self) -> usize {
        self.positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.positions.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                return Err(Error::Config(format!("turbine {i} lies outside the unit square")));
            }
            for (j, q) in self.positions.iter().enumerate().skip(i + 1) {
                if p.distance(*q) < 1e-12 {
                    return Err(Error::Config(format!("turbines {i} and {j} coincide")));
                }
            }
        }
        if self.farm_width.is_nan() || self.farm_width <= 0.0 {
            return Err(Error::Config("farm width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationAction {
    Left,
    Still,
    Right,
}

impl RotationAction {
    pub const ALL: [RotationAction; 3] = [RotationAction::Left, RotationAction::Still, RotationAction::Right];

    /// Signed direction in units of the turbine rotation step.
    pub fn sign(self) -> f64 {
        match self {
            RotationAction::Left => -1.0,
            RotationAction::Still => 0.0,
            RotationAction::Right => 1.0,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        match self {
            RotationAction::Left => 0,
            RotationAction::Still => 1,
            RotationAction::Right => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Every agent receives the collective efficiency.
    Shared,
    /// Agent `i` receives its own contribution divided by the turbine count.
    #[default]
    PerShare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurbineAgentState {
    pub index: usize,
    pub position: Vec2,
    /// Degrees in [0, 360).
    pub orientation_angle: f64,
    pub local_wind: Vec2,
    /// Whether this turbine chose to send at the last step.
    pub sent: bool,
    /// Messages read at the current step.
    pub inbox_size: usize,
    pub wnv: Vec2,
    pub prediction: Option<Vec2>,
}

impl TurbineAgentState {
    pub fn orientation(&self) -> Vec2 {
        Vec2::from_degrees(self.orientation_angle)
    }

    pub fn angle_delta(&self) -> f64 {
        angle_between_degrees(self.local_wind, self.orientation())
    }

    pub fn contribution(&self) -> f64 {
        contribution_from_delta(self.angle_delta())
    }
}

/// Unsigned angle between wind and orientation in degrees, in [0, 180].
pub fn angle_delta(d: Vec2, o: Vec2) -> Result<f64> {
    if d.norm() < 1e-12 || o.norm() < 1e-12 {
        return Err(Error::Domain("angle between a zero-length vector is undefined".into()));
    }
    Ok(angle_between_degrees(d, o))
}

/// Energy contribution of one turbine: the normalised angle `a = delta/180`
/// when the turbine faces more than 90° against the wind, else -1.
pub fn turbine_contribution(d: Vec2, o: Vec2) -> Result<f64> {
    angle_delta(d, o).map(contribution_from_delta)
}

pub fn contribution_from_delta(delta_degrees: f64) -> f64 {
    let a = delta_degrees / 180.0;
    if a > 0.5 {
        a
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveReward {
    pub contributions: Vec<f64>,
    pub per_agent: Vec<f64>,
    /// Mean contribution, in [-1, 1].
    pub efficiency: f64,
}

pub fn collective_reward(turbines: &[TurbineAgentState], mode: RewardMode) -> CollectiveReward {
    let contributions: Vec<f64> = turbines.iter().map(TurbineAgentState::contribution).collect();
    rewards_from_contributions(contributions, mode)
}

pub fn rewards_from_contributions(contributions: Vec<f64>, mode: RewardMode) -> CollectiveReward {
    let n = contributions.len().max(1) as f64;
    let efficiency = contributions.iter().sum::<f64>() / n;
    let per_agent = match mode {
        RewardMode::Shared => vec![efficiency; contributions.len()],
        RewardMode::PerShare => contributions.iter().map(|c| c / n).collect(),
    };
    CollectiveReward {
        contributions,
        per_agent,
        efficiency,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSettings {
    pub episode_length: u64,
    pub reward_mode: RewardMode,
    /// Whether observations carry the predicted wind (and turbines may send).
    pub communication: bool,
    pub neighbours: usize,
}

impl Default for EnvSettings {
    fn default() -> Self {
        Self {
            episode_length: DEFAULT_EPISODE_LENGTH,
            reward_mode: RewardMode::default(),
            communication: false,
            neighbours: 0,
        }
    }
}

impl EnvSettings {
    pub fn features_per_turbine(&self) -> usize {
        if self.communication {
            COMM_FEATURES
        } else {
            BASE_FEATURES
        }
    }

    pub fn observation_len(&self) -> usize {
        self.features_per_turbine() * STACK_SIZE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStepResult {
    pub per_agent_observations: Vec<Vec<f64>>,
    /// Base rewards, before any communication cost.
    pub per_agent_rewards: Vec<f64>,
    pub contributions: Vec<f64>,
    pub collective_efficiency: f64,
    /// Inbox entries created by each agent's send this step.
    pub messages_delivered: Vec<usize>,
    pub done: bool,
    pub step_index: u64,
}

#[derive(Debug, Clone)]
pub struct FarmEnv {
    layout: FarmLayout,
    wind: WindState,
    turbines: Vec<TurbineAgentState>,
    graph: NeighborGraph,
    mail: Mailboxes,
    predictor: Option<Arc<PredictorNet>>,
    settings: EnvSettings,
    step_index: u64,
    prev_frames: Vec<Vec<f64>>,
    observations: Vec<Vec<f64>>,
}

impl FarmEnv {
    /// Starts an episode: random main wind direction, random turbine
    /// orientations, empty inboxes, the first frame duplicated in the stack.
    pub fn reset(
        layout: FarmLayout,
        wind_config: &WindConfig,
        seed: u64,
        settings: EnvSettings,
        predictor: Option<Arc<PredictorNet>>,
    ) -> Result<Self> {
        layout.validate()?;
        if settings.communication && predictor.is_none() {
            return Err(Error::Config(
                "a communicating farm needs a trained wind predictor".into(),
            ));
        }
        if settings.episode_length == 0 {
            return Err(Error::Config("episode_length must be positive".into()));
        }
        let wind = WindState::new(
            WindConfig {
                seed: rng::derive(seed, streams::WIND),
                ..wind_config.clone()
            },
            true,
        )?;
        let mut orient_rng = rng::stream(seed, streams::ORIENTATION);
        let turbines = layout
            .positions
            .iter()
            .enumerate()
            .map(|(index, &position)| {
                Ok(TurbineAgentState {
                    index,
                    position,
                    orientation_angle: wrap_degrees(orient_rng.gen_range(0.0..360.0)),
                    local_wind: wind.sample_local_wind(position)?,
                    sent: false,
                    inbox_size: 0,
                    wnv: Vec2::ZERO,
                    prediction: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let k = if settings.communication { settings.neighbours } else { 0 };
        let graph = NeighborGraph::build(&layout.positions, k);
        let n = turbines.len();
        let mut env = Self {
            layout,
            wind,
            turbines,
            graph,
            mail: Mailboxes::new(n),
            predictor,
            settings,
            step_index: 0,
            prev_frames: Vec::new(),
            observations: Vec::new(),
        };
        env.read_inboxes();
        let frames = env.current_frames();
        env.observations = frames
            .iter()
            .map(|f| f.iter().chain(f.iter()).copied().collect())
            .collect();
        env.prev_frames = frames;
        Ok(env)
    }

    pub fn turbine_count(&self) -> usize {
        self.turbines.len()
    }

    pub fn turbines(&self) -> &[TurbineAgentState] {
        &self.turbines
    }

    pub fn layout(&self) -> &FarmLayout {
        &self.layout
    }

    pub fn wind(&self) -> &WindState {
        &self.wind
    }

    /// Operator access to the wind, e.g. to pin the main direction.
    pub fn wind_mut(&mut self) -> &mut WindState {
        &mut self.wind
    }

    pub fn graph(&self) -> &NeighborGraph {
        &self.graph
    }

    pub fn settings(&self) -> &EnvSettings {
        &self.settings
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn is_done(&self) -> bool {
        self.step_index >= self.settings.episode_length
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.observations
    }

    pub fn pending_messages(&self, node: usize) -> usize {
        self.mail.pending(node).len()
    }

    /// Applies one rotation per turbine (and optional send flags), advances
    /// the wind, and returns observations and base rewards for the new state.
    ///
    /// Messages sent now carry the turbine's current wind and are read, pooled
    /// and turned into predictions at the next step.
    pub fn step(&mut self, actions: &[RotationAction], sends: &[bool]) -> Result<EnvStepResult> {
        let n = self.turbines.len();
        if actions.len() != n {
            return Err(Error::Contract(format!(
                "expected {n} rotation actions, got {}",
                actions.len()
            )));
        }
        if !sends.is_empty() && sends.len() != n {
            return Err(Error::Contract(format!("expected {n} send flags, got {}", sends.len())));
        }
        if self.is_done() {
            return Err(Error::Contract("episode is over; reset the environment".into()));
        }

        let mut delivered = vec![0usize; n];
        for (i, turbine) in self.turbines.iter_mut().enumerate() {
            turbine.sent = false;
            if self.settings.communication && sends.get(i).copied().unwrap_or(false) {
                let message = Message {
                    sender_position: turbine.position,
                    sender_wind: turbine.local_wind,
                    sent_at: self.step_index,
                };
                delivered[i] = self.mail.deliver(&self.graph, i, message)?;
                turbine.sent = true;
            }
        }

        let rotation = self.wind.config().turbine_rotation_step;
        for (turbine, action) in self.turbines.iter_mut().zip(actions) {
            turbine.orientation_angle = wrap_degrees(turbine.orientation_angle + action.sign() * rotation);
        }
        self.wind.step();
        self.step_index += 1;
        self.mail.advance();
        for turbine in &mut self.turbines {
            turbine.local_wind = self.wind.sample_local_wind(turbine.position)?;
        }

        let reward = collective_reward(&self.turbines, self.settings.reward_mode);
        self.read_inboxes();
        let frames = self.current_frames();
        self.observations = frames
            .iter()
            .zip(&self.prev_frames)
            .map(|(cur, prev)| cur.iter().chain(prev.iter()).copied().collect())
            .collect();
        self.prev_frames = frames;

        Ok(EnvStepResult {
            per_agent_observations: self.observations.clone(),
            per_agent_rewards: reward.per_agent,
            contributions: reward.contributions,
            collective_efficiency: reward.efficiency,
            messages_delivered: delivered,
            done: self.is_done(),
            step_index: self.step_index,
        })
    }

    fn read_inboxes(&mut self) {
        let Some(predictor) = self.predictor.as_ref().filter(|_| self.settings.communication) else {
            return;
        };
        let width = self.layout.farm_width;
        for (i, turbine) in self.turbines.iter_mut().enumerate() {
            let inbox = self.mail.take(i);
            turbine.inbox_size = inbox.len();
            turbine.wnv = pool_inbox(turbine.position, &inbox, width);
            turbine.prediction = Some(predictor.predict(turbine.wnv, turbine.local_wind));
        }
    }

    fn current_frames(&self) -> Vec<Vec<f64>> {
        self.turbines
            .iter()
            .map(|t| {
                let o = t.orientation();
                let d = t.local_wind;
                let mut f = vec![o.x, o.y, d.x, d.y];
                if self.settings.communication {
                    let p = t.prediction.unwrap_or(d);
                    f.extend([p.x, p.y]);
                }
                f
            })
            .collect()
    }
}

/// Header for per-step episode trace CSVs.
pub fn trace_header(turbines: usize) -> Vec<String> {
    let mut h = vec!["step".to_string(), "efficiency".to_string()];
    h.extend((0..turbines).map(|i| format!("angle_delta_{i}")));
    h.extend((0..turbines).map(|i| format!("reward_{i}")));
    h
}

pub fn trace_row(env: &FarmEnv, result: &EnvStepResult, rewards: &[f64]) -> Vec<String> {
    let mut row = vec![
        result.step_index.to_string(),
        format!("{:.6}", result.collective_efficiency),
    ];
    row.extend(env.turbines().iter().map(|t| format!("{:.4}", t.angle_delta())));
    row.extend(rewards.iter().map(|r| format!("{r:.6}")));
    row
}
