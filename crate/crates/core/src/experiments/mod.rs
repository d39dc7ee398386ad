//! The four experiment setups and the benchmark harness around them.

mod config;
mod convergence;
mod inference;
mod io;
mod report;
mod runs;
mod setup_env;

use serde::{Deserialize, Serialize};

use crate::farm_env::{BASE_FEATURES, COMM_FEATURES, STACK_SIZE};

pub use config::{
    apply_override, merge_values, ExperimentConfig, GnnConfig, InferenceConfig, LayoutConfig, Profile, ScalingConfig,
    SweepConfig,
};
pub use convergence::{detect_convergence, moving_average, CONVERGENCE_TOLERANCE, CONVERGENCE_WINDOW};
pub use inference::{evaluate, oracle_actions, write_trace, Controller, InferenceRow, InferenceSession, SessionStep};
pub use io::{load_policy, save_policy, write_episodes, write_metrics, PolicyMeta, METRICS_HEADER};
pub use report::{write_report, ReportRow};
pub use runs::{
    load_predictor, run_inference, run_neighbour_sweep, run_scaling, run_training, train_gnn, train_seed, ScalingRow,
    SeedRun, SweepRow, TrainingSummary,
};
pub use setup_env::SetupEnv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupKind {
    SingleAgent,
    #[default]
    MultiAgent,
    MaBroadcasting,
    MaByChoice,
}

/// Observation and action dimensions of a setup on a farm of `turbines`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetupShape {
    pub agents: usize,
    pub turbines: usize,
    pub neighbours: usize,
    pub obs_per_turbine: usize,
    /// Per-agent observation size before frame stacking.
    pub obs_total: usize,
    pub stack: usize,
    pub branches: Vec<usize>,
}

impl SetupShape {
    pub fn actions_per_agent(&self) -> usize {
        self.branches.iter().sum()
    }

    /// Network input length.
    pub fn input_dim(&self) -> usize {
        self.obs_total * self.stack
    }
}

impl SetupKind {
    pub const ALL: [SetupKind; 4] = [
        SetupKind::SingleAgent,
        SetupKind::MultiAgent,
        SetupKind::MaBroadcasting,
        SetupKind::MaByChoice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SetupKind::SingleAgent => "single_agent",
            SetupKind::MultiAgent => "multi_agent",
            SetupKind::MaBroadcasting => "ma_broadcasting",
            SetupKind::MaByChoice => "ma_by_choice",
        }
    }

    pub fn communicates(self) -> bool {
        matches!(self, SetupKind::MaBroadcasting | SetupKind::MaByChoice)
    }

    pub fn default_neighbours(self) -> usize {
        if self.communicates() {
            4
        } else {
            0
        }
    }

    pub fn shape(self, turbines: usize, neighbours: usize) -> SetupShape {
        let obs_per_turbine = if self.communicates() {
            COMM_FEATURES
        } else {
            BASE_FEATURES
        };
        let (agents, obs_total, branches) = match self {
            SetupKind::SingleAgent => (1, obs_per_turbine * turbines, vec![3; turbines]),
            SetupKind::MultiAgent | SetupKind::MaBroadcasting => (turbines, obs_per_turbine, vec![3]),
            SetupKind::MaByChoice => (turbines, obs_per_turbine, vec![3, 2]),
        };
        SetupShape {
            agents,
            turbines,
            neighbours: if self.communicates() { neighbours } else { 0 },
            obs_per_turbine,
            obs_total,
            stack: STACK_SIZE,
            branches,
        }
    }
}

impl std::fmt::Display for SetupKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Subtracts `cost_per_send` from every agent that pays for a message this
/// step: all agents under broadcasting, the senders under by-choice, nobody
/// otherwise.
pub fn apply_comm_cost(
    setup: SetupKind,
    base_rewards: &[f64],
    send_decisions: &[bool],
    cost_per_send: f64,
) -> Vec<f64> {
    match setup {
        SetupKind::SingleAgent | SetupKind::MultiAgent => base_rewards.to_vec(),
        SetupKind::MaBroadcasting => base_rewards.iter().map(|r| r - cost_per_send).collect(),
        SetupKind::MaByChoice => base_rewards
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if send_decisions.get(i).copied().unwrap_or(false) {
                    r - cost_per_send
                } else {
                    *r
                }
            })
            .collect(),
    }
}
