//! Cooperative multi-agent wind farm control.
//!
//! Turbine agents rotate to face against a non-stationary wind, optionally
//! exchange wind messages over a k-nearest-neighbour graph, and are trained
//! with a from-scratch PPO-Clip implementation. The crate is split into:
//!
//! - [`wind_field`]: main wind random walk plus an advecting gradient-noise field.
//! - [`farm_env`]: turbine kinematics, observations, the efficiency reward.
//! - [`comm_graph`]: kNN graph, one-step-delayed message delivery, inbox pooling.
//! - [`predictor`]: the frozen wind predictor fed by pooled messages.
//! - [`ppo`]: policy/value networks, GAE, clipped surrogate, training loop.
//! - [`experiments`]: the four setups, communication costs, benchmark harness.

pub mod checkpoint;
pub mod comm_graph;
pub mod error;
pub mod experiments;
pub mod farm_env;
pub mod geom;
pub mod nn;
pub mod ppo;
pub mod predictor;
pub mod rng;
pub mod wind_field;

pub use error::{Error, Result};
pub use geom::Vec2;
