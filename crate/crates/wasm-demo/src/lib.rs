//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The page drives a farm with the scripted controller, lets the user pin
//! the main wind direction, and overlays the k-nearest-neighbour graph with
//! the pooled neighbourhood wind each turbine would receive.

use wasm_bindgen::prelude::*;
use windfarm_core::comm_graph::{pool_inbox, Inbox, Message, NeighborGraph};
use windfarm_core::experiments::{Controller, ExperimentConfig, InferenceSession};
use windfarm_core::farm_env::{FarmLayout, LayoutPattern};
use windfarm_core::Vec2;

fn js_err(e: windfarm_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Energy contribution of a turbine facing `orientation_deg` in wind
/// blowing toward `wind_deg`.
#[wasm_bindgen]
pub fn contribution(wind_deg: f64, orientation_deg: f64) -> f64 {
    windfarm_core::farm_env::turbine_contribution(Vec2::from_degrees(wind_deg), Vec2::from_degrees(orientation_deg))
        .unwrap_or(-1.0)
}

#[wasm_bindgen]
pub struct FarmDemo {
    session: InferenceSession,
    graph: NeighborGraph,
}

#[wasm_bindgen]
impl FarmDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(
        turbines: usize,
        random_layout: bool,
        neighbours: usize,
        seed: u64,
        noise_amplitude: f64,
        noise_scale: f64,
    ) -> Result<FarmDemo, JsError> {
        let mut cfg = ExperimentConfig::default();
        cfg.layout.turbines = turbines;
        cfg.layout.seed = seed;
        cfg.layout.pattern = if random_layout {
            LayoutPattern::Random
        } else {
            LayoutPattern::Default
        };
        cfg.wind.noise_amplitude = noise_amplitude;
        cfg.wind.noise_scale = noise_scale;
        cfg.validate().map_err(js_err)?;
        let layout: FarmLayout = cfg.layout.build().map_err(js_err)?;
        let graph = NeighborGraph::build(&layout.positions, neighbours);
        let session = InferenceSession::for_repeat(&cfg, layout, None, Controller::Oracle, seed, 0).map_err(js_err)?;
        Ok(FarmDemo { session, graph })
    }

    /// Advances `n` steps; episodes restart automatically.
    pub fn step(&mut self, n: u32) -> Result<(), JsError> {
        for _ in 0..n {
            self.session.step().map_err(js_err)?;
        }
        Ok(())
    }

    pub fn set_wind_direction(&mut self, degrees: f64) {
        self.session.env_mut().farm_mut().wind_mut().pin(degrees);
    }

    pub fn release_wind(&mut self) {
        self.session.env_mut().farm_mut().wind_mut().release();
    }

    pub fn main_wind_angle(&self) -> f64 {
        self.session.env().farm().wind().main_angle()
    }

    pub fn step_index(&self) -> u64 {
        self.session.env().farm().step_index()
    }

    pub fn efficiency(&self) -> f64 {
        self.session.last_efficiency()
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.session.cumulative_reward()
    }

    /// Flat `[x0, y0, x1, y1, ...]` in the unit farm square.
    pub fn positions(&self) -> Vec<f64> {
        self.session
            .env()
            .farm()
            .turbines()
            .iter()
            .flat_map(|t| [t.position.x, t.position.y])
            .collect()
    }

    pub fn orientations(&self) -> Vec<f64> {
        self.session
            .env()
            .farm()
            .turbines()
            .iter()
            .map(|t| t.orientation_angle)
            .collect()
    }

    pub fn local_winds(&self) -> Vec<f64> {
        self.session
            .env()
            .farm()
            .turbines()
            .iter()
            .map(|t| t.local_wind.degrees())
            .collect()
    }

    pub fn contributions(&self) -> Vec<f64> {
        self.session
            .env()
            .farm()
            .turbines()
            .iter()
            .map(|t| t.contribution())
            .collect()
    }

    /// Flat `[sender, receiver, ...]` pairs of the neighbour graph.
    pub fn edges(&self) -> Vec<u32> {
        self.graph
            .edge_list()
            .into_iter()
            .flat_map(|(a, b)| [a as u32, b as u32])
            .collect()
    }

    /// Pooled neighbourhood wind per turbine, `[x0, y0, ...]`, as if every
    /// turbine had broadcast its current local wind.
    pub fn pooled(&self) -> Vec<f64> {
        let farm = self.session.env().farm();
        let turbines = farm.turbines();
        let mut inboxes = vec![Inbox::default(); turbines.len()];
        for t in turbines {
            for &r in self.graph.neighbours(t.index) {
                inboxes[r].messages.push(Message {
                    sender_position: t.position,
                    sender_wind: t.local_wind,
                    sent_at: farm.step_index(),
                });
            }
        }
        turbines
            .iter()
            .zip(&inboxes)
            .flat_map(|(t, inbox)| {
                let w = pool_inbox(t.position, inbox, farm.layout().farm_width);
                [w.x, w.y]
            })
            .collect()
    }

    /// Local wind angles on a `resolution × resolution` grid, row-major
    /// from the top-left corner.
    pub fn field(&self, resolution: usize) -> Vec<f64> {
        let wind = self.session.env().farm().wind();
        let n = resolution.max(2);
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                let p = Vec2::new(col as f64 / (n - 1) as f64, 1.0 - row as f64 / (n - 1) as f64);
                out.push(wind.local_angle(p).unwrap_or(f64::NAN));
            }
        }
        out
    }
}
