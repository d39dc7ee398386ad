//! Non-stationary wind: a randomly rotating main direction plus a spatial
//! gradient-noise perturbation that scrolls downwind over time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{wrap_degrees, Vec2};
use crate::rng::{self, SimRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindConfig {
    /// Bound on the main direction's per-step change, degrees.
    pub main_rotation_step_max: f64,
    /// Per-step turbine rotation, degrees. Read by the farm environment.
    pub turbine_rotation_step: f64,
    /// Noise periods across the unit farm.
    pub noise_scale: f64,
    /// Maximum deviation of the local wind from the main direction, degrees.
    pub noise_amplitude: f64,
    /// Distance the noise pattern travels downwind per step, farm widths.
    pub advection_speed: f64,
    /// Angular velocity retention per step (1.0 = undamped walk).
    pub velocity_damping: f64,
    /// Half-width of the uniform angular velocity perturbation, degrees/step.
    pub velocity_jitter: f64,
    pub seed: u64,
}

impl Default for WindConfig {
    fn default() -> Self {
        Self {
            main_rotation_step_max: 2.0,
            turbine_rotation_step: 1.0,
            noise_scale: 0.3,
            noise_amplitude: 10.0,
            advection_speed: 0.002,
            velocity_damping: 0.99,
            velocity_jitter: 0.2,
            seed: 0,
        }
    }
}

impl WindConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("main_rotation_step_max", self.main_rotation_step_max),
            ("turbine_rotation_step", self.turbine_rotation_step),
            ("noise_scale", self.noise_scale),
            ("noise_amplitude", self.noise_amplitude),
            ("advection_speed", self.advection_speed),
            ("velocity_jitter", self.velocity_jitter),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "wind.{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        if self.noise_amplitude >= 90.0 {
            return Err(Error::Config(format!(
                "wind.noise_amplitude must be in [0, 90), got {}",
                self.noise_amplitude
            )));
        }
        if !(0.0..=1.0).contains(&self.velocity_damping) {
            return Err(Error::Config(format!(
                "wind.velocity_damping must be in [0, 1], got {}",
                self.velocity_damping
            )));
        }
        Ok(())
    }

    /// Whether the wind can rotate faster than a turbine can follow.
    pub fn outpaces_turbines(&self) -> bool {
        self.main_rotation_step_max > self.turbine_rotation_step
    }
}

/// Improved 2D gradient noise over a seeded permutation lattice.
#[derive(Debug, Clone)]
pub struct GradientNoise {
    perm: [u8; 512],
}

impl GradientNoise {
    pub fn new(seed: u64) -> Self {
        let mut table: [u8; 256] = std::array::from_fn(|i| i as u8);
        let mut rng = rng::stream(seed, rng::streams::WIND ^ 0xFEED);
        // Fisher-Yates
        for i in (1..256).rev() {
            let j = rng.gen_range(0..=i);
            table.swap(i, j);
        }
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        Self { perm }
    }

    /// Noise value in [-1, 1], continuous in (x, y).
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let xf = x.floor();
        let yf = y.floor();
        let xi = (xf as i64 & 255) as usize;
        let yi = (yf as i64 & 255) as usize;
        let dx = x - xf;
        let dy = y - yf;
        let u = fade(dx);
        let v = fade(dy);

        let p = &self.perm;
        let aa = p[p[xi] as usize + yi];
        let ab = p[p[xi] as usize + yi + 1];
        let ba = p[p[xi + 1] as usize + yi];
        let bb = p[p[xi + 1] as usize + yi + 1];

        let x1 = lerp(u, grad(aa, dx, dy), grad(ba, dx - 1.0, dy));
        let x2 = lerp(u, grad(ab, dx, dy - 1.0), grad(bb, dx - 1.0, dy - 1.0));
        lerp(v, x1, x2).clamp(-1.0, 1.0)
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

fn grad(hash: u8, x: f64, y: f64) -> f64 {
    match hash & 7 {
        0 => x + y,
        1 => -x + y,
        2 => x - y,
        3 => -x - y,
        4 => x,
        5 => -x,
        6 => y,
        _ => -y,
    }
}

#[derive(Debug, Clone)]
pub struct WindState {
    config: WindConfig,
    main_angle: f64,
    angular_velocity: f64,
    /// Accumulated downwind displacement of the noise pattern, farm widths.
    noise_offset: Vec2,
    /// Main direction held by an operator override, if any.
    pinned: Option<f64>,
    noise: GradientNoise,
    rng: SimRng,
}

impl WindState {
    /// Initialises the wind. With `random_initial_direction` the main angle is
    /// uniform in [0, 360), otherwise it starts at 0.
    pub fn new(config: WindConfig, random_initial_direction: bool) -> Result<Self> {
        config.validate()?;
        let mut rng = rng::stream(config.seed, rng::streams::WIND);
        let main_angle = if random_initial_direction {
            wrap_degrees(rng.gen_range(0.0..360.0))
        } else {
            0.0
        };
        Ok(Self {
            noise: GradientNoise::new(config.seed),
            config,
            main_angle,
            angular_velocity: 0.0,
            noise_offset: Vec2::ZERO,
            pinned: None,
            rng,
        })
    }

    pub fn config(&self) -> &WindConfig {
        &self.config
    }

    pub fn main_angle(&self) -> f64 {
        self.main_angle
    }

    pub fn angular_velocity(&self) -> f64 {
        self.angular_velocity
    }

    pub fn noise_offset(&self) -> Vec2 {
        self.noise_offset
    }

    pub fn pinned(&self) -> Option<f64> {
        self.pinned
    }

    /// Advances one step: velocity walk, main rotation, noise advection.
    pub fn step(&mut self) {
        let cfg = &self.config;
        // the jitter draw happens even while pinned so that a pin/release
        // cycle does not shift the rest of the random sequence
        let jitter = if cfg.velocity_jitter > 0.0 {
            self.rng.gen_range(-cfg.velocity_jitter..=cfg.velocity_jitter)
        } else {
            0.0
        };
        match self.pinned {
            Some(angle) => {
                self.main_angle = angle;
                self.angular_velocity = 0.0;
            }
            None => {
                let limit = cfg.main_rotation_step_max;
                self.angular_velocity = (cfg.velocity_damping * self.angular_velocity + jitter).clamp(-limit, limit);
                self.main_angle = wrap_degrees(self.main_angle + self.angular_velocity);
            }
        }
        self.noise_offset += Vec2::from_degrees(self.main_angle) * cfg.advection_speed;
    }

    /// Holds the main direction at `degrees` until [`release`](Self::release).
    pub fn pin(&mut self, degrees: f64) {
        let angle = wrap_degrees(degrees);
        self.pinned = Some(angle);
        self.main_angle = angle;
        self.angular_velocity = 0.0;
    }

    pub fn release(&mut self) {
        self.pinned = None;
    }

    /// Local wind angle in degrees at a normalized farm position.
    pub fn local_angle(&self, position: Vec2) -> Result<f64> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(in_unit(position.x) && in_unit(position.y)) {
            return Err(Error::Domain(format!(
                "position ({}, {}) outside the unit farm square",
                position.x, position.y
            )));
        }
        let p = (position - self.noise_offset) * self.config.noise_scale;
        let deviation = self.config.noise_amplitude * self.noise.sample(p.x, p.y);
        Ok(self.main_angle + deviation)
    }

    /// Unit wind direction at a normalized farm position.
    pub fn sample_local_wind(&self, position: Vec2) -> Result<Vec2> {
        self.local_angle(position).map(Vec2::from_degrees)
    }
}
