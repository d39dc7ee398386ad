//! Wire messages. Every message is one JSON text frame with a protocol
//! version `v` and a `type` tag.

use serde::{Deserialize, Serialize};
use windfarm_core::experiments::InferenceSession;

pub const PROTOCOL_VERSION: u32 = 1;
pub const MIN_TIME_SCALE: f64 = 0.1;
pub const MAX_TIME_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Light {
    Green,
    Yellow,
    Red,
}

impl Light {
    /// Colour for a normalised angle `a = delta/180`: red unless the turbine
    /// faces more than 90° against the wind, green beyond 135°.
    pub fn from_normalised_angle(a: f64) -> Self {
        if a > 0.75 {
            Light::Green
        } else if a > 0.5 {
            Light::Yellow
        } else {
            Light::Red
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineFrame {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    /// Degrees.
    pub orientation: f64,
    /// Local wind direction, degrees.
    pub local_wind: f64,
    pub contribution: f64,
    pub light: Light,
    pub inbox: usize,
    pub sent: bool,
    /// Forecast wind direction in degrees, when the farm communicates.
    pub predicted_wind: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub step: u64,
    pub episode: u64,
    pub main_wind_angle: f64,
    pub efficiency: f64,
    pub cumulative_reward: f64,
    pub paused: bool,
    pub time_scale: f64,
    pub pinned: bool,
    pub turbines: Vec<TurbineFrame>,
    pub edges: Vec<(usize, usize)>,
}

impl Frame {
    pub fn capture(session: &InferenceSession, paused: bool, time_scale: f64) -> Self {
        let env = session.env();
        let farm = env.farm();
        let turbines = farm
            .turbines()
            .iter()
            .map(|t| {
                let delta = t.angle_delta();
                TurbineFrame {
                    index: t.index,
                    x: t.position.x,
                    y: t.position.y,
                    orientation: t.orientation_angle,
                    local_wind: windfarm_core::geom::wrap_degrees(t.local_wind.degrees()),
                    contribution: t.contribution(),
                    light: Light::from_normalised_angle(delta / 180.0),
                    inbox: t.inbox_size,
                    sent: t.sent,
                    predicted_wind: t.prediction.map(|p| windfarm_core::geom::wrap_degrees(p.degrees())),
                }
            })
            .collect();
        Self {
            v: PROTOCOL_VERSION,
            kind: "frame".into(),
            step: farm.step_index(),
            episode: env.episode(),
            main_wind_angle: farm.wind().main_angle(),
            efficiency: session.last_efficiency(),
            cumulative_reward: session.cumulative_reward(),
            paused,
            time_scale,
            pinned: farm.wind().pinned().is_some(),
            turbines,
            edges: farm.graph().edge_list(),
        }
    }
}

/// Operator commands from a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Control {
    SetTimeScale {
        value: f64,
        #[serde(default)]
        v: Option<u32>,
    },
    SetWindDirection {
        value: f64,
        #[serde(default)]
        v: Option<u32>,
    },
    ReleaseWind {
        #[serde(default)]
        v: Option<u32>,
    },
    Pause {
        #[serde(default)]
        v: Option<u32>,
    },
    Resume {
        #[serde(default)]
        v: Option<u32>,
    },
    Reset {
        #[serde(default)]
        v: Option<u32>,
    },
}

impl Control {
    fn version(&self) -> Option<u32> {
        match self {
            Control::SetTimeScale { v, .. }
            | Control::SetWindDirection { v, .. }
            | Control::ReleaseWind { v }
            | Control::Pause { v }
            | Control::Resume { v }
            | Control::Reset { v } => *v,
        }
    }

    /// Parses and range-checks one text message.
    pub fn parse(text: &str) -> Result<Self, String> {
        let c: Control = serde_json::from_str(text).map_err(|e| format!("malformed control: {e}"))?;
        if let Some(v) = c.version().filter(|&v| v != PROTOCOL_VERSION) {
            return Err(format!("unsupported protocol version {v}"));
        }
        match &c {
            Control::SetTimeScale { value, .. } if !(MIN_TIME_SCALE..=MAX_TIME_SCALE).contains(value) => Err(format!(
                "time scale {value} outside [{MIN_TIME_SCALE}, {MAX_TIME_SCALE}]"
            )),
            Control::SetWindDirection { value, .. } if !(0.0..360.0).contains(value) => {
                Err(format!("wind direction {value} outside [0, 360)"))
            }
            _ => Ok(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorFrame {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub message: String,
}

impl ErrorFrame {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            kind: "error".into(),
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lights_follow_the_normalised_angle() {
        assert_eq!(Light::from_normalised_angle(1.0), Light::Green);
        assert_eq!(Light::from_normalised_angle(0.75), Light::Yellow);
        assert_eq!(Light::from_normalised_angle(0.51), Light::Yellow);
        assert_eq!(Light::from_normalised_angle(0.5), Light::Red);
        assert_eq!(Light::from_normalised_angle(0.0), Light::Red);
    }

    #[test]
    fn controls_parse_and_validate() {
        assert_eq!(
            Control::parse(r#"{"type":"set_wind_direction","value":270}"#).unwrap(),
            Control::SetWindDirection { value: 270.0, v: None }
        );
        assert_eq!(
            Control::parse(r#"{"v":1,"type":"pause"}"#).unwrap(),
            Control::Pause { v: Some(1) }
        );
        assert!(Control::parse(r#"{"type":"set_time_scale","value":1000}"#).is_err());
        assert!(Control::parse(r#"{"type":"set_wind_direction","value":360}"#).is_err());
        assert!(Control::parse(r#"{"type":"explode"}"#).is_err());
        assert!(Control::parse("not json").is_err());
        assert!(Control::parse(r#"{"v":2,"type":"pause"}"#).is_err());
    }
}
