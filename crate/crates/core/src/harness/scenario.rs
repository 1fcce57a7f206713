//! Scenario files: command schedule, disturbances, parameter mismatch and
//! controller settings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controller::ControllerConfig;
use crate::environment::{GustSpec, TurbulenceSpec};
use crate::harness::overrides::{apply_overrides, scale_path};
use crate::math::Vec3;
use crate::outer_loop::{stick_to_commands, OuterCommands};
use crate::params::{AirshipParams, ParamsConfig};
use crate::{Error, Result};

/// Direct outer-loop command; the turn rate is in deg/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectCommand {
    #[serde(default)]
    pub u_c: f64,
    #[serde(default)]
    pub w_c: f64,
    #[serde(default)]
    pub psi_dot_deg: f64,
}

/// Command held from `t` until the next entry. Exactly one of `stick`
/// (`[forward, heave, yaw]` in `[-1, 1]`) and `direct` must be present.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEntry {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stick: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectCommand>,
}

impl CommandEntry {
    pub fn commands(&self) -> OuterCommands {
        match (self.stick, self.direct) {
            (Some([f, h, y]), _) => stick_to_commands(f, h, y),
            (None, Some(d)) => OuterCommands {
                u_c: d.u_c,
                w_c: d.w_c,
                psi_dot: d.psi_dot_deg.to_radians(),
            },
            (None, None) => OuterCommands::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialCondition {
    pub velocity: [f64; 3],
    pub rates: [f64; 3],
    pub attitude_deg: [f64; 3],
    /// Start the actuators at the plant's steady-flight trim.
    pub trim: bool,
    /// Tilt angles the trim is sought near; the preferred tilts when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tilt_deg: Option<[f64; 4]>,
}

impl Default for InitialCondition {
    fn default() -> Self {
        Self {
            velocity: [0.0; 3],
            rates: [0.0; 3],
            attitude_deg: [0.0; 3],
            trim: true,
            tilt_deg: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoise {
    /// Gyro white-noise standard deviation, rad/s.
    pub gyro: f64,
    /// Accelerometer white-noise standard deviation, m/s^2.
    pub accel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_plant_rate")]
    pub plant_rate_hz: f64,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub schedule: Vec<CommandEntry>,
    #[serde(default)]
    pub controller: ControllerConfig,
    /// Plant parameters before scaling.
    #[serde(default)]
    pub plant: ParamsConfig,
    /// Multiplicative factors on plant parameter paths.
    #[serde(default)]
    pub plant_scale: BTreeMap<String, f64>,
    /// Controller model parameters; the unscaled plant when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller_params: Option<ParamsConfig>,
    #[serde(default)]
    pub controller_scale: BTreeMap<String, f64>,
    #[serde(default)]
    pub aero_damping: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gust: Option<GustSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turbulence: Option<TurbulenceSpec>,
    #[serde(default)]
    pub sensor_noise: SensorNoise,
}

fn default_plant_rate() -> f64 {
    500.0
}

fn scaled(base: &ParamsConfig, scale: &BTreeMap<String, f64>) -> Result<ParamsConfig> {
    if scale.is_empty() {
        return Ok(base.clone());
    }
    let mut tree = serde_json::to_value(base.resolved()?)?;
    for (path, f) in scale {
        scale_path(&mut tree, path, *f)?;
    }
    Ok(serde_json::from_value(tree)?)
}

impl Scenario {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    /// Loads TOML or JSON, chosen by file extension (TOML by default).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let sc = apply_overrides(self, overrides)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config("duration must be positive".into()));
        }
        if self.duration > 1e5 {
            return Err(Error::Config("duration is limited to 1e5 s".into()));
        }
        self.controller.validate()?;
        let ratio = self.plant_rate_hz / self.controller.rate_hz;
        if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9 && ratio <= 1000.0) {
            return Err(Error::Config(
                "plant rate must be an integer multiple (1..=1000) of the controller rate".into(),
            ));
        }
        let mut last = f64::NEG_INFINITY;
        for e in &self.schedule {
            if !e.t.is_finite() || e.t < last {
                return Err(Error::Config("schedule times must be finite and monotone".into()));
            }
            last = e.t;
            match (e.stick, e.direct) {
                (Some(s), None) if s.iter().all(|x| x.is_finite()) => {}
                (None, Some(d)) if [d.u_c, d.w_c, d.psi_dot_deg].iter().all(|x| x.is_finite()) => {}
                _ => {
                    return Err(Error::Config(format!(
                        "schedule entry at t = {} needs exactly one finite stick or direct command",
                        e.t
                    )))
                }
            }
        }
        if let Some(g) = &self.gust {
            let ok = [g.t_start, g.amplitude, g.length].iter().all(|x| x.is_finite())
                && g.amplitude >= 0.0
                && g.length > 0.0;
            if !ok {
                return Err(Error::Config("gust needs amplitude >= 0 and length > 0".into()));
            }
        }
        if let Some(t) = &self.turbulence {
            let ok = t.sigma.iter().all(|s| s.is_finite() && *s >= 0.0)
                && t.length.iter().all(|l| l.is_finite() && *l > 0.0);
            if !ok {
                return Err(Error::Config("turbulence needs sigma >= 0 and length > 0".into()));
            }
        }
        let n = self.sensor_noise;
        if !(n.gyro >= 0.0 && n.accel >= 0.0 && n.gyro.is_finite() && n.accel.is_finite()) {
            return Err(Error::Config("sensor noise must be non-negative".into()));
        }
        let i = &self.initial;
        if !i
            .velocity
            .iter()
            .chain(&i.rates)
            .chain(&i.attitude_deg)
            .all(|x| x.is_finite())
        {
            return Err(Error::Config("initial condition must be finite".into()));
        }
        if i.attitude_deg[1].abs() >= 89.0 {
            return Err(Error::Config("initial pitch must stay below 89 deg".into()));
        }
        Ok(())
    }

    pub fn plant_params(&self) -> Result<AirshipParams> {
        let mut p = scaled(&self.plant, &self.plant_scale)?.to_params()?;
        p.damping.enabled = self.aero_damping;
        Ok(p)
    }

    /// Parameters the controller assumes; never includes damping.
    pub fn controller_params(&self) -> Result<AirshipParams> {
        let base = self.controller_params.as_ref().unwrap_or(&self.plant);
        scaled(base, &self.controller_scale)?.to_params()
    }

    /// Outer command in force at time `t` (zero before the first entry).
    pub fn command_at(&self, t: f64) -> OuterCommands {
        self.schedule
            .iter()
            .rev()
            .find(|e| e.t <= t)
            .map(|e| e.commands())
            .unwrap_or_default()
    }

    pub fn initial_state(&self) -> crate::dynamics::RigidState {
        let i = &self.initial;
        crate::dynamics::RigidState {
            velocity: Vec3::from(i.velocity),
            rates: Vec3::from(i.rates),
            attitude: Vec3::from(i.attitude_deg.map(f64::to_radians)),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
