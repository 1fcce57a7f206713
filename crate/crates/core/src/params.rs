//! Physical parameters of the airship.
//!
//! [`ParamsConfig`] is the on-disk form (TOML, angles in degrees, derived
//! quantities optional). [`AirshipParams`] is the resolved runtime form in SI
//! units with radians.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::mass::{added_mass_factors, shell_inertia};
use crate::math::{Mat3, Vec3};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorConfig {
    pub position: [f64; 3],
    pub sigma: f64,
    pub k_t: f64,
    pub k_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinsConfig {
    pub s_ref: f64,
    pub l_ref: f64,
    pub c_l_eta: f64,
    pub c_m_eta: f64,
    pub varphi_deg: [f64; 3],
}

/// Limits of one actuator class. Tilt and surface values are in degrees in
/// the file and radians at runtime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelLimits {
    pub min: f64,
    pub max: f64,
    pub rate_min: f64,
    pub rate_max: f64,
    pub bandwidth: f64,
}

impl ChannelLimits {
    fn to_radians(self) -> Self {
        Self {
            min: self.min.to_radians(),
            max: self.max.to_radians(),
            rate_min: self.rate_min.to_radians(),
            rate_max: self.rate_max.to_radians(),
            bandwidth: self.bandwidth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    /// Rotor speed in rad/s.
    pub rotor: ChannelLimits,
    /// Tilt angle in degrees.
    pub tilt: ChannelLimits,
    /// Control-surface deflection in degrees.
    pub surface: ChannelLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingConfig {
    /// Linear drag on the air-relative body velocity, N per m/s.
    pub force: [f64; 3],
    /// Linear damping on the body rates, N m per rad/s.
    pub moment: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    /// Semi-axes `[a, b]` of the prolate ellipsoidal hull, m.
    pub semi_axes: [f64; 2],
    pub rho_air: f64,
    pub rho_helium: f64,
    pub g: f64,
    pub hull_volume: Option<f64>,
    pub helium_volume: Option<f64>,
    /// Structural mass excluding lifting gas. Derived from `heaviness` when absent.
    pub mass: Option<f64>,
    /// Excess weight as a fraction of the displaced air weight.
    pub heaviness: f64,
    pub r_cg: [f64; 3],
    /// Rigid-body inertia about the reference point, row major.
    pub inertia: Option<[[f64; 3]; 3]>,
    pub virtual_mass: Option<[f64; 3]>,
    pub virtual_inertia: Option<[f64; 3]>,
    pub rotors: [RotorConfig; 4],
    pub fins: FinsConfig,
    pub limits: LimitsConfig,
    pub damping: DampingConfig,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let rotor = |x: f64, y: f64, z: f64| RotorConfig {
            position: [x, y, z],
            sigma: 1.0,
            k_t: 5e-4,
            k_n: 1.7e-5,
        };
        Self {
            semi_axes: [8.0, 1.6],
            rho_air: 1.225,
            rho_helium: 0.169,
            g: 9.81,
            hull_volume: None,
            helium_volume: None,
            mass: None,
            heaviness: 0.02,
            r_cg: [0.0, 0.0, 1.0],
            inertia: None,
            virtual_mass: None,
            virtual_inertia: None,
            rotors: [
                rotor(4.0, 1.338, 1.49),
                rotor(-4.0, 1.338, 1.38),
                rotor(-4.0, -1.338, 1.38),
                rotor(4.0, -1.338, 1.49),
            ],
            fins: FinsConfig {
                s_ref: 17.93,
                l_ref: 14.53,
                c_l_eta: -2.61e-3,
                c_m_eta: -1.28e-2,
                varphi_deg: [30.0, 150.0, 270.0],
            },
            limits: LimitsConfig {
                rotor: ChannelLimits {
                    min: 0.0,
                    max: 340.0,
                    rate_min: -135.0,
                    rate_max: 156.0,
                    bandwidth: 20.0,
                },
                tilt: ChannelLimits {
                    min: -75.0,
                    max: 255.0,
                    rate_min: -45.0,
                    rate_max: 45.0,
                    bandwidth: 5.0,
                },
                surface: ChannelLimits {
                    min: -40.0,
                    max: 40.0,
                    rate_min: -300.0,
                    rate_max: 300.0,
                    bandwidth: 25.0,
                },
            },
            damping: DampingConfig {
                force: [4.0, 80.0, 80.0],
                moment: [150.0, 600.0, 600.0],
            },
        }
    }
}

impl ParamsConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Fills in every derived quantity so the config is fully explicit.
    pub fn resolved(&self) -> Result<Self> {
        let p = self.to_params()?;
        let mut c = self.clone();
        c.hull_volume = Some(p.hull_volume);
        c.helium_volume = Some(p.helium_volume);
        c.mass = Some(p.mass);
        let j = p.inertia;
        c.inertia = Some([
            [j[(0, 0)], j[(0, 1)], j[(0, 2)]],
            [j[(1, 0)], j[(1, 1)], j[(1, 2)]],
            [j[(2, 0)], j[(2, 1)], j[(2, 2)]],
        ]);
        c.virtual_mass = Some(diag3(&p.virtual_mass));
        c.virtual_inertia = Some(diag3(&p.virtual_inertia));
        Ok(c)
    }

    pub fn to_params(&self) -> Result<AirshipParams> {
        let [a, b] = self.semi_axes;
        let (k1, k2, k3) = added_mass_factors(a, b)?;
        let positive = [
            ("rho_air", self.rho_air),
            ("g", self.g),
            ("fins.s_ref", self.fins.s_ref),
            ("fins.l_ref", self.fins.l_ref),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.rho_helium.is_finite() && self.rho_helium >= 0.0) {
            return Err(Error::Config("rho_helium must be non-negative".into()));
        }
        let hull_volume = self.hull_volume.unwrap_or(4.0 / 3.0 * PI * a * b * b);
        let helium_volume = self.helium_volume.unwrap_or(hull_volume);
        if !(hull_volume > 0.0 && helium_volume >= 0.0) {
            return Err(Error::Config("volumes must be positive".into()));
        }
        let displaced = self.rho_air * hull_volume;
        let mass = self
            .mass
            .unwrap_or((1.0 + self.heaviness) * displaced - self.rho_helium * helium_volume);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {mass}")));
        }
        let r_cg = Vec3::from(self.r_cg);
        let inertia = match self.inertia {
            Some(rows) => Mat3::from_fn(|i, j| rows[i][j]),
            None => {
                let jg = shell_inertia(a, b, mass);
                jg + (Mat3::identity() * r_cg.norm_squared() - r_cg * r_cg.transpose()) * mass
            }
        };
        let virtual_mass = match self.virtual_mass {
            Some(d) => Mat3::from_diagonal(&Vector3::from(d)),
            None => Mat3::from_diagonal(&Vector3::new(k1, k2, k2)) * displaced,
        };
        let virtual_inertia = match self.virtual_inertia {
            Some(d) => Mat3::from_diagonal(&Vector3::from(d)),
            None => {
                let jt = k3 * displaced * (a * a + b * b) / 5.0;
                Mat3::from_diagonal(&Vector3::new(0.0, jt, jt))
            }
        };
        for (i, r) in self.rotors.iter().enumerate() {
            if !(r.k_t > 0.0 && r.k_n >= 0.0 && r.sigma.abs() == 1.0) {
                return Err(Error::Config(format!(
                    "rotor {i}: k_t must be positive, k_n non-negative and sigma +-1"
                )));
            }
        }
        let l = &self.limits;
        for (name, c) in [("rotor", l.rotor), ("tilt", l.tilt), ("surface", l.surface)] {
            let ok = c.min < c.max && c.rate_min < 0.0 && c.rate_max > 0.0 && c.bandwidth > 0.0;
            let finite = [c.min, c.max, c.rate_min, c.rate_max, c.bandwidth]
                .iter()
                .all(|v| v.is_finite());
            if !(ok && finite) {
                return Err(Error::Config(format!("limits.{name} are inconsistent")));
            }
        }
        let all = inertia
            .iter()
            .chain(virtual_mass.iter())
            .chain(virtual_inertia.iter())
            .chain(r_cg.iter());
        if !all.clone().all(|v| v.is_finite()) {
            return Err(Error::Config("non-finite mass properties".into()));
        }

        Ok(AirshipParams {
            semi_axes: (a, b),
            rho_air: self.rho_air,
            rho_helium: self.rho_helium,
            g: self.g,
            hull_volume,
            helium_volume,
            mass,
            r_cg,
            inertia,
            virtual_mass,
            virtual_inertia,
            rotors: std::array::from_fn(|i| {
                let r = &self.rotors[i];
                RotorParams {
                    position: Vec3::from(r.position),
                    sigma: r.sigma,
                    k_t: r.k_t,
                    k_n: r.k_n,
                }
            }),
            fins: FinParams {
                s_ref: self.fins.s_ref,
                l_ref: self.fins.l_ref,
                c_l_eta: self.fins.c_l_eta,
                c_m_eta: self.fins.c_m_eta,
                varphi: self.fins.varphi_deg.map(f64::to_radians),
            },
            limits: ActuatorLimits {
                rotor_speed: l.rotor,
                tilt: l.tilt.to_radians(),
                surface: l.surface.to_radians(),
            },
            damping: AeroDamping {
                enabled: false,
                force: Vec3::from(self.damping.force),
                moment: Vec3::from(self.damping.moment),
            },
        })
    }
}

fn diag3(m: &Mat3) -> [f64; 3] {
    [m[(0, 0)], m[(1, 1)], m[(2, 2)]]
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotorParams {
    /// Position relative to the reference point in body axes, m.
    pub position: Vec3,
    /// Rotation direction, +1 or -1.
    pub sigma: f64,
    pub k_t: f64,
    pub k_n: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinParams {
    pub s_ref: f64,
    pub l_ref: f64,
    pub c_l_eta: f64,
    pub c_m_eta: f64,
    /// Fin mounting angles, rad.
    pub varphi: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActuatorLimits {
    pub rotor_speed: ChannelLimits,
    pub tilt: ChannelLimits,
    pub surface: ChannelLimits,
}

/// Synthetic linear aerodynamic damping, used only when enabled.
#[derive(Clone, Debug, PartialEq)]
pub struct AeroDamping {
    pub enabled: bool,
    pub force: Vec3,
    pub moment: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AirshipParams {
    pub semi_axes: (f64, f64),
    pub rho_air: f64,
    pub rho_helium: f64,
    pub g: f64,
    pub hull_volume: f64,
    pub helium_volume: f64,
    pub mass: f64,
    /// Centre of gravity relative to the reference point (centre of buoyancy).
    pub r_cg: Vec3,
    /// Rigid-body inertia about the reference point.
    pub inertia: Mat3,
    pub virtual_mass: Mat3,
    pub virtual_inertia: Mat3,
    pub rotors: [RotorParams; 4],
    pub fins: FinParams,
    pub limits: ActuatorLimits,
    pub damping: AeroDamping,
}

impl Default for AirshipParams {
    fn default() -> Self {
        ParamsConfig::default()
            .to_params()
            .expect("nominal parameters are valid")
    }
}

impl AirshipParams {
    /// Mass of the displaced air.
    pub fn displaced_mass(&self) -> f64 {
        self.rho_air * self.hull_volume
    }

    /// Inertia of the displaced air (solid ellipsoid) about the centre of buoyancy.
    pub fn displaced_inertia(&self) -> Mat3 {
        let (a, b) = self.semi_axes;
        let m = self.displaced_mass();
        Mat3::from_diagonal(&Vector3::new(2.0 * b * b, a * a + b * b, a * a + b * b)) * (m / 5.0)
    }

    /// Net buoyancy force magnitude: displaced air weight minus lifting-gas weight.
    pub fn net_buoyancy(&self) -> f64 {
        self.g * self.helium_volume * (self.rho_air - self.rho_helium)
    }

    pub fn total_mass_matrix(&self) -> Mat3 {
        Mat3::identity() * self.mass + self.virtual_mass
    }

    pub fn total_inertia(&self) -> Mat3 {
        self.inertia + self.virtual_inertia
    }

    /// Rotors in front of the reference point.
    pub fn is_front_rotor(&self, i: usize) -> bool {
        self.rotors[i].position.x > 0.0
    }
}
