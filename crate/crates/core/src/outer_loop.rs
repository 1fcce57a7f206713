//! Pilot command mapping and attitude generation.

use serde::{Deserialize, Serialize};

use crate::dynamics::kinematics::{body_rates_from_euler, rot_y};
use crate::math::Vec3;
use crate::Result;

/// Carrier-frame velocity and turn-rate commands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OuterCommands {
    /// Forward velocity, m/s.
    pub u_c: f64,
    /// Vertical velocity, positive down, m/s.
    pub w_c: f64,
    /// Turn rate, rad/s.
    pub psi_dot: f64,
}

fn piecewise(x: f64, neg: f64, pos: f64) -> f64 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
    if x >= 0.0 {
        x * pos
    } else {
        x * neg.abs()
    }
}

/// Maps stick deflections in `[-1, 1]` to outer-loop commands.
pub fn stick_to_commands(forward: f64, heave: f64, yaw: f64) -> OuterCommands {
    OuterCommands {
        u_c: piecewise(forward, 3.0, 10.0),
        w_c: piecewise(heave, 3.0, 1.0),
        psi_dot: piecewise(yaw, 10f64.to_radians(), 10f64.to_radians()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlightPathConfig {
    pub max_pitch: f64,
    /// Forward speed below which the pitch command fades to zero.
    pub fade_speed: f64,
}

impl Default for FlightPathConfig {
    fn default() -> Self {
        Self {
            max_pitch: 30f64.to_radians(),
            fade_speed: 0.1,
        }
    }
}

/// Pitch command aligning the body x-axis with the commanded flight path,
/// and the matching body-axis velocity command.
pub fn flight_path(u_c: f64, w_c: f64, cfg: &FlightPathConfig) -> (f64, Vec3) {
    let raw = if u_c >= 0.0 {
        (-w_c).atan2(u_c)
    } else {
        w_c.atan2(-u_c)
    };
    let fade = (u_c.abs() / cfg.fade_speed).min(1.0);
    let theta = raw.clamp(-cfg.max_pitch, cfg.max_pitch) * fade;
    (theta, rot_y(theta) * Vec3::new(u_c, 0.0, w_c))
}

/// Roll angle of a steady coordinated turn.
pub fn turn_roll_angle(u_c: f64, psi_dot: f64, g: f64) -> f64 {
    u_c * psi_dot / g
}

/// Proportional attitude control; the heading rate passes through.
pub fn attitude_rates_cmd(
    phi_cmd: f64,
    theta_cmd: f64,
    psi_dot_cmd: f64,
    att: &Vec3,
    k_phi: f64,
    k_theta: f64,
) -> Vec3 {
    Vec3::new(
        k_phi * (phi_cmd - att.x),
        k_theta * (theta_cmd - att.y),
        psi_dot_cmd,
    )
}

pub fn euler_to_body_rates(att: &Vec3, euler_dot: &Vec3) -> Result<Vec3> {
    body_rates_from_euler(att, euler_dot)
}

/// Turn-rate correction from the lateral load factor; only active without a
/// pilot turn command and above `u_floor`.
pub fn wind_compensation(n_y: f64, u_c: f64, pilot_psi_dot: f64, k_ny: f64, g: f64, u_floor: f64) -> f64 {
    if pilot_psi_dot != 0.0 || u_c < u_floor {
        return 0.0;
    }
    k_ny * g / u_c * n_y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::kinematics::euler_rates;
    use proptest::prelude::*;

    #[test]
    fn stick_mapping() {
        assert_eq!(stick_to_commands(0.0, 0.0, 0.0), OuterCommands::default());
        assert_eq!(stick_to_commands(1.0, 0.0, 0.0).u_c, 10.0);
        assert_eq!(stick_to_commands(-1.0, 0.0, 0.0).u_c, -3.0);
        assert_eq!(stick_to_commands(0.0, -1.0, 0.0).w_c, -3.0);
        assert_eq!(stick_to_commands(0.0, 2.0, 0.0).w_c, 1.0);
        assert!((stick_to_commands(0.0, 0.0, -0.5).psi_dot + 5f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn flight_path_examples() {
        let cfg = FlightPathConfig::default();
        let (th, v) = flight_path(10.0, -3.0, &cfg);
        assert!((th.to_degrees() - 16.699).abs() < 1e-3);
        assert!((v - Vec3::new(109f64.sqrt(), 0.0, 0.0)).norm() < 1e-12);
        let (th, v) = flight_path(4.0, 0.0, &cfg);
        assert_eq!((th, v), (0.0, Vec3::new(4.0, 0.0, 0.0)));
        let (th, v) = flight_path(3.0, 1.0, &cfg);
        assert!((th - (-1.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!((v.norm() - 10f64.sqrt()).abs() < 1e-12 && v.z.abs() < 1e-12);
        assert_eq!(flight_path(0.0, 0.0, &cfg), (0.0, Vec3::zeros()));
        // Backward descent pitches by the same geometry.
        let (th, v) = flight_path(-3.0, 1.0, &cfg);
        assert!((th - (1.0f64 / 3.0).atan()).abs() < 1e-15 && v.z.abs() < 1e-12);
    }

    #[test]
    fn turn_roll_examples() {
        assert_eq!(turn_roll_angle(10.0, 0.0, 9.81), 0.0);
        let phi = turn_roll_angle(10.0, 10f64.to_radians(), 9.81);
        assert!((phi - 0.17791).abs() < 1e-5);
        assert!(turn_roll_angle(10.0, -0.1, 9.81) < 0.0);
    }

    #[test]
    fn attitude_law() {
        let att = Vec3::new(0.1, 0.2, 0.3);
        assert_eq!(attitude_rates_cmd(0.1, 0.2, 0.0, &att, 0.5, 0.5), Vec3::zeros());
        let r = attitude_rates_cmd(0.0, 10f64.to_radians(), 0.04, &Vec3::zeros(), 0.5, 0.5);
        assert!((r.y - 5f64.to_radians()).abs() < 1e-15);
        assert_eq!(r.z, 0.04);
        let w = euler_to_body_rates(&Vec3::zeros(), &Vec3::new(0.1, 0.2, 0.3)).unwrap();
        assert_eq!(w, Vec3::new(0.1, 0.2, 0.3));
    }

    #[test]
    fn wind_compensation_cases() {
        assert_eq!(wind_compensation(0.0, 10.0, 0.0, 1.0, 9.81, 1.0), 0.0);
        assert_eq!(wind_compensation(0.3, 10.0, 0.1, 1.0, 9.81, 1.0), 0.0);
        assert_eq!(wind_compensation(0.3, 0.5, 0.0, 1.0, 9.81, 1.0), 0.0);
        assert!((wind_compensation(0.05, 10.0, 0.0, 1.0, 9.81, 1.0) - 0.04905).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn flight_path_has_no_body_heave(u in 0.02f64..10.0, w in -3.0f64..1.0) {
            prop_assume!((w / u).abs() < 1.5f64.tan());
            let cfg = FlightPathConfig { max_pitch: 1.5, fade_speed: 0.01 };
            let (_, v) = flight_path(u, w, &cfg);
            prop_assert!(v.z.abs() < 1e-12);
        }

        #[test]
        fn body_rate_inversion_is_identity(
            phi in -1.0f64..1.0, th in -1.4f64..1.4, pd in -1.0f64..1.0, td in -1.0f64..1.0, yd in -1.0f64..1.0,
        ) {
            let att = Vec3::new(phi, th, 0.0);
            let ed = Vec3::new(pd, td, yd);
            let back = euler_rates(&att, &euler_to_body_rates(&att, &ed).unwrap()).unwrap();
            prop_assert!((back - ed).norm() < 1e-12 / th.cos());
        }
    }
}
