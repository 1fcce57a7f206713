//! First-order actuators with rate and position limits.

use crate::params::{ActuatorLimits, ChannelLimits};

/// Rotor speeds (rad/s), tilt angles (rad) and surface deflections (rad).
/// Used both for actuator positions and for commands.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ActuatorSuite {
    pub omega: [f64; 4],
    pub gamma: [f64; 4],
    pub eta: [f64; 3],
}

impl ActuatorSuite {
    /// Rotor part as `[omega_1..4, gamma_1..4]`.
    pub fn rotor_vector(&self) -> [f64; 8] {
        let mut u = [0.0; 8];
        u[..4].copy_from_slice(&self.omega);
        u[4..].copy_from_slice(&self.gamma);
        u
    }

    pub fn set_rotor_vector(&mut self, u: &[f64; 8]) {
        self.omega.copy_from_slice(&u[..4]);
        self.gamma.copy_from_slice(&u[4..]);
    }

    pub fn is_finite(&self) -> bool {
        self.rotor_vector()
            .iter()
            .chain(self.eta.iter())
            .all(|x| x.is_finite())
    }
}

/// One discrete update of a first-order channel: demanded rate limited,
/// integrated, then clamped to the absolute range.
pub fn channel_step(x: f64, cmd: f64, lim: &ChannelLimits, dt: f64) -> f64 {
    let rate = (lim.bandwidth * (cmd - x)).clamp(lim.rate_min, lim.rate_max);
    (x + rate * dt).clamp(lim.min, lim.max)
}

pub fn actuator_step(
    suite: &ActuatorSuite,
    cmd: &ActuatorSuite,
    limits: &ActuatorLimits,
    dt: f64,
) -> ActuatorSuite {
    let mut next = *suite;
    for i in 0..4 {
        next.omega[i] = channel_step(suite.omega[i], cmd.omega[i], &limits.rotor_speed, dt);
        next.gamma[i] = channel_step(suite.gamma[i], cmd.gamma[i], &limits.tilt, dt);
    }
    for i in 0..3 {
        next.eta[i] = channel_step(suite.eta[i], cmd.eta[i], &limits.surface, dt);
    }
    next
}
