//! Angular-acceleration estimation and accelerometer correction.

use crate::dynamics::{Airship, RigidState, Wrench};
use crate::math::Vec3;
use crate::Result;

/// First-order section `(b1 s + b0) / (tau s + 1)` discretized with the
/// bilinear transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TustinFirstOrder {
    c_now: f64,
    c_prev: f64,
    a_prev: f64,
    x_prev: f64,
    y_prev: f64,
}

impl TustinFirstOrder {
    pub fn new(b1: f64, b0: f64, tau: f64, dt: f64) -> Self {
        let k = 2.0 / dt;
        let den = tau * k + 1.0;
        Self {
            c_now: (b1 * k + b0) / den,
            c_prev: (b0 - b1 * k) / den,
            a_prev: (1.0 - tau * k) / den,
            x_prev: 0.0,
            y_prev: 0.0,
        }
    }

    pub fn derivative(tau: f64, dt: f64) -> Self {
        Self::new(1.0, 0.0, tau, dt)
    }

    pub fn lowpass(tau: f64, dt: f64) -> Self {
        Self::new(0.0, 1.0, tau, dt)
    }

    pub fn highpass(tau: f64, dt: f64) -> Self {
        Self::new(tau, 0.0, tau, dt)
    }

    /// Sets the internal state to steady state for a constant input `x`.
    pub fn reset_to(&mut self, x: f64, y: f64) {
        self.x_prev = x;
        self.y_prev = y;
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.c_now * x + self.c_prev * self.x_prev - self.a_prev * self.y_prev;
        self.x_prev = x;
        self.y_prev = y;
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig {
    pub tau_derivative: f64,
    pub tau_complementary: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            tau_derivative: 1.0 / 25.0,
            tau_complementary: 1.0 / 15.0,
        }
    }
}

/// Per-axis filter states for the rate derivative and the complementary pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState {
    derivative: [TustinFirstOrder; 3],
    lowpass: [TustinFirstOrder; 3],
    highpass: [TustinFirstOrder; 3],
}

impl FilterState {
    pub fn new(cfg: &FilterConfig, dt: f64) -> Self {
        Self {
            derivative: [TustinFirstOrder::derivative(cfg.tau_derivative, dt); 3],
            lowpass: [TustinFirstOrder::lowpass(cfg.tau_complementary, dt); 3],
            highpass: [TustinFirstOrder::highpass(cfg.tau_complementary, dt); 3],
        }
    }

    /// Initializes for a constant rate `omega` and zero angular acceleration.
    pub fn reset_steady(&mut self, omega: &Vec3) {
        for i in 0..3 {
            self.derivative[i].reset_to(omega[i], 0.0);
            self.lowpass[i].reset_to(0.0, 0.0);
            self.highpass[i].reset_to(0.0, 0.0);
        }
    }

    /// Filtered derivative of the measured rates.
    pub fn dirty_derivative(&mut self, omega_meas: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| self.derivative[i].step(omega_meas[i]))
    }

    /// Blend of the low-passed measured and high-passed model accelerations.
    pub fn complementary(&mut self, meas: &Vec3, model: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| self.lowpass[i].step(meas[i]) + self.highpass[i].step(model[i]))
    }
}

/// Angular acceleration predicted by the still-air model.
pub fn model_omega_dot(model: &Airship, s: &RigidState, wrench: &Wrench) -> Result<Vec3> {
    Ok(model.state_derivative_simple(s, wrench)?.ang_accel)
}

/// Acceleration at the reference point from the specific force measured at the CG.
pub fn accel_at_reference(
    f_g: &Vec3,
    g_body: &Vec3,
    omega: &Vec3,
    omega_dot: &Vec3,
    v_g: &Vec3,
    r_cg: &Vec3,
) -> Vec3 {
    f_g + g_body - omega_dot.cross(r_cg) - omega.cross(v_g)
}
