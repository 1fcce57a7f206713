//! Incremental inversion inner loop: pseudo-control command, reference
//! models, error controller and hedging.

use crate::dynamics::wrench::{buoyancy_wrench, gravity_wrench, select_nu};
use crate::dynamics::{Airship, RigidState};
use crate::math::{Mat5, Vec3, Vec5, Vec6};
use crate::{Error, Result};

/// Indices of the controlled accelerations `[u, w, p, q, r]` within `[u, v, w, p, q, r]`.
const REDUCED: [usize; 5] = [0, 2, 3, 4, 5];

/// Desired generalized force `M_bar a - W_static - bias` before the surface share.
pub fn desired_wrench(model: &Airship, v_dot: &Vec3, omega_dot: &Vec3, s: &RigidState) -> Vec6 {
    let p = model.params();
    let a = Vec6::new(v_dot.x, v_dot.y, v_dot.z, omega_dot.x, omega_dot.y, omega_dot.z);
    let stat = buoyancy_wrench(p, &s.attitude) + gravity_wrench(p, &s.attitude);
    model.mass_matrix() * a - stat.to_vec6() - model.bias_simple(&s.velocity, &s.rates)
}

/// Pseudo-control command for the demanded accelerations, net of the
/// moment `m_f` already provided by the surfaces.
pub fn nu_cmd_from_accel(
    model: &Airship,
    v_dot: &Vec3,
    omega_dot: &Vec3,
    s: &RigidState,
    m_f: &Vec3,
) -> Vec5 {
    let mut w = desired_wrench(model, v_dot, omega_dot, s);
    for i in 0..3 {
        w[3 + i] -= m_f[i];
    }
    select_nu(&w)
}

/// Lateral acceleration consistent with zero propulsive side force, given the
/// other five demanded accelerations.
pub fn lateral_accel(model: &Airship, s: &RigidState, reduced: &Vec5) -> f64 {
    let p = model.params();
    let m = model.mass_matrix();
    let stat = buoyancy_wrench(p, &s.attitude) + gravity_wrench(p, &s.attitude);
    let rhs = stat.force.y + model.bias_simple(&s.velocity, &s.rates)[1];
    let coupled: f64 = REDUCED
        .iter()
        .zip(reduced.iter())
        .map(|(&j, a)| m[(1, j)] * a)
        .sum();
    (rhs - coupled) / m[(1, 1)]
}

/// Maps `[u, w, p, q, r]` accelerations to `[L, M, N, X, Z]` through the mass matrix.
pub fn reduced_mass_to_nu(model: &Airship) -> Mat5 {
    let m = model.mass_matrix();
    // Row order of the pseudo control within [X, Y, Z, L, M, N].
    let rows = [3, 4, 5, 0, 2];
    Mat5::from_fn(|i, j| m[(rows[i], REDUCED[j])])
}

/// Error-controller contribution to the pseudo-control rate.
pub fn nu_error_controller(model: &Airship, accel_des_filtered: &Vec5, accel_meas: &Vec5, k_ec: f64) -> Vec5 {
    reduced_mass_to_nu(model) * (accel_des_filtered - accel_meas) * k_ec
}

/// Converts a pseudo-control rate hedge into jerk hedges `[u, w, p, q, r]`.
pub fn hedge_to_jerk(model: &Airship, nu_dot_hedge: &Vec5) -> Result<Vec5> {
    let inv = reduced_mass_to_nu(model)
        .try_inverse()
        .ok_or(Error::SingularMatrix("reduced generalized mass matrix"))?;
    Ok(inv * nu_dot_hedge)
}

/// First-order pseudo-control reference model with optional hedging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuReference {
    pub nu_ref: Vec5,
    pub k_nu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuRefStep {
    pub nu_ref: Vec5,
    /// Unhedged reference rate `K (nu_cmd - nu_ref)`.
    pub nu_dot_ref: Vec5,
    pub nu_dot_hedge: Vec5,
}

impl NuReference {
    pub fn hedge(&self, nu_ach: &Vec5) -> Vec5 {
        (self.nu_ref - nu_ach) * self.k_nu
    }

    /// Advances the reference one step; `hedge` is subtracted from its rate.
    pub fn step(&mut self, nu_cmd: &Vec5, hedge: &Vec5, dt: f64) -> NuRefStep {
        let nu_dot_ref = (nu_cmd - self.nu_ref) * self.k_nu;
        self.nu_ref += (nu_dot_ref - hedge) * dt;
        NuRefStep {
            nu_ref: self.nu_ref,
            nu_dot_ref,
            nu_dot_hedge: *hedge,
        }
    }
}

/// Critically damped second-order reference for one velocity or rate channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderRef {
    pub x: f64,
    pub x_dot: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefOutput {
    pub x_ddot: f64,
    /// Acceleration command with feedforward through the pseudo-control lag.
    pub command: f64,
}

impl SecondOrderRef {
    pub fn critically_damped(omega0: f64, x0: f64) -> Self {
        Self {
            x: x0,
            x_dot: 0.0,
            k1: 0.5 * omega0,
            k2: 2.0 * omega0,
        }
    }

    /// One explicit-Euler step. `k_nu` is the pseudo-control reference gain
    /// whose lag the feedforward compensates; `correction` is the error
    /// controller output added to the command.
    pub fn step(&mut self, cmd: f64, hedge: f64, k_nu: f64, correction: f64, dt: f64) -> RefOutput {
        let x_ddot = self.k2 * (self.k1 * (cmd - self.x) - self.x_dot) - hedge;
        let command = self.x_dot + x_ddot / k_nu + correction;
        self.x += self.x_dot * dt;
        self.x_dot += x_ddot * dt;
        RefOutput { x_ddot, command }
    }
}

/// Incremental inversion command: position plus the increment the
/// first-order actuator needs to start moving at `udot`.
pub fn eindi_command(u: f64, udot: f64, bandwidth: f64) -> f64 {
    u + udot / bandwidth
}
