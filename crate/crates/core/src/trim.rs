//! Steady-flight actuator trim.

use crate::actuators::ActuatorSuite;
use crate::allocation::{control_effectiveness, pseudoinverse};
use crate::dynamics::wrench::{damping_wrench, propulsion_nu, select_nu};
use crate::dynamics::{Airship, RigidState};
use crate::inner_loop::desired_wrench;
use crate::math::{Mat8, Vec3, Vec5, Vec8};
use crate::{Error, Result};

/// Pseudo control that holds `s` unaccelerated in calm air, including damping.
pub fn trim_nu(plant: &Airship, s: &RigidState) -> Vec5 {
    let w = desired_wrench(plant, &Vec3::zeros(), &Vec3::zeros(), s)
        - damping_wrench(plant.params(), &s.velocity, &s.rates).to_vec6();
    select_nu(&w)
}

/// Solves for rotor speeds and tilts producing `nu_target`, starting from the
/// given tilts. Gauss-Newton steps are length-limited and carry a nullspace
/// pull that keeps the tilts near `gamma0`.
const PULL_ITERATIONS: usize = 200;

pub fn trim_actuators(plant: &Airship, nu_target: &Vec5, gamma0: &[f64; 4]) -> Result<ActuatorSuite> {
    let p = plant.params();
    let mut omega = [120.0; 4];
    let mut gamma = *gamma0;
    for iter in 0..400 {
        let r = nu_target - propulsion_nu(p, &omega, &gamma);
        if iter >= PULL_ITERATIONS && r.norm() < 1e-10 * (1.0 + nu_target.norm()) {
            let suite = ActuatorSuite {
                omega,
                gamma,
                eta: [0.0; 3],
            };
            let lim = &p.limits;
            let inside = omega
                .iter()
                .all(|o| *o >= lim.rotor_speed.min && *o <= lim.rotor_speed.max)
                && gamma.iter().all(|g| *g >= lim.tilt.min && *g <= lim.tilt.max);
            if !inside {
                return Err(Error::Config("trim lies outside the actuator limits".into()));
            }
            return Ok(suite);
        }
        let b = control_effectiveness(p, &omega, &gamma);
        let pinv = pseudoinverse(&b)?;
        let mut pull = Vec8::zeros();
        for i in (0..4).filter(|_| iter < PULL_ITERATIONS) {
            pull[i + 4] = gamma0[i] - gamma[i];
        }
        let mut du = pinv * r + (Mat8::identity() - pinv * b) * pull;
        let scale = (0..4)
            .map(|i| (du[i].abs() / 40.0).max(du[i + 4].abs() / 0.2))
            .fold(1.0, f64::max);
        du /= scale;
        for i in 0..4 {
            omega[i] = (omega[i] + du[i]).max(1.0);
            gamma[i] += du[i + 4];
        }
    }
    Err(Error::Config("trim did not converge".into()))
}

pub fn trim(plant: &Airship, s: &RigidState, gamma0: &[f64; 4]) -> Result<ActuatorSuite> {
    trim_actuators(plant, &trim_nu(plant, s), gamma0)
}
