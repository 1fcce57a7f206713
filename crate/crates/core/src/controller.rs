//! Complete flight controller: outer loop, incremental inversion inner loop
//! and allocation, stepped at a fixed rate.

use serde::{Deserialize, Serialize};

use crate::actuators::ActuatorSuite;
use crate::allocation::{
    control_effectiveness, erp_alloc, fit_within_bounds, nullspace_rates, rate_bounds, surface_alloc,
    tilt_targets, NullspaceConfig, SurfaceConfig,
};
use crate::dynamics::kinematics::{body_from_ned, carrier_from_body};
use crate::dynamics::wrench::{
    buoyancy_wrench, gravity_wrench, propulsion_nu, propulsion_wrench, select_nu, surface_moment, Wrench,
};
use crate::dynamics::{Airship, RigidState};
use crate::estimation::{accel_at_reference, model_omega_dot, FilterConfig, FilterState};
use crate::inner_loop::{
    desired_wrench, eindi_command, hedge_to_jerk, lateral_accel, nu_error_controller, NuReference,
    SecondOrderRef,
};
use crate::math::{angle_between, Vec3, Vec5, Vec8};
use crate::outer_loop::{
    attitude_rates_cmd, euler_to_body_rates, flight_path, turn_roll_angle, wind_compensation,
    FlightPathConfig, OuterCommands,
};
use crate::params::{ActuatorLimits, AirshipParams};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub rate_hz: f64,
    pub k_nu: f64,
    pub k_nu_ec: f64,
    /// Natural frequency of the body-velocity reference models, rad/s.
    pub omega0_velocity: f64,
    /// Natural frequency of the body-rate reference models, rad/s.
    pub omega0_rate: f64,
    pub k_ec_velocity: f64,
    pub k_ec_rate: f64,
    pub k_phi: f64,
    pub k_theta: f64,
    pub k_ny: f64,
    pub wind_compensation_floor: f64,
    pub max_pitch_deg: f64,
    pub pitch_fade_speed: f64,
    pub tau_derivative: f64,
    pub tau_complementary: f64,
    pub surface_activation_speed: f64,
    pub surface_limit_deg: f64,
    pub nullspace_gain_speed: f64,
    pub nullspace_gain_tilt: f64,
    /// Lowest rotor speed the allocation may command, rad/s. A stopped rotor
    /// has no control effectiveness and could not be spun up again.
    pub min_rotor_speed: f64,
    pub pch: bool,
    pub nullspace: bool,
    pub wind_compensation: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        let f = FilterConfig::default();
        let s = SurfaceConfig::default();
        let n = NullspaceConfig::default();
        Self {
            rate_hz: 100.0,
            k_nu: 5.0,
            k_nu_ec: 1.0,
            omega0_velocity: 0.8,
            omega0_rate: 2.0,
            k_ec_velocity: 0.5,
            k_ec_rate: 2.0,
            k_phi: 0.5,
            k_theta: 0.5,
            k_ny: 0.5,
            wind_compensation_floor: 1.0,
            max_pitch_deg: 30.0,
            pitch_fade_speed: 0.1,
            tau_derivative: f.tau_derivative,
            tau_complementary: f.tau_complementary,
            surface_activation_speed: s.activation_speed,
            surface_limit_deg: s.limit.to_degrees(),
            nullspace_gain_speed: n.gain_speed,
            nullspace_gain_tilt: n.gain_tilt,
            min_rotor_speed: 15.0,
            pch: true,
            nullspace: true,
            wind_compensation: true,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rate_hz", self.rate_hz),
            ("k_nu", self.k_nu),
            ("omega0_velocity", self.omega0_velocity),
            ("omega0_rate", self.omega0_rate),
            ("tau_derivative", self.tau_derivative),
            ("tau_complementary", self.tau_complementary),
            ("pitch_fade_speed", self.pitch_fade_speed),
            ("max_pitch_deg", self.max_pitch_deg),
            ("surface_limit_deg", self.surface_limit_deg),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("controller.{name} must be positive")));
            }
        }
        let non_negative = [
            ("k_nu_ec", self.k_nu_ec),
            ("k_ec_velocity", self.k_ec_velocity),
            ("k_ec_rate", self.k_ec_rate),
            ("k_phi", self.k_phi),
            ("k_theta", self.k_theta),
            ("k_ny", self.k_ny),
            ("wind_compensation_floor", self.wind_compensation_floor),
            ("surface_activation_speed", self.surface_activation_speed),
            ("nullspace_gain_speed", self.nullspace_gain_speed),
            ("nullspace_gain_tilt", self.nullspace_gain_tilt),
            ("min_rotor_speed", self.min_rotor_speed),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("controller.{name} must be non-negative")));
            }
        }
        if self.max_pitch_deg >= 89.0 {
            return Err(Error::Config(
                "controller.max_pitch_deg must stay below 89".into(),
            ));
        }
        Ok(())
    }
}

/// Sensor taps available to the controller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurements {
    pub state: RigidState,
    /// Specific force at the centre of gravity, body axes.
    pub specific_force: Vec3,
    pub actuators: ActuatorSuite,
    pub airspeed: f64,
}

/// Internal signals of one controller step, for logging.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub outer: OuterCommands,
    pub psi_dot_total: f64,
    pub phi_cmd: f64,
    pub theta_cmd: f64,
    pub velocity_cmd: [f64; 2],
    pub rate_cmd: Vec3,
    pub velocity_ref: [f64; 2],
    pub rate_ref: Vec3,
    pub accel_cmd: Vec5,
    pub accel_meas: Vec5,
    pub omega_dot_est: Vec3,
    pub nu_cmd: Vec5,
    pub nu_ref: Vec5,
    pub nu_ach: Vec5,
    pub nu_dot_ref: Vec5,
    pub nu_dot_ec: Vec5,
    pub nu_dot_hedge: Vec5,
    pub nu_dot_cmd: Vec5,
    /// `B udot` of the allocated rates including the nullspace share.
    pub nu_dot_ach: Vec5,
    /// `B udot` of the allocated rates without the nullspace share.
    pub nu_dot_ach_erp: Vec5,
    pub jerk_hedge: Vec5,
    pub alloc_c: f64,
    pub alloc_iterations: usize,
    pub alloc_saturated: [bool; 8],
    pub alloc_rank_deficient: bool,
    pub nullspace_scale: f64,
    pub surface_scale: f64,
    pub surface_moment: Vec3,
    pub angle: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlOutput {
    pub commands: ActuatorSuite,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug)]
pub struct Controller {
    cfg: ControllerConfig,
    model: Airship,
    limits: ActuatorLimits,
    front: [bool; 4],
    dt: f64,
    nu_ref: NuReference,
    vel_ref: [SecondOrderRef; 2],
    rate_ref: [SecondOrderRef; 3],
    accel_filtered: Vec5,
    /// Pseudo control added by the error controller so far.
    nu_ec_integral: Vec5,
    filters: FilterState,
}

impl Controller {
    /// `model` holds the controller's assumed parameters, including the
    /// actuator limits used for allocation.
    pub fn new(model: AirshipParams, cfg: ControllerConfig) -> Result<Self> {
        cfg.validate()?;
        let mut limits = model.limits;
        limits.rotor_speed.min = limits.rotor_speed.min.max(cfg.min_rotor_speed);
        let front = std::array::from_fn(|i| model.is_front_rotor(i));
        let dt = 1.0 / cfg.rate_hz;
        let filters = FilterState::new(
            &FilterConfig {
                tau_derivative: cfg.tau_derivative,
                tau_complementary: cfg.tau_complementary,
            },
            dt,
        );
        Ok(Self {
            model: Airship::new(model)?,
            limits,
            front,
            dt,
            nu_ref: NuReference {
                nu_ref: Vec5::zeros(),
                k_nu: cfg.k_nu,
            },
            vel_ref: [SecondOrderRef::critically_damped(cfg.omega0_velocity, 0.0); 2],
            rate_ref: [SecondOrderRef::critically_damped(cfg.omega0_rate, 0.0); 3],
            accel_filtered: Vec5::zeros(),
            nu_ec_integral: Vec5::zeros(),
            filters,
            cfg,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn model(&self) -> &Airship {
        &self.model
    }

    /// Initializes all internal states for steady flight at the measured state.
    pub fn reset(&mut self, m: &Measurements) {
        let s = &m.state;
        let p = self.model.params();
        self.nu_ref.nu_ref = propulsion_nu(p, &m.actuators.omega, &m.actuators.gamma);
        self.vel_ref[0] = SecondOrderRef::critically_damped(self.cfg.omega0_velocity, s.velocity.x);
        self.vel_ref[1] = SecondOrderRef::critically_damped(self.cfg.omega0_velocity, s.velocity.z);
        for i in 0..3 {
            self.rate_ref[i] = SecondOrderRef::critically_damped(self.cfg.omega0_rate, s.rates[i]);
        }
        self.accel_filtered = Vec5::zeros();
        self.nu_ec_integral = Vec5::zeros();
        self.filters.reset_steady(&s.rates);
    }

    fn measured_accel(&mut self, m: &Measurements) -> Result<(Vec5, Vec3)> {
        let p = self.model.params();
        let s = &m.state;
        let act = &m.actuators;
        let wrench = buoyancy_wrench(p, &s.attitude)
            + gravity_wrench(p, &s.attitude)
            + propulsion_wrench(p, &act.omega, &act.gamma)
            + Wrench::new(
                Vec3::zeros(),
                surface_moment(&act.eta, m.airspeed, p.rho_air, &p.fins),
            );
        let model_wd = model_omega_dot(&self.model, s, &wrench)?;
        let meas_wd = self.filters.dirty_derivative(&s.rates);
        let wd = self.filters.complementary(&meas_wd, &model_wd);
        let g_body = body_from_ned(&s.attitude) * Vec3::new(0.0, 0.0, p.g);
        let v_g = s.velocity + s.rates.cross(&p.r_cg);
        let vd = accel_at_reference(&m.specific_force, &g_body, &s.rates, &wd, &v_g, &p.r_cg);
        Ok((Vec5::new(vd.x, vd.z, wd.x, wd.y, wd.z), wd))
    }

    pub fn step(&mut self, m: &Measurements, outer: &OuterCommands) -> Result<ControlOutput> {
        let cfg = self.cfg.clone();
        let s = m.state;
        let att = s.attitude;
        let g = self.model.params().g;
        let mut d = Diagnostics {
            outer: *outer,
            ..Default::default()
        };

        let (accel_meas, omega_dot_est) = self.measured_accel(m)?;
        d.accel_meas = accel_meas;
        d.omega_dot_est = omega_dot_est;

        let nu_ach = propulsion_nu(self.model.params(), &m.actuators.omega, &m.actuators.gamma);
        // The plant is expected to deliver the reference plus what the error
        // controller has added; only the remainder is hedged.
        let nu_dot_hedge = if cfg.pch {
            self.nu_ref.hedge(&(nu_ach - self.nu_ec_integral))
        } else {
            Vec5::zeros()
        };
        let jerk = hedge_to_jerk(&self.model, &nu_dot_hedge)?;

        // Outer loop.
        let fp = FlightPathConfig {
            max_pitch: cfg.max_pitch_deg.to_radians(),
            fade_speed: cfg.pitch_fade_speed,
        };
        let (theta_cmd, v_b_cmd) = flight_path(outer.u_c, outer.w_c, &fp);
        let v_c = carrier_from_body(&att) * s.velocity;
        let f_c = carrier_from_body(&att) * m.specific_force;
        let comp = if cfg.wind_compensation {
            wind_compensation(
                f_c.y / g,
                v_c.x,
                outer.psi_dot,
                cfg.k_ny,
                g,
                cfg.wind_compensation_floor,
            )
        } else {
            0.0
        };
        let psi_dot = outer.psi_dot + comp;
        let phi_cmd = turn_roll_angle(v_c.x, psi_dot, g);
        let euler_dot = attitude_rates_cmd(phi_cmd, theta_cmd, psi_dot, &att, cfg.k_phi, cfg.k_theta);
        let omega_cmd = euler_to_body_rates(&att, &euler_dot)?;
        d.psi_dot_total = psi_dot;
        d.phi_cmd = phi_cmd;
        d.theta_cmd = theta_cmd;
        d.velocity_cmd = [v_b_cmd.x, v_b_cmd.z];
        d.rate_cmd = omega_cmd;

        // Reference models with feedforward and error control.
        let meas_v = [s.velocity.x, s.velocity.z];
        let mut accel_cmd = Vec5::zeros();
        for i in 0..2 {
            let r = &mut self.vel_ref[i];
            let corr = cfg.k_ec_velocity * (r.x - meas_v[i]);
            accel_cmd[i] = r
                .step(d.velocity_cmd[i], jerk[i], cfg.k_nu, corr, self.dt)
                .command;
            d.velocity_ref[i] = r.x;
        }
        for i in 0..3 {
            let r = &mut self.rate_ref[i];
            let corr = cfg.k_ec_rate * (r.x - s.rates[i]);
            accel_cmd[2 + i] = r.step(omega_cmd[i], jerk[2 + i], cfg.k_nu, corr, self.dt).command;
            d.rate_ref[i] = r.x;
        }
        d.accel_cmd = accel_cmd;

        // Inversion and surface allocation.
        let v_dot = Vec3::new(
            accel_cmd[0],
            lateral_accel(&self.model, &s, &accel_cmd),
            accel_cmd[1],
        );
        let omega_dot = Vec3::new(accel_cmd[2], accel_cmd[3], accel_cmd[4]);
        let mut w_des = desired_wrench(&self.model, &v_dot, &omega_dot, &s);
        let m_des = Vec3::new(w_des[3], w_des[4], w_des[5]);
        let p = self.model.params();
        let surf = surface_alloc(
            &m_des,
            m.airspeed,
            p.rho_air,
            &p.fins,
            &SurfaceConfig {
                activation_speed: cfg.surface_activation_speed,
                limit: cfg.surface_limit_deg.to_radians(),
            },
        );
        for i in 0..3 {
            w_des[3 + i] -= surf.moment[i];
        }
        let nu_cmd = select_nu(&w_des);
        d.surface_scale = surf.scale;
        d.surface_moment = surf.moment;

        let r = self.nu_ref.step(&nu_cmd, &nu_dot_hedge, self.dt);
        let nu_dot_ec = nu_error_controller(&self.model, &self.accel_filtered, &accel_meas, cfg.k_nu_ec);
        self.accel_filtered += (accel_cmd - self.accel_filtered) * (cfg.k_nu * self.dt);
        self.nu_ec_integral += nu_dot_ec * self.dt;
        let nu_dot_cmd = r.nu_dot_ref + nu_dot_ec;
        d.nu_cmd = nu_cmd;
        d.nu_ref = r.nu_ref;
        d.nu_ach = nu_ach;
        d.nu_dot_ref = r.nu_dot_ref;
        d.nu_dot_hedge = nu_dot_hedge;
        d.nu_dot_ec = nu_dot_ec;
        d.nu_dot_cmd = nu_dot_cmd;
        d.jerk_hedge = jerk;

        // Rate allocation.
        let act = &m.actuators;
        let b = control_effectiveness(p, &act.omega, &act.gamma);
        let bounds = rate_bounds(act, &self.limits);
        let alloc = erp_alloc(&b, &nu_dot_cmd, &bounds);
        let mut udot = alloc.udot;
        d.nu_dot_ach_erp = b * udot;
        if cfg.nullspace {
            let targets = tilt_targets(m.airspeed, &self.front);
            let ns_cfg = NullspaceConfig {
                gain_speed: cfg.nullspace_gain_speed,
                gain_tilt: cfg.nullspace_gain_tilt,
            };
            if let Ok(ns) = nullspace_rates(&b, act, &targets, &ns_cfg) {
                let scale = fit_within_bounds(&udot, &ns, &bounds);
                udot += ns * scale;
                d.nullspace_scale = scale;
            }
        }
        let udot: Vec8 = udot;
        d.nu_dot_ach = b * udot;
        d.alloc_c = alloc.c;
        d.alloc_iterations = alloc.iterations;
        d.alloc_saturated = alloc.saturated;
        d.alloc_rank_deficient = alloc.rank_deficient;
        d.angle = angle_between(&nu_dot_cmd, &d.nu_dot_ach);

        let mut commands = *act;
        for i in 0..4 {
            commands.omega[i] = eindi_command(act.omega[i], udot[i], self.limits.rotor_speed.bandwidth);
            commands.gamma[i] = eindi_command(act.gamma[i], udot[i + 4], self.limits.tilt.bandwidth);
        }
        commands.eta = surf.eta;
        if !commands.is_finite() {
            return Err(Error::NonFinite("actuator commands"));
        }
        Ok(ControlOutput {
            commands,
            diagnostics: d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trim::trim;

    fn hover(cfg: ControllerConfig) -> (Controller, Measurements) {
        let p = AirshipParams::default();
        let plant = Airship::new(p.clone()).unwrap();
        let s = RigidState::default();
        let front: [bool; 4] = std::array::from_fn(|i| p.is_front_rotor(i));
        let act = trim(&plant, &s, &tilt_targets(0.0, &front)).unwrap();
        let g_body = Vec3::new(0.0, 0.0, p.g);
        let m = Measurements {
            state: s,
            specific_force: -g_body,
            actuators: act,
            airspeed: 0.0,
        };
        let mut c = Controller::new(p, cfg).unwrap();
        c.reset(&m);
        (c, m)
    }

    #[test]
    fn config_validation() {
        assert!(ControllerConfig::default().validate().is_ok());
        let bad = ControllerConfig {
            k_nu: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig {
            min_rotor_speed: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig {
            max_pitch_deg: 89.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rotor_floor_applies_to_allocation_only() {
        let c = Controller::new(AirshipParams::default(), ControllerConfig::default()).unwrap();
        assert_eq!(c.limits.rotor_speed.min, 15.0);
        assert_eq!(c.model().params().limits.rotor_speed.min, 0.0);
    }

    #[test]
    fn trimmed_hover_needs_no_action() {
        let (mut c, m) = hover(ControllerConfig {
            nullspace: false,
            ..Default::default()
        });
        for _ in 0..50 {
            let out = c.step(&m, &OuterCommands::default()).unwrap();
            let d = out.diagnostics;
            assert!(d.nu_dot_cmd.norm() < 1e-6, "{:?}", d.nu_dot_cmd);
            assert!(d.nu_dot_hedge.norm() < 1e-9);
            assert_eq!(d.alloc_c, 1.0);
            for i in 0..4 {
                assert!((out.commands.omega[i] - m.actuators.omega[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn frozen_actuators_are_hedged() {
        let (mut c, m) = hover(ControllerConfig::default());
        let cmd = OuterCommands {
            u_c: 5.0,
            ..Default::default()
        };
        // Actuators never follow the commands, so everything demanded beyond
        // the error-controller share is unachieved.
        let mut hedge = 0.0;
        for _ in 0..200 {
            hedge = c.step(&m, &cmd).unwrap().diagnostics.nu_dot_hedge.norm();
        }
        assert!(hedge > 1.0, "{hedge}");

        let (mut c2, m) = hover(ControllerConfig {
            pch: false,
            ..Default::default()
        });
        for _ in 0..200 {
            let d = c2.step(&m, &cmd).unwrap().diagnostics;
            assert_eq!(d.jerk_hedge, Vec5::zeros());
        }
    }
}
