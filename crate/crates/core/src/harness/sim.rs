//! Closed-loop execution of a scenario.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::actuators::{actuator_step, ActuatorSuite};
use crate::allocation::tilt_targets;
use crate::controller::{Controller, Diagnostics, Measurements};
use crate::dynamics::kinematics::{body_from_ned, carrier_from_body, euler_rates};
use crate::dynamics::{Airship, RigidState, WindState};
use crate::environment::{gust_wind, Dryden};
use crate::harness::log::{Column, LimitSummary, Manifest, RunLog, RunStatus, FORMAT_VERSION};
use crate::harness::scenario::Scenario;
use crate::math::{Vec3, Vec5};
use crate::trim::trim;
use crate::{Error, Result};

const NU: [&str; 5] = ["l", "m", "n", "x", "z"];
const RED: [&str; 5] = ["u", "w", "p", "q", "r"];

fn columns() -> Vec<Column> {
    let mut c = Vec::new();
    let mut add = |name: String, unit: &str| {
        c.push(Column {
            name,
            unit: unit.into(),
        })
    };
    add("t".into(), "s");
    for n in ["u", "v", "w"] {
        add(n.into(), "m/s");
    }
    for n in ["p", "q", "r"] {
        add(n.into(), "rad/s");
    }
    for n in ["phi", "theta", "psi"] {
        add(n.into(), "rad");
    }
    add("u_c".into(), "m/s");
    add("w_c".into(), "m/s");
    add("psi_dot".into(), "rad/s");
    add("airspeed".into(), "m/s");
    add("u_c_cmd".into(), "m/s");
    add("w_c_cmd".into(), "m/s");
    add("psi_dot_cmd".into(), "rad/s");
    add("psi_dot_total_cmd".into(), "rad/s");
    add("phi_cmd".into(), "rad");
    add("theta_cmd".into(), "rad");
    add("u_b_cmd".into(), "m/s");
    add("w_b_cmd".into(), "m/s");
    for n in ["p", "q", "r"] {
        add(format!("{n}_cmd"), "rad/s");
    }
    for (n, u) in RED.iter().zip(["m/s", "m/s", "rad/s", "rad/s", "rad/s"]) {
        add(format!("{n}_ref"), u);
    }
    for kind in ["accel_cmd", "accel_meas"] {
        for (n, u) in RED
            .iter()
            .zip(["m/s^2", "m/s^2", "rad/s^2", "rad/s^2", "rad/s^2"])
        {
            add(format!("{kind}_{n}"), u);
        }
    }
    let nu_units = ["N m", "N m", "N m", "N", "N"];
    for kind in ["nu_cmd", "nu_ref", "nu_ach"] {
        for (n, u) in NU.iter().zip(nu_units) {
            add(format!("{kind}_{n}"), u);
        }
    }
    for kind in [
        "nu_dot_ref",
        "nu_dot_ec",
        "nu_dot_hedge",
        "nu_dot_cmd",
        "nu_dot_ach",
        "nu_dot_ach_erp",
    ] {
        for (n, u) in NU.iter().zip(["N m/s", "N m/s", "N m/s", "N/s", "N/s"]) {
            add(format!("{kind}_{n}"), u);
        }
    }
    for (n, u) in RED
        .iter()
        .zip(["m/s^3", "m/s^3", "rad/s^3", "rad/s^3", "rad/s^3"])
    {
        add(format!("jerk_hedge_{n}"), u);
    }
    for kind in ["", "_cmd"] {
        for i in 1..=4 {
            add(format!("omega_{i}{kind}"), "rad/s");
        }
        for i in 1..=4 {
            add(format!("gamma_{i}{kind}"), "rad");
        }
        for i in 1..=3 {
            add(format!("eta_{i}{kind}"), "rad");
        }
    }
    add("alloc_c".into(), "-");
    add("alloc_iterations".into(), "-");
    add("alloc_saturated_mask".into(), "-");
    add("alloc_rank_deficient".into(), "-");
    add("nullspace_scale".into(), "-");
    add("surface_scale".into(), "-");
    add("angle".into(), "rad");
    for n in ["u", "v", "w"] {
        add(format!("wind_{n}"), "m/s");
    }
    c
}

#[allow(clippy::too_many_arguments)]
fn record(
    t: f64,
    s: &RigidState,
    euler_dot: &Vec3,
    airspeed: f64,
    d: &Diagnostics,
    act: &ActuatorSuite,
    cmd: &ActuatorSuite,
    wind: &WindState,
) -> Vec<f64> {
    let mut r = Vec::with_capacity(160);
    let v_c = carrier_from_body(&s.attitude) * s.velocity;
    r.push(t);
    r.extend(s.velocity.iter());
    r.extend(s.rates.iter());
    r.extend(s.attitude.iter());
    r.extend([v_c.x, v_c.z, euler_dot.z, airspeed]);
    r.extend([d.outer.u_c, d.outer.w_c, d.outer.psi_dot, d.psi_dot_total]);
    r.extend([d.phi_cmd, d.theta_cmd, d.velocity_cmd[0], d.velocity_cmd[1]]);
    r.extend(d.rate_cmd.iter());
    r.extend(d.velocity_ref);
    r.extend(d.rate_ref.iter());
    let v5 = |r: &mut Vec<f64>, v: &Vec5| r.extend(v.iter());
    v5(&mut r, &d.accel_cmd);
    v5(&mut r, &d.accel_meas);
    for v in [&d.nu_cmd, &d.nu_ref, &d.nu_ach] {
        v5(&mut r, v);
    }
    for v in [
        &d.nu_dot_ref,
        &d.nu_dot_ec,
        &d.nu_dot_hedge,
        &d.nu_dot_cmd,
        &d.nu_dot_ach,
        &d.nu_dot_ach_erp,
    ] {
        v5(&mut r, v);
    }
    v5(&mut r, &d.jerk_hedge);
    for a in [act, cmd] {
        r.extend(a.omega);
        r.extend(a.gamma);
        r.extend(a.eta);
    }
    let mask = d
        .alloc_saturated
        .iter()
        .enumerate()
        .fold(0u32, |m, (i, &s)| if s { m | (1 << i) } else { m });
    r.extend([
        d.alloc_c,
        d.alloc_iterations as f64,
        mask as f64,
        if d.alloc_rank_deficient { 1.0 } else { 0.0 },
        d.nullspace_scale,
        d.surface_scale,
        d.angle,
    ]);
    r.extend(wind.velocity.iter());
    r
}

struct Plant {
    airship: Airship,
    state: RigidState,
    act: ActuatorSuite,
}

impl Plant {
    fn specific_force(&self, wind: &WindState) -> Result<Vec3> {
        let p = self.airship.params();
        let s = &self.state;
        let d = self.airship.state_derivative(s, &self.act, wind)?;
        let r = &p.r_cg;
        let a_g = d.accel + d.ang_accel.cross(r) + s.rates.cross(&(s.velocity + s.rates.cross(r)));
        Ok(a_g - body_from_ned(&s.attitude) * Vec3::new(0.0, 0.0, p.g))
    }
}

/// Wind sources of a run; the gust duration is frozen at onset.
struct Environment {
    dryden: Option<Dryden>,
    turbulence: WindState,
    gust_airspeed: Option<f64>,
}

impl Environment {
    fn wind(&mut self, sc: &Scenario, t: f64, s: &RigidState) -> WindState {
        let mut w = self.turbulence;
        if let Some(g) = &sc.gust {
            if t >= g.t_start && self.gust_airspeed.is_none() {
                self.gust_airspeed = Some((s.velocity - w.velocity).norm());
            }
            if let Some(a) = self.gust_airspeed {
                let gw = gust_wind(g, t, a).to_body(&s.attitude, &s.rates);
                w.velocity += gw.velocity;
                w.velocity_dot += gw.velocity_dot;
            }
        }
        w
    }

    fn advance(&mut self, airspeed: f64, dt: f64) {
        if let Some(d) = &mut self.dryden {
            self.turbulence = d.step(airspeed, dt);
        }
    }
}

fn limit_summary(p: &crate::params::AirshipParams) -> LimitSummary {
    let l = &p.limits;
    LimitSummary {
        rotor_speed: [l.rotor_speed.min, l.rotor_speed.max],
        tilt: [l.tilt.min, l.tilt.max],
        surface: [l.surface.min, l.surface.max],
    }
}

/// Runs the closed loop. Configuration errors are returned as `Err`;
/// failures during the run (singularity, non-finite values) end the log
/// early with an aborted status.
pub fn run_scenario(sc: &Scenario) -> Result<RunLog> {
    sc.validate()?;
    let plant_params = sc.plant_params()?;
    let ctrl_params = sc.controller_params()?;
    let mut ctrl = Controller::new(ctrl_params, sc.controller.clone())?;
    let airship = Airship::new(plant_params)?;

    let state = sc.initial_state();
    let act = if sc.initial.trim {
        let front: [bool; 4] = std::array::from_fn(|i| airship.params().is_front_rotor(i));
        let gamma0 = match sc.initial.tilt_deg {
            Some(t) => t.map(f64::to_radians),
            None => tilt_targets(state.velocity.norm(), &front),
        };
        trim(&airship, &state, &gamma0)?
    } else {
        ActuatorSuite::default()
    };
    let mut plant = Plant { airship, state, act };

    let mut env = Environment {
        dryden: sc.turbulence.clone().map(|t| Dryden::new(t, sc.seed)),
        turbulence: WindState::calm(),
        gust_airspeed: None,
    };
    let mut noise_rng = ChaCha8Rng::seed_from_u64(sc.seed.wrapping_add(0x5eed));
    let gyro = Normal::new(0.0, sc.sensor_noise.gyro).map_err(|e| Error::Config(e.to_string()))?;
    let accel = Normal::new(0.0, sc.sensor_noise.accel).map_err(|e| Error::Config(e.to_string()))?;

    let dt_c = ctrl.dt();
    let substeps = (sc.plant_rate_hz / sc.controller.rate_hz).round() as usize;
    let dt_p = dt_c / substeps as f64;
    let steps = (sc.duration * sc.controller.rate_hz).round() as usize;
    let limits = plant.airship.params().limits;

    let mut rows = Vec::with_capacity(steps);
    let mut status = RunStatus::Completed;
    let mut t = 0.0;

    let measure = |plant: &Plant, wind: &WindState, rng: &mut ChaCha8Rng| -> Result<Measurements> {
        let mut state = plant.state;
        let mut f = plant.specific_force(wind)?;
        if sc.sensor_noise.gyro > 0.0 {
            state.rates += Vec3::from_fn(|_, _| gyro.sample(rng));
        }
        if sc.sensor_noise.accel > 0.0 {
            f += Vec3::from_fn(|_, _| accel.sample(rng));
        }
        Ok(Measurements {
            state,
            specific_force: f,
            actuators: plant.act,
            airspeed: (plant.state.velocity - wind.velocity).norm(),
        })
    };

    let first_wind = env.wind(sc, 0.0, &plant.state);
    ctrl.reset(&measure(&plant, &first_wind, &mut noise_rng)?);

    for k in 0..steps {
        t = k as f64 * dt_c;
        let outcome: Result<()> = (|| {
            let wind = env.wind(sc, t, &plant.state);
            let meas = measure(&plant, &wind, &mut noise_rng)?;
            let out = ctrl.step(&meas, &sc.command_at(t))?;
            let ed = euler_rates(&plant.state.attitude, &plant.state.rates)?;
            rows.push(record(
                t,
                &plant.state,
                &ed,
                meas.airspeed,
                &out.diagnostics,
                &plant.act,
                &out.commands,
                &wind,
            ));
            for j in 0..substeps {
                let tj = t + j as f64 * dt_p;
                let wind = env.wind(sc, tj, &plant.state);
                plant.state = plant
                    .airship
                    .integrate_step(&plant.state, &plant.act, &wind, dt_p)?;
                plant.act = actuator_step(&plant.act, &out.commands, &limits, dt_p);
                env.advance((plant.state.velocity - wind.velocity).norm(), dt_p);
            }
            if !plant.state.is_finite() || !plant.act.is_finite() {
                return Err(Error::NonFinite("plant state"));
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            status = RunStatus::Aborted {
                time: t,
                reason: e.to_string(),
            };
            break;
        }
    }
    let _ = t;

    Ok(RunLog {
        manifest: Manifest {
            format_version: FORMAT_VERSION,
            scenario: sc.name.clone(),
            seed: sc.seed,
            config_hash: sc.config_hash(),
            controller_rate_hz: sc.controller.rate_hz,
            plant_rate_hz: sc.plant_rate_hz,
            rows: rows.len(),
            status,
            limits: limit_summary(plant.airship.params()),
            columns: columns(),
        },
        rows,
    })
}
