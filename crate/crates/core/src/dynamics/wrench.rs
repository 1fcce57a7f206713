//! External forces and moments about the reference point, body frame.

use std::ops::{Add, AddAssign};

use crate::actuators::ActuatorSuite;
use crate::dynamics::kinematics::body_from_ned;
use crate::math::{sin_cos_snapped, Mat3, Vec3, Vec5, Vec6};
use crate::params::{AirshipParams, FinParams, RotorParams};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Wrench {
    pub force: Vec3,
    pub moment: Vec3,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(force: Vec3, moment: Vec3) -> Self {
        Self { force, moment }
    }

    pub fn to_vec6(&self) -> Vec6 {
        let mut v = Vec6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.moment);
        v
    }

    /// Pseudo-control components `[L, M, N, X, Z]`.
    pub fn to_nu(&self) -> Vec5 {
        select_nu(&self.to_vec6())
    }
}

impl Add for Wrench {
    type Output = Wrench;
    fn add(self, o: Wrench) -> Wrench {
        Wrench::new(self.force + o.force, self.moment + o.moment)
    }
}

impl AddAssign for Wrench {
    fn add_assign(&mut self, o: Wrench) {
        self.force += o.force;
        self.moment += o.moment;
    }
}

/// Selects `[L, M, N, X, Z]` from a `[X, Y, Z, L, M, N]` vector.
pub fn select_nu(v: &Vec6) -> Vec5 {
    Vec5::new(v[3], v[4], v[5], v[0], v[2])
}

pub fn buoyancy_wrench(p: &AirshipParams, att: &Vec3) -> Wrench {
    let f = body_from_ned(att) * Vec3::new(0.0, 0.0, -p.net_buoyancy());
    Wrench::new(f, Vec3::zeros())
}

pub fn gravity_wrench(p: &AirshipParams, att: &Vec3) -> Wrench {
    let f = body_from_ned(att) * Vec3::new(0.0, 0.0, p.mass * p.g);
    Wrench::new(f, p.r_cg.cross(&f))
}

pub fn rotor_wrench(rotor: &RotorParams, gamma: f64, omega: f64, rho: f64) -> Wrench {
    let (s, c) = sin_cos_snapped(gamma);
    let t = rho * rotor.k_t * omega * omega;
    let q = rho * rotor.k_n * rotor.sigma * omega * omega;
    let r = &rotor.position;
    Wrench::new(
        Vec3::new(s * t, 0.0, -c * t),
        Vec3::new(-s * q - r.y * c * t, (r.z * s + r.x * c) * t, c * q - r.y * s * t),
    )
}

pub fn propulsion_wrench(p: &AirshipParams, omega: &[f64; 4], gamma: &[f64; 4]) -> Wrench {
    let mut w = Wrench::zero();
    for i in 0..4 {
        w += rotor_wrench(&p.rotors[i], gamma[i], omega[i], p.rho_air);
    }
    w
}

/// Pseudo control `[L, M, N, X, Z]` generated by the rotors.
pub fn propulsion_nu(p: &AirshipParams, omega: &[f64; 4], gamma: &[f64; 4]) -> Vec5 {
    propulsion_wrench(p, omega, gamma).to_nu()
}

/// Dimensionless surface effectiveness mapping deflections to moment coefficients.
pub fn surface_effectiveness(fins: &FinParams) -> Mat3 {
    let mut b = Mat3::zeros();
    for (j, &phi) in fins.varphi.iter().enumerate() {
        let (s, c) = sin_cos_snapped(phi);
        b[(0, j)] = fins.c_l_eta;
        b[(1, j)] = c * fins.c_m_eta;
        b[(2, j)] = s * fins.c_m_eta;
    }
    // The third fin is the rudder and has no pitch authority.
    b[(1, 2)] = 0.0;
    b
}

/// Dynamic pressure times reference area and length.
pub fn surface_scale(fins: &FinParams, airspeed: f64, rho: f64) -> f64 {
    0.5 * rho * airspeed * airspeed * fins.s_ref * fins.l_ref
}

pub fn surface_moment(eta: &[f64; 3], airspeed: f64, rho: f64, fins: &FinParams) -> Vec3 {
    surface_effectiveness(fins) * Vec3::from(*eta) * surface_scale(fins, airspeed, rho)
}

/// Synthetic linear damping on the air-relative velocity and body rates.
pub fn damping_wrench(p: &AirshipParams, v_rel: &Vec3, omega: &Vec3) -> Wrench {
    if !p.damping.enabled {
        return Wrench::zero();
    }
    Wrench::new(
        -p.damping.force.component_mul(v_rel),
        -p.damping.moment.component_mul(omega),
    )
}

/// Sum of all external wrenches acting on the plant.
pub fn total_wrench(
    p: &AirshipParams,
    att: &Vec3,
    v: &Vec3,
    omega: &Vec3,
    act: &ActuatorSuite,
    wind_velocity: &Vec3,
) -> Wrench {
    let v_rel = v - wind_velocity;
    let airspeed = v_rel.norm();
    buoyancy_wrench(p, att)
        + gravity_wrench(p, att)
        + propulsion_wrench(p, &act.omega, &act.gamma)
        + Wrench::new(
            Vec3::zeros(),
            surface_moment(&act.eta, airspeed, p.rho_air, &p.fins),
        )
        + damping_wrench(p, &v_rel, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> AirshipParams {
        AirshipParams::default()
    }

    #[test]
    fn buoyancy_cases() {
        let mut p = params();
        let level = buoyancy_wrench(&p, &Vec3::zeros());
        assert_eq!(level.force, Vec3::new(0.0, 0.0, -p.net_buoyancy()));
        let th = 30f64.to_radians();
        let tilted = buoyancy_wrench(&p, &Vec3::new(0.0, th, 0.0));
        let want = Vec3::new(th.sin(), 0.0, -th.cos()) * p.net_buoyancy();
        assert!((tilted.force - want).norm() < 1e-12);
        assert_eq!(tilted.moment, Vec3::zeros());
        p.rho_helium = p.rho_air;
        assert_eq!(buoyancy_wrench(&p, &Vec3::new(0.1, 0.2, 0.3)).force.norm(), 0.0);
    }

    #[test]
    fn gravity_cases() {
        let mut p = params();
        assert!(gravity_wrench(&p, &Vec3::zeros()).moment.norm() < 1e-12);
        let rolled = gravity_wrench(&p, &Vec3::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        let mg = p.mass * p.g;
        assert!((rolled.force - Vec3::new(0.0, mg, 0.0)).norm() < 1e-9);
        assert!((rolled.moment - Vec3::new(-p.r_cg.z * mg, 0.0, 0.0)).norm() < 1e-9);
        p.mass = 0.0;
        let w = gravity_wrench(&p, &Vec3::new(0.3, 0.2, 0.1));
        assert_eq!(w.force.norm() + w.moment.norm(), 0.0);
    }

    #[test]
    fn rotor_cases() {
        let p = params();
        let full = rotor_wrench(&p.rotors[0], 0.0, 340.0, 1.225);
        assert!((full.force - Vec3::new(0.0, 0.0, -70.805)).norm() < 1e-9);
        assert_eq!(rotor_wrench(&p.rotors[0], 0.7, 0.0, 1.225), Wrench::zero());

        let om: f64 = 200.0;
        let t = 1.225 * 5e-4 * om * om;
        let q = 1.225 * 1.7e-5 * om * om;
        let w = rotor_wrench(&p.rotors[0], std::f64::consts::FRAC_PI_2, om, 1.225);
        assert!((w.force - Vec3::new(t, 0.0, 0.0)).norm() < 1e-12);
        assert!((w.moment - Vec3::new(-q, 1.49 * t, -1.338 * t)).norm() < 1e-12);
        // Thrust part of the moment is the lever-arm cross product.
        let arm = p.rotors[0].position.cross(&w.force);
        assert!((w.moment - arm - Vec3::new(-q, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn symmetric_rotors_cancel_thrust_roll_and_yaw() {
        let p = params();
        let nu = propulsion_nu(&p, &[150.0; 4], &[0.3; 4]);
        let q = 1.225 * 1.7e-5 * 150f64.powi(2);
        // All rotors spin the same way, so only drag torques remain.
        assert!((nu[0] + 4.0 * 0.3f64.sin() * q).abs() < 1e-12);
        assert!((nu[2] - 4.0 * 0.3f64.cos() * q).abs() < 1e-12);
    }

    #[test]
    fn surface_cases() {
        let p = params();
        assert_eq!(
            surface_moment(&[0.1, 0.2, 0.3], 0.0, 1.225, &p.fins),
            Vec3::zeros()
        );
        assert_eq!(surface_moment(&[0.0, 0.0, 0.3], 10.0, 1.225, &p.fins).y, 0.0);
        let d = 1f64.to_radians();
        let m = surface_moment(&[d; 3], 10.0, 1.225, &p.fins);
        let qsl = 0.5 * 1.225 * 100.0 * 17.93 * 14.53;
        let want = Vec3::new(
            3.0 * -2.61e-3,
            (30f64.to_radians().cos() + 150f64.to_radians().cos()) * -1.28e-2,
            (0.5 + 0.5 - 1.0) * -1.28e-2,
        ) * qsl
            * d;
        assert!((m - want).norm() < 1e-9);
    }

    proptest! {
        #[test]
        fn static_wrenches_have_attitude_independent_norms(
            phi in -3.0f64..3.0, th in -1.5f64..1.5, psi in -3.0f64..3.0,
        ) {
            let p = params();
            let att = Vec3::new(phi, th, psi);
            let b = buoyancy_wrench(&p, &att).force.norm();
            let g = gravity_wrench(&p, &att).force.norm();
            prop_assert!((b - p.net_buoyancy()).abs() < 1e-9);
            prop_assert!((g - p.mass * p.g).abs() < 1e-9);
        }

        #[test]
        fn propulsion_is_quadratic_in_speed(
            om in proptest::array::uniform4(0.0f64..340.0),
            ga in proptest::array::uniform4(-1.3f64..4.4),
            k in 0.1f64..2.0,
        ) {
            let p = params();
            let a = propulsion_nu(&p, &om.map(|x| k * x), &ga);
            let b = propulsion_nu(&p, &om, &ga) * (k * k);
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }

        #[test]
        fn propulsion_nu_is_sum_of_rotor_wrenches(
            om in proptest::array::uniform4(0.0f64..340.0),
            ga in proptest::array::uniform4(-1.3f64..4.4),
        ) {
            let p = params();
            let mut sum = Wrench::zero();
            for i in 0..4 {
                sum += rotor_wrench(&p.rotors[i], ga[i], om[i], p.rho_air);
            }
            let nu = propulsion_nu(&p, &om, &ga);
            prop_assert!((nu - sum.to_nu()).norm() <= 1e-12 * (1.0 + nu.norm()));
            prop_assert!(sum.force.y == 0.0);
        }
    }
}
