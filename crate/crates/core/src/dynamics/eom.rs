//! Equations of motion about the reference point and RK4 integration.

use crate::actuators::ActuatorSuite;
use crate::dynamics::kinematics::euler_rates;
use crate::dynamics::mass::{generalized_mass, generalized_mass_inverse};
use crate::dynamics::wrench::{total_wrench, Wrench};
use crate::math::{Mat6, Vec3, Vec6};
use crate::params::AirshipParams;
use crate::{Error, Result};

/// Kinematic body velocity at the reference point, body rates and Euler angles.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RigidState {
    pub velocity: Vec3,
    pub rates: Vec3,
    pub attitude: Vec3,
}

impl RigidState {
    pub fn is_finite(&self) -> bool {
        self.velocity
            .iter()
            .chain(self.rates.iter())
            .chain(self.attitude.iter())
            .all(|x| x.is_finite())
    }

    fn add_scaled(&self, d: &StateDerivative, h: f64) -> RigidState {
        RigidState {
            velocity: self.velocity + d.accel * h,
            rates: self.rates + d.ang_accel * h,
            attitude: self.attitude + d.euler_rates * h,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateDerivative {
    pub accel: Vec3,
    pub ang_accel: Vec3,
    pub euler_rates: Vec3,
}

/// Wind velocity and rotation in body axes, with their body-frame derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindState {
    pub velocity: Vec3,
    pub velocity_dot: Vec3,
    pub rates: Vec3,
    pub rates_dot: Vec3,
}

impl WindState {
    pub fn calm() -> Self {
        Self::default()
    }

    pub fn is_calm(&self) -> bool {
        *self == Self::default()
    }
}

/// Airship plant with a cached generalized mass matrix and its inverse.
#[derive(Clone, Debug)]
pub struct Airship {
    params: AirshipParams,
    mass: Mat6,
    mass_inv: Mat6,
}

impl Airship {
    pub fn new(params: AirshipParams) -> Result<Self> {
        let mass = generalized_mass(&params);
        let mass_inv = generalized_mass_inverse(&params)?;
        Ok(Self {
            params,
            mass,
            mass_inv,
        })
    }

    pub fn params(&self) -> &AirshipParams {
        &self.params
    }

    pub fn mass_matrix(&self) -> &Mat6 {
        &self.mass
    }

    pub fn mass_matrix_inverse(&self) -> &Mat6 {
        &self.mass_inv
    }

    /// Velocity-dependent terms of the still-air equations, moved to the
    /// right-hand side.
    pub fn bias_simple(&self, v: &Vec3, w: &Vec3) -> Vec6 {
        let p = &self.params;
        let m = p.mass;
        let r = &p.r_cg;
        let f = -w.cross(&w.cross(r)) * m - w.cross(&(p.total_mass_matrix() * v));
        let mo = -w.cross(&(p.total_inertia() * w)) + r.cross(&(v.cross(w) * m));
        stack(&f, &mo)
    }

    /// Velocity-dependent and wind terms of the full equations.
    pub fn bias_full(&self, v: &Vec3, w: &Vec3, wind: &WindState) -> Vec6 {
        let p = &self.params;
        let m = p.mass;
        let r = &p.r_cg;
        let mba = crate::math::Mat3::identity() * p.displaced_mass() + p.virtual_mass;
        let jba = p.displaced_inertia() + p.virtual_inertia;
        let mv = v * m;
        let f = -w.cross(&w.cross(r)) * m - w.cross(&(p.total_mass_matrix() * v))
            + mba * wind.velocity_dot
            + w.cross(&(mba * wind.velocity));
        let mo = -w.cross(&(p.total_inertia() * w)) - w.cross(&r.cross(&mv))
            + mv.cross(&r.cross(w))
            + jba * wind.rates_dot
            + w.cross(&(jba * wind.rates));
        stack(&f, &mo)
    }

    /// Solves the generalized mass matrix for `[V_dot, omega_dot]`.
    pub fn solve_accelerations(&self, wrench: &Wrench, bias: &Vec6) -> (Vec3, Vec3) {
        let a = self.mass_inv * (wrench.to_vec6() + bias);
        (
            a.fixed_rows::<3>(0).into_owned(),
            a.fixed_rows::<3>(3).into_owned(),
        )
    }

    pub fn external_wrench(&self, s: &RigidState, act: &ActuatorSuite, wind: &WindState) -> Wrench {
        total_wrench(
            &self.params,
            &s.attitude,
            &s.velocity,
            &s.rates,
            act,
            &wind.velocity,
        )
    }

    /// Full equations of motion including wind terms.
    pub fn state_derivative(
        &self,
        s: &RigidState,
        act: &ActuatorSuite,
        wind: &WindState,
    ) -> Result<StateDerivative> {
        let euler = euler_rates(&s.attitude, &s.rates)?;
        let wrench = self.external_wrench(s, act, wind);
        let (accel, ang_accel) =
            self.solve_accelerations(&wrench, &self.bias_full(&s.velocity, &s.rates, wind));
        finite(StateDerivative {
            accel,
            ang_accel,
            euler_rates: euler,
        })
    }

    /// Still-air equations in the simplified form used by the controller.
    pub fn state_derivative_simple(&self, s: &RigidState, wrench: &Wrench) -> Result<StateDerivative> {
        let euler = euler_rates(&s.attitude, &s.rates)?;
        let (accel, ang_accel) = self.solve_accelerations(wrench, &self.bias_simple(&s.velocity, &s.rates));
        finite(StateDerivative {
            accel,
            ang_accel,
            euler_rates: euler,
        })
    }

    /// Classical RK4 step with actuators and wind held over the step.
    pub fn integrate_step(
        &self,
        s: &RigidState,
        act: &ActuatorSuite,
        wind: &WindState,
        dt: f64,
    ) -> Result<RigidState> {
        let k1 = self.state_derivative(s, act, wind)?;
        let k2 = self.state_derivative(&s.add_scaled(&k1, dt / 2.0), act, wind)?;
        let k3 = self.state_derivative(&s.add_scaled(&k2, dt / 2.0), act, wind)?;
        let k4 = self.state_derivative(&s.add_scaled(&k3, dt), act, wind)?;
        let next = RigidState {
            velocity: s.velocity + (k1.accel + (k2.accel + k3.accel) * 2.0 + k4.accel) * (dt / 6.0),
            rates: s.rates + (k1.ang_accel + (k2.ang_accel + k3.ang_accel) * 2.0 + k4.ang_accel) * (dt / 6.0),
            attitude: s.attitude
                + (k1.euler_rates + (k2.euler_rates + k3.euler_rates) * 2.0 + k4.euler_rates) * (dt / 6.0),
        };
        if !next.is_finite() {
            return Err(Error::NonFinite("integrated state"));
        }
        Ok(next)
    }
}

fn stack(a: &Vec3, b: &Vec3) -> Vec6 {
    Vec6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

fn finite(d: StateDerivative) -> Result<StateDerivative> {
    let ok = d
        .accel
        .iter()
        .chain(d.ang_accel.iter())
        .chain(d.euler_rates.iter())
        .all(|x| x.is_finite());
    if ok {
        Ok(d)
    } else {
        Err(Error::NonFinite("state derivative"))
    }
}
