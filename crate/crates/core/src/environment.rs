//! Discrete gusts and Dryden turbulence.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::kinematics::body_from_ned;
use crate::dynamics::WindState;
use crate::math::Vec3;

/// "1 - cos" gust defined in the NED frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GustSpec {
    pub t_start: f64,
    pub amplitude: f64,
    /// Spatial length, converted to a duration with the airspeed at onset.
    pub length: f64,
    /// Direction of the wind velocity in NED; normalized on use.
    #[serde(default = "default_gust_direction")]
    pub direction: [f64; 3],
}

/// From below and from the left: blowing to the right and upward.
fn default_gust_direction() -> [f64; 3] {
    [0.0, 1.0, -1.0]
}

impl GustSpec {
    pub fn unit_direction(&self) -> Vec3 {
        let d = Vec3::from(self.direction);
        let n = d.norm();
        if n > 0.0 && n.is_finite() {
            d / n
        } else {
            Vec3::zeros()
        }
    }

    pub fn duration(&self, airspeed: f64) -> f64 {
        self.length / airspeed.max(0.5)
    }
}

/// Wind velocity and its time derivative, both in NED axes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EarthWind {
    pub velocity: Vec3,
    pub velocity_dot: Vec3,
}

impl EarthWind {
    /// Resolves in body axes; the derivative is taken relative to the body frame.
    pub fn to_body(&self, att: &Vec3, omega: &Vec3) -> WindState {
        let m = body_from_ned(att);
        let v = m * self.velocity;
        WindState {
            velocity: v,
            velocity_dot: m * self.velocity_dot - omega.cross(&v),
            rates: Vec3::zeros(),
            rates_dot: Vec3::zeros(),
        }
    }
}

pub fn gust_wind(spec: &GustSpec, t: f64, airspeed: f64) -> EarthWind {
    let duration = spec.duration(airspeed);
    let tau = t - spec.t_start;
    if !(tau >= 0.0 && tau <= duration) || spec.length <= 0.0 {
        return EarthWind::default();
    }
    let dir = spec.unit_direction();
    let phase = 2.0 * PI * tau / duration;
    let a = spec.amplitude;
    EarthWind {
        velocity: dir * (0.5 * a * (1.0 - phase.cos())),
        velocity_dot: dir * (0.5 * a * phase.sin() * 2.0 * PI / duration),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceSpec {
    #[serde(default = "default_sigma")]
    pub sigma: [f64; 3],
    #[serde(default = "default_length")]
    pub length: [f64; 3],
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_sigma() -> [f64; 3] {
    [0.8; 3]
}

fn default_length() -> [f64; 3] {
    [50.0; 3]
}

impl Default for TurbulenceSpec {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            length: default_length(),
            seed: None,
        }
    }
}

/// Dryden shaping filters driven by seeded white noise; output in body axes.
///
/// The longitudinal channel is a first-order Gauss-Markov process stepped
/// exactly; the lateral and vertical channels are second-order filters
/// stepped with Euler-Maruyama. Supplied derivatives are the drift terms.
#[derive(Clone, Debug)]
pub struct Dryden {
    spec: TurbulenceSpec,
    rng: ChaCha8Rng,
    u: f64,
    lat: [[f64; 2]; 2],
}

impl Dryden {
    pub fn new(spec: TurbulenceSpec, seed: u64) -> Self {
        let seed = spec.seed.unwrap_or(seed);
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
            u: 0.0,
            lat: [[0.0; 2]; 2],
        }
    }

    fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn output(&self, airspeed: f64) -> WindState {
        let v = airspeed.max(0.5);
        let mut vel = Vec3::new(self.u, 0.0, 0.0);
        let mut acc = Vec3::new(-self.u * v / self.spec.length[0], 0.0, 0.0);
        for (k, axis) in [1usize, 2].into_iter().enumerate() {
            let t = self.spec.length[axis] / v;
            let gain = self.spec.sigma[axis] * t.sqrt();
            let [x1, x2] = self.lat[k];
            let x2_dot = (-x1 - 2.0 * t * x2) / (t * t);
            vel[axis] = gain * (x1 + 3f64.sqrt() * t * x2);
            acc[axis] = gain * (x2 + 3f64.sqrt() * t * x2_dot);
        }
        WindState {
            velocity: vel,
            velocity_dot: acc,
            rates: Vec3::zeros(),
            rates_dot: Vec3::zeros(),
        }
    }

    pub fn current(&self, airspeed: f64) -> WindState {
        self.output(airspeed)
    }

    pub fn step(&mut self, airspeed: f64, dt: f64) -> WindState {
        let v = airspeed.max(0.5);
        let a = v / self.spec.length[0];
        let phi = (-a * dt).exp();
        let n = self.normal();
        self.u = phi * self.u + self.spec.sigma[0] * (1.0 - phi * phi).sqrt() * n;
        for (k, axis) in [1usize, 2].into_iter().enumerate() {
            let t = self.spec.length[axis] / v;
            let n = self.normal();
            let [x1, x2] = self.lat[k];
            let x2n = x2 + dt * (-x1 - 2.0 * t * x2) / (t * t) + dt.sqrt() * n / (t * t);
            self.lat[k] = [x1 + dt * x2n, x2n];
        }
        self.output(airspeed)
    }
}

/// Steps a Dryden generator; convenience wrapper over [`Dryden::step`].
pub fn dryden_step(gen: &mut Dryden, airspeed: f64, dt: f64) -> WindState {
    gen.step(airspeed, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gust() -> GustSpec {
        GustSpec {
            t_start: 15.0,
            amplitude: 3.0,
            length: 3.0,
            direction: default_gust_direction(),
        }
    }

    #[test]
    fn gust_profile() {
        let g = gust();
        assert_eq!(gust_wind(&g, 14.9, 5.0), EarthWind::default());
        let mid = gust_wind(&g, 15.0 + g.duration(5.0) / 2.0, 5.0);
        assert!((mid.velocity.norm() - 3.0).abs() < 1e-12);
        assert!((mid.velocity - g.unit_direction() * 3.0).norm() < 1e-12);
        assert!(mid.velocity.y > 0.0 && mid.velocity.z < 0.0);
        assert_eq!(gust_wind(&g, 20.0, 5.0), EarthWind::default());
    }

    #[test]
    fn gust_derivative_is_consistent_and_closes() {
        let g = gust();
        let dt = 1e-5;
        let dur = g.duration(5.0);
        let mut integral = Vec3::zeros();
        let mut t = 15.0;
        while t < 15.0 + dur {
            let a = gust_wind(&g, t, 5.0);
            let b = gust_wind(&g, t + dt, 5.0);
            if t + dt <= 15.0 + dur {
                let fd = (b.velocity - a.velocity) / dt;
                assert!((fd - a.velocity_dot).norm() < 1e-3 * 60.0);
            }
            integral += a.velocity_dot * dt;
            t += dt;
        }
        assert!(integral.norm() < 1e-3);
    }

    #[test]
    fn zero_sigma_is_calm() {
        let spec = TurbulenceSpec {
            sigma: [0.0; 3],
            ..Default::default()
        };
        let mut d = Dryden::new(spec, 3);
        for _ in 0..1000 {
            assert_eq!(d.step(5.0, 0.01).velocity, Vec3::zeros());
        }
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = Dryden::new(TurbulenceSpec::default(), 42);
        let mut b = Dryden::new(TurbulenceSpec::default(), 42);
        let mut c = Dryden::new(TurbulenceSpec::default(), 43);
        let mut differs = false;
        for _ in 0..500 {
            let (x, y, z) = (a.step(5.0, 0.01), b.step(5.0, 0.01), c.step(5.0, 0.01));
            assert_eq!(x, y);
            differs |= x != z;
        }
        assert!(differs);
    }

    #[test]
    fn longitudinal_variance_matches_sigma() {
        let mut d = Dryden::new(TurbulenceSpec::default(), 7);
        let n = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let u = d.step(5.0, 0.1).velocity.x;
            s1 += u;
            s2 += u * u;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((var / 0.64 - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn lateral_variance_matches_sigma() {
        let mut d = Dryden::new(TurbulenceSpec::default(), 11);
        let n = 1_000_000;
        let mut s2 = [0.0; 2];
        for _ in 0..n {
            let w = d.step(5.0, 0.05).velocity;
            s2[0] += w.y * w.y;
            s2[1] += w.z * w.z;
        }
        for s in s2 {
            assert!((s / n as f64 / 0.64 - 1.0).abs() < 0.15, "{}", s / n as f64);
        }
    }
}
