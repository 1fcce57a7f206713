//! Control allocation for the tilt-rotor propulsion and the tail surfaces.
//!
//! The rotor inputs are ordered `[omega_1..4, gamma_1..4]` and the pseudo
//! control `[L, M, N, X, Z]`.

use crate::actuators::ActuatorSuite;
use crate::dynamics::wrench::{surface_effectiveness, surface_scale};
use crate::math::{sin_cos_snapped, Mat3, Mat5x8, Mat8, Mat8x5, Vec3, Vec5, Vec8};
use crate::params::{ActuatorLimits, AirshipParams, ChannelLimits, FinParams};
use crate::{Error, Result};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Analytic Jacobian of the propulsion pseudo control with respect to the
/// rotor speeds and tilt angles.
pub fn control_effectiveness(p: &AirshipParams, omega: &[f64; 4], gamma: &[f64; 4]) -> Mat5x8 {
    let rho = p.rho_air;
    let mut b = Mat5x8::zeros();
    for i in 0..4 {
        let r = &p.rotors[i];
        let (x, y, z) = (r.position.x, r.position.y, r.position.z);
        let (kt, kn, sg) = (r.k_t, r.k_n, r.sigma);
        let (s, c) = sin_cos_snapped(gamma[i]);
        let om = omega[i];
        let om2 = om * om;
        b[(0, i)] = -2.0 * rho * (s * kn * sg + c * kt * y) * om;
        b[(0, i + 4)] = rho * (s * kt * y - c * kn * sg) * om2;
        b[(1, i)] = 2.0 * rho * kt * (z * s + x * c) * om;
        b[(1, i + 4)] = rho * kt * (z * c - x * s) * om2;
        b[(2, i)] = 2.0 * rho * (c * kn * sg - s * kt * y) * om;
        b[(2, i + 4)] = -rho * (s * kn * sg + c * kt * y) * om2;
        b[(3, i)] = 2.0 * s * rho * kt * om;
        b[(3, i + 4)] = c * rho * kt * om2;
        b[(4, i)] = -2.0 * c * rho * kt * om;
        b[(4, i + 4)] = s * rho * kt * om2;
    }
    b
}

fn full_row_rank(b: &Mat5x8) -> bool {
    let sv = b.svd(false, false).singular_values;
    let max = sv.max();
    max > 0.0 && sv.min() > RANK_TOL * max
}

/// Moore-Penrose right inverse `B^T (B B^T)^-1`, evaluated as `Q R^-T` from
/// the QR factorization of `B^T` so the condition number is not squared.
pub fn pseudoinverse(b: &Mat5x8) -> Result<Mat8x5> {
    let singular = Error::SingularMatrix("effectiveness matrix is rank deficient");
    if !full_row_rank(b) {
        return Err(singular);
    }
    let qr = b.transpose().qr();
    let r_inv_t = qr.r().transpose().try_inverse().ok_or(singular)?;
    Ok(qr.q() * r_inv_t)
}

/// Minimum-norm actuator rates producing `nu_dot`.
pub fn pseudoinverse_alloc(b: &Mat5x8, nu_dot: &Vec5) -> Result<Vec8> {
    Ok(pseudoinverse(b)? * nu_dot)
}

/// Admissible actuator rates for the current step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateBounds {
    pub lower: Vec8,
    pub upper: Vec8,
}

fn channel_bounds(x: f64, l: &ChannelLimits) -> (f64, f64) {
    let upper = l.rate_max.min(l.bandwidth * (l.max - x));
    let lower = l.rate_min.max(l.bandwidth * (l.min - x));
    // Outside the range the bounds would exclude zero rate; keep it feasible.
    (lower.min(0.0), upper.max(0.0))
}

/// Phase-plane rate bounds that keep each channel inside its absolute range.
pub fn rate_bounds(suite: &ActuatorSuite, limits: &ActuatorLimits) -> RateBounds {
    let mut lower = Vec8::zeros();
    let mut upper = Vec8::zeros();
    for i in 0..4 {
        (lower[i], upper[i]) = channel_bounds(suite.omega[i], &limits.rotor_speed);
        (lower[i + 4], upper[i + 4]) = channel_bounds(suite.gamma[i], &limits.tilt);
    }
    RateBounds { lower, upper }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AllocationResult {
    pub udot: Vec8,
    /// Achieved fraction of the demanded pseudo-control rate.
    pub c: f64,
    pub iterations: usize,
    pub saturated: [bool; 8],
    /// Set when the remaining channels lost full rank before `c` reached one.
    pub rank_deficient: bool,
}

impl AllocationResult {
    pub fn saturated_count(&self) -> usize {
        self.saturated.iter().filter(|&&s| s).count()
    }
}

/// Explicit redistributed pseudoinverse: scales the demand uniformly while
/// freezing channels as they reach their rate bounds.
pub fn erp_alloc(b: &Mat5x8, nu_dot: &Vec5, bounds: &RateBounds) -> AllocationResult {
    let mut res = AllocationResult {
        udot: Vec8::zeros(),
        c: 0.0,
        iterations: 0,
        saturated: [false; 8],
        rank_deficient: false,
    };
    if nu_dot.iter().all(|&x| x == 0.0) {
        res.c = 1.0;
        return res;
    }
    while res.c < 1.0 {
        let mut be = *b;
        for (j, &sat) in res.saturated.iter().enumerate() {
            if sat {
                be.column_mut(j).fill(0.0);
            }
        }
        let pinv = match pseudoinverse(&be) {
            Ok(p) => p,
            Err(_) => {
                res.rank_deficient = true;
                break;
            }
        };
        res.iterations += 1;
        let du = pinv * nu_dot;

        let mut dbar = [f64::INFINITY; 8];
        for i in 0..8 {
            if res.saturated[i] {
                continue;
            }
            let room = if du[i] > 0.0 {
                bounds.upper[i] - res.udot[i]
            } else if du[i] < 0.0 {
                bounds.lower[i] - res.udot[i]
            } else {
                continue;
            };
            dbar[i] = (room / du[i]).max(0.0);
        }
        let d_max = dbar.iter().cloned().fold(f64::INFINITY, f64::min);
        let remaining = 1.0 - res.c;
        if d_max >= remaining {
            res.udot += du * remaining;
            res.c = 1.0;
            break;
        }
        res.udot += du * d_max;
        res.c += d_max;
        let tie = d_max + 1e-12 * d_max.max(1.0);
        for i in 0..8 {
            if !res.saturated[i] && dbar[i] <= tie {
                res.saturated[i] = true;
                res.udot[i] = if du[i] > 0.0 {
                    bounds.upper[i]
                } else {
                    bounds.lower[i]
                };
            }
        }
    }
    for i in 0..8 {
        res.udot[i] = res.udot[i].clamp(bounds.lower[i], bounds.upper[i]);
    }
    res
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceConfig {
    /// Airspeed above which the surfaces are allocated, m/s.
    pub activation_speed: f64,
    /// Deflection limit used by the allocator, rad.
    pub limit: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            activation_speed: 3.0,
            limit: 35f64.to_radians(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SurfaceAllocation {
    pub eta: [f64; 3],
    /// Moment the allocated deflections produce.
    pub moment: Vec3,
    pub scale: f64,
    pub active: bool,
}

/// Allocates the desired moment to the tail surfaces, scaled down uniformly
/// when any deflection would exceed the allocator limit.
pub fn surface_alloc(
    m_des: &Vec3,
    airspeed: f64,
    rho: f64,
    fins: &FinParams,
    cfg: &SurfaceConfig,
) -> SurfaceAllocation {
    let q = surface_scale(fins, airspeed, rho);
    if airspeed <= cfg.activation_speed || q <= 0.0 {
        return SurfaceAllocation::default();
    }
    let bs = surface_effectiveness(fins) * q;
    let Some(inv) = bs.try_inverse() else {
        return SurfaceAllocation::default();
    };
    let eta_delta = inv * m_des;
    let mut d: f64 = 1.0;
    for e in eta_delta.iter() {
        if *e != 0.0 {
            d = d.min(cfg.limit / e.abs());
        }
    }
    let eta = eta_delta * d;
    SurfaceAllocation {
        eta: [eta.x, eta.y, eta.z],
        moment: bs * eta,
        scale: d,
        active: true,
    }
}

/// Surface effectiveness scaled by dynamic pressure; exposed for diagnostics.
pub fn surface_matrix(fins: &FinParams, airspeed: f64, rho: f64) -> Mat3 {
    surface_effectiveness(fins) * surface_scale(fins, airspeed, rho)
}

/// Preferred tilt angles: moment-optimal in hover, nearly horizontal thrust
/// in cruise, blended linearly in between.
pub fn tilt_targets(airspeed: f64, front: &[bool; 4]) -> [f64; 4] {
    let blend = (airspeed.max(0.0) / 5.0).min(1.0);
    let cruise = 85f64.to_radians();
    front.map(|f| {
        let hover = if f { 45f64 } else { -45f64 }.to_radians();
        hover + (cruise - hover) * blend
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullspaceConfig {
    pub gain_speed: f64,
    pub gain_tilt: f64,
}

impl Default for NullspaceConfig {
    fn default() -> Self {
        Self {
            gain_speed: 0.0,
            gain_tilt: 1000.0,
        }
    }
}

/// Rates projected onto the nullspace of `b` that steer the actuators toward
/// zero rotor speed and the preferred tilts.
pub fn nullspace_rates(
    b: &Mat5x8,
    suite: &ActuatorSuite,
    gamma_opt: &[f64; 4],
    cfg: &NullspaceConfig,
) -> Result<Vec8> {
    let pinv = pseudoinverse(b)?;
    let projector = Mat8::identity() - pinv * b;
    let mut desired = Vec8::zeros();
    for i in 0..4 {
        desired[i] = cfg.gain_speed * (0.0 - suite.omega[i]);
        desired[i + 4] = cfg.gain_tilt * (gamma_opt[i] - suite.gamma[i]);
    }
    Ok(projector * desired)
}

/// Largest `s` in `[0, 1]` with `udot + s * extra` inside the bounds.
pub fn fit_within_bounds(udot: &Vec8, extra: &Vec8, bounds: &RateBounds) -> f64 {
    let mut s: f64 = 1.0;
    for i in 0..8 {
        let e = extra[i];
        if e > 0.0 {
            s = s.min((bounds.upper[i] - udot[i]) / e);
        } else if e < 0.0 {
            s = s.min((bounds.lower[i] - udot[i]) / e);
        }
    }
    s.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::wrench::propulsion_nu;
    use proptest::prelude::*;

    fn params() -> AirshipParams {
        AirshipParams::default()
    }

    #[test]
    fn stopped_rotors_have_no_tilt_authority() {
        let b = control_effectiveness(&params(), &[0.0; 4], &[0.3, 1.0, -0.2, 2.0]);
        assert_eq!(b.fixed_columns::<4>(4).norm(), 0.0);
        let b = control_effectiveness(&params(), &[100.0; 4], &[0.0; 4]);
        for i in 0..4 {
            assert_eq!(b[(3, i)], 0.0);
        }
    }

    #[test]
    fn pseudoinverse_basic_properties() {
        let b = control_effectiveness(&params(), &[150.0, 120.0, 130.0, 140.0], &[0.8, -0.8, -0.7, 0.9]);
        assert_eq!(pseudoinverse_alloc(&b, &Vec5::zeros()).unwrap(), Vec8::zeros());
        let nu = Vec5::new(10.0, -20.0, 5.0, 30.0, -15.0);
        let u = pseudoinverse_alloc(&b, &nu).unwrap();
        assert!((b * u - nu).norm() < 1e-10 * nu.norm());
        assert!(pseudoinverse(&Mat5x8::zeros()).is_err());
    }

    #[test]
    fn rate_bound_cases() {
        let l = params().limits;
        let mut s = ActuatorSuite {
            omega: [340.0, 170.0, 0.0, 339.0],
            ..Default::default()
        };
        s.gamma[0] = 255f64.to_radians();
        let rb = rate_bounds(&s, &l);
        assert_eq!(rb.upper[0], 0.0);
        assert_eq!(rb.upper[1], 156.0);
        assert_eq!(rb.lower[1], -135.0);
        assert_eq!(rb.lower[2], 0.0);
        assert!((rb.upper[3] - 20.0).abs() < 1e-12);
        assert!(rb.upper[4].abs() < 1e-12);
        assert_eq!(rb.lower[5], -45f64.to_radians());
    }

    #[test]
    fn bounds_below_range_still_admit_zero_rate() {
        let mut l = params().limits;
        l.rotor_speed.min = 15.0;
        let s = ActuatorSuite {
            omega: [10.0, 15.0, 100.0, 100.0],
            ..Default::default()
        };
        let rb = rate_bounds(&s, &l);
        assert_eq!((rb.lower[0], rb.upper[0]), (0.0, 156.0));
        assert_eq!((rb.lower[1], rb.upper[1]), (0.0, 156.0));
        assert_eq!(rb.lower[2], -135.0);
    }

    #[test]
    fn erp_zero_demand() {
        let b = control_effectiveness(&params(), &[150.0; 4], &[0.5; 4]);
        let rb = rate_bounds(&ActuatorSuite::default(), &params().limits);
        let r = erp_alloc(&b, &Vec5::zeros(), &rb);
        assert_eq!((r.udot, r.c), (Vec8::zeros(), 1.0));
    }

    #[test]
    fn surface_cases() {
        let p = params();
        let cfg = SurfaceConfig::default();
        let m = Vec3::new(5.0, -20.0, 10.0);
        assert_eq!(
            surface_alloc(&m, 2.0, 1.225, &p.fins, &cfg),
            SurfaceAllocation::default()
        );
        let small = surface_alloc(&m, 10.0, 1.225, &p.fins, &cfg);
        assert_eq!(small.scale, 1.0);
        assert!((small.moment - m).norm() < 1e-9);
        let huge = m * 1e4;
        let big = surface_alloc(&huge, 10.0, 1.225, &p.fins, &cfg);
        assert!(big.eta.iter().all(|e| e.abs() <= cfg.limit * (1.0 + 1e-12)));
        assert!((big.moment - huge * big.scale).norm() < 1e-8 * huge.norm());
        assert!(big.scale < 1.0);
    }

    #[test]
    fn tilt_target_cases() {
        let front = [true, false, false, true];
        let d = |x: f64| x.to_radians();
        assert_eq!(tilt_targets(0.0, &front), [d(45.0), d(-45.0), d(-45.0), d(45.0)]);
        for g in tilt_targets(5.0, &front) {
            assert!((g - d(85.0)).abs() < 1e-15);
        }
        let mid = tilt_targets(2.5, &front);
        assert!((mid[0] - d(65.0)).abs() < 1e-12 && (mid[1] - d(20.0)).abs() < 1e-12);
    }

    #[test]
    fn nullspace_at_target_is_zero() {
        let front = [true, false, false, true];
        let g = tilt_targets(0.0, &front);
        let suite = ActuatorSuite {
            omega: [0.0; 4],
            gamma: g,
            eta: [0.0; 3],
        };
        let b = control_effectiveness(&params(), &[100.0; 4], &g);
        let u = nullspace_rates(&b, &suite, &g, &NullspaceConfig::default()).unwrap();
        assert_eq!(u, Vec8::zeros());
    }

    fn rotor_state() -> impl Strategy<Value = ([f64; 4], [f64; 4])> {
        (
            proptest::array::uniform4(20.0f64..340.0),
            proptest::array::uniform4(-1.3f64..4.4),
        )
    }

    proptest! {
        #[test]
        fn effectiveness_matches_finite_differences((om, ga) in rotor_state()) {
            let p = params();
            let b = control_effectiveness(&p, &om, &ga);
            let h = 1e-5;
            for j in 0..8 {
                let (mut up, mut dn) = ((om, ga), (om, ga));
                if j < 4 { up.0[j] += h; dn.0[j] -= h; } else { up.1[j - 4] += h; dn.1[j - 4] -= h; }
                let fd = (propulsion_nu(&p, &up.0, &up.1) - propulsion_nu(&p, &dn.0, &dn.1)) / (2.0 * h);
                let col = b.column(j);
                prop_assert!((fd - col).norm() <= 1e-6 * (1.0 + col.norm()));
            }
        }

        #[test]
        fn pseudoinverse_is_minimum_norm((om, ga) in rotor_state(), n in proptest::array::uniform8(-1.0f64..1.0)) {
            let b = control_effectiveness(&params(), &om, &ga);
            let pinv = pseudoinverse(&b).unwrap();
            let nu = Vec5::new(3.0, -1.0, 2.0, 5.0, 4.0);
            let u = pinv * nu;
            let kernel = (Mat8::identity() - pinv * b) * Vec8::from(n);
            prop_assert!(u.norm() <= (u + kernel).norm() + 1e-12);
        }

        #[test]
        fn nullspace_projection_properties((om, ga) in rotor_state(), v in 0.0f64..8.0) {
            let p = params();
            let b = control_effectiveness(&p, &om, &ga);
            let suite = ActuatorSuite { omega: om, gamma: ga, eta: [0.0; 3] };
            let front = [true, false, false, true];
            let cfg = NullspaceConfig { gain_speed: 0.5, gain_tilt: 0.5 };
            let g = tilt_targets(v, &front);
            let u = nullspace_rates(&b, &suite, &g, &cfg).unwrap();
            let mut desired = Vec8::zeros();
            for i in 0..4 {
                desired[i] = -0.5 * om[i];
                desired[i + 4] = 0.5 * (g[i] - ga[i]);
            }
            prop_assert!((b * u).norm() <= 1e-9 * b.norm() * desired.norm());
            let pinv = pseudoinverse(&b).unwrap();
            let proj = Mat8::identity() - pinv * b;
            prop_assert!((proj * proj - proj).abs().max() < 1e-9);
        }
    }
}
