//! Attitude kinematics for the roll-pitch-yaw Euler sequence.

use crate::math::{Mat3, Vec3};
use crate::{Error, Result};

/// Guard band around the pitch singularity, rad.
pub const PITCH_GUARD: f64 = 1e-3;

fn r1(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

fn r2(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

fn r3(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Transformation from the NED frame to the body frame.
pub fn body_from_ned(att: &Vec3) -> Mat3 {
    r1(att.x) * r2(att.y) * r3(att.z)
}

/// Transformation from the body frame to the heading-aligned carrier frame
/// (NED rotated by the azimuth).
pub fn carrier_from_body(att: &Vec3) -> Mat3 {
    (r1(att.x) * r2(att.y)).transpose()
}

/// Rotation about the body y-axis used to tilt velocity commands.
pub fn rot_y(theta: f64) -> Mat3 {
    r2(theta)
}

pub fn check_pitch(att: &Vec3) -> Result<()> {
    if !att.y.is_finite() || att.y.abs() > std::f64::consts::FRAC_PI_2 - PITCH_GUARD {
        return Err(Error::Singularity { theta: att.y });
    }
    Ok(())
}

/// Matrix mapping body rates to Euler-angle rates.
pub fn euler_rate_matrix(att: &Vec3) -> Result<Mat3> {
    check_pitch(att)?;
    let (sp, cp) = att.x.sin_cos();
    let (st, ct) = att.y.sin_cos();
    let tt = st / ct;
    Ok(Mat3::new(
        1.0,
        sp * tt,
        cp * tt,
        0.0,
        cp,
        -sp,
        0.0,
        sp / ct,
        cp / ct,
    ))
}

pub fn euler_rates(att: &Vec3, omega: &Vec3) -> Result<Vec3> {
    Ok(euler_rate_matrix(att)? * omega)
}

/// Body rates producing the given Euler-angle rates.
pub fn body_rates_from_euler(att: &Vec3, euler_dot: &Vec3) -> Result<Vec3> {
    check_pitch(att)?;
    let (sp, cp) = att.x.sin_cos();
    let (st, ct) = att.y.sin_cos();
    let (pd, td, yd) = (euler_dot.x, euler_dot.y, euler_dot.z);
    Ok(Vec3::new(
        pd - yd * st,
        td * cp + yd * sp * ct,
        -td * sp + yd * cp * ct,
    ))
}
