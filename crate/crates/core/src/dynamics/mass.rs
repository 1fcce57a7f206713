//! Mass properties: generalized mass matrix, added-mass factors of a prolate
//! spheroid and thin-shell inertia.

use std::f64::consts::PI;

use crate::math::{skew, Mat3, Mat6};
use crate::params::AirshipParams;
use crate::{Error, Result};

/// Generalized mass matrix `[[M_a, -m r x], [m r x, J_a]]` about the reference point.
pub fn generalized_mass(p: &AirshipParams) -> Mat6 {
    let mr = skew(&p.r_cg) * p.mass;
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&p.total_mass_matrix());
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-mr));
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&mr);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&p.total_inertia());
    m
}

/// Inverse of the generalized mass matrix.
pub fn generalized_mass_inverse(p: &AirshipParams) -> Result<Mat6> {
    let m = generalized_mass(p);
    let inv = m
        .try_inverse()
        .ok_or(Error::SingularMatrix("generalized mass matrix"))?;
    if !inv.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularMatrix("generalized mass matrix"));
    }
    Ok(inv)
}

/// Added-mass factors `(k1, k2, k3)` of a prolate spheroid with semi-axes
/// `a > b`: axial, transverse and rotational.
pub fn added_mass_factors(a: f64, b: f64) -> Result<(f64, f64, f64)> {
    if !(a.is_finite() && b.is_finite() && b > 0.0 && a > b) {
        return Err(Error::UnsupportedShape(format!(
            "semi-axes a = {a}, b = {b}: only prolate spheroids (a > b > 0) are supported"
        )));
    }
    let e2 = 1.0 - (b / a).powi(2);
    let e = e2.sqrt();
    if e < 1e-4 {
        // Series about the sphere avoids cancellation in the closed forms.
        let k12 = 0.5;
        return Ok((k12 - 0.1 * e2, k12 + 0.05 * e2, 0.0));
    }
    let log = ((1.0 + e) / (1.0 - e)).ln();
    let alpha0 = 2.0 * (1.0 - e2) / e.powi(3) * (0.5 * log - e);
    let beta0 = 1.0 / e2 - (1.0 - e2) / (2.0 * e.powi(3)) * log;
    let k1 = alpha0 / (2.0 - alpha0);
    let k2 = beta0 / (2.0 - beta0);
    let d = beta0 - alpha0;
    let k3 = e2 * e2 * d / ((2.0 - e2) * (2.0 * e2 - (2.0 - e2) * d));
    Ok((k1, k2, k3))
}

/// Inertia about the centroid of a thin prolate-spheroidal shell of uniform
/// areal density and total mass `m`.
pub fn shell_inertia(a: f64, b: f64, m: f64) -> Mat3 {
    // Parametrize x = a cos t, radius = b sin t; Simpson over t in [0, pi].
    let n = 2000;
    let h = PI / n as f64;
    let (mut area, mut jxx, mut jyy) = (0.0, 0.0, 0.0);
    for k in 0..=n {
        let t = k as f64 * h;
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let (s, c) = t.sin_cos();
        let x = a * c;
        let rad = b * s;
        let da = 2.0 * PI * rad * (a * a * s * s + b * b * c * c).sqrt();
        area += w * da;
        jxx += w * da * rad * rad;
        jyy += w * da * (x * x + 0.5 * rad * rad);
    }
    let sigma = m / area;
    Mat3::from_diagonal(&nalgebra::Vector3::new(jxx * sigma, jyy * sigma, jyy * sigma))
}
