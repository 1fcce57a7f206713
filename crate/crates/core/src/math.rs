//! Small linear-algebra helpers shared across modules.

use nalgebra::{SMatrix, SVector};

pub type Vec3 = SVector<f64, 3>;
pub type Vec5 = SVector<f64, 5>;
pub type Vec6 = SVector<f64, 6>;
pub type Vec8 = SVector<f64, 8>;
pub type Mat3 = SMatrix<f64, 3, 3>;
pub type Mat5 = SMatrix<f64, 5, 5>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat5x8 = SMatrix<f64, 5, 8>;
pub type Mat8x5 = SMatrix<f64, 8, 5>;
pub type Mat8 = SMatrix<f64, 8, 8>;

/// Cross-product matrix: `skew(a) * b == a.cross(b)`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Sine and cosine with values below 1e-12 snapped to zero, so that
/// multiples of 90 deg give exact zeros.
pub fn sin_cos_snapped(angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    let snap = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    (snap(s), snap(c))
}

/// Angle between two vectors, zero when either is (numerically) zero.
/// Uses `atan2` so that tiny angles are resolved accurately.
pub fn angle_between<const N: usize>(a: &SVector<f64, N>, b: &SVector<f64, N>) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na < 1e-9 || nb < 1e-9 {
        return 0.0;
    }
    let ua = a / na;
    let ub = b / nb;
    let cos = ua.dot(&ub);
    let sin = (ua - ub * cos).norm();
    sin.atan2(cos)
}

pub fn all_finite<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> bool {
    m.iter().all(|x| x.is_finite())
}
