//! Small numeric helpers shared across modules.

#[cfg(not(feature = "std"))]
use num_traits::Float;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Signed area (z component of the cross product) of the planar triangle
/// spanned by `a` and `b` from the origin.
#[inline]
pub(crate) fn cross2(a: &Vec3, b: &Vec3) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Angle of the xy-projection of `v` in `[0, 2π)`.
#[inline]
pub(crate) fn angle2(v: &Vec3) -> f64 {
    let a = v.y.atan2(v.x);
    if a < 0.0 {
        a + 2.0 * core::f64::consts::PI
    } else {
        a
    }
}

/// Quantize a coordinate for use as an exact lookup key.
#[inline]
pub(crate) fn quantize(x: f64, step: f64) -> i64 {
    (x / step).round() as i64
}

pub(crate) fn quantize3(v: &Vec3, step: f64) -> [i64; 3] {
    [quantize(v.x, step), quantize(v.y, step), quantize(v.z, step)]
}
