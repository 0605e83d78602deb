//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Complex amplitude over a real scalar `T`.
pub type Complex<T> = num_complex::Complex<T>;

/// Real floating-point scalar: implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// A comparison threshold of `base`, never tighter than a few dozen ulps
    /// of the scalar type. Thresholds are calibrated for `f64`; on `f32` they
    /// saturate at the type's resolution.
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::lit(64.0))
    }

    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduces an angle into the half-open window `(-π, π]`.
pub fn reduce_phase<T: Real>(x: T) -> T {
    let r = x.rem_euclid(&T::two_pi());
    if r > T::PI() {
        r - T::two_pi()
    } else {
        r
    }
}

/// Distance between two phases on the circle, in `[0, π]`.
pub fn phase_distance<T: Real>(a: T, b: T) -> T {
    reduce_phase(a - b).abs()
}

/// Reduces a solid angle into `(-2π, 2π]`.
pub fn reduce_solid_angle<T: Real>(x: T) -> T {
    let four_pi = T::two_pi() + T::two_pi();
    let r = x.rem_euclid(&four_pi);
    if r > T::two_pi() {
        r - four_pi
    } else {
        r
    }
}

trait RemEuclid {
    fn rem_euclid(&self, m: &Self) -> Self;
}

impl<T: Real> RemEuclid for T {
    fn rem_euclid(&self, m: &Self) -> Self {
        let r = *self % *m;
        if r < T::zero() {
            r + *m
        } else {
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phase_window_is_half_open() {
        assert_eq!(reduce_phase(PI), PI);
        assert!((reduce_phase(-PI) - PI).abs() < 1e-15);
        assert!((reduce_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((reduce_phase(-7.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(reduce_phase(0.0_f64), 0.0);
    }

    #[test]
    fn boundary_phases_are_close() {
        assert!(phase_distance(PI, -PI + 1e-9) < 2e-9);
    }

    #[test]
    fn solid_angle_window() {
        assert!((reduce_solid_angle(2.0 * PI) - 2.0 * PI).abs() < 1e-15);
        assert!((reduce_solid_angle(-2.0 * PI) - 2.0 * PI).abs() < 1e-12);
        assert!((reduce_solid_angle(3.0 * PI) + PI).abs() < 1e-12);
    }

    #[test]
    fn tolerance_floor_tracks_precision() {
        assert_eq!(f64::tol(1e-9), 1e-9);
        assert!(f32::tol(1e-12) > 1e-6);
    }
}
