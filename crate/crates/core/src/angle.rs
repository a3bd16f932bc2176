use std::f64::consts::{PI, TAU};
use std::ops::Sub;

/// An orientation on the circle, stored normalized to `[0, 2π)`.
///
/// Two angles that differ by a whole number of turns normalize to the same
/// representative and compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(f64);

impl Angle {
    /// Wraps an arbitrary angle in radians into `[0, 2π)`.
    pub fn new(radians: f64) -> Self {
        debug_assert!(radians.is_finite(), "angle must be finite, got {radians}");
        let wrapped = radians.rem_euclid(TAU);
        // rem_euclid can round up to exactly 2π for tiny negative inputs;
        // adding 0.0 also turns a −0.0 remainder into +0.0
        Angle(if wrapped >= TAU { 0.0 } else { wrapped + 0.0 })
    }

    /// The normalized value in `[0, 2π)`.
    pub fn radians(self) -> f64 {
        self.0
    }

    /// The diametrically opposite orientation, `self + π` re-wrapped.
    pub fn antipode(self) -> Self {
        Angle::new(self.0 + PI)
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

impl Sub for Angle {
    type Output = Angle;

    /// Angular difference, re-wrapped into `[0, 2π)`.
    fn sub(self, rhs: Angle) -> Angle {
        Angle::new(self.0 - rhs.0)
    }
}
