//! Arithmetic on the universal covering line of the circle.

use crate::{Error, Result, TAU};
use std::f64::consts::PI;

/// A point `omega` of the covering line, remembering how often it wound around.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringPoint {
    pub omega: f64,
}

impl CoveringPoint {
    pub fn new(omega: f64) -> Self {
        Self { omega }
    }

    /// Base point in `[0, 2pi)`.
    pub fn hat(&self) -> f64 {
        project(self.omega).0
    }

    pub fn winding(&self) -> i64 {
        project(self.omega).1
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self::new(self.omega + delta)
    }
}

/// Splits `omega = hat + 2 pi n` with `hat` in `[0, 2pi)`.
pub fn project(omega: f64) -> (f64, i64) {
    let n = (omega / TAU).floor();
    let mut hat = omega - TAU * n;
    let mut n = n as i64;
    // floor() can land one ulp off for values just below a multiple of 2pi
    if hat >= TAU {
        hat -= TAU;
        n += 1;
    }
    if hat < 0.0 {
        hat += TAU;
        n -= 1;
        if hat >= TAU {
            hat = 0.0;
            n += 1;
        }
    }
    (hat, n)
}

pub fn hat(omega: f64) -> f64 {
    project(omega).0
}

pub fn winding_number(omega: f64) -> i64 {
    project(omega).1
}

/// Open interval `(center - half_width, center + half_width)` on the covering line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringInterval {
    pub center: CoveringPoint,
    pub half_width: f64,
}

impl CoveringInterval {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width < PI) || !center.is_finite() {
            return Err(Error::Invalid(format!(
                "interval half-width {half_width} must lie in (0, pi)"
            )));
        }
        Ok(Self {
            center: CoveringPoint::new(center),
            half_width,
        })
    }

    pub fn contains(&self, omega: f64) -> bool {
        (omega - self.center.omega).abs() < self.half_width
    }

    /// True if the base point `x` lies in the projected open arc.
    pub fn projection_contains(&self, x: f64) -> bool {
        circular_distance(x, self.center.omega) < self.half_width
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            center: self.center.shifted(delta),
            half_width: self.half_width,
        }
    }

    /// Translate by `k` full turns.
    pub fn wound(&self, k: i64) -> Self {
        self.shifted(TAU * k as f64)
    }

    pub fn lower(&self) -> f64 {
        self.center.omega - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center.omega + self.half_width
    }
}

/// Distance on the circle between the projections of `a` and `b`, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = hat(a - b);
    d.min(TAU - d)
}

/// Whether the open projected arcs are disjoint. Touching arcs count as disjoint.
pub fn projections_disjoint(i1: &CoveringInterval, i2: &CoveringInterval) -> bool {
    circular_distance(i1.center.omega, i2.center.omega) >= i1.half_width + i2.half_width
}

/// `N(I1, I2) = n(omega1 - omega2)`, constant over the intervals once their projections are disjoint.
pub fn relative_winding(i1: &CoveringInterval, i2: &CoveringInterval) -> Result<i64> {
    if !projections_disjoint(i1, i2) {
        return Err(Error::Overlap);
    }
    Ok(winding_number(i1.center.omega - i2.center.omega))
}
