//! Points and arcs of the circle `T = [0, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reduce a real number modulo 1 into `[0, 1)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Circle distance `|x - y|` in `[0, 1/2]`.
#[inline]
pub fn circle_dist(x: f64, y: f64) -> f64 {
    // |x - y| rounds the same either way round, so the distance is symmetric
    let d = wrap((x - y).abs());
    d.min(1.0 - d)
}

/// A closed arc `[start, start + length]` taken mod 1.
///
/// `length == 0` is a single point and `length == 1` the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || !length.is_finite() {
            return Err(domain("arc parameters must be finite"));
        }
        if !(0.0..=1.0).contains(&length) {
            return Err(domain(format!("arc length {length} outside [0, 1]")));
        }
        if length == 1.0 {
            return Ok(Self::full());
        }
        Ok(Self {
            start: wrap(start),
            length,
        })
    }

    /// Arc running counterclockwise from `a` to `b` (`b >= a`, `b - a <= 1`).
    pub fn from_endpoints(a: f64, b: f64) -> Result<Self> {
        if b < a {
            return Err(domain(format!("arc end {b} precedes start {a}")));
        }
        Self::new(a, b - a)
    }

    pub fn point(x: f64) -> Self {
        Self {
            start: wrap(x),
            length: 0.0,
        }
    }

    pub fn full() -> Self {
        Self {
            start: 0.0,
            length: 1.0,
        }
    }

    /// Arc of the given length centered at `center`.
    pub fn centered(center: f64, length: f64) -> Result<Self> {
        Self::new(center - 0.5 * length, length)
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn is_point(&self) -> bool {
        self.length == 0.0
    }

    pub fn is_full(&self) -> bool {
        self.length >= 1.0
    }

    pub fn midpoint(&self) -> f64 {
        wrap(self.start + 0.5 * self.length)
    }

    /// Closed-arc membership.
    pub fn contains(&self, x: f64) -> bool {
        self.is_full() || wrap(x - self.start) <= self.length
    }

    /// Linear pieces of the closed arc on `[0, 1]` after cutting at 0.
    pub(crate) fn linear_pieces(&self) -> ([f64; 2], Option<[f64; 2]>) {
        if self.is_full() {
            return ([0.0, 1.0], None);
        }
        let end = self.end();
        if end <= 1.0 {
            ([self.start, end], None)
        } else {
            ([self.start, 1.0], Some([0.0, end - 1.0]))
        }
    }
}
