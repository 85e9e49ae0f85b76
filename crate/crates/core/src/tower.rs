//! Iterated-exponential numbers for block schedules.
//!
//! The block constructions grow indices like `exp(exp(...))`; a `Tower`
//! holds `exp^level(v)` so that block lengths, their logarithms and the
//! partial sums built from them stay comparable without overflow. Precision
//! is that of `v`, which is all the schedule logic needs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::summation::log_add;

// just below ln(f64::MAX), so every level-1 value exceeds every level-0 value
const DEMOTE: f64 = 709.78;

/// The number `exp^level(v)`.
///
/// Level 0 holds an ordinary (possibly negative) `f64`; higher levels hold
/// `v > 709.78` so the representation is unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub level: u32,
    pub v: f64,
}

impl Tower {
    pub const ZERO: Tower = Tower { level: 0, v: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { level: 0, v: x }
    }

    /// `exp(l)`.
    pub fn exp_of(l: Tower) -> Self {
        Self {
            level: l.level + 1,
            v: l.v,
        }
        .normalize()
    }

    /// `exp(l)` for an ordinary logarithm.
    pub fn from_ln(l: f64) -> Self {
        Self::exp_of(Self::new(l))
    }

    fn normalize(mut self) -> Self {
        while self.level > 0 && self.v <= DEMOTE {
            self.v = self.v.exp();
            self.level -= 1;
        }
        self
    }

    pub fn is_huge(&self) -> bool {
        self.level > 0
    }

    /// The value as `f64`, saturating to `+inf`.
    pub fn to_f64(&self) -> f64 {
        if self.level == 0 {
            self.v
        } else {
            f64::INFINITY
        }
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(&self) -> Tower {
        if self.level == 0 {
            Tower::new(self.v.ln())
        } else {
            Tower {
                level: self.level - 1,
                v: self.v,
            }
        }
    }

    /// `ln` as an `f64`, saturating to `+inf`.
    pub fn ln_f64(&self) -> f64 {
        self.ln().to_f64()
    }

    /// Sum of two nonnegative numbers.
    pub fn add(self, other: Tower) -> Tower {
        if self.level == 0 && other.level == 0 {
            let s = self.v + other.v;
            if s.is_finite() {
                return Tower::new(s);
            }
        }
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (p, q) = (self.ln(), other.ln());
        let l = if p.level == 0 && q.level == 0 {
            Tower::new(log_add(p.v, q.v))
        } else {
            p.max(q)
        };
        Tower::exp_of(l)
    }

    /// `self - other` for `self >= other >= 0`.
    pub fn sub(self, other: Tower) -> Tower {
        if self.level == 0 && other.level == 0 {
            return Tower::new((self.v - other.v).max(0.0));
        }
        if other.is_zero() {
            return self;
        }
        let d = ln_ratio(other, self);
        if d == f64::NEG_INFINITY {
            return self;
        }
        let l = self.ln();
        let shift = (-d.exp()).ln_1p();
        Tower::exp_of(l.add_signed(shift))
    }

    /// Product with a positive constant.
    pub fn mul(self, c: f64) -> Tower {
        if self.level == 0 {
            let p = self.v * c;
            if p.is_finite() {
                return Tower::new(p);
            }
        }
        Tower::exp_of(self.ln().add_signed(c.ln()))
    }

    /// Add an ordinary (possibly negative) number.
    fn add_signed(self, x: f64) -> Tower {
        if self.level == 0 {
            Tower::new(self.v + x)
        } else {
            self
        }
    }

    fn is_zero(&self) -> bool {
        self.level == 0 && self.v == 0.0
    }

    pub fn max(self, other: Tower) -> Tower {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Tower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.level.cmp(&other.level) {
            Ordering::Equal => self.v.partial_cmp(&other.v),
            o => Some(o),
        }
    }
}

/// `ln(x / y)` for positive `x`, `y`; `+-inf` when it exceeds `f64` range.
pub fn ln_ratio(x: Tower, y: Tower) -> f64 {
    let (p, q) = (x.ln(), y.ln());
    if p.level == 0 && q.level == 0 {
        return p.v - q.v;
    }
    match p.partial_cmp(&q) {
        Some(Ordering::Greater) => f64::INFINITY,
        Some(Ordering::Less) => f64::NEG_INFINITY,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_are_plain() {
        let a = Tower::new(3.0).add(Tower::new(4.0));
        assert_eq!(a, Tower::new(7.0));
        assert_eq!(Tower::from_ln(2.0).to_f64(), 2f64.exp());
    }

    #[test]
    fn overflow_moves_up_a_level() {
        let big = Tower::from_ln(1000.0);
        assert_eq!(big.level, 1);
        assert_eq!(big.ln_f64(), 1000.0);
        let twice = big.add(big);
        assert!((twice.ln_f64() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let m = big.mul(0.5);
        assert!((m.ln_f64() - (1000.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn subtraction_in_log_space() {
        let a = Tower::from_ln(1000.0);
        let b = Tower::from_ln(999.0);
        let d = a.sub(b);
        let want = 1000.0 + (-(-1f64).exp()).ln_1p();
        assert!((d.ln_f64() - want).abs() < 1e-12);
        assert_eq!(a.sub(Tower::new(5.0)), a);
    }

    #[test]
    fn ordering_respects_levels() {
        let a = Tower::from_ln(1e30);
        let b = Tower::exp_of(Tower::from_ln(800.0));
        assert!(b > a);
        assert!(Tower::new(1e300) < Tower::from_ln(800.0));
        assert_eq!(ln_ratio(Tower::from_ln(1e30), Tower::new(5.0)), 1e30 - 5f64.ln());
    }

    #[test]
    fn double_exponential_sum_keeps_dominant_term() {
        let huge = Tower::exp_of(Tower::from_ln(800.0));
        assert_eq!(huge.level, 2);
        assert_eq!(huge.add(Tower::from_ln(1e6)), huge);
        assert_eq!(ln_ratio(Tower::from_ln(1e6), huge), f64::NEG_INFINITY);
    }
}
