//! Compensated and log-space accumulators.
//!
//! Long series (10^6 terms and more) are summed with Neumaier's variant of
//! Kahan summation. Sums of exponentials are carried as logarithms so that
//! `exp(a * S_n)` never overflows while it is being accumulated.

use serde::{Deserialize, Serialize};

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Streaming `log(sum(exp(x_i)))`.
///
/// The running maximum is kept as the pivot; the scaled remainder is a
/// compensated sum, so a long run of tiny terms is not lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSumExp {
    pivot: f64,
    scaled: CompensatedSum,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            pivot: f64::NEG_INFINITY,
            scaled: CompensatedSum::new(),
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add_log(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term <= self.pivot {
            self.scaled.add((log_term - self.pivot).exp());
        } else {
            let rescale = (self.pivot - log_term).exp();
            let old = self.scaled.value();
            self.scaled = CompensatedSum::new();
            self.scaled.add(old * rescale);
            self.scaled.add(1.0);
            self.pivot = log_term;
        }
    }

    /// Logarithm of the accumulated sum; `-inf` when nothing was added.
    pub fn log_value(&self) -> f64 {
        if self.pivot == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.pivot + self.scaled.value().ln()
        }
    }

    /// The accumulated sum itself. Saturates to `+inf`.
    pub fn value(&self) -> f64 {
        self.log_value().exp()
    }
}

/// `log(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log(exp(a) - exp(b))` for `a >= b`; `-inf` when equal.
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// A positive quantity carried by its natural logarithm.
///
/// `log > OVERFLOW_LOG` is reported as overflowed: the value itself is not
/// representable in `f64` (or close to it) but comparisons on `log` stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log: f64,
}

/// Threshold above which exponentials are flagged instead of evaluated.
pub const OVERFLOW_LOG: f64 = 700.0;

impl LogValue {
    pub fn from_log(log: f64) -> Self {
        Self { log }
    }

    pub fn from_value(x: f64) -> Self {
        Self { log: x.ln() }
    }

    pub fn overflowed(&self) -> bool {
        self.log > OVERFLOW_LOG
    }

    /// The value, or `None` when it is flagged as overflowed.
    pub fn value(&self) -> Option<f64> {
        if self.overflowed() {
            None
        } else {
            Some(self.log.exp())
        }
    }
}
