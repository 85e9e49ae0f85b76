//! The kernel `Phi^(a)(t, s) = exp(a * sum_{n <= N} (l_n - |t - s|)_+)`.

use serde::{Deserialize, Serialize};

use crate::circle::circle_dist;
use crate::error::{domain, Result};
use crate::sequences::LengthSequence;
use crate::summation::LogValue;

/// `(hi, lo)` with `hi + lo = a + b` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Truncated kernel with the lengths and their prefix sums held in memory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelPhi {
    pub a: f64,
    pub seq: LengthSequence,
    pub n: u64,
    lengths: Vec<f64>,
    /// `S_k = sum_{j <= k} l_j` as a double-double, `k = 0..=N`.
    prefix_hi: Vec<f64>,
    prefix_lo: Vec<f64>,
}

impl KernelPhi {
    pub fn new(seq: &LengthSequence, a: f64, n: u64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(domain(format!("intensity a = {a} must be >= 0")));
        }
        if n == 0 {
            return Err(domain("truncation N must be >= 1"));
        }
        let lengths = seq.prefix(n as usize)?;
        let mut prefix_hi = Vec::with_capacity(lengths.len() + 1);
        let mut prefix_lo = Vec::with_capacity(lengths.len() + 1);
        let (mut hi, mut lo) = (0.0, 0.0);
        prefix_hi.push(hi);
        prefix_lo.push(lo);
        for &l in &lengths {
            let (s, e) = two_sum(hi, l);
            lo += e;
            let (h2, l2) = two_sum(s, lo);
            hi = h2;
            lo = l2;
            prefix_hi.push(hi);
            prefix_lo.push(lo);
        }
        Ok(Self {
            a,
            seq: seq.clone(),
            n,
            lengths,
            prefix_hi,
            prefix_lo,
        })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// `S_N`.
    pub fn total(&self) -> f64 {
        self.prefix(self.lengths.len())
    }

    /// `S_k`.
    #[inline]
    pub fn prefix(&self, k: usize) -> f64 {
        self.prefix_hi[k] + self.prefix_lo[k]
    }

    /// `#{n <= N : l_n > u}`.
    #[inline]
    pub fn count_above(&self, u: f64) -> usize {
        self.lengths.partition_point(|&l| l > u)
    }

    /// `S_k - k u` with the product folded into the double-double.
    #[inline]
    pub(crate) fn affine_at(&self, k: usize, u: f64) -> f64 {
        (-(k as f64)).mul_add(u, self.prefix_hi[k]) + self.prefix_lo[k]
    }

    /// `sum_{n <= N} (l_n - u)_+`.
    pub fn kernel_sum(&self, u: f64) -> f64 {
        let k = self.count_above(u);
        self.affine_at(k, u).max(0.0)
    }

    /// `ln Phi(t, s)`.
    pub fn log_phi(&self, t: f64, s: f64) -> f64 {
        self.a * self.kernel_sum(circle_dist(t, s))
    }

    pub fn phi_eval(&self, t: f64, s: f64) -> LogValue {
        LogValue::from_log(self.log_phi(t, s))
    }
}

/// `sum_{n <= N} (l_n - u)_+` without keeping the kernel around.
pub fn kernel_sum(seq: &LengthSequence, u: f64, n: u64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(domain(format!("distance u = {u} must be >= 0")));
    }
    Ok(KernelPhi::new(seq, 0.0, n)?.kernel_sum(u))
}

/// Term-by-term `sum (l_n - u)_+`, the reference for the closed form.
pub fn kernel_sum_brute(lengths: &[f64], u: f64) -> f64 {
    lengths.iter().map(|&l| (l - u).max(0.0)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sum_endpoints() {
        let seq = LengthSequence::harmonic(1.0).unwrap();
        let k = KernelPhi::new(&seq, 1.0, 100).unwrap();
        assert_eq!(k.kernel_sum(0.0), k.total());
        assert_eq!(k.kernel_sum(0.99), 0.0);
        assert_eq!(k.kernel_sum(5.0), 0.0);
    }

    #[test]
    fn kernel_sum_matches_brute_force() {
        let seq = LengthSequence::harmonic(1.0).unwrap();
        let k = KernelPhi::new(&seq, 1.0, 100).unwrap();
        let brute = kernel_sum_brute(k.lengths(), 0.1);
        assert!((k.kernel_sum(0.1) - brute).abs() <= 1e-14 * brute);
        // only n < 10 contribute: S_9 - 9 * 0.1 with l_1 capped
        let want: f64 = 0.99 + (2..10).map(|n| 1.0 / n as f64).sum::<f64>() - 0.9;
        assert!((k.kernel_sum(0.1) - want).abs() < 1e-14);
    }

    #[test]
    fn phi_diagonal_and_far() {
        let seq = LengthSequence::harmonic(0.5).unwrap();
        let k = KernelPhi::new(&seq, 0.7, 50).unwrap();
        assert_eq!(k.log_phi(0.3, 0.3), 0.7 * k.total());
        assert_eq!(k.log_phi(0.0, 0.5), 0.0);
        assert_eq!(k.log_phi(0.1, 0.4), k.log_phi(0.4, 0.1));
    }

    #[test]
    fn prefix_is_accurate_over_a_million_terms() {
        let seq = LengthSequence::harmonic(1.0).unwrap();
        let k = KernelPhi::new(&seq, 1.0, 1_000_000).unwrap();
        let h = crate::sequences::harmonic_number(1_000_000);
        assert!((k.total() - (h - 0.01)).abs() < 1e-13);
    }
}
