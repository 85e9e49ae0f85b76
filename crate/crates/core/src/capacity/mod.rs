//! The kernel `Phi^(a)`, energies of support measures and capacity evidence.

pub mod energy;
pub mod heuristics;
pub mod kernel;
pub mod measure;

use serde::{Deserialize, Serialize};

use crate::summation::log_sub;

pub use energy::{energy, EnergyEstimate};
pub use heuristics::{cap_zero_heuristic, lemma33_equiv, CapEvidence, CapReport, Lemma33Report};
pub use kernel::{kernel_sum, kernel_sum_brute, KernelPhi};
pub use measure::SupportMeasure;

/// Default truncation ladder.
pub const LADDER: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// Increment ratio at or above which a ladder is read as unbounded.
pub const UNBOUNDED_RATIO: f64 = 0.9;
/// Increment ratio at or below which a ladder is read as bounded.
pub const BOUNDED_RATIO: f64 = 0.75;

/// Reading of a monotone sequence sampled on a geometric ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl std::fmt::Display for Growth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Growth::Bounded => "bounded",
            Growth::Unbounded => "unbounded",
            Growth::Inconclusive => "inconclusive",
        })
    }
}

/// Ratio of the last two increments of `exp(logs)`, in log form.
pub fn log_increment_ratio(logs: &[f64]) -> Option<f64> {
    let n = logs.len();
    if n < 3 {
        return None;
    }
    let d_last = log_sub(logs[n - 1], logs[n - 2]);
    let d_prev = log_sub(logs[n - 2], logs[n - 3]);
    Some(d_last - d_prev)
}

/// Classify a nondecreasing sequence from its values (as logs) on a
/// decade ladder: increments that keep pace point to divergence, increments
/// that shrink geometrically to a finite limit.
pub fn classify_ladder(logs: &[f64]) -> Growth {
    let n = logs.len();
    if n < 3 {
        return Growth::Inconclusive;
    }
    let d_last = log_sub(logs[n - 1], logs[n - 2]);
    // increments lost in rounding: the sequence has settled
    if d_last == f64::NEG_INFINITY || d_last - logs[n - 1] < -30.0 {
        return Growth::Bounded;
    }
    let d_prev = log_sub(logs[n - 2], logs[n - 3]);
    if d_prev == f64::NEG_INFINITY {
        return Growth::Inconclusive;
    }
    let ratio = (d_last - d_prev).exp();
    if ratio >= UNBOUNDED_RATIO {
        Growth::Unbounded
    } else if ratio <= BOUNDED_RATIO {
        Growth::Bounded
    } else {
        Growth::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logs(v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x.ln()).collect()
    }

    #[test]
    fn ladder_readings() {
        // ln N growth: constant increments
        assert_eq!(classify_ladder(&logs(&[3.0, 5.3, 7.6, 9.9])), Growth::Unbounded);
        // converging like 1 - 1/N
        assert_eq!(classify_ladder(&logs(&[0.9, 0.99, 0.999])), Growth::Bounded);
        assert_eq!(classify_ladder(&[0.0, 0.0, 0.0]), Growth::Bounded);
        assert_eq!(classify_ladder(&logs(&[1.0, 2.0, 2.8])), Growth::Inconclusive);
        assert_eq!(classify_ladder(&[0.0, 1.0]), Growth::Inconclusive);
    }
}
