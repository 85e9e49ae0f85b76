//! Shared fixtures for the benchmarks.

use dvoretzky::coversim::{Target, TrialConfig};
use dvoretzky::density::step;
use dvoretzky::LengthSequence;

/// Step density, `l_n = c/n`, full-circle target, no checkpoints.
pub fn step_trial(c: f64, n_max: u64) -> TrialConfig {
    TrialConfig {
        density: step(0.5, 1.5, 0.5).expect("valid step"),
        lengths: LengthSequence::harmonic(c).expect("valid c"),
        n_max,
        target: Target::Full,
        seed: 1,
        checkpoints: Vec::new(),
    }
}
