//! Monte Carlo covering of the circle, and exact expectations to compare against.

pub mod billard;
pub mod comparison;
pub mod coupled;
pub mod exact;
pub mod quadrature;
pub mod rng;
pub mod trial;
pub mod uncovered;

pub use billard::{atom_second_moment, billard_moments, billard_nodes, BillardMoments};
pub use comparison::{comparison_experiment, comparison_models, ComparisonReport, ComparisonRow, ComparisonSetup};
pub use coupled::{run_coupled_trial, run_coupled_trials, CoupledModel, CoupledResult, SubDensity};
pub use exact::{
    expected_uncovered_curve, expected_uncovered_exact, point_uncovered_probability, ExactEstimate,
    LogUncoveredProbability, DEFAULT_MAX_PANELS, DEFAULT_RTOL,
};
pub use rng::{trial_seed, CounterRng, STREAM_CENTERS, STREAM_MARKS};
pub use trial::{
    log_checkpoints, parse_checkpoints, run_trial, run_trials, Target, TrajectoryPoint, TrialConfig,
    TrialResult,
};
pub use uncovered::UncoveredSet;
