//! Experiment recipes, sweeps, verdict reports and their output formats.

pub mod criteria;
pub mod demos;
pub mod emit;
pub mod recipes;
pub mod sweep;

pub use criteria::{criteria_report, CriteriaReport, Route, Verdict};
pub use demos::{all_passed, section5_c1c2, section6_blocks, BlocksReport, C1C2Demo, C1C2Report, Check};
pub use emit::{
    capacity_rows, emit_sweep, read_jsonl, write_csv, write_json, write_jsonl, CapacityRow, Format, CAPACITY_HEADER,
    SWEEP_HEADER,
};
pub use recipes::{load_spec, run_prepared, run_recipe, ExperimentSpec, Prepared, Recipe, RecipeOutput};
pub use sweep::{phase_transition_sweep, SweepCell, SweepConfig, SweepFit, SweepResult};
