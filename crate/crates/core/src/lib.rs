pub mod arcset;
pub mod capacity;
pub mod circle;
pub mod coversim;
pub mod density;
pub mod error;
pub mod harness;
pub mod sequences;
pub mod stats;
pub mod summation;
pub mod tower;

pub use arcset::ArcSet;
pub use circle::Arc;
pub use density::{DensityAnalysis, PiecewisePolyDensity};
pub use error::{Error, Result};
pub use sequences::{parse_sequence, LengthSequence, SeriesClass};
