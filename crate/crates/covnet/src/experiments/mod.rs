//! Reproducible experiment plans: parameter sweeps over scenario axes, the
//! named figure presets built from them, and the small-sample statistics
//! used to summarize their outputs.

pub mod presets;
pub mod stats;
pub mod sweep;

pub use presets::{figure_curves, preset_names};
pub use stats::{summarize, summarize_values, SampleSummary, TraceSummary};
pub use sweep::{run_sweep, sweep_sha256, write_csv, Axis, ResultRow, SweepMode, SweepSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}
