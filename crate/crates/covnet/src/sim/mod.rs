//! Monte Carlo throughput estimation in two fidelities.
//!
//! Sampled-schedule mode draws helper constellations per cycle and scores
//! each with the per-cycle optimum (closed form in the outer regimes, LP in
//! between), so it isolates exactly the averaging approximations of the
//! closed forms. Event-driven mode moves every vehicle through continuous
//! time with FIFO channel service and helper buffers, so it additionally
//! exposes boundary effects and carries the pluggable model extensions.

pub mod estimate;
pub mod event;
pub mod models;
pub mod rng;
pub mod sampled;

pub use estimate::{
    collect_traces, estimate_throughput, estimate_throughput_with, Mode, ThroughputEstimate,
    MIN_CYCLES,
};
pub use event::run_event_driven;
pub use models::{effective_rate, shannon_rate, ChannelModel, ConnectionModel, LinkProfile, MobilityModel, ModelConfig};
pub use sampled::{generate_helpers, run_cycle_sampled};

use crate::optimizer::OptimizerError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("model config: {0}")]
    Model(String),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("need at least {min} cycles for a stable interval estimate, got {got}")]
    TooFewCycles { min: u64, got: u64 },
    #[error("event-driven horizon must be at least 3 cycles (first and last are discarded), got {0}")]
    HorizonTooShort(u32),
    #[error("{0} requires event-driven mode")]
    NeedsEventMode(&'static str),
    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),
}

/// What one cycle produced. In sampled mode a cycle is one helper draw over
/// the relative span; in event mode it is the stretch between consecutive
/// infrastructure positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrace {
    /// Bits the VoI received directly from infrastructure.
    pub v2i_bits: f64,
    /// Bits delivered by helpers.
    pub v2v_bits: f64,
    /// Cycle duration in seconds.
    pub duration: f64,
    /// Helpers participating in the cycle.
    pub helper_count: u64,
    /// Maximal helper clusters at the coverage-diameter threshold.
    pub cluster_count: u64,
}
