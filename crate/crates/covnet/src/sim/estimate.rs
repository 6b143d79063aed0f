//! Throughput estimation over many simulated cycles.
//!
//! Both backends produce per-cycle traces; the estimator is the ratio of
//! total bits to total time, which is what a long drive converges to. Its
//! standard error comes from a leave-one-cycle-out jackknife on that ratio,
//! so correlated numerators and denominators are handled without assuming
//! per-cycle independence of the ratio itself.
//!
//! Cycles are distributed over a thread pool, but every cycle's stream is
//! derived from (master seed, cycle index) and results are reassembled in
//! index order, so the estimate is byte-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::event::run_event_driven;
use super::models::ModelConfig;
use super::rng::{derive, stream, EVENT_STREAM, SAMPLED_STREAM};
use super::sampled::{sampled_cycle, DEFAULT_LP_CAP};
use super::{CycleTrace, SimError};
use crate::model::Scenario;

/// Fewer cycles than this gives a jackknife too noisy to report.
pub const MIN_CYCLES: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Draw an independent helper layout per cycle and score it with the
    /// per-cycle schedule machinery.
    SampledSchedule,
    /// Run the continuous-time engine over a rolling helper stream.
    EventDriven,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::SampledSchedule => "sampled_schedule",
            Mode::EventDriven => "event_driven",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThroughputEstimate {
    /// Ratio estimate: total bits over total time, bit/s.
    pub mean: f64,
    /// Jackknife standard error of the ratio.
    pub std_err: f64,
    /// mean +- 1.96 standard errors.
    pub ci95: (f64, f64),
    pub n_cycles: u64,
    pub mode: Mode,
    pub master_seed: u64,
    /// Cycles whose relayed bits fell back to the guaranteed schedule
    /// because the helper count exceeded the optimizer cap.
    pub fallback_cycles: u64,
}

/// Estimate with the default optimizer cap.
pub fn estimate_throughput(
    s: &Scenario,
    m: &ModelConfig,
    mode: Mode,
    n_cycles: u64,
    master_seed: u64,
) -> Result<ThroughputEstimate, SimError> {
    estimate_throughput_with(s, m, mode, n_cycles, master_seed, DEFAULT_LP_CAP)
}

/// Estimate with an explicit cap on exact per-cycle optimization.
pub fn estimate_throughput_with(
    s: &Scenario,
    m: &ModelConfig,
    mode: Mode,
    n_cycles: u64,
    master_seed: u64,
    lp_cap: usize,
) -> Result<ThroughputEstimate, SimError> {
    let (traces, fallback_cycles) = collect_traces(s, m, mode, n_cycles, master_seed, lp_cap)?;
    let (mean, std_err) = ratio_with_jackknife_se(&traces);
    Ok(ThroughputEstimate {
        mean,
        std_err,
        ci95: (mean - 1.96 * std_err, mean + 1.96 * std_err),
        n_cycles: traces.len() as u64,
        mode,
        master_seed,
        fallback_cycles,
    })
}

/// The per-cycle traces behind an estimate, plus how many sampled cycles
/// fell back to the guaranteed schedule because of the optimizer cap.
/// [`estimate_throughput_with`] summarizes exactly these traces.
pub fn collect_traces(
    s: &Scenario,
    m: &ModelConfig,
    mode: Mode,
    n_cycles: u64,
    master_seed: u64,
    lp_cap: usize,
) -> Result<(Vec<CycleTrace>, u64), SimError> {
    m.validate()?;
    if n_cycles < MIN_CYCLES {
        return Err(SimError::TooFewCycles { min: MIN_CYCLES, got: n_cycles });
    }
    let out = match mode {
        Mode::SampledSchedule => {
            if !m.is_idealized() {
                return Err(SimError::NeedsEventMode(
                    m.extension_name().unwrap_or("this model configuration"),
                ));
            }
            let cycles = (0..n_cycles)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream(master_seed, &[SAMPLED_STREAM, c]);
                    sampled_cycle(s, lp_cap, &mut rng)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let fallback = cycles.iter().filter(|c| !c.exact).count() as u64;
            (cycles.into_iter().map(|c| c.trace).collect::<Vec<_>>(), fallback)
        }
        Mode::EventDriven => {
            let horizon = s.num_infra().saturating_sub(1);
            if horizon < 3 {
                return Err(SimError::HorizonTooShort(horizon));
            }
            let per_rep = (horizon - 2) as u64;
            let reps = n_cycles.div_ceil(per_rep);
            let mut traces = (0..reps)
                .into_par_iter()
                .map(|rep| {
                    run_event_driven(s, m, horizon, derive(master_seed, &[EVENT_STREAM, rep]))
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .flatten()
                .collect::<Vec<_>>();
            traces.truncate(n_cycles as usize);
            (traces, 0)
        }
    };
    Ok(out)
}

/// Ratio of sums with its leave-one-out jackknife standard error.
pub(crate) fn ratio_with_jackknife_se(traces: &[CycleTrace]) -> (f64, f64) {
    let n = traces.len();
    let sb: f64 = traces.iter().map(|t| t.v2i_bits + t.v2v_bits).sum();
    let st: f64 = traces.iter().map(|t| t.duration).sum();
    let mean = sb / st;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let reps: Vec<f64> = traces
        .iter()
        .map(|t| (sb - t.v2i_bits - t.v2v_bits) / (st - t.duration))
        .collect();
    // Identical cycles must report exactly zero error; the averaged mean
    // below rounds and would turn them into ~1e-11 instead.
    if reps.iter().all(|r| *r == reps[0]) {
        return (mean, 0.0);
    }
    let rep_mean = reps.iter().sum::<f64>() / n as f64;
    let ss: f64 = reps.iter().map(|r| (r - rep_mean).powi(2)).sum();
    let se = ((n - 1) as f64 / n as f64 * ss).sqrt();
    (mean, se)
}
