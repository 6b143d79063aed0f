//! Declarative parameter sweeps: one scenario axis, a list of values, and
//! the estimators to run at each point. Sweeps serialize to JSON, hash to a
//! stable digest, and render to CSV with their provenance attached, so a
//! results file can always be traced back to the exact plan that made it.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::analytic;
use crate::model::{RegimeKind, Scenario, ScenarioConfig};
use crate::sim::sampled::DEFAULT_LP_CAP;
use crate::sim::{estimate_throughput_with, Mode, ModelConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Infrastructure spacing d, metres.
    #[serde(rename = "d")]
    Spacing,
    /// V2I rate w_I, bit/s.
    #[serde(rename = "w_i")]
    V2iRate,
    /// Helper density rho2, vehicles per metre.
    #[serde(rename = "rho2")]
    HelperDensity,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Spacing => "d",
            Axis::V2iRate => "w_i",
            Axis::HelperDensity => "rho2",
        })
    }
}

fn default_lp_cap() -> usize {
    DEFAULT_LP_CAP
}

/// What to evaluate at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Closed forms only.
    Analytic,
    SampledSchedule,
    EventDriven,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Scenario every point starts from; the axis value overrides one field.
    pub base: ScenarioConfig,
    #[serde(default)]
    pub models: ModelConfig,
    pub axis: Axis,
    /// Axis values, strictly increasing.
    pub values: Vec<f64>,
    pub modes: Vec<SweepMode>,
    pub n_cycles: u64,
    pub master_seed: u64,
    #[serde(default = "default_lp_cap")]
    pub lp_cap: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        Scenario::from_config(&self.base)?;
        self.models.validate()?;
        if self.values.is_empty() {
            return Err(ExperimentError::Spec("values must be non-empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(ExperimentError::Spec("values must be finite".into()));
        }
        if self.values.windows(2).any(|p| p[0] >= p[1]) {
            return Err(ExperimentError::Spec(format!(
                "values must be strictly increasing, got {:?}",
                self.values
            )));
        }
        if self.modes.is_empty() {
            return Err(ExperimentError::Spec("modes must be non-empty".into()));
        }
        let simulated =
            self.modes.iter().any(|m| !matches!(m, SweepMode::Analytic));
        if simulated && self.n_cycles < crate::sim::MIN_CYCLES {
            return Err(ExperimentError::Spec(format!(
                "n_cycles must be at least {}, got {}",
                crate::sim::MIN_CYCLES,
                self.n_cycles
            )));
        }
        if self.lp_cap == 0 {
            return Err(ExperimentError::Spec("lp_cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(json).map_err(|e| ExperimentError::Spec(e.to_string()))
    }
}

/// SHA-256 over the canonical JSON form of the spec.
pub fn sweep_sha256(spec: &SweepSpec) -> Result<String, ExperimentError> {
    let json = serde_json::to_vec(spec).map_err(|e| ExperimentError::Spec(e.to_string()))?;
    let digest = Sha256::digest(&json);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        write!(hex, "{byte:02x}").expect("writing to a String cannot fail");
    }
    Ok(hex)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub axis: Axis,
    pub value: f64,
    pub regime: RegimeKind,
    /// Closed-form throughput; midpoint of the band in the transitional
    /// regime, where `eta_lower`/`eta_upper` carry the band itself.
    pub eta_analytic: f64,
    pub eta_lower: f64,
    pub eta_upper: f64,
    pub eta_sampled: Option<f64>,
    pub eta_sampled_ci: Option<(f64, f64)>,
    pub eta_event: Option<f64>,
    pub eta_event_ci: Option<(f64, f64)>,
    /// Closed form over the direct-reception-only throughput.
    pub ratio_noncoop: f64,
    /// Sampled cycles that used the guaranteed schedule instead of the
    /// exact optimum because their helper count exceeded `lp_cap`.
    pub fallback_cycles: u64,
}

fn apply_axis(base: &Scenario, axis: Axis, value: f64) -> Result<Scenario, ExperimentError> {
    let applied = match axis {
        Axis::Spacing => base.with_spacing(value),
        Axis::V2iRate => base.with_v2i_rate(value),
        Axis::HelperDensity => base.with_helper_density(value),
    };
    applied.map_err(|e| ExperimentError::Spec(format!("axis {axis} = {value}: {e}")))
}

/// Run the sweep. Points execute in parallel but every point's streams are
/// derived from the shared master seed and rows are assembled in axis
/// order, so the output is independent of scheduling; neighbouring values
/// also see the same random layouts, which keeps curves smooth.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, ExperimentError> {
    spec.validate()?;
    let base = Scenario::from_config(&spec.base)?;
    spec.values
        .par_iter()
        .map(|&value| {
            let s = apply_axis(&base, spec.axis, value)?;
            let bd = analytic::throughput(&s);
            let noncoop = 2.0 * s.infra_range() * s.v2i_rate() / s.infra_spacing();
            let mut row = ResultRow {
                axis: spec.axis,
                value,
                regime: s.regime().kind,
                eta_analytic: bd.eta.midpoint(),
                eta_lower: bd.eta.lower(),
                eta_upper: bd.eta.upper(),
                eta_sampled: None,
                eta_sampled_ci: None,
                eta_event: None,
                eta_event_ci: None,
                ratio_noncoop: bd.eta.midpoint() / noncoop,
                fallback_cycles: 0,
            };
            for &mode in &spec.modes {
                let sim_mode = match mode {
                    SweepMode::Analytic => continue,
                    SweepMode::SampledSchedule => Mode::SampledSchedule,
                    SweepMode::EventDriven => Mode::EventDriven,
                };
                let est = estimate_throughput_with(
                    &s,
                    &spec.models,
                    sim_mode,
                    spec.n_cycles,
                    spec.master_seed,
                    spec.lp_cap,
                )?;
                match sim_mode {
                    Mode::SampledSchedule => {
                        row.eta_sampled = Some(est.mean);
                        row.eta_sampled_ci = Some(est.ci95);
                        row.fallback_cycles = est.fallback_cycles;
                    }
                    Mode::EventDriven => {
                        row.eta_event = Some(est.mean);
                        row.eta_event_ci = Some(est.ci95);
                    }
                }
            }
            Ok(row)
        })
        .collect()
}

pub const CSV_HEADER: &str = "axis,value,regime,eta_analytic,eta_lower,eta_upper,eta_sampled,\
eta_sampled_ci_lo,eta_sampled_ci_hi,eta_event,eta_event_ci_lo,eta_event_ci_hi,ratio_noncoop";

/// Render rows to CSV with provenance comments: tool version, spec digest,
/// master seed. Floats use the shortest representation that round-trips.
pub fn write_csv(spec: &SweepSpec, rows: &[ResultRow]) -> Result<String, ExperimentError> {
    let mut out = String::new();
    writeln!(out, "# covnet {}", env!("CARGO_PKG_VERSION")).expect("string write");
    writeln!(out, "# sweep_sha256={}", sweep_sha256(spec)?).expect("string write");
    writeln!(out, "# seed={}", spec.master_seed).expect("string write");
    writeln!(out, "{CSV_HEADER}").expect("string write");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let (s_lo, s_hi) = r.eta_sampled_ci.map_or((None, None), |(a, b)| (Some(a), Some(b)));
        let (e_lo, e_hi) = r.eta_event_ci.map_or((None, None), |(a, b)| (Some(a), Some(b)));
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            r.value,
            r.regime,
            r.eta_analytic,
            r.eta_lower,
            r.eta_upper,
            opt(r.eta_sampled),
            opt(s_lo),
            opt(s_hi),
            opt(r.eta_event),
            opt(e_lo),
            opt(e_hi),
            r.ratio_noncoop,
        )
        .expect("string write");
    }
    Ok(out)
}
