//! Sampled-schedule Monte Carlo: draw a helper constellation per cycle,
//! score it with the per-cycle optimum, average.
//!
//! This mode shares every modelling assumption with the closed forms except
//! the expectation step, so the gap between its estimates and the analytic
//! values measures exactly the averaging approximations (cluster
//! independence and the expected-count product).

use rand_chacha::ChaCha12Rng;

use super::{CycleTrace, SimError};
use crate::model::{HelperConfig, RegimeKind, Scenario};
use crate::optimizer::{
    build_cycle_lp, check_schedule, optimal_delivery, schedule_infra_limited, schedule_v2v_limited,
    solve_cycle_lp, transitional_bounds,
};

/// Above this helper count a transitional cycle is scored by the feasible
/// lower-bound schedule instead of the exact optimum.
pub const DEFAULT_LP_CAP: usize = 64;

/// Cap for re-deriving a closed-form cycle through the max-flow route as a
/// cross-check; beyond it only the cheap consistency checks run.
const FLOW_CHECK_CAP: usize = 160;

/// Cap for additionally confirming a cycle against the dense simplex.
const SIMPLEX_CHECK_CAP: usize = 12;

/// Poisson helper constellation over `[0, span)`.
pub fn generate_helpers(rho2: f64, span: f64, rng: &mut ChaCha12Rng) -> HelperConfig {
    let positions = super::rng::poisson_positions(rho2, span, rng);
    HelperConfig::from_positions(positions).expect("poisson positions are sorted and finite")
}

/// One sampled cycle with its audit trail.
#[derive(Debug, Clone)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct SampledCycle {
    pub trace: CycleTrace,
    /// Transitional cycles record the feasible/ceiling pair they were
    /// checked against.
    pub bounds: Option<(f64, f64)>,
    /// False when the cycle fell back to the lower-bound schedule because
    /// its helper count exceeded the LP cap.
    pub exact: bool,
}

pub(crate) fn sampled_cycle(
    s: &Scenario,
    lp_cap: usize,
    rng: &mut ChaCha12Rng,
) -> Result<SampledCycle, SimError> {
    let span = s.relative_span();
    let h = generate_helpers(s.helper_density(), span, rng);
    let n = h.n();
    let clip = Some(span);
    let mut bounds = None;
    let mut exact = true;
    let v2v_bits = match s.regime().kind {
        RegimeKind::InfrastructureLimited => {
            let sched = schedule_infra_limited(s, &h, clip)?;
            audit_outer(s, &h, clip, sched.total_delivered())?;
            sched.total_delivered()
        }
        RegimeKind::V2VLimited => {
            let sched = schedule_v2v_limited(s, &h, clip)?;
            audit_outer(s, &h, clip, sched.total_delivered())?;
            sched.total_delivered()
        }
        RegimeKind::Transitional => {
            let (lower, upper) = transitional_bounds(s, &h, clip)?;
            bounds = Some((lower.total_delivered(), upper));
            if n <= lp_cap {
                let opt = optimal_delivery(s, &h, clip)?;
                audit_transitional(s, &h, clip, lower.total_delivered(), opt, upper)?;
                opt
            } else {
                exact = false;
                lower.total_delivered()
            }
        }
    };
    let trace = CycleTrace {
        v2i_bits: 2.0 * s.infra_range() * s.v2i_rate() / s.voi_speed(),
        v2v_bits,
        duration: s.infra_spacing() / s.voi_speed(),
        helper_count: n as u64,
        cluster_count: h.cluster_count(2.0 * s.infra_range()) as u64,
    };
    Ok(SampledCycle { trace, bounds, exact })
}

/// Confirm a closed-form outer-regime total against the independent flow
/// evaluator (and the dense simplex on small cycles).
fn audit_outer(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
    total: f64,
) -> Result<(), SimError> {
    if h.n() > FLOW_CHECK_CAP {
        return Ok(());
    }
    let flow = optimal_delivery(s, h, clip)?;
    let tol = 1e-9 * total.abs().max(1.0);
    if (flow - total).abs() > tol {
        return Err(SimError::CrossCheck(format!(
            "closed-form cycle total {total} vs flow optimum {flow}"
        )));
    }
    if h.n() <= SIMPLEX_CHECK_CAP {
        let lp = build_cycle_lp(s, h, clip)?;
        let sched = solve_cycle_lp(&lp)?;
        if let Err(violations) = check_schedule(&lp, &sched) {
            return Err(SimError::CrossCheck(violations.join("; ")));
        }
        if (sched.total_delivered() - total).abs() > tol {
            return Err(SimError::CrossCheck(format!(
                "closed-form cycle total {total} vs simplex {}",
                sched.total_delivered()
            )));
        }
    }
    Ok(())
}

fn audit_transitional(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
    lower: f64,
    opt: f64,
    upper: f64,
) -> Result<(), SimError> {
    let tol = 1e-9 * upper.abs().max(1.0);
    if opt < lower - tol || opt > upper + tol {
        return Err(SimError::CrossCheck(format!(
            "transitional optimum {opt} outside [{lower}, {upper}]"
        )));
    }
    if h.n() <= SIMPLEX_CHECK_CAP {
        let lp = build_cycle_lp(s, h, clip)?;
        let sched = solve_cycle_lp(&lp)?;
        let tol = 1e-9 * opt.abs().max(1.0);
        if (sched.total_delivered() - opt).abs() > tol {
            return Err(SimError::CrossCheck(format!(
                "flow optimum {opt} vs simplex {}",
                sched.total_delivered()
            )));
        }
    }
    Ok(())
}

/// Draw and score one cycle. Cannot fail on generated instances; any
/// internal inconsistency panics rather than returning a wrong number.
pub fn run_cycle_sampled(s: &Scenario, rng: &mut ChaCha12Rng) -> CycleTrace {
    sampled_cycle(s, DEFAULT_LP_CAP, rng)
        .expect("sampled cycle is infallible on generated instances")
        .trace
}
