//! Closed-form schedules.
//!
//! In the outer regimes the LP optimum has an explicit greedy solution:
//! serve each helper from its own window up to the point where the next
//! helper's window begins, which saturates the binding interval row. In the
//! transitional regime that argument gives a feasible lower-bound schedule
//! (each helper confined to its local slots on both channels) and the two
//! outer optima cap the true value from above.
//!
//! Each schedule checks the scenario's regime first: the greedy argument is
//! only optimal inside its own band, and silently returning a non-optimal
//! plan would poison any caller treating these as oracles.

use super::{check_clip, deliver_rate_per_metre, receive_rate_per_metre, OptimizerError, Schedule};
use crate::model::{HelperConfig, RegimeKind, Scenario};

struct Geometry {
    gaps: Vec<f64>,
    /// Remaining span after the last helper, if the span is bounded.
    tail: Option<f64>,
}

fn geometry(h: &HelperConfig, clip: Option<f64>) -> Result<Geometry, OptimizerError> {
    check_clip(h, clip)?;
    Ok(Geometry {
        gaps: h.gaps(),
        tail: clip.and_then(|span| h.last_position().map(|x| span - x)),
    })
}

/// Length of helper i's usable slot on a channel with the given window
/// diameter: up to the next helper for interior helpers, up to the window
/// or span end for the last.
fn slot(g: &Geometry, i: usize, n: usize, diameter: f64) -> f64 {
    if i + 1 < n {
        g.gaps[i].min(diameter)
    } else {
        match g.tail {
            Some(t) => t.min(diameter),
            None => diameter,
        }
    }
}

fn require_regime(
    s: &Scenario,
    requirement: RegimeKind,
    condition: &'static str,
) -> Result<(), OptimizerError> {
    let actual = s.regime().kind;
    if actual == requirement {
        Ok(())
    } else {
        Err(OptimizerError::RegimeMismatch { actual, requirement, condition })
    }
}

/// Optimal schedule when the V2I rate is at or below the lower threshold
/// (requires `w_I <= w_lo`): every received bit fits into the contact
/// windows, so reception is served greedily to saturation and delivered
/// one-for-one.
pub fn schedule_infra_limited(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
) -> Result<Schedule, OptimizerError> {
    require_regime(s, RegimeKind::InfrastructureLimited, "w_I <= w_lo")?;
    let g = geometry(h, clip)?;
    let n = h.n();
    let fa = receive_rate_per_metre(s);
    let bits: Vec<f64> =
        (0..n).map(|i| slot(&g, i, n, 2.0 * s.infra_range()) * fa).collect();
    Ok(Schedule { received: bits.clone(), delivered: bits })
}

/// Optimal schedule when the V2I rate is at or above the upper threshold
/// (requires `w_I >= w_hi`): contact windows are the bottleneck, and
/// reception can always keep ahead of them.
pub fn schedule_v2v_limited(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
) -> Result<Schedule, OptimizerError> {
    require_regime(s, RegimeKind::V2VLimited, "w_I >= w_hi")?;
    let g = geometry(h, clip)?;
    let n = h.n();
    let fb = deliver_rate_per_metre(s);
    let bits: Vec<f64> =
        (0..n).map(|i| slot(&g, i, n, 2.0 * s.vehicle_range()) * fb).collect();
    Ok(Schedule { received: bits.clone(), delivered: bits })
}

/// Per-helper minimum of the two local slot capacities. Feasible at any
/// rate pair, not just in the transitional band, because each helper stays
/// inside both of its own exclusive slots.
fn local_min_schedule(s: &Scenario, g: &Geometry, n: usize) -> Schedule {
    let fa = receive_rate_per_metre(s);
    let fb = deliver_rate_per_metre(s);
    let bits: Vec<f64> = (0..n)
        .map(|i| {
            let a = slot(g, i, n, 2.0 * s.infra_range()) * fa;
            let b = slot(g, i, n, 2.0 * s.vehicle_range()) * fb;
            a.min(b)
        })
        .collect();
    Schedule { received: bits.clone(), delivered: bits }
}

/// Feasible schedule and upper bound for the transitional regime (requires
/// `w_lo < w_I < w_hi`). The schedule takes, per helper, the smaller of its
/// two local slot capacities; the bound is the smaller of the two
/// outer-regime greedy totals. Between the thresholds the two pin the LP
/// optimum into a narrow band.
pub fn transitional_bounds(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
) -> Result<(Schedule, f64), OptimizerError> {
    require_regime(s, RegimeKind::Transitional, "w_lo < w_I < w_hi")?;
    let g = geometry(h, clip)?;
    let n = h.n();
    let lower = local_min_schedule(s, &g, n);
    let fa = receive_rate_per_metre(s);
    let fb = deliver_rate_per_metre(s);
    let infra_total: f64 =
        (0..n).map(|i| slot(&g, i, n, 2.0 * s.infra_range()) * fa).sum();
    let contact_total: f64 =
        (0..n).map(|i| slot(&g, i, n, 2.0 * s.vehicle_range()) * fb).sum();
    let upper = infra_total.min(contact_total).max(lower.total_delivered());
    Ok((lower, upper))
}
