//! Per-cycle scheduling as a linear program, plus closed-form optimal
//! schedules for the outer regimes and feasible bounds in between.
//!
//! For a fixed set of helper positions the cycle's relay plan is captured by
//! 2n variables: bits each helper receives from infrastructure (`D_i`) and
//! bits it later delivers to the VoI (`Y_i`). The objective maximizes total
//! delivery. Constraints encode per-helper window capacities, receive-first
//! coupling, and the shared-channel capacity of every contiguous block of
//! helpers on both the infrastructure side and the contact side.
//!
//! Three independent routes to the optimum live here: a dense simplex
//! solver over the explicit rows, closed-form schedules with a constraint
//! checker, and a max-flow formulation that scales to large cycles. Tests
//! hold them to each other.

mod flow;
mod schedules;
mod simplex;

pub use flow::optimal_delivery;
pub use schedules::{schedule_infra_limited, schedule_v2v_limited, transitional_bounds};
pub use simplex::solve_cycle_lp;

use crate::model::{HelperConfig, RegimeKind, Scenario};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("helper position {position} lies beyond the span {span}")]
    PositionBeyondSpan { position: f64, span: f64 },
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error(
        "scenario is {actual} but this schedule requires {requirement} ({condition})"
    )]
    RegimeMismatch {
        actual: RegimeKind,
        requirement: RegimeKind,
        condition: &'static str,
    },
}

/// What a constraint row encodes; indices refer to helpers in position
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Helper i cannot receive more than its own coverage crossing allows.
    ReceiveCap(usize),
    /// Helper i cannot deliver more than its own contact window allows.
    DeliverCap(usize),
    /// Helper i cannot deliver bits it never received.
    Coupling(usize),
    /// Helpers k1..=k2 share the infrastructure channel; their combined
    /// reception is capped by the union of their coverage windows.
    ReceiveInterval(usize, usize),
    /// Helpers k1..=k2 share the VoI contact channel likewise.
    DeliverInterval(usize, usize),
}

/// One `<=` constraint row, sparse over the 2n variables.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub kind: RowKind,
}

/// The per-cycle LP: maximize `objective . x` subject to every row as
/// `coeffs . x <= rhs` and `x >= 0`. Variables 0..n are bits received,
/// n..2n bits delivered.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub n_helpers: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LpInstance {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// A relay plan: per-helper received and delivered bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub received: Vec<f64>,
    pub delivered: Vec<f64>,
}

impl Schedule {
    pub fn total_delivered(&self) -> f64 {
        self.delivered.iter().sum()
    }

    pub fn total_received(&self) -> f64 {
        self.received.iter().sum()
    }
}

/// Bits-per-metre of helper travel while in infrastructure coverage.
fn receive_rate_per_metre(s: &Scenario) -> f64 {
    s.v2i_rate() / s.helper_speed()
}

/// Bits-per-metre of relative approach while in VoI contact.
fn deliver_rate_per_metre(s: &Scenario) -> f64 {
    s.v2v_rate() / s.closing_speed()
}

fn check_clip(h: &HelperConfig, clip: Option<f64>) -> Result<(), OptimizerError> {
    if let (Some(span), Some(last)) = (clip, h.last_position()) {
        if last > span {
            return Err(OptimizerError::PositionBeyondSpan { position: last, span });
        }
    }
    Ok(())
}

/// Window of road (in the relative frame) over which helper i can receive:
/// starts at its position, extends one coverage diameter, optionally
/// truncated at the span end.
fn windows(h: &HelperConfig, diameter: f64, clip: Option<f64>) -> Vec<(f64, f64)> {
    h.positions()
        .iter()
        .map(|&x| {
            let end = match clip {
                Some(span) => (x + diameter).min(span),
                None => x + diameter,
            };
            (x, end.max(x))
        })
        .collect()
}

/// Total length covered by windows k1..=k2 (starts are sorted).
fn union_len(w: &[(f64, f64)], k1: usize, k2: usize) -> f64 {
    let mut total = 0.0;
    let mut reach = w[k1].0;
    for &(a, b) in &w[k1..=k2] {
        if b > reach {
            total += b - reach.max(a);
            reach = b;
        }
    }
    total
}

/// Build the per-cycle LP for the given helpers. `clip` bounds every window
/// at the cycle's relative span; `None` gives the idealized instance where
/// windows never truncate. Constraint count is n^2 + 4n.
pub fn build_cycle_lp(
    s: &Scenario,
    h: &HelperConfig,
    clip: Option<f64>,
) -> Result<LpInstance, OptimizerError> {
    check_clip(h, clip)?;
    let n = h.n();
    let fa = receive_rate_per_metre(s);
    let fb = deliver_rate_per_metre(s);
    let wa = windows(h, 2.0 * s.infra_range(), clip);
    let wb = windows(h, 2.0 * s.vehicle_range(), clip);
    let mut rows = Vec::with_capacity(n * n + 4 * n);
    for i in 0..n {
        rows.push(Row {
            coeffs: vec![(i, 1.0)],
            rhs: (wa[i].1 - wa[i].0) * fa,
            kind: RowKind::ReceiveCap(i),
        });
        rows.push(Row {
            coeffs: vec![(n + i, 1.0)],
            rhs: (wb[i].1 - wb[i].0) * fb,
            kind: RowKind::DeliverCap(i),
        });
        rows.push(Row {
            coeffs: vec![(n + i, 1.0), (i, -1.0)],
            rhs: 0.0,
            kind: RowKind::Coupling(i),
        });
    }
    for k1 in 0..n {
        for k2 in k1..n {
            rows.push(Row {
                coeffs: (k1..=k2).map(|i| (i, 1.0)).collect(),
                rhs: union_len(&wa, k1, k2) * fa,
                kind: RowKind::ReceiveInterval(k1, k2),
            });
            rows.push(Row {
                coeffs: (k1..=k2).map(|i| (n + i, 1.0)).collect(),
                rhs: union_len(&wb, k1, k2) * fb,
                kind: RowKind::DeliverInterval(k1, k2),
            });
        }
    }
    let mut objective = vec![0.0; 2 * n];
    for c in objective.iter_mut().skip(n) {
        *c = 1.0;
    }
    Ok(LpInstance { n_helpers: n, objective, rows })
}

/// Verify a schedule against every LP row independently of any solver.
/// Returns the violated rows, described, if any; tolerance is relative to
/// each row's bound.
pub fn check_schedule(lp: &LpInstance, sched: &Schedule) -> Result<(), Vec<String>> {
    let n = lp.n_helpers;
    let mut bad = Vec::new();
    if sched.received.len() != n || sched.delivered.len() != n {
        bad.push(format!(
            "schedule sized for {} helpers, LP has {}",
            sched.received.len(),
            n
        ));
        return Err(bad);
    }
    let x: Vec<f64> = sched.received.iter().chain(sched.delivered.iter()).copied().collect();
    let scale = lp.rows.iter().map(|r| r.rhs.abs()).fold(1.0f64, f64::max);
    let tol = 1e-9 * scale;
    for (i, &v) in x.iter().enumerate() {
        if v < -tol {
            bad.push(format!("variable {i} is negative: {v}"));
        }
    }
    for row in &lp.rows {
        let lhs: f64 = row.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
        if lhs > row.rhs + tol {
            bad.push(format!(
                "{:?} violated: {} > {} (excess {:.3e})",
                row.kind,
                lhs,
                row.rhs,
                lhs - row.rhs
            ));
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}
