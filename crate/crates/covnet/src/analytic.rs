//! Closed-form expected throughput.
//!
//! Throughput is renewal-reward: one cycle is the stretch between
//! consecutive infrastructure points, the reward is the data the VoI
//! receives during it, directly while in coverage plus relayed by opposing
//! helpers in between. In the two outer regimes the expected reward has an
//! exact closed form; in the transitional regime a lower and an upper bound
//! do, and results there are reported as an interval.

use crate::model::{ModelError, Regime, RegimeKind, Scenario};
use serde::Serialize;

/// A quantity known exactly or only within bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Value {
    Point(f64),
    Interval { lower: f64, upper: f64 },
}

impl Value {
    pub fn lower(&self) -> f64 {
        match *self {
            Value::Point(v) => v,
            Value::Interval { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Value::Point(v) => v,
            Value::Interval { upper, .. } => upper,
        }
    }

    pub fn midpoint(&self) -> f64 {
        (self.lower() + self.upper()) / 2.0
    }

    /// Half-width of the interval relative to its midpoint; 0 for a point.
    pub fn relative_width(&self) -> f64 {
        match *self {
            Value::Point(_) => 0.0,
            Value::Interval { lower, upper } => (upper - lower) / (upper + lower),
        }
    }
}

/// Expected per-cycle quantities and the resulting long-run throughput.
#[derive(Debug, Clone, Serialize)]
pub struct ThroughputBreakdown {
    /// Expected cycle duration (s).
    pub e_cycle_time: f64,
    /// Expected bits received directly from infrastructure per cycle.
    pub e_v2i_data: f64,
    /// Expected bits relayed by helpers per cycle.
    pub e_v2v_data: Value,
    /// Long-run throughput (bit/s).
    pub eta: Value,
    pub regime: Regime,
    /// V2I rate at which the two outer closed forms cross, if defined.
    pub transition_point: Option<f64>,
    /// True when the helper density is so low that the expected distance to
    /// the first helper exceeds the relay window, making the relayed term 0.
    pub clamped: bool,
}

/// Statistics of helper clusters in the relative frame: maximal runs of
/// helpers whose consecutive spacings stay within twice the given radius.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClusterStats {
    pub radius_used: f64,
    /// Expected length of one cluster (m), first to last member.
    pub expected_cluster_len: f64,
    /// Expected gap between consecutive clusters (m).
    pub expected_gap: f64,
    /// Expected distance from the window start to the first helper (m).
    pub expected_first_offset: f64,
    /// Expected number of clusters in the window.
    pub expected_cluster_count: f64,
}

/// Cluster statistics for a memoryless helper stream of density `rho` over
/// a window of length `span`, with connectivity radius `radius`.
pub fn cluster_stats(rho: f64, radius: f64, span: f64) -> Result<ClusterStats, ModelError> {
    let mut bad = Vec::new();
    if !(rho.is_finite() && rho > 0.0) {
        bad.push(format!("density must be positive and finite, got {rho}"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        bad.push(format!("radius must be positive and finite, got {radius}"));
    }
    if !(span.is_finite() && span >= 0.0) {
        bad.push(format!("span must be finite and >= 0, got {span}"));
    }
    if !bad.is_empty() {
        return Err(ModelError::Validation(bad));
    }
    let q = 2.0 * rho * radius;
    // Gap below 2*radius chains two helpers into one cluster. Cluster size
    // is geometric with mean e^q; within-cluster gaps are exponentials
    // truncated to [0, 2*radius).
    let mean_gap_inside = 1.0 / rho - 2.0 * radius * (-q).exp() / (1.0 - (-q).exp());
    let expected_cluster_len = (q.exp() - 1.0) * mean_gap_inside;
    // Gaps >= 2*radius are memoryless beyond the threshold.
    let expected_gap = 2.0 * radius + 1.0 / rho;
    let expected_first_offset = 1.0 / rho;
    let expected_cluster_count =
        ((span - expected_first_offset) / (expected_cluster_len + expected_gap)).max(0.0);
    Ok(ClusterStats {
        radius_used: radius,
        expected_cluster_len,
        expected_gap,
        expected_first_offset,
        expected_cluster_count,
    })
}

/// Helper density below which the expected distance to the first helper
/// exceeds the relay window, so the expected relayed data clamps to zero.
pub fn rho_min(s: &Scenario) -> f64 {
    s.voi_speed()
        / ((s.infra_spacing() - 2.0 * s.infra_range()) * s.closing_speed()
            + s.vehicle_range() * s.voi_speed())
}

/// The coverage-weighted span factor shared by every closed form: expected
/// road length (times v1) over which helper relays contribute, clamped at 0
/// when the density is below [`rho_min`]. Second return: whether it clamped.
fn relay_bracket(s: &Scenario) -> (f64, bool) {
    if s.helper_density() <= 0.0 {
        return (0.0, true);
    }
    let raw = (s.infra_spacing() - 2.0 * s.infra_range()) * s.closing_speed()
        + s.vehicle_range() * s.voi_speed()
        - s.voi_speed() / s.helper_density();
    if raw < 0.0 {
        (0.0, true)
    } else {
        (raw, false)
    }
}

fn eta_from_relayed(s: &Scenario, relayed_rate_term: f64) -> f64 {
    (2.0 * s.infra_range() * s.v2i_rate() + relayed_rate_term) / s.infra_spacing()
}

/// Throughput when helpers drain their buffers before meeting the VoI, so
/// the V2I rate limits everything. Exact in that regime; elsewhere it is the
/// straight-line extrapolation the upper bound compares against.
pub fn eta_infra_limited(s: &Scenario) -> f64 {
    let (bracket, _) = relay_bracket(s);
    let q = 1.0 - (-2.0 * s.helper_density() * s.infra_range()).exp();
    eta_from_relayed(s, bracket * q * s.v2i_rate() / s.helper_speed())
}

/// Throughput when helper-to-VoI contact time limits delivery. Exact in
/// that regime and independent of the V2I rate except through direct
/// reception.
pub fn eta_v2v_limited(s: &Scenario) -> f64 {
    let (bracket, _) = relay_bracket(s);
    let q = 1.0 - (-2.0 * s.helper_density() * s.vehicle_range()).exp();
    eta_from_relayed(s, bracket * q * s.v2v_rate() / s.closing_speed())
}

/// Lower and upper throughput bounds between the two thresholds. The lower
/// bound schedules each helper against its own local window; the upper is
/// the smaller of the two outer closed forms.
pub fn eta_transitional(s: &Scenario) -> (f64, f64) {
    let (bracket, _) = relay_bracket(s);
    let lower = if s.v2i_rate() <= 0.0 || s.helper_density() <= 0.0 {
        eta_from_relayed(s, 0.0)
    } else {
        // Per-helper take is min(gap * w_I / v2, contact * w_V); in
        // expectation over exponential gaps the min folds into an
        // exponential term with this exponent.
        let x = 2.0 * s.helper_density() * s.vehicle_range() * s.v2v_rate() * s.helper_speed()
            / (s.v2i_rate() * s.closing_speed());
        eta_from_relayed(s, bracket * (1.0 - (-x).exp()) * s.v2i_rate() / s.helper_speed())
    };
    let upper = eta_infra_limited(s).min(eta_v2v_limited(s));
    (lower, upper.max(lower))
}

/// V2I rate at which the infrastructure-limited and V2V-limited closed
/// forms cross. `None` when there are no helpers to relay.
pub fn transition_point(s: &Scenario) -> Option<f64> {
    if s.helper_density() <= 0.0 {
        return None;
    }
    let q_i = 1.0 - (-2.0 * s.helper_density() * s.infra_range()).exp();
    let q_v = 1.0 - (-2.0 * s.helper_density() * s.vehicle_range()).exp();
    Some(q_v / q_i * s.v2v_rate() * s.helper_speed() / s.closing_speed())
}

/// Full expected-throughput evaluation: classifies the regime, applies the
/// matching closed form (or bounds), and reports the per-cycle pieces.
pub fn throughput(s: &Scenario) -> ThroughputBreakdown {
    let regime = s.regime();
    let e_cycle_time = s.infra_spacing() / s.voi_speed();
    let e_v2i_data = 2.0 * s.infra_range() * s.v2i_rate() / s.voi_speed();
    let (_, clamped) = relay_bracket(s);
    let eta = match regime.kind {
        _ if s.helper_density() <= 0.0 => Value::Point(eta_from_relayed(s, 0.0)),
        RegimeKind::InfrastructureLimited => Value::Point(eta_infra_limited(s)),
        RegimeKind::V2VLimited => Value::Point(eta_v2v_limited(s)),
        RegimeKind::Transitional => {
            let (lower, upper) = eta_transitional(s);
            Value::Interval { lower, upper }
        }
    };
    let relayed = |eta: f64| (eta * e_cycle_time - e_v2i_data).max(0.0);
    let e_v2v_data = match eta {
        Value::Point(v) => Value::Point(relayed(v)),
        Value::Interval { lower, upper } => Value::Interval {
            lower: relayed(lower),
            upper: relayed(upper),
        },
    };
    ThroughputBreakdown {
        e_cycle_time,
        e_v2i_data,
        e_v2v_data,
        eta,
        regime,
        transition_point: transition_point(s),
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScenarioParams;
    use approx::assert_relative_eq;

    fn base() -> Scenario {
        ScenarioParams {
            infra_spacing: 10_000.0,
            infra_range: 500.0,
            vehicle_range: 250.0,
            v2i_rate: 1e6,
            v2v_rate: 5e6,
            voi_speed: 15.0,
            helper_speed: 25.0,
            helper_density: 0.005,
            same_dir_density: None,
            num_infra: 20,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn infra_limited_reference_value() {
        let b = throughput(&base());
        assert_eq!(b.regime.kind, RegimeKind::InfrastructureLimited);
        assert!(!b.clamped);
        let Value::Point(eta) = b.eta else { panic!("expected exact value") };
        assert_relative_eq!(eta, 1.533_277_142_480_319_6e6, max_relative = 1e-10);
        assert_relative_eq!(b.e_cycle_time, 10_000.0 / 15.0, max_relative = 1e-12);
        assert_relative_eq!(b.e_v2i_data, 2.0 * 500.0 * 1e6 / 15.0, max_relative = 1e-12);
        // Components recompose into the rate.
        assert_relative_eq!(
            (b.e_v2i_data + b.e_v2v_data.lower()) / b.e_cycle_time,
            eta,
            max_relative = 1e-12
        );
    }

    #[test]
    fn v2v_limited_reference_value() {
        let s = base().with_v2i_rate(6e6).unwrap();
        let b = throughput(&s);
        assert_eq!(b.regime.kind, RegimeKind::V2VLimited);
        let Value::Point(eta) = b.eta else { panic!("expected exact value") };
        assert_relative_eq!(eta, 4.739_222_959_330_357e6, max_relative = 1e-10);
    }

    #[test]
    fn transitional_reference_bounds() {
        let s = base().with_v2i_rate(2e6).unwrap();
        let b = throughput(&s);
        assert_eq!(b.regime.kind, RegimeKind::Transitional);
        let Value::Interval { lower, upper } = b.eta else { panic!("expected interval") };
        assert_relative_eq!(lower, 3.027_945_818_438_825_7e6, max_relative = 1e-10);
        assert_relative_eq!(upper, 3.066_554_284_960_639e6, max_relative = 1e-10);
        assert!(lower <= upper);
        // Upper bound here is the extrapolated infrastructure-limited line.
        assert_relative_eq!(upper, eta_infra_limited(&s), max_relative = 1e-12);
    }

    #[test]
    fn transition_point_reference_value() {
        let w = transition_point(&base()).unwrap();
        assert_relative_eq!(w, 2.887_943_187_433_614e6, max_relative = 1e-10);
        let r = base().regime();
        assert!(w > r.w_lo && w < r.w_hi, "crossing sits inside the transitional band");
    }

    #[test]
    fn bounds_meet_closed_forms_at_thresholds() {
        let s = base();
        let r = s.regime();
        let at_lo = s.with_v2i_rate(r.w_lo).unwrap();
        let (lower, upper) = eta_transitional(&at_lo);
        assert_relative_eq!(lower, eta_infra_limited(&at_lo), max_relative = 1e-12);
        assert_relative_eq!(upper, eta_infra_limited(&at_lo), max_relative = 1e-12);
        let at_hi = s.with_v2i_rate(r.w_hi).unwrap();
        let (lower, upper) = eta_transitional(&at_hi);
        assert_relative_eq!(lower, eta_v2v_limited(&at_hi), max_relative = 1e-12);
        assert_relative_eq!(upper, eta_v2v_limited(&at_hi), max_relative = 1e-12);
    }

    #[test]
    fn eta_monotone_and_continuous_in_v2i_rate() {
        let s = base();
        let mut prev = 0.0;
        let mut prev_hi = 0.0;
        for i in 1..=800 {
            let w = 8e6 * i as f64 / 800.0;
            let b = throughput(&s.with_v2i_rate(w).unwrap());
            let (lo, hi) = (b.eta.lower(), b.eta.upper());
            assert!(lo <= hi, "w={w}");
            assert!(lo + 1e-6 >= prev, "lower bound dips at w={w}: {prev} -> {lo}");
            assert!(hi + 1e-6 >= prev_hi, "upper bound dips at w={w}");
            prev = lo;
            prev_hi = hi;
        }
        // V2V-limited plateau: doubling w_I past w_hi only adds direct
        // reception.
        let b4 = throughput(&s.with_v2i_rate(4e6).unwrap());
        let b8 = throughput(&s.with_v2i_rate(8e6).unwrap());
        let direct = |w: f64| 2.0 * 500.0 * w / 10_000.0;
        assert_relative_eq!(
            b8.eta.upper() - b4.eta.upper(),
            direct(8e6) - direct(4e6),
            max_relative = 1e-9
        );
    }

    #[test]
    fn zero_density_reduces_to_direct_reception() {
        let s = base().with_helper_density(0.0).unwrap();
        let b = throughput(&s);
        assert!(b.clamped);
        assert_eq!(b.transition_point, None);
        let Value::Point(eta) = b.eta else { panic!() };
        assert_relative_eq!(eta, 1e5, max_relative = 1e-12);
        assert_eq!(b.e_v2v_data, Value::Point(0.0));
    }

    #[test]
    fn sparse_density_clamps_to_direct_reception() {
        let s = base();
        let r_min = rho_min(&s);
        assert_relative_eq!(r_min, 15.0 / (9_000.0 * 40.0 + 250.0 * 15.0), max_relative = 1e-12);
        let sparse = s.with_helper_density(r_min * 0.5).unwrap();
        let b = throughput(&sparse);
        assert!(b.clamped);
        assert_relative_eq!(b.eta.lower(), 1e5, max_relative = 1e-12);
        // Just above the threshold the relayed term is tiny but positive.
        let dense_enough = s.with_helper_density(r_min * 1.01).unwrap();
        let b2 = throughput(&dense_enough);
        assert!(!b2.clamped);
        assert!(b2.eta.lower() > 1e5);
    }

    #[test]
    fn throughput_increases_with_density() {
        let s = base();
        let mut prev = 0.0;
        for rho in [0.001, 0.002, 0.005, 0.01, 0.02, 0.05] {
            let b = throughput(&s.with_helper_density(rho).unwrap());
            let eta = b.eta.lower();
            assert!(eta > prev, "rho={rho}");
            prev = eta;
        }
    }

    #[test]
    fn cluster_stats_reference_values() {
        let st = cluster_stats(0.005, 500.0, 24_250.0).unwrap();
        assert_relative_eq!(st.expected_cluster_len, 28_482.631_820_515_32, max_relative = 1e-10);
        assert_relative_eq!(st.expected_gap, 1_200.0, max_relative = 1e-12);
        assert_relative_eq!(st.expected_first_offset, 200.0, max_relative = 1e-12);
        let st_v = cluster_stats(0.005, 250.0, 24_250.0).unwrap();
        assert_relative_eq!(st_v.expected_gap, 700.0, max_relative = 1e-12);
        assert!(st_v.expected_cluster_len < st.expected_cluster_len);
        assert!(st.expected_cluster_count > 0.0);
    }

    #[test]
    fn cluster_stats_rejects_bad_inputs() {
        assert!(cluster_stats(0.0, 500.0, 1e4).is_err());
        assert!(cluster_stats(-0.01, 500.0, 1e4).is_err());
        assert!(cluster_stats(0.005, 0.0, 1e4).is_err());
        assert!(cluster_stats(0.005, 500.0, f64::NAN).is_err());
        // Window shorter than the mean first offset: count clamps to 0.
        let st = cluster_stats(0.005, 500.0, 100.0).unwrap();
        assert_eq!(st.expected_cluster_count, 0.0);
    }

    #[test]
    fn value_accessors() {
        let p = Value::Point(3.0);
        assert_eq!(p.lower(), 3.0);
        assert_eq!(p.upper(), 3.0);
        assert_eq!(p.relative_width(), 0.0);
        let i = Value::Interval { lower: 2.0, upper: 4.0 };
        assert_eq!(i.midpoint(), 3.0);
        assert_relative_eq!(i.relative_width(), 1.0 / 3.0, max_relative = 1e-12);
    }
}
