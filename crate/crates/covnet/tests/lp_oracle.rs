//! Randomized agreement suites for the per-cycle delivery optimum: the
//! greedy closed forms, the flow solver, the dense tableau, and the
//! row-by-row checker must all tell the same story.

use covnet::model::{HelperConfig, Scenario, ScenarioParams};
use covnet::optimizer::{
    build_cycle_lp, check_schedule, optimal_delivery, schedule_infra_limited, schedule_v2v_limited,
    solve_cycle_lp, transitional_bounds,
};
use covnet::sim::generate_helpers;
use covnet::sim::rng::stream;
use rand::Rng;

// Fixed radio/speed geometry keeps the regime thresholds at
// w_lo = 1.5625e6 and w_hi = 3.125e6 while spacing and density vary.
const W_LO: f64 = 1.5625e6;
const W_HI: f64 = 3.125e6;

fn scenario(d: f64, w_i: f64, rho2: f64) -> Scenario {
    ScenarioParams {
        infra_spacing: d,
        infra_range: 500.0,
        vehicle_range: 250.0,
        v2i_rate: w_i,
        v2v_rate: 5e6,
        voi_speed: 15.0,
        helper_speed: 25.0,
        helper_density: rho2,
        same_dir_density: None,
        num_infra: 20,
    }
    .validate()
    .unwrap()
}

/// One random instance: spacing, density, and a rate drawn by `pick_rate`
/// from a uniform variate.
fn instance(seed: u64, pick_rate: impl Fn(f64) -> f64) -> (Scenario, HelperConfig, f64) {
    let mut rng = stream(0xBEEF, &[seed]);
    let d = 5_000.0 + 10_000.0 * rng.random::<f64>();
    let rho2 = 0.002 + 0.006 * rng.random::<f64>();
    let w_i = pick_rate(rng.random::<f64>());
    let s = scenario(d, w_i, rho2);
    let span = s.relative_span();
    let h = generate_helpers(rho2, span, &mut rng);
    (s, h, span)
}

fn assert_close(a: f64, b: f64, what: &str) {
    let tol = 1e-9 * a.abs().max(b.abs()).max(1.0);
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
}

#[test]
fn infra_limited_greedy_equals_the_flow_optimum() {
    for k in 0..170u64 {
        let (s, h, span) = instance(k, |u| W_LO * (0.05 + 0.95 * u));
        let sched = schedule_infra_limited(&s, &h, Some(span)).unwrap();
        let flow = optimal_delivery(&s, &h, Some(span)).unwrap();
        assert_close(sched.total_delivered(), flow, &format!("instance {k} (n = {})", h.n()));
    }
}

#[test]
fn v2v_limited_greedy_equals_the_flow_optimum() {
    for k in 0..170u64 {
        let (s, h, span) = instance(1000 + k, |u| W_HI * (1.0 + u));
        let sched = schedule_v2v_limited(&s, &h, Some(span)).unwrap();
        let flow = optimal_delivery(&s, &h, Some(span)).unwrap();
        assert_close(sched.total_delivered(), flow, &format!("instance {k} (n = {})", h.n()));
    }
}

#[test]
fn transitional_bounds_pin_the_flow_optimum() {
    let mut widths = Vec::new();
    for k in 0..170u64 {
        let (s, h, span) = instance(2000 + k, |u| W_LO + (W_HI - W_LO) * (0.02 + 0.96 * u));
        let (lower, upper) = transitional_bounds(&s, &h, Some(span)).unwrap();
        let flow = optimal_delivery(&s, &h, Some(span)).unwrap();
        let tol = 1e-9 * flow.max(1.0);
        let lo = lower.total_delivered();
        assert!(lo <= flow + tol, "instance {k}: feasible {lo} above optimum {flow}");
        assert!(flow <= upper + tol, "instance {k}: optimum {flow} above ceiling {upper}");
        if upper > 0.0 {
            widths.push((upper - lo) / upper);
        }
    }
    // The sandwich is supposed to be informative, not vacuous.
    let mean_width = widths.iter().sum::<f64>() / widths.len() as f64;
    assert!(mean_width < 0.25, "mean relative bound width {mean_width}");
}

#[test]
fn tableau_solver_agrees_with_flow_and_passes_the_checker() {
    for k in 0..60u64 {
        let mut rng = stream(0xF00D, &[k]);
        let d = 6_000.0 + 8_000.0 * rng.random::<f64>();
        let u: f64 = rng.random();
        let w_i = 0.3e6 + 5.7e6 * u;
        let rho2 = 0.002 + 0.004 * rng.random::<f64>();
        let s = scenario(d, w_i, rho2);
        let span = s.relative_span();
        let n = 1 + (rng.random::<f64>() * 8.0) as usize;
        let mut pos = Vec::with_capacity(n);
        let mut x = 0.0;
        for _ in 0..n {
            x += -(1.0 - rng.random::<f64>()).ln() / rho2;
            if x >= span {
                break;
            }
            pos.push(x);
        }
        let h = HelperConfig::from_positions(pos).unwrap();
        let lp = build_cycle_lp(&s, &h, Some(span)).unwrap();
        let sched = solve_cycle_lp(&lp).unwrap();
        let flow = optimal_delivery(&s, &h, Some(span)).unwrap();
        assert_close(sched.total_delivered(), flow, &format!("instance {k} (n = {})", h.n()));
        if let Err(violations) = check_schedule(&lp, &sched) {
            panic!("instance {k}: tableau schedule violates rows: {violations:?}");
        }
    }
}

#[test]
fn rescaling_lengths_rescales_bits_linearly() {
    for k in 0..40u64 {
        let (s, h, span) = instance(3000 + k, |u| 0.4e6 + 5.2e6 * u);
        let base = optimal_delivery(&s, &h, Some(span)).unwrap();
        for c in [0.5, 10.0] {
            let scaled = ScenarioParams {
                infra_spacing: s.infra_spacing() * c,
                infra_range: s.infra_range() * c,
                vehicle_range: s.vehicle_range() * c,
                ..*s.params()
            }
            .validate()
            .unwrap();
            let hs = HelperConfig::from_positions(
                h.positions().iter().map(|p| p * c).collect(),
            )
            .unwrap();
            let got = optimal_delivery(&scaled, &hs, Some(span * c)).unwrap();
            let tol = 1e-9 * base.abs().max(1.0) * c.max(1.0);
            assert!(
                (got - base * c).abs() <= tol,
                "instance {k}, c = {c}: {got} vs {}",
                base * c
            );
        }
    }
}
