//! Acceptance gate: ten checks with pinned tolerances, each printing a
//! single verdict line (`cargo test --test acceptance -- --nocapture` shows
//! them all). Tolerances are constants here, not knobs.

use std::time::{Duration, Instant};

use rand::Rng;

use covnet::analytic::{eta_infra_limited, eta_transitional, eta_v2v_limited, throughput};
use covnet::experiments::{figure_curves, run_sweep, SweepMode};
use covnet::model::{HelperConfig, RegimeKind, Scenario, ScenarioParams};
use covnet::optimizer::{
    build_cycle_lp, schedule_infra_limited, schedule_v2v_limited, solve_cycle_lp,
    transitional_bounds,
};
use covnet::sim::rng::stream;
use covnet::sim::{
    estimate_throughput, estimate_throughput_with, ConnectionModel, Mode, MobilityModel,
    ModelConfig,
};

const N_EXACT: u64 = 500;
const REL_TOL_EXACT: f64 = 1e-9;
const EXACT_BUDGET: Duration = Duration::from_secs(10);
const REL_TOL_BOUNDARY: f64 = 1e-12;
const SAMPLED_TOL: f64 = 0.03;
const EVENT_TOL: f64 = 0.05;
const SIM_BUDGET: Duration = Duration::from_secs(120);
const BAND_BELOW_TOL: f64 = 0.03;
const BAND_ABOVE_TOL: f64 = 0.08;
const GAIN_WINDOW_MID: (f64, f64) = (10.0, 20.0);
const GAIN_WINDOW_HIGH: (f64, f64) = (7.0, 13.0);
const DENSITY_PLATEAU_TOL: f64 = 0.05;
const GAUSS_SHIFT_TOL: f64 = 0.02;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Reference geometry with the three swept parameters free.
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
    .expect("acceptance scenario is valid")
}

/// Random small instance pinned to one regime: random spacing and density,
/// a rate drawn inside the regime's band, and at most eight exponential
/// helper positions so the exact solvers stay cheap.
fn random_instance(root: u64, k: u64, kind: RegimeKind) -> (Scenario, HelperConfig, f64) {
    let mut rng = stream(root, &[k]);
    let d = 5_000.0 + 10_000.0 * rng.random::<f64>();
    let rho2 = 0.002 + 0.006 * rng.random::<f64>();
    let r = scenario(d, 1e6, rho2).regime();
    let w_i = match kind {
        RegimeKind::InfrastructureLimited => r.w_lo * (0.05 + 0.95 * rng.random::<f64>()),
        RegimeKind::V2VLimited => r.w_hi * (1.0 + rng.random::<f64>()),
        RegimeKind::Transitional => {
            r.w_lo + (r.w_hi - r.w_lo) * (0.02 + 0.96 * rng.random::<f64>())
        }
    };
    let s = scenario(d, w_i, rho2);
    let span = s.relative_span();
    let n_target = rng.random_range(1..=8);
    let mut xs: Vec<f64> = Vec::new();
    let mut x = 0.0;
    loop {
        x += -(1.0 - rng.random::<f64>()).ln() / rho2;
        if x >= span || xs.len() == n_target {
            break;
        }
        xs.push(x);
    }
    if xs.is_empty() {
        xs.push(0.5 * span);
    }
    (s, HelperConfig::from_positions(xs).expect("positions sorted"), span)
}

/// Max relative gap between a closed-form schedule total and the LP optimum
/// over `N_EXACT` random instances of one regime.
fn exact_suite(root: u64, kind: RegimeKind) -> (f64, Duration) {
    let t0 = Instant::now();
    let mut worst = 0.0_f64;
    for k in 0..N_EXACT {
        let (s, h, span) = random_instance(root, k, kind);
        let lp = build_cycle_lp(&s, &h, Some(span)).expect("instance builds");
        let opt = solve_cycle_lp(&lp).expect("LP solves").total_delivered();
        let sched = match kind {
            RegimeKind::InfrastructureLimited => schedule_infra_limited(&s, &h, Some(span)),
            RegimeKind::V2VLimited => schedule_v2v_limited(&s, &h, Some(span)),
            RegimeKind::Transitional => unreachable!("outer regimes only"),
        }
        .expect("schedule builds");
        let scale = opt.abs().max(1.0);
        worst = worst.max((sched.total_delivered() - opt).abs() / scale);
    }
    (worst, t0.elapsed())
}

#[test]
fn criterion_01_infra_limited_schedule_matches_the_lp() {
    let (worst, dt) = exact_suite(0xACC1, RegimeKind::InfrastructureLimited);
    let ok = worst <= REL_TOL_EXACT && dt <= EXACT_BUDGET;
    println!(
        "criterion 01 {}: {N_EXACT} infrastructure-limited instances, max relative gap \
         to the LP optimum {worst:.3e} (tol 1e-9), {dt:.2?} (budget 10s)",
        verdict(ok)
    );
    assert!(ok, "max relative gap {worst:e}, elapsed {dt:?}");
}

#[test]
fn criterion_02_v2v_limited_schedule_matches_the_lp() {
    let (worst, dt) = exact_suite(0xACC2, RegimeKind::V2VLimited);
    let ok = worst <= REL_TOL_EXACT && dt <= EXACT_BUDGET;
    println!(
        "criterion 02 {}: {N_EXACT} v2v-limited instances, max relative gap to the \
         LP optimum {worst:.3e} (tol 1e-9), {dt:.2?} (budget 10s)",
        verdict(ok)
    );
    assert!(ok, "max relative gap {worst:e}, elapsed {dt:?}");
}

#[test]
fn criterion_03_transitional_bounds_sandwich_the_lp() {
    let t0 = Instant::now();
    let mut worst = 0.0_f64;
    for k in 0..N_EXACT {
        let (s, h, span) = random_instance(0xACC3, k, RegimeKind::Transitional);
        let lp = build_cycle_lp(&s, &h, Some(span)).expect("instance builds");
        let opt = solve_cycle_lp(&lp).expect("LP solves").total_delivered();
        let (lower, upper) = transitional_bounds(&s, &h, Some(span)).expect("bounds build");
        let scale = opt.abs().max(1.0);
        let viol = ((lower.total_delivered() - opt) / scale).max((opt - upper) / scale);
        worst = worst.max(viol.max(0.0));
    }
    let dt = t0.elapsed();
    let ok = worst <= REL_TOL_EXACT && dt <= EXACT_BUDGET;
    println!(
        "criterion 03 {}: {N_EXACT} transitional instances, worst sandwich violation \
         {worst:.3e} (tol 1e-9), {dt:.2?} (budget 10s)",
        verdict(ok)
    );
    assert!(ok, "worst sandwich violation {worst:e}, elapsed {dt:?}");
}

#[test]
fn criterion_04_bounds_meet_the_outer_forms_at_the_thresholds() {
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let mut rng = stream(0xACC4, &[k]);
        let d = 5_000.0 + 10_000.0 * rng.random::<f64>();
        let rho2 = 0.002 + 0.008 * rng.random::<f64>();
        let r = scenario(d, 2e6, rho2).regime();
        let at_lo = scenario(d, r.w_lo, rho2);
        let eta1 = eta_infra_limited(&at_lo);
        let (lo, hi) = eta_transitional(&at_lo);
        worst = worst.max(((lo - eta1) / eta1).abs()).max(((hi - eta1) / eta1).abs());
        let at_hi = scenario(d, r.w_hi, rho2);
        let eta2 = eta_v2v_limited(&at_hi);
        let (lo, hi) = eta_transitional(&at_hi);
        worst = worst.max(((lo - eta2) / eta2).abs()).max(((hi - eta2) / eta2).abs());
    }
    let ok = worst <= REL_TOL_BOUNDARY;
    println!(
        "criterion 04 {}: 100 scenarios, worst relative mismatch {worst:.3e} where the \
         transitional band meets the outer closed forms (tol 1e-12)",
        verdict(ok)
    );
    assert!(ok, "worst relative mismatch {worst:e}");
}

#[test]
fn criterion_05_simulators_track_the_outer_closed_forms() {
    let t0 = Instant::now();
    let mut worst_sampled = 0.0_f64;
    let mut worst_event = 0.0_f64;
    for d_km in [10.0, 20.0] {
        for w_i in [1e6, 6e6] {
            let s = scenario(d_km * 1e3, w_i, 0.005);
            let eta = throughput(&s).eta.midpoint();
            let sampled = estimate_throughput(
                &s,
                &ModelConfig::default(),
                Mode::SampledSchedule,
                2_000,
                0xC501,
            )
            .expect("sampled estimate");
            let event =
                estimate_throughput(&s, &ModelConfig::default(), Mode::EventDriven, 2_000, 0xC502)
                    .expect("event estimate");
            worst_sampled = worst_sampled.max((sampled.mean - eta).abs() / eta);
            worst_event = worst_event.max((event.mean - eta).abs() / eta);
        }
    }
    let dt = t0.elapsed();
    let ok = worst_sampled <= SAMPLED_TOL && worst_event <= EVENT_TOL && dt <= SIM_BUDGET;
    println!(
        "criterion 05 {}: over d in {{10, 20}} km at 1 and 6 Mb/s, 2000 cycles: sampled \
         within {:.2}% (tol 3%), event-driven within {:.2}% (tol 5%) of the closed forms, \
         {dt:.1?} (budget 120s)",
        verdict(ok),
        100.0 * worst_sampled,
        100.0 * worst_event
    );
    assert!(
        ok,
        "sampled off by {:.3}%, event off by {:.3}%, elapsed {dt:?}",
        100.0 * worst_sampled,
        100.0 * worst_event
    );
}

#[test]
fn criterion_06_transitional_sampled_optimum_sits_in_the_band() {
    let s = scenario(8_000.0, 2e6, 0.004);
    let (eta_lo, eta_hi) = eta_transitional(&s);
    let est = estimate_throughput_with(
        &s,
        &ModelConfig::default(),
        Mode::SampledSchedule,
        900,
        0xC6,
        256,
    )
    .expect("sampled estimate");
    assert_eq!(est.fallback_cycles, 0, "cap 256 must cover every cycle exactly");
    let below_upper = (eta_hi - est.mean) / eta_hi;
    let above_lower = (est.mean - eta_lo) / eta_lo;
    let ok = below_upper <= BAND_BELOW_TOL && above_lower <= BAND_ABOVE_TOL;
    println!(
        "criterion 06 {}: per-cycle optimum mean {:.0} vs closed-form band [{:.0}, {:.0}]: \
         {:.2}% below the upper form (tol 3%), {:.2}% above the lower (tol 8%)",
        verdict(ok),
        est.mean,
        eta_lo,
        eta_hi,
        100.0 * below_upper.max(0.0),
        100.0 * above_lower.max(0.0)
    );
    assert!(ok, "mean {} vs band [{eta_lo}, {eta_hi}]", est.mean);
}

#[test]
fn criterion_07_cooperation_gain_over_direct_reception() {
    let curves = figure_curves("fig5").expect("fig5 preset exists");
    let (_, base) = curves
        .iter()
        .find(|(suffix, _)| suffix == "_rho0.002")
        .expect("sparse-density curve exists");
    // The gain ratio is a closed-form column; no cycles needed.
    let mut spec = base.clone();
    spec.modes = vec![SweepMode::Analytic];
    let rows = run_sweep(&spec).expect("sweep runs");
    let ratio_at = |w: f64| {
        rows.iter().find(|r| r.value == w).expect("rate present in sweep").ratio_noncoop
    };
    let r3 = ratio_at(3e6);
    let r6 = ratio_at(6e6);
    let ok = (GAIN_WINDOW_MID.0..=GAIN_WINDOW_MID.1).contains(&r3)
        && (GAIN_WINDOW_HIGH.0..=GAIN_WINDOW_HIGH.1).contains(&r6);
    println!(
        "criterion 07 {}: at 15 km spacing and 0.002 helpers/m, cooperation gains {r3:.1}x \
         at 3 Mb/s (window 10-20x) and {r6:.1}x at 6 Mb/s (window 7-13x)",
        verdict(ok)
    );
    assert!(ok, "gain ratios {r3:.2} and {r6:.2} fell outside the windows");
}

#[test]
fn criterion_08_density_insensitivity_when_contact_limited() {
    // Asserted bound: quadrupling helper density in the contact-limited
    // regime moves throughput by less than 5%. The closed form disagrees:
    // the coverage term 1 - exp(-2*rho2*r0) is still far from saturated at
    // 0.005 helpers/m, so the measured change is about +8.4%. The check
    // states the bound as given and fails honestly rather than widening it.
    let e0 = throughput(&scenario(10_000.0, 6e6, 0.005)).eta.midpoint();
    let e1 = throughput(&scenario(10_000.0, 6e6, 0.02)).eta.midpoint();
    let change = (e1 - e0).abs() / e0;
    let ok = change < DENSITY_PLATEAU_TOL;
    println!(
        "criterion 08 {}: rho2 0.005 -> 0.02 at 6 Mb/s moves eta by {:+.2}% (bound 5%)",
        verdict(ok),
        100.0 * (e1 - e0) / e0
    );
    assert!(
        ok,
        "eta moved {:.2}% when density quadrupled; the 5% insensitivity bound does not hold",
        100.0 * change
    );
}

#[test]
fn criterion_09_model_extensions_behave() {
    let cycles = 1_020;
    let seed = 0xC9;

    // Speed jitter around unchanged means barely moves the estimate when
    // direct reception is the binding term.
    let s_direct = scenario(10_000.0, 1e6, 0.005);
    let constant =
        estimate_throughput(&s_direct, &ModelConfig::default(), Mode::EventDriven, cycles, seed)
            .expect("constant-model estimate");
    let gauss = ModelConfig {
        mobility: MobilityModel::Gaussian { sigma1: 2.0, sigma2: 2.0, tau: 5.0 },
        ..ModelConfig::default()
    };
    let g = estimate_throughput(&s_direct, &gauss, Mode::EventDriven, cycles, seed)
        .expect("jittered estimate");
    let shift = (g.mean - constant.mean).abs() / constant.mean;

    // Median-preserving shadowing helps on average: the occasional long
    // reach adds contact time the unit disk never sees. That only pays off
    // where helper scarcity binds, so measure it with sparse helpers and a
    // backhaul fast enough that relaying is the bottleneck.
    let s_relay = scenario(10_000.0, 6e6, 0.002);
    let disk =
        estimate_throughput(&s_relay, &ModelConfig::default(), Mode::EventDriven, cycles, seed)
            .expect("unit-disk estimate");
    let shadow = ModelConfig {
        connection: ConnectionModel::LogNormal { alpha: 2.0, sigma: 4.0 },
        ..ModelConfig::default()
    };
    let l = estimate_throughput(&s_relay, &shadow, Mode::EventDriven, cycles, seed)
        .expect("shadowed estimate");
    let noise = 1.96 * l.std_err.max(disk.std_err);
    let shadow_ok = l.mean >= disk.mean - noise;

    // A fading channel and a constant channel pinned at the fading
    // channel's measured average rates are statistically indistinguishable.
    let fading = &figure_curves("fig10").expect("fig10 preset exists")[0].1;
    let fs = Scenario::from_config(&fading.base).expect("preset scenario is valid");
    let f = estimate_throughput(&fs, &fading.models, Mode::EventDriven, 510, seed)
        .expect("fading estimate");
    let c = estimate_throughput(&fs, &ModelConfig::default(), Mode::EventDriven, 510, seed)
        .expect("average-rate estimate");
    let overlap = f.ci95.0.max(c.ci95.0) <= f.ci95.1.min(c.ci95.1);

    let ok = shift < GAUSS_SHIFT_TOL && shadow_ok && overlap;
    println!(
        "criterion 09 {}: speed jitter shifts eta {:.2}% (tol 2%); log-normal mean {:.0} \
         vs unit-disk {:.0} (allowed {:.0} of noise below); fading CI [{:.0}, {:.0}] vs \
         average-rate CI [{:.0}, {:.0}] overlap={overlap}",
        verdict(ok),
        100.0 * shift,
        l.mean,
        disk.mean,
        noise,
        f.ci95.0,
        f.ci95.1,
        c.ci95.0,
        c.ci95.1
    );
    assert!(
        ok,
        "jitter shift {:.3}%, shadow ok {shadow_ok}, fading CI overlap {overlap}",
        100.0 * shift
    );
}

#[test]
fn criterion_10_worker_count_never_changes_results() {
    let run = |args: &[&str]| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_covnet"))
            .args(args)
            .output()
            .expect("binary should spawn");
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let mut identical = true;

    for mode in ["sampled", "event"] {
        let one =
            run(&["--workers", "1", "simulate", "--mode", mode, "--cycles", "40", "--seed", "7"]);
        let eight =
            run(&["--workers", "8", "simulate", "--mode", mode, "--cycles", "40", "--seed", "7"]);
        identical &= one == eight;
    }

    let dir = std::env::temp_dir().join(format!("covnet-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    let csv = dir.join("eval_approx.csv");
    let mut figure = |workers: &str| {
        run(&[
            "--workers",
            workers,
            "figure",
            "--preset",
            "eval_approx",
            "--out",
            dir.to_str().unwrap(),
            "--cycles",
            "40",
            "--seed",
            "11",
        ]);
        std::fs::read(&csv).expect("figure wrote its csv")
    };
    identical &= figure("1") == figure("8");

    println!(
        "criterion 10 {}: simulate (sampled and event-driven) and figure outputs are \
         byte-identical across --workers 1 and 8",
        verdict(identical)
    );
    assert!(identical, "outputs differed between --workers 1 and 8");
}
