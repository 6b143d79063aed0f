//! One function per verb. Each returns `Ok(())` or a [`Failure`] that
//! `run` turns into the exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use covnet::analytic;
use covnet::experiments::{
    figure_curves, preset_names, run_sweep, summarize, write_csv, Axis, SweepMode, SweepSpec,
};
use covnet::model::{HelperConfig, Scenario, ScenarioParams};
use covnet::optimizer::{
    build_cycle_lp, check_schedule, schedule_infra_limited, schedule_v2v_limited, solve_cycle_lp,
    transitional_bounds,
};
use covnet::sim::rng::stream;
use covnet::sim::sampled::DEFAULT_LP_CAP;
use covnet::sim::{collect_traces, CycleTrace, Mode, ModelConfig, ThroughputEstimate};
use rand::Rng;

use crate::{Failure, RegimeArg, ScenarioArgs};

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(crate) fn validate(scenario: &ScenarioArgs) -> Result<(), Failure> {
    let (cfg, s) = scenario.resolve()?;
    let regime = s.regime();
    let rho_min = analytic::rho_min(&s);
    let bd = analytic::throughput(&s);
    let note = if bd.clamped {
        format!(
            "helper density {} veh/m is below rho_min {rho_min:e} veh/m: the expected \
             distance to the first helper exceeds the relay window, so the expected \
             relayed data is zero",
            s.helper_density()
        )
    } else {
        format!(
            "helper density {} veh/m is at or above rho_min {rho_min:e} veh/m: the \
             relay closed forms apply",
            s.helper_density()
        )
    };
    let report = serde_json::json!({
        "scenario": cfg,
        "regime": regime.kind.to_string(),
        "w_lo_bps": regime.w_lo,
        "w_hi_bps": regime.w_hi,
        "rho_min_veh_per_m": rho_min,
        "density_note": note,
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}

pub(crate) fn analytic(
    scenario: &ScenarioArgs,
    sweep_expr: Option<&str>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (cfg, s) = scenario.resolve()?;
    let Some(expr) = sweep_expr else {
        let bd = analytic::throughput(&s);
        let regime = s.regime();
        let report = serde_json::json!({
            "regime": regime.kind.to_string(),
            "w_lo_bps": regime.w_lo,
            "w_hi_bps": regime.w_hi,
            "e_cycle_time_s": bd.e_cycle_time,
            "e_v2i_data_bits": bd.e_v2i_data,
            "e_v2v_data_lower_bits": bd.e_v2v_data.lower(),
            "e_v2v_data_upper_bits": bd.e_v2v_data.upper(),
            "eta_lower_bps": bd.eta.lower(),
            "eta_upper_bps": bd.eta.upper(),
            "eta_mid_bps": bd.eta.midpoint(),
            "transition_point_bps": bd.transition_point,
            "relay_clamped": bd.clamped,
        });
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        return emit(&format!("{text}\n"), out);
    };
    let (axis, values) = parse_sweep(expr)?;
    let spec = SweepSpec {
        base: cfg,
        models: ModelConfig::default(),
        axis,
        values,
        modes: vec![SweepMode::Analytic],
        n_cycles: 0,
        master_seed: 0,
        lp_cap: DEFAULT_LP_CAP,
    };
    let rows = run_sweep(&spec)?;
    let csv = write_csv(&spec, &rows)?;
    emit(&csv, out)
}

fn parse_sweep(expr: &str) -> Result<(Axis, Vec<f64>), Failure> {
    let shape = || Failure::Usage(format!("--sweep wants axis=lo:hi:step, got `{expr}`"));
    let (axis_token, range) = expr.split_once('=').ok_or_else(shape)?;
    let axis = match axis_token {
        "d" => Axis::Spacing,
        "w_i" => Axis::V2iRate,
        "rho2" => Axis::HelperDensity,
        other => {
            return Err(Failure::Usage(format!(
                "unknown sweep axis `{other}`; valid axes: d, w_i, rho2"
            )))
        }
    };
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, c] = parts.as_slice() else { return Err(shape()) };
    let parse = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Failure::Usage(format!("`{t}` is not a number in --sweep {expr}")))
    };
    let (lo, hi, step) = (parse(a)?, parse(b)?, parse(c)?);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && hi >= lo) {
        return Err(Failure::Usage(format!(
            "--sweep range needs finite lo <= hi and step > 0, got {lo}:{hi}:{step}"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(Failure::Usage(format!("--sweep would produce {n} points; cap is 100000")));
    }
    Ok((axis, (0..=n).map(|i| lo + i as f64 * step).collect()))
}

pub(crate) fn simulate(
    scenario: &ScenarioArgs,
    models: Option<&Path>,
    mode: Mode,
    cycles: u64,
    seed: u64,
    lp_cap: Option<usize>,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    let (_, s) = scenario.resolve()?;
    let m = match models {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            ModelConfig::from_json(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => ModelConfig::default(),
    };
    let cap = lp_cap.unwrap_or(DEFAULT_LP_CAP);
    let (traces, fallback_cycles) = collect_traces(&s, &m, mode, cycles, seed, cap)?;
    if let Some(path) = trace {
        fs::write(path, trace_csv(&traces))
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    let sum = summarize(&traces)?;
    let est = ThroughputEstimate {
        mean: sum.mean,
        std_err: sum.std_err,
        ci95: sum.ci95,
        n_cycles: traces.len() as u64,
        mode,
        master_seed: seed,
        fallback_cycles,
    };
    let text =
        serde_json::to_string_pretty(&est).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn trace_csv(traces: &[CycleTrace]) -> String {
    let mut out =
        String::from("cycle_index,duration_s,v2i_bits,v2v_bits,helper_count,cluster_count\n");
    for (i, t) in traces.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{}",
            t.duration, t.v2i_bits, t.v2v_bits, t.helper_count, t.cluster_count
        )
        .expect("string write");
    }
    out
}

/// Schedules must match the LP beyond this, relative to the optimum.
const LP_CHECK_TOL: f64 = 1e-9;

pub(crate) fn lp_check(
    trials: u64,
    n_max: usize,
    seed: u64,
    regime: RegimeArg,
) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    if n_max == 0 {
        return Err(Failure::Usage("--n-max must be at least 1".into()));
    }
    let suites: &[(&str, RegimeArg)] =
        &[("infra", RegimeArg::Infra), ("v2v", RegimeArg::V2v), ("transitional", RegimeArg::Transitional)];
    println!(
        "{:<14} {:>7} {:>6} {:>18} {:>7}",
        "suite", "trials", "n_max", "max_rel_violation", "result"
    );
    let mut failed = false;
    for (idx, &(label, kind)) in suites.iter().enumerate() {
        if regime != RegimeArg::All && regime != kind {
            continue;
        }
        let mut worst: f64 = 0.0;
        for k in 0..trials {
            worst = worst.max(check_instance(seed, idx as u64, k, n_max, kind)?);
        }
        let ok = worst <= LP_CHECK_TOL;
        failed |= !ok;
        println!(
            "{:<14} {:>7} {:>6} {:>18.3e} {:>7}",
            label,
            trials,
            n_max,
            worst,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failed {
        return Err(Failure::Runtime(format!(
            "a schedule disagrees with the LP optimum beyond {LP_CHECK_TOL:e} relative"
        )));
    }
    Ok(())
}

/// One random instance: closed-form schedule (or bounds) against the exact
/// LP optimum. Returns the relative violation, 0 when everything agrees.
fn check_instance(
    seed: u64,
    suite: u64,
    k: u64,
    n_max: usize,
    kind: RegimeArg,
) -> Result<f64, Failure> {
    let runtime = |e: covnet::optimizer::OptimizerError| Failure::Runtime(e.to_string());
    let (s, h, span) = lp_instance(seed, suite, k, n_max, kind);
    let lp = build_cycle_lp(&s, &h, Some(span)).map_err(runtime)?;
    let sched = solve_cycle_lp(&lp).map_err(runtime)?;
    if let Err(rows) = check_schedule(&lp, &sched) {
        return Err(Failure::Runtime(format!(
            "trial {k}: the LP schedule violates its own constraints: {}",
            rows.join("; ")
        )));
    }
    let lp_total = sched.total_delivered();
    let scale = lp_total.abs().max(1.0);
    let violation = match kind {
        RegimeArg::Infra => {
            let g = schedule_infra_limited(&s, &h, Some(span)).map_err(runtime)?;
            (g.total_delivered() - lp_total).abs() / scale
        }
        RegimeArg::V2v => {
            let g = schedule_v2v_limited(&s, &h, Some(span)).map_err(runtime)?;
            (g.total_delivered() - lp_total).abs() / scale
        }
        RegimeArg::Transitional => {
            let (lower, upper) = transitional_bounds(&s, &h, Some(span)).map_err(runtime)?;
            let lo = lower.total_delivered();
            ((lo - lp_total) / scale).max((lp_total - upper) / scale).max(0.0)
        }
        RegimeArg::All => unreachable!("suites are concrete regimes"),
    };
    Ok(violation)
}

/// Spacing, density, and rate drawn uniformly; the rate lands in the suite's
/// regime band. Helpers are truncated at `n_max` so the LP stays small.
fn lp_instance(
    seed: u64,
    suite: u64,
    k: u64,
    n_max: usize,
    kind: RegimeArg,
) -> (Scenario, HelperConfig, f64) {
    let mut rng = stream(seed, &[0x1C, suite, k]);
    let d = 5_000.0 + 10_000.0 * rng.random::<f64>();
    let rho2 = 0.002 + 0.006 * rng.random::<f64>();
    let u: f64 = rng.random();
    let geometry = |w_i: f64| {
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
        .expect("generated geometry is valid")
    };
    let probe = geometry(1e6).regime();
    let w_i = match kind {
        RegimeArg::Infra => probe.w_lo * (0.05 + 0.95 * u),
        RegimeArg::V2v => probe.w_hi * (1.0 + u),
        RegimeArg::Transitional => probe.w_lo + (probe.w_hi - probe.w_lo) * (0.02 + 0.96 * u),
        RegimeArg::All => unreachable!("suites are concrete regimes"),
    };
    let s = geometry(w_i);
    let span = s.relative_span();
    let mut positions = Vec::with_capacity(n_max);
    let mut x = 0.0;
    loop {
        x += -(1.0 - rng.random::<f64>()).ln() / rho2;
        if x >= span || positions.len() >= n_max {
            break;
        }
        positions.push(x);
    }
    if positions.is_empty() {
        positions.push(span * 0.5);
    }
    let h = HelperConfig::from_positions(positions).expect("positions are sorted and in range");
    (s, h, span)
}

pub(crate) fn sweep(spec_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", spec_path.display())))?;
    let spec = SweepSpec::from_json(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", spec_path.display())))?;
    let rows = run_sweep(&spec)?;
    let csv = write_csv(&spec, &rows)?;
    emit(&csv, out)
}

pub(crate) fn figure(
    preset: &str,
    out_dir: &Path,
    cycles: Option<u64>,
    seed: u64,
) -> Result<(), Failure> {
    let curves = figure_curves(preset).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown preset `{preset}`; valid presets: {}",
            preset_names().join(", ")
        ))
    })?;
    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", out_dir.display())))?;
    for (suffix, mut spec) in curves {
        if let Some(n) = cycles {
            spec.n_cycles = n;
        }
        spec.master_seed = seed;
        let rows = run_sweep(&spec)?;
        let csv = write_csv(&spec, &rows)?;
        let path = out_dir.join(format!("{preset}{suffix}.csv"));
        fs::write(&path, csv)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}
