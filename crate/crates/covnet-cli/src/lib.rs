//! Command-line front end: `validate`, `analytic`, `simulate`, `lp-check`,
//! `sweep`, and `figure`, wired to the covnet library.
//!
//! Exit codes are a stable contract: 0 success, 1 validation or usage
//! error, 2 runtime or assertion failure. Every command is deterministic in
//! (argv, input files, seed); `--workers` caps thread-pool size without
//! changing any output byte.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use covnet::model::ModelError;
use covnet::sim::{Mode, SimError};

mod commands;
mod scenario;

pub use scenario::ScenarioArgs;

#[derive(Parser)]
#[command(
    name = "covnet",
    version,
    about = "Throughput analysis for infrastructure-assisted cooperative vehicular networks"
)]
struct Cli {
    /// Cap the number of worker threads. Results never depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario and report its regime, thresholds, and density note.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Evaluate the closed forms, as JSON or as a one-axis CSV sweep.
    Analytic {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Sweep one axis: `axis=lo:hi:step`, axis in {d, w_i, rho2},
        /// SI units (m, bit/s, veh/m). Emits CSV instead of JSON.
        #[arg(long)]
        sweep: Option<String>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate throughput by Monte Carlo and print the estimate as JSON.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Model extensions JSON (mobility / connection / channel).
        #[arg(long)]
        models: Option<PathBuf>,
        /// sampled: independent helper layouts scored per cycle;
        /// event: continuous-time engine.
        #[arg(long, value_enum, default_value_t = ModeArg::Sampled)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2000)]
        cycles: u64,
        /// Master seed; every random stream derives from it.
        #[arg(long)]
        seed: u64,
        /// Helpers per cycle solved exactly; larger cycles fall back to the
        /// guaranteed schedule (sampled mode only).
        #[arg(long)]
        lp_cap: Option<usize>,
        /// Also write per-cycle traces to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Cross-check closed-form schedules against the exact per-cycle LP on
    /// random instances and print a pass/fail table.
    LpCheck {
        /// Random instances per suite.
        #[arg(long, default_value_t = 500)]
        trials: u64,
        /// Largest helper count per instance.
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = RegimeArg::All)]
        regime: RegimeArg,
    },
    /// Run a sweep plan from a JSON spec file and emit CSV.
    Sweep {
        /// Sweep spec JSON file.
        #[arg(long)]
        spec: PathBuf,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a named figure dataset: one CSV per curve.
    Figure {
        #[arg(long)]
        preset: String,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Override the preset's cycles per sweep point.
        #[arg(long)]
        cycles: Option<u64>,
        /// Master seed; replaces the preset's baked-in seed.
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sampled,
    Event,
}

impl ModeArg {
    fn to_sim(self) -> Mode {
        match self {
            ModeArg::Sampled => Mode::SampledSchedule,
            ModeArg::Event => Mode::EventDriven,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    Infra,
    V2v,
    Transitional,
    All,
}

/// A failed command, already classified by exit code.
pub enum Failure {
    /// Bad arguments, configs, or preconditions: exit 1.
    Usage(String),
    /// The computation itself failed or an assertion tripped: exit 2.
    Runtime(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            // One line per violated rule, so a bad config reports
            // everything wrong with it at once.
            ModelError::Validation(items) => {
                let mut msg = String::from("invalid scenario:");
                for item in &items {
                    msg.push_str("\n  - ");
                    msg.push_str(item);
                }
                Failure::Usage(msg)
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Model(_)
            | SimError::TooFewCycles { .. }
            | SimError::HorizonTooShort(_)
            | SimError::NeedsEventMode(_) => Failure::Usage(e.to_string()),
            SimError::Optimizer(_) | SimError::CrossCheck(_) => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<covnet::experiments::ExperimentError> for Failure {
    fn from(e: covnet::experiments::ExperimentError) -> Self {
        use covnet::experiments::ExperimentError::*;
        match e {
            Spec(msg) => Failure::Usage(msg),
            Model(m) => m.into(),
            Sim(s) => s.into(),
        }
    }
}

/// Parse and run one invocation; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; they are successes.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.workers {
        Some(0) => Err(Failure::Usage("--workers must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Usage(format!("--workers: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { scenario } => commands::validate(&scenario),
        Command::Analytic { scenario, sweep, out } => {
            commands::analytic(&scenario, sweep.as_deref(), out.as_deref())
        }
        Command::Simulate { scenario, models, mode, cycles, seed, lp_cap, trace } => {
            commands::simulate(
                &scenario,
                models.as_deref(),
                mode.to_sim(),
                cycles,
                seed,
                lp_cap,
                trace.as_deref(),
            )
        }
        Command::LpCheck { trials, n_max, seed, regime } => {
            commands::lp_check(trials, n_max, seed, regime)
        }
        Command::Sweep { spec, out } => commands::sweep(&spec, out.as_deref()),
        Command::Figure { preset, out, cycles, seed } => {
            commands::figure(&preset, &out, cycles, seed)
        }
    }
}
