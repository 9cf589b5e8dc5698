//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dtp::to_lp;
use crate::dynamics::VehicleState;
use crate::simharness::{
    latency_percentiles, load_scenario, run_closed_loop, run_open_loop, write_atomic, write_log,
    HarnessError, HarnessOptions, Scenario, ScenarioError, DEFAULT_SUBSAMPLE,
};
use crate::supervisor::{Supervisor, SupervisorConfig, SupervisorError};
use crate::verifier::{Classification, SolveMode, Verifier, VerifyError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Supervisor(#[from] SupervisorError),
    #[error(transparent)]
    Dtp(#[from] crate::dtp::DtpError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Feasibility,
}

impl From<ModeArg> for SolveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SolveMode::Exact,
            ModeArg::Feasibility => SolveMode::Feasibility,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Lower,
    Upper,
}

/// Safety verification and supervision of vehicles crossing an intersection.
#[derive(Debug, Parser)]
#[command(name = "sentinel", version)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound the scheduling cost of a state and classify it.
    Verify(VerifyArgs),
    /// Run the scenario under the supervisor and write a CSV log.
    Simulate(SimulateArgs),
    /// Run the scenario without supervision and write a CSV log.
    OpenLoop(SimulateArgs),
    /// Time supervisor steps.
    Bench(BenchArgs),
    /// Write a bound problem as a mixed-integer program in LP format.
    ExportLp(ExportArgs),
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Override initial positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub positions: Option<Vec<f64>>,
    /// Override initial speeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub speeds: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Supervisor solve mode.
    #[arg(long, value_enum, default_value = "feasibility")]
    pub mode: ModeArg,
    /// Bad-set monitoring period in seconds.
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLE)]
    pub subsample: f64,
    /// Skip the exact bounds logged per step.
    #[arg(long)]
    pub no_bounds: bool,
    /// Override the number of steps.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, value_enum, default_value = "feasibility")]
    pub mode: ModeArg,
    /// Draw desired inputs uniformly at random from this seed instead of
    /// the scenario's profiles.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "upper")]
    pub problem: ProblemArg,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub state: StateArgs,
}

/// Exit code of a verification verdict.
pub fn exit_code(c: Classification) -> i32 {
    match c {
        Classification::Safe => 0,
        Classification::Undecided => 2,
        Classification::Unsafe => 3,
    }
}

fn initial_state(scenario: &Scenario, args: &StateArgs) -> Result<Vec<VehicleState>, CliError> {
    let n = scenario.model.vehicle_count();
    let mut x = scenario.initial.clone();
    for (name, values, set) in [
        ("positions", &args.positions, 0),
        ("speeds", &args.speeds, 1),
    ] {
        if let Some(values) = values {
            if values.len() != n {
                return Err(CliError::Usage(format!(
                    "--{name} needs {n} values, got {}",
                    values.len()
                )));
            }
            for (s, &v) in x.iter_mut().zip(values) {
                if set == 0 {
                    s.pos = v;
                } else {
                    s.speed = v;
                }
            }
        }
    }
    for (j, s) in x.iter().enumerate() {
        scenario
            .model
            .vehicle(j)
            .check_state(*s)
            .map_err(ScenarioError::from)?;
    }
    Ok(x)
}

/// Execute a parsed command, printing to `out`. Returns the exit code.
pub fn run(config: &CliConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    match &config.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Simulate(a) => cmd_simulate(a, true, out),
        Command::OpenLoop(a) => cmd_simulate(a, false, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::ExportLp(a) => cmd_export_lp(a, out),
    }
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let scenario = load_scenario(&a.scenario)?;
    let x = initial_state(&scenario, &a.state)?;
    let verdict = Verifier::new(scenario.model.clone())?.verify(&x, a.mode.into())?;
    writeln!(out, "s_lower {}", verdict.s_lower)?;
    writeln!(out, "s_upper {}", verdict.s_upper)?;
    writeln!(out, "classification {}", verdict.classification)?;
    Ok(exit_code(verdict.classification))
}

fn cmd_simulate(a: &SimulateArgs, supervised: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut scenario = load_scenario(&a.scenario)?;
    if let Some(steps) = a.steps {
        scenario.steps = steps;
    }
    let options = HarnessOptions {
        subsample: a.subsample,
        log_bounds: !a.no_bounds,
        mode: a.mode.into(),
    };
    let started = Instant::now();
    let (log, latency) = if supervised {
        let run = run_closed_loop(&scenario, &options)?;
        (run.log, Some(run.step_latency))
    } else {
        (run_open_loop(&scenario, &options)?, None)
    };
    let wall = started.elapsed().as_secs_f64();
    write_log(&log, &a.out)?;
    let bad_steps = {
        let mut s: Vec<usize> = log.rows.iter().filter(|r| r.in_bad).map(|r| r.step).collect();
        s.dedup();
        s.len()
    };
    writeln!(out, "steps {}", scenario.steps)?;
    writeln!(out, "overrides {}", log.override_count())?;
    writeln!(out, "bad_set_steps {bad_steps}")?;
    match log.max_s_upper() {
        Some(s) => writeln!(out, "max_s_upper {s}")?,
        None => writeln!(out, "max_s_upper n/a")?,
    }
    writeln!(out, "wall_time_s {wall:.6}")?;
    if let Some((p50, p95, max)) = latency.as_deref().and_then(latency_percentiles) {
        writeln!(out, "step_latency_s p50 {p50:.6} p95 {p95:.6} max {max:.6}")?;
    }
    writeln!(out, "wrote {}", a.out.display())?;
    Ok(0)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if a.iterations == 0 {
        return Err(CliError::Usage("--iterations must be positive".into()));
    }
    let scenario = load_scenario(&a.scenario)?;
    let model = &scenario.model;
    let config = SupervisorConfig {
        tau: scenario.tau,
        mode: a.mode.into(),
    };
    let verifier = Verifier::new(model.clone())?;
    let mut rng = a.seed.map(ChaCha8Rng::seed_from_u64);
    let mut supervisor = Supervisor::new(verifier.clone(), &scenario.initial, config)?;
    let mut x = scenario.initial.clone();
    let mut samples = Vec::with_capacity(a.iterations);
    let mut overrides = 0;
    let mut k = 0;
    for _ in 0..a.iterations {
        // start over once every vehicle has left the intersection
        let clear = (0..model.vehicle_count()).all(|j| model.route_end(j).is_none_or(|e| x[j].pos >= e));
        if clear {
            supervisor = Supervisor::new(verifier.clone(), &scenario.initial, config)?;
            x = scenario.initial.clone();
            k = 0;
        }
        let desired: Vec<f64> = match rng.as_mut() {
            Some(rng) => model
                .vehicles()
                .iter()
                .map(|s| rng.gen_range(s.u_min..=s.u_max))
                .collect(),
            None => scenario.desired_at(k),
        };
        let started = Instant::now();
        let outcome = supervisor.step(&x, &desired)?;
        samples.push(started.elapsed().as_secs_f64());
        overrides += outcome.overridden as usize;
        x = outcome.next_state;
        k += 1;
    }
    let (p50, p95, max) = latency_percentiles(&samples).expect("non-empty");
    writeln!(out, "iterations {}", a.iterations)?;
    writeln!(out, "overrides {overrides}")?;
    writeln!(out, "step_latency_s p50 {p50:.6} p95 {p95:.6} max {max:.6}")?;
    writeln!(
        out,
        "budget {} s: {}",
        scenario.tau,
        if max <= scenario.tau { "met" } else { "exceeded" }
    )?;
    Ok(0)
}

fn cmd_export_lp(a: &ExportArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let scenario = load_scenario(&a.scenario)?;
    let x = initial_state(&scenario, &a.state)?;
    let verifier = Verifier::new(scenario.model.clone())?;
    let problem = match a.problem {
        ProblemArg::Lower => verifier.lower_problem(&x)?.0,
        ProblemArg::Upper => verifier.upper_problem(&x)?.0,
    };
    let text = to_lp(&problem)?;
    match &a.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

/// Parse `args`, run, and map failures to exit code 1.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run(&config, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
