//! Scenario files, open- and closed-loop simulation, bad-set monitoring and
//! trajectory logs.
//!
//! Scenario files are JSON:
//!
//! ```json
//! {
//!   "vehicles": [{"id": 0, "x0": 0.0, "v0": 10.0, "v_min": 8.0, "v_max": 10.0,
//!                 "u_min": -2.0, "u_max": 2.0, "a": 1.0, "b": 0.005}],
//!   "areas": [{"id": 0}],
//!   "placements": [{"area": 0, "vehicle": 0, "alpha": 20.0, "beta": 25.0}],
//!   "sim": {"tau": 0.1, "steps": 60, "desired": [-2.0]}
//! }
//! ```
//!
//! Vehicle and area ids must equal their position in the list. Each entry of
//! `desired` is either a constant input or a table `[[t, u], ...]` with
//! increasing times, the first of which is 0; the input at `t` is the value
//! of the last row with time `<= t`. The driver holds the value read at the
//! start of each step for the whole step.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{advance, simulate_signal, DynamicsError, PiecewiseConstantInput, VehicleSpec, VehicleState};
use crate::intersection::{build_operation_graph, BadSetVariant, IntersectionModel, ModelError, OpId, Placement};
use crate::schedparams::BadSets;
use crate::supervisor::{Supervisor, SupervisorConfig, SupervisorError};
use crate::verifier::{SolveMode, Verifier, VerifyError};

/// Default sampling period for bad-set monitoring (s).
pub const DEFAULT_SUBSAMPLE: f64 = 1e-3;

pub const CSV_HEADER: &str =
    "step,time,vehicle,pos,speed,u_applied,overridden,s_lower,s_upper,in_bad,in_shrunk,in_inflated";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends the position to its message
        let message = match message.rfind(" at line ") {
            Some(k) => message[..k].to_string(),
            None => message,
        };
        ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Supervisor(#[from] SupervisorError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("subsample period must be positive, got {0}")]
    BadSubsample(f64),
}

/// Input profile of one driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DesiredProfile {
    Constant(f64),
    Table(Vec<[f64; 2]>),
}

impl DesiredProfile {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            DesiredProfile::Constant(u) => *u,
            DesiredProfile::Table(rows) => {
                let k = rows.partition_point(|r| r[0] <= t);
                rows[k.saturating_sub(1)][1]
            }
        }
    }

    fn validate(&self, spec: &VehicleSpec) -> Result<(), ScenarioError> {
        match self {
            DesiredProfile::Constant(u) => spec.check_input(*u)?,
            DesiredProfile::Table(rows) => {
                let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
                PiecewiseConstantInput::new(times, values)
                    .map_err(|e| ScenarioError::Invalid(format!("vehicle {}: {e}", spec.id)))?
                    .check_bounds(spec)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleEntry {
    pub id: usize,
    pub x0: f64,
    pub v0: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaEntry {
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimEntry {
    pub tau: f64,
    pub steps: usize,
    pub desired: Vec<DesiredProfile>,
}

/// On-disk layout of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub vehicles: Vec<VehicleEntry>,
    pub areas: Vec<AreaEntry>,
    pub placements: Vec<Placement>,
    pub sim: SimEntry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: IntersectionModel,
    pub initial: Vec<VehicleState>,
    pub tau: f64,
    pub steps: usize,
    pub desired: Vec<DesiredProfile>,
}

impl Scenario {
    pub fn new(
        model: IntersectionModel,
        initial: Vec<VehicleState>,
        tau: f64,
        steps: usize,
        desired: Vec<DesiredProfile>,
    ) -> Result<Self, ScenarioError> {
        let n = model.vehicle_count();
        if initial.len() != n || desired.len() != n {
            return Err(ScenarioError::Invalid(format!(
                "{n} vehicles but {} initial states and {} desired profiles",
                initial.len(),
                desired.len()
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ScenarioError::Invalid(format!("tau must be positive, got {tau}")));
        }
        for (j, spec) in model.vehicles().iter().enumerate() {
            spec.check_state(initial[j])?;
            desired[j].validate(spec)?;
        }
        Ok(Self {
            model,
            initial,
            tau,
            steps,
            desired,
        })
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let mut specs = Vec::with_capacity(file.vehicles.len());
        let mut initial = Vec::with_capacity(file.vehicles.len());
        for (k, v) in file.vehicles.iter().enumerate() {
            if v.id != k {
                return Err(ScenarioError::Invalid(format!(
                    "vehicle at index {k} has id {}",
                    v.id
                )));
            }
            specs.push(VehicleSpec::new(v.id, v.a, v.b, v.u_min, v.u_max, v.v_min, v.v_max)?);
            initial.push(VehicleState::new(v.x0, v.v0));
        }
        for (k, a) in file.areas.iter().enumerate() {
            if a.id != k {
                return Err(ScenarioError::Invalid(format!("area at index {k} has id {}", a.id)));
            }
        }
        let model = IntersectionModel::new(specs, file.areas.len(), file.placements)?;
        Scenario::new(model, initial, file.sim.tau, file.sim.steps, file.sim.desired)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            vehicles: self
                .model
                .vehicles()
                .iter()
                .zip(&self.initial)
                .map(|(s, x)| VehicleEntry {
                    id: s.id,
                    x0: x.pos,
                    v0: x.speed,
                    v_min: s.v_min,
                    v_max: s.v_max,
                    u_min: s.u_min,
                    u_max: s.u_max,
                    a: s.accel_gain,
                    b: s.drag_coeff,
                })
                .collect(),
            areas: (0..self.model.area_count()).map(|id| AreaEntry { id }).collect(),
            placements: self.model.placements().to_vec(),
            sim: SimEntry {
                tau: self.tau,
                steps: self.steps,
                desired: self.desired.clone(),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Scenario::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("serializable");
        s.push('\n');
        s
    }

    /// Inputs the drivers request during step `k`.
    pub fn desired_at(&self, k: usize) -> Vec<f64> {
        let t = k as f64 * self.tau;
        self.desired.iter().map(|d| d.value_at(t)).collect()
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_json(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> std::io::Result<()> {
    write_atomic(path.as_ref(), scenario.to_json().as_bytes())
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub step: usize,
    pub time: f64,
    pub vehicle: usize,
    pub pos: f64,
    pub speed: f64,
    /// Input at the start of the step.
    pub u_applied: f64,
    pub overridden: bool,
    /// Bounds at the state logged in this row; NaN when not computed.
    pub s_lower: f64,
    pub s_upper: f64,
    /// Whether the vehicle is part of a violating pair at any sample of the
    /// step.
    pub in_bad: bool,
    pub in_shrunk: bool,
    pub in_inflated: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
}

impl TrajectoryLog {
    pub fn override_count(&self) -> usize {
        let mut steps: Vec<usize> = self.rows.iter().filter(|r| r.overridden).map(|r| r.step).collect();
        steps.dedup();
        steps.len()
    }

    pub fn override_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = self.rows.iter().filter(|r| r.overridden).map(|r| r.step).collect();
        steps.dedup();
        steps
    }

    pub fn any_bad(&self) -> bool {
        self.rows.iter().any(|r| r.in_bad)
    }

    pub fn any_shrunk(&self) -> bool {
        self.rows.iter().any(|r| r.in_shrunk)
    }

    pub fn any_inflated(&self) -> bool {
        self.rows.iter().any(|r| r.in_inflated)
    }

    /// Largest logged upper bound, ignoring rows without bounds.
    pub fn max_s_upper(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.s_upper)
            .filter(|s| !s.is_nan())
            .fold(None, |m, s| Some(m.map_or(s, |m: f64| m.max(s))))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let flag = |b: bool| if b { '1' } else { '0' };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.step,
                format_g9(r.time),
                r.vehicle,
                format_g9(r.pos),
                format_g9(r.speed),
                format_g9(r.u_applied),
                flag(r.overridden),
                format_g9(r.s_lower),
                format_g9(r.s_upper),
                flag(r.in_bad),
                flag(r.in_shrunk),
                flag(r.in_inflated),
            );
        }
        out
    }
}

pub fn write_log(log: &TrajectoryLog, path: impl AsRef<Path>) -> std::io::Result<()> {
    write_atomic(path.as_ref(), log.to_csv().as_bytes())
}

/// Shortest representation with 9 significant digits, as C's `%.9g`.
pub fn format_g9(x: f64) -> String {
    const PRECISION: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PRECISION).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    /// Bad-set monitoring period (s).
    pub subsample: f64,
    /// Compute exact bounds at every logged state.
    pub log_bounds: bool,
    /// Solve mode of the supervisor.
    pub mode: SolveMode,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            subsample: DEFAULT_SUBSAMPLE,
            log_bounds: true,
            mode: SolveMode::Feasibility,
        }
    }
}

/// Result of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopRun {
    pub log: TrajectoryLog,
    /// Wall time of each supervisor step (s).
    pub step_latency: Vec<f64>,
    pub final_state: Vec<VehicleState>,
}

/// Samples every period of the three bad sets.
struct Monitor {
    pairs: Vec<(OpId, OpId)>,
    sets: BadSets,
    subsample: f64,
}

impl Monitor {
    fn new(model: &IntersectionModel, subsample: f64) -> Result<Self, HarnessError> {
        if !(subsample > 0.0 && subsample.is_finite()) {
            return Err(HarnessError::BadSubsample(subsample));
        }
        let graph = build_operation_graph(model, &vec![0.0; model.vehicle_count()])?;
        Ok(Self {
            pairs: graph.all_disjunctive,
            sets: BadSets::new(model)?,
            subsample,
        })
    }

    /// Per vehicle, membership in `[nominal, shrunk, inflated]` at any sample
    /// in `[0, tau)`.
    fn flags(
        &self,
        model: &IntersectionModel,
        states: &[VehicleState],
        signals: &[PiecewiseConstantInput],
        tau: f64,
    ) -> Result<Vec<[bool; 3]>, HarnessError> {
        let n = states.len();
        let mut tracks = Vec::with_capacity(n);
        for j in 0..n {
            let samples = simulate_signal(states[j], model.vehicle(j), &signals[j], tau, self.subsample)?;
            tracks.push(samples);
        }
        let count = tracks[0].iter().take_while(|(t, _)| *t < tau - 1e-12).count();
        let mut flags = vec![[false; 3]; n];
        let variants: [&BadSetVariant; 3] = [&self.sets.nominal, &self.sets.shrunk, &self.sets.inflated];
        let mut x = vec![0.0; n];
        for s in 0..count {
            for j in 0..n {
                x[j] = tracks[j][s].1.pos;
            }
            for (k, variant) in variants.iter().enumerate() {
                for &(a, b) in &self.pairs {
                    let inside = |op: OpId| variant.interval(op).is_some_and(|iv| iv.contains(x[op.vehicle]));
                    if inside(a) && inside(b) {
                        flags[a.vehicle][k] = true;
                        flags[b.vehicle][k] = true;
                    }
                }
            }
        }
        Ok(flags)
    }
}

fn bounds(verifier: &Verifier, states: &[VehicleState], enabled: bool) -> Result<(f64, f64), HarnessError> {
    if !enabled {
        return Ok((f64::NAN, f64::NAN));
    }
    let v = verifier.verify(states, SolveMode::Exact)?;
    Ok((v.s_lower, v.s_upper))
}

#[allow(clippy::too_many_arguments)]
fn push_rows(
    log: &mut TrajectoryLog,
    step: usize,
    time: f64,
    states: &[VehicleState],
    signals: &[PiecewiseConstantInput],
    overridden: bool,
    (s_lower, s_upper): (f64, f64),
    flags: &[[bool; 3]],
) {
    for (j, s) in states.iter().enumerate() {
        log.rows.push(LogRow {
            step,
            time,
            vehicle: j,
            pos: s.pos,
            speed: s.speed,
            u_applied: signals[j].value_at(0.0),
            overridden,
            s_lower,
            s_upper,
            in_bad: flags[j][0],
            in_shrunk: flags[j][1],
            in_inflated: flags[j][2],
        });
    }
}

/// Apply the drivers' inputs without supervision.
pub fn run_open_loop(scenario: &Scenario, options: &HarnessOptions) -> Result<TrajectoryLog, HarnessError> {
    let model = &scenario.model;
    let monitor = Monitor::new(model, options.subsample)?;
    let verifier = Verifier::new(model.clone())?;
    let mut log = TrajectoryLog::default();
    let mut x = scenario.initial.clone();
    for k in 0..scenario.steps {
        let signals: Vec<PiecewiseConstantInput> = scenario
            .desired_at(k)
            .into_iter()
            .map(PiecewiseConstantInput::constant)
            .collect();
        let b = bounds(&verifier, &x, options.log_bounds)?;
        let flags = monitor.flags(model, &x, &signals, scenario.tau)?;
        push_rows(&mut log, k, k as f64 * scenario.tau, &x, &signals, false, b, &flags);
        x = x
            .iter()
            .zip(&signals)
            .enumerate()
            .map(|(j, (&s, sig))| advance(s, model.vehicle(j), sig, scenario.tau))
            .collect::<Result<_, _>>()?;
    }
    Ok(log)
}

/// Run the drivers' inputs through the supervisor.
pub fn run_closed_loop(scenario: &Scenario, options: &HarnessOptions) -> Result<ClosedLoopRun, HarnessError> {
    let model = &scenario.model;
    let monitor = Monitor::new(model, options.subsample)?;
    let verifier = Verifier::new(model.clone())?;
    let config = SupervisorConfig {
        tau: scenario.tau,
        mode: options.mode,
    };
    let mut supervisor = Supervisor::new(verifier.clone(), &scenario.initial, config)?;
    let mut log = TrajectoryLog::default();
    let mut step_latency = Vec::with_capacity(scenario.steps);
    let mut x = scenario.initial.clone();
    for k in 0..scenario.steps {
        let desired = scenario.desired_at(k);
        let started = Instant::now();
        let outcome = supervisor.step(&x, &desired)?;
        step_latency.push(started.elapsed().as_secs_f64());
        let b = bounds(&verifier, &x, options.log_bounds)?;
        let flags = monitor.flags(model, &x, &outcome.applied, scenario.tau)?;
        push_rows(
            &mut log,
            k,
            k as f64 * scenario.tau,
            &x,
            &outcome.applied,
            outcome.overridden,
            b,
            &flags,
        );
        log::debug!(
            "step {k}: {} overridden={}",
            if outcome.overridden { "safe signal" } else { "desired input" },
            outcome.overridden
        );
        x = outcome.next_state;
    }
    Ok(ClosedLoopRun {
        log,
        step_latency,
        final_state: x,
    })
}

/// `(p50, p95, max)` of a non-empty sample, nearest-rank.
pub fn latency_percentiles(samples: &[f64]) -> Option<(f64, f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let rank = |p: f64| {
        let k = ((p * s.len() as f64).ceil() as usize).clamp(1, s.len());
        s[k - 1]
    };
    Some((rank(0.5), rank(0.95), s[s.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersection::tests::three_way;
    use proptest::prelude::*;

    fn three_vehicle_like(steps: usize) -> Scenario {
        Scenario::new(
            three_way(),
            vec![
                VehicleState::new(0.0, 10.0),
                VehicleState::new(0.0, 8.0),
                VehicleState::new(0.0, 8.0),
            ],
            0.1,
            steps,
            vec![
                DesiredProfile::Constant(-2.0),
                DesiredProfile::Constant(-2.0),
                DesiredProfile::Constant(2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn g9_matches_c_printf() {
        let cases = [
            (0.1, "0.1"),
            (1.0, "1"),
            (-2.0, "-2"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (2.084176856925047, "2.08417686"),
            (4.294050493999249, "4.29405049"),
            (1.0 / 3.0, "0.333333333"),
            (f64::NAN, "nan"),
            (f64::INFINITY, "inf"),
            (0.0, "0"),
            (99999999.95, "100000000"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g9(x), want, "{x}");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = three_vehicle_like(5);
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), s.to_json());
    }

    #[test]
    fn missing_field_is_named() {
        let mut v: serde_json::Value = serde_json::from_str(&three_vehicle_like(5).to_json()).unwrap();
        v["sim"].as_object_mut().unwrap().remove("tau");
        let text = serde_json::to_string_pretty(&v).unwrap();
        let err = Scenario::from_json(&text).unwrap_err();
        match err {
            ScenarioError::Parse { message, line, .. } => {
                assert!(message.contains("tau"), "{message}");
                assert!(line > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = Scenario::from_json("{\n  \"vehicles\": [\n    {\"id\": 0,,}\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn rejects_out_of_bounds_profile() {
        let mut f = three_vehicle_like(1).to_file();
        f.sim.desired[0] = DesiredProfile::Table(vec![[0.0, 1.0], [0.5, 3.0]]);
        assert!(Scenario::from_file(f).is_err());
    }

    #[test]
    fn table_profile_holds_last_row() {
        let p = DesiredProfile::Table(vec![[0.0, 1.0], [0.5, -1.0]]);
        assert_eq!(p.value_at(0.0), 1.0);
        assert_eq!(p.value_at(0.49), 1.0);
        assert_eq!(p.value_at(0.5), -1.0);
        assert_eq!(p.value_at(9.0), -1.0);
    }

    #[test]
    fn zero_steps_gives_header_only() {
        let s = three_vehicle_like(0);
        let log = run_closed_loop(&s, &HarnessOptions::default()).unwrap().log;
        assert!(log.rows.is_empty());
        assert_eq!(log.to_csv(), format!("{CSV_HEADER}\n"));
        assert!(run_open_loop(&s, &HarnessOptions::default()).unwrap().rows.is_empty());
    }

    #[test]
    fn open_and_closed_loop_agree_until_first_override() {
        let s = three_vehicle_like(40);
        let opts = HarnessOptions {
            log_bounds: false,
            ..HarnessOptions::default()
        };
        let open = run_open_loop(&s, &opts).unwrap();
        let closed = run_closed_loop(&s, &opts).unwrap().log;
        let first = closed.override_steps()[0];
        assert!(first > 0);
        for (a, b) in open.rows.iter().zip(&closed.rows).take_while(|(_, b)| b.step <= first) {
            assert_eq!((a.pos, a.speed), (b.pos, b.speed));
        }
        assert!(open.any_bad());
        assert!(!closed.any_bad());
    }

    #[test]
    fn log_rows_are_complete_and_deterministic() {
        let s = three_vehicle_like(8);
        let a = run_open_loop(&s, &HarnessOptions::default()).unwrap();
        let b = run_open_loop(&s, &HarnessOptions::default()).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 8 * 3);
        for (i, r) in a.rows.iter().enumerate() {
            assert_eq!(r.step, i / 3);
            assert_eq!(r.vehicle, i % 3);
            assert_eq!(r.time, r.step as f64 * 0.1);
            assert!(r.s_lower <= r.s_upper);
        }
    }

    #[test]
    fn percentiles() {
        assert_eq!(latency_percentiles(&[]), None);
        assert_eq!(latency_percentiles(&[0.3]), Some((0.3, 0.3, 0.3)));
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(latency_percentiles(&s), Some((50.0, 95.0, 100.0)));
    }

    proptest! {
        #[test]
        fn g9_round_trips_to_nine_digits(x in -1e12f64..1e12) {
            let parsed: f64 = format_g9(x).parse().unwrap();
            let tol = x.abs() * 5e-9 + f64::MIN_POSITIVE;
            prop_assert!((parsed - x).abs() <= tol, "{} -> {}", x, format_g9(x));
        }

        #[test]
        fn json_round_trip_preserves_floats(x0 in -50.0f64..19.0, v0 in 8.0f64..=10.0, tau in 0.01f64..1.0) {
            let mut f = three_vehicle_like(3).to_file();
            f.vehicles[1].x0 = x0;
            f.vehicles[1].v0 = v0;
            f.sim.tau = tau;
            let s = Scenario::from_file(f).unwrap();
            prop_assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
    }
}
