//! Longitudinal vehicle dynamics.
//!
//! Each vehicle follows `ẍ = a·u + b·ẋ²` along its fixed path with the speed
//! confined to `[v_min, v_max]`. Saturation is handled by projecting the
//! vector field: at an active speed bound the acceleration is zeroed whenever
//! it would push the speed outward. Integration is classical RK4 on a fixed
//! grid of at most [`INTEGRATION_STEP`] seconds, aligned to input breakpoints,
//! so the same call always produces the same bits.
//!
//! Every extremal time query (earliest and latest arrival) uses a constant
//! extremal input. The dynamics are monotone in the input, so the constant
//! `u_max` (resp. `u_min`) signal attains the minimum (resp. maximum) over all
//! admissible signals.

use thiserror::Error;

/// Base RK4 step in seconds.
pub const INTEGRATION_STEP: f64 = 1e-3;

/// Time resolution of speed-saturation event location.
pub const EVENT_TOLERANCE: f64 = 1e-9;

/// Position resolution of first-passage time location.
pub const POSITION_TOLERANCE: f64 = 1e-9;

/// Slack accepted on speed bounds for states handed in from outside.
const SPEED_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("input {value} outside [{min}, {max}]")]
    InputOutOfBounds { value: f64, min: f64, max: f64 },
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("speed {speed} outside [{min}, {max}]")]
    SpeedOutOfBounds { speed: f64, min: f64, max: f64 },
    #[error("invalid vehicle parameters: {0}")]
    InvalidSpec(String),
    #[error("invalid input signal: {0}")]
    InvalidSignal(String),
}

/// Dynamics parameters of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSpec {
    pub id: usize,
    /// `a`, acceleration per unit of input (m/s²).
    pub accel_gain: f64,
    /// `b`, coefficient of the quadratic speed term (1/m).
    pub drag_coeff: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// Must be strictly positive so every vehicle keeps moving forward.
    pub v_min: f64,
    pub v_max: f64,
}

impl VehicleSpec {
    pub fn new(
        id: usize,
        accel_gain: f64,
        drag_coeff: f64,
        u_min: f64,
        u_max: f64,
        v_min: f64,
        v_max: f64,
    ) -> Result<Self, DynamicsError> {
        let spec = Self {
            id,
            accel_gain,
            drag_coeff,
            u_min,
            u_max,
            v_min,
            v_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let finite = [
            self.accel_gain,
            self.drag_coeff,
            self.u_min,
            self.u_max,
            self.v_min,
            self.v_max,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(DynamicsError::InvalidSpec(format!(
                "vehicle {}: non-finite parameter",
                self.id
            )));
        }
        if self.u_min >= self.u_max {
            return Err(DynamicsError::InvalidSpec(format!(
                "vehicle {}: u_min {} must be below u_max {}",
                self.id, self.u_min, self.u_max
            )));
        }
        if !(self.v_min > 0.0 && self.v_min <= self.v_max) {
            return Err(DynamicsError::InvalidSpec(format!(
                "vehicle {}: need 0 < v_min <= v_max, got [{}, {}]",
                self.id, self.v_min, self.v_max
            )));
        }
        if self.accel_gain <= 0.0 || self.drag_coeff < 0.0 {
            return Err(DynamicsError::InvalidSpec(format!(
                "vehicle {}: need a > 0 and b >= 0, got a = {}, b = {}",
                self.id, self.accel_gain, self.drag_coeff
            )));
        }
        Ok(())
    }

    pub fn check_input(&self, u: f64) -> Result<(), DynamicsError> {
        if u.is_finite() && u >= self.u_min && u <= self.u_max {
            Ok(())
        } else {
            Err(DynamicsError::InputOutOfBounds {
                value: u,
                min: self.u_min,
                max: self.u_max,
            })
        }
    }

    pub fn check_state(&self, state: VehicleState) -> Result<(), DynamicsError> {
        let ok = state.pos.is_finite()
            && state.speed >= self.v_min - SPEED_SLACK
            && state.speed <= self.v_max + SPEED_SLACK;
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::SpeedOutOfBounds {
                speed: state.speed,
                min: self.v_min,
                max: self.v_max,
            })
        }
    }

    /// Unprojected vector field `a·u + b·v²`.
    #[inline]
    fn raw_accel(&self, speed: f64, u: f64) -> f64 {
        self.accel_gain * u + self.drag_coeff * speed * speed
    }

    /// Speed bound the state is pinned to under constant `u`, if any.
    #[inline]
    fn pinned_speed(&self, speed: f64, u: f64) -> Option<f64> {
        if speed >= self.v_max && self.raw_accel(self.v_max, u) >= 0.0 {
            Some(self.v_max)
        } else if speed <= self.v_min && self.raw_accel(self.v_min, u) <= 0.0 {
            Some(self.v_min)
        } else {
            None
        }
    }

    fn clamp_speed(&self, state: VehicleState) -> VehicleState {
        VehicleState {
            pos: state.pos,
            speed: state.speed.clamp(self.v_min, self.v_max),
        }
    }
}

/// Position along the path (m) and speed (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub pos: f64,
    pub speed: f64,
}

impl VehicleState {
    pub fn new(pos: f64, speed: f64) -> Self {
        Self { pos, speed }
    }
}

/// Piecewise-constant input signal; the last value holds forever.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantInput {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantInput {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, DynamicsError> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(DynamicsError::InvalidSignal(format!(
                "need matching non-empty breakpoints and values, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(DynamicsError::InvalidSignal(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(DynamicsError::InvalidSignal(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidSignal("non-finite input value".into()));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(u: f64) -> Self {
        Self {
            breakpoints: vec![0.0],
            values: vec![u],
        }
    }

    /// `first` on `[0, switch)`, `second` afterwards.
    pub fn two_phase(first: f64, switch: f64, second: f64) -> Self {
        if switch <= 0.0 {
            Self::constant(second)
        } else {
            Self {
                breakpoints: vec![0.0, switch],
                values: vec![first, second],
            }
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx.saturating_sub(1)]
    }

    pub fn check_bounds(&self, spec: &VehicleSpec) -> Result<(), DynamicsError> {
        self.values.iter().try_for_each(|&u| spec.check_input(u))
    }

    /// Pieces starting before `duration`; the last of them is left open-ended.
    pub fn restrict(&self, duration: f64) -> Self {
        let keep = self
            .breakpoints
            .partition_point(|&b| b < duration)
            .max(1);
        Self {
            breakpoints: self.breakpoints[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
        }
    }

    /// Shift the time origin forward by `offset`, dropping elapsed pieces.
    pub fn shifted(&self, offset: f64) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values = vec![self.value_at(offset)];
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            if b > offset {
                breakpoints.push(b - offset);
                values.push(v);
            }
        }
        Self {
            breakpoints,
            values,
        }
    }

    /// `(start, end, value)` pieces; `end` is `None` for the final piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, Option<f64>, f64)> + '_ {
        self.breakpoints
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(k, (&start, &value))| (start, self.breakpoints.get(k + 1).copied(), value))
    }
}

fn rk4(spec: &VehicleSpec, s: VehicleState, u: f64, h: f64) -> VehicleState {
    let k1v = spec.raw_accel(s.speed, u);
    let k1x = s.speed;
    let v2 = s.speed + 0.5 * h * k1v;
    let k2v = spec.raw_accel(v2, u);
    let v3 = s.speed + 0.5 * h * k2v;
    let k3v = spec.raw_accel(v3, u);
    let v4 = s.speed + h * k3v;
    let k4v = spec.raw_accel(v4, u);
    VehicleState {
        pos: s.pos + h / 6.0 * (k1x + 2.0 * v2 + 2.0 * v3 + v4),
        speed: s.speed + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    }
}

/// One integration sub-step of length `h` with projected saturation.
fn substep(spec: &VehicleSpec, s: VehicleState, u: f64, h: f64) -> VehicleState {
    if let Some(v) = spec.pinned_speed(s.speed, u) {
        return VehicleState {
            pos: s.pos + v * h,
            speed: v,
        };
    }
    let next = rk4(spec, s, u, h);
    if next.speed > spec.v_max {
        saturate_within(spec, s, u, h, spec.v_max, |v| v > spec.v_max)
    } else if next.speed < spec.v_min {
        saturate_within(spec, s, u, h, spec.v_min, |v| v < spec.v_min)
    } else {
        next
    }
}

/// Locate the instant the free trajectory hits `bound` inside the sub-step,
/// then cruise at the bound for the remainder.
fn saturate_within(
    spec: &VehicleSpec,
    s: VehicleState,
    u: f64,
    h: f64,
    bound: f64,
    beyond: impl Fn(f64) -> bool,
) -> VehicleState {
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > EVENT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if beyond(rk4(spec, s, u, mid).speed) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let at_event = rk4(spec, s, u, lo);
    VehicleState {
        pos: at_event.pos + bound * (h - lo),
        speed: bound,
    }
}

fn substep_count(duration: f64) -> usize {
    ((duration / INTEGRATION_STEP) - 1e-9).ceil().max(1.0) as usize
}

/// Integrate under constant `u` for exactly `duration` seconds.
fn advance_const(spec: &VehicleSpec, state: VehicleState, u: f64, duration: f64) -> VehicleState {
    let n = substep_count(duration);
    let h = duration / n as f64;
    let mut s = state;
    for k in 0..n {
        if let Some(v) = spec.pinned_speed(s.speed, u) {
            return VehicleState {
                pos: s.pos + v * h * (n - k) as f64,
                speed: v,
            };
        }
        s = substep(spec, s, u, h);
    }
    s
}

/// First-passage bookkeeping for an ascending list of positions.
struct Passage<'a> {
    targets: &'a [f64],
    times: Vec<f64>,
}

impl<'a> Passage<'a> {
    fn new(targets: &'a [f64]) -> Self {
        Self {
            targets,
            times: Vec::with_capacity(targets.len()),
        }
    }

    fn done(&self) -> bool {
        self.times.len() == self.targets.len()
    }

    fn next_target(&self) -> Option<f64> {
        self.targets.get(self.times.len()).copied()
    }

    /// Record every target already reached at `pos` as passed at `clock`.
    fn mark_reached(&mut self, pos: f64, clock: f64) {
        while let Some(target) = self.next_target() {
            if target <= pos {
                self.times.push(clock);
            } else {
                break;
            }
        }
    }
}

/// Time within a sub-step at which position reaches `target`.
fn locate_in_substep(spec: &VehicleSpec, s: VehicleState, u: f64, h: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    loop {
        let mid = 0.5 * (lo + hi);
        let gap = substep(spec, s, u, mid).pos - target;
        if gap.abs() <= POSITION_TOLERANCE {
            return mid;
        }
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 {
            return hi;
        }
    }
}

/// Integrate under constant `u`, recording first-passage times. Runs for
/// `duration` seconds when given, otherwise until every target is passed.
fn pass_const(
    spec: &VehicleSpec,
    state: VehicleState,
    u: f64,
    duration: Option<f64>,
    clock: f64,
    passage: &mut Passage<'_>,
) -> VehicleState {
    passage.mark_reached(state.pos, clock);
    let (n, h) = match duration {
        Some(d) => {
            let n = substep_count(d);
            (Some(n), d / n as f64)
        }
        None => (None, INTEGRATION_STEP),
    };
    let mut s = state;
    let mut k = 0usize;
    loop {
        if let Some(n) = n {
            if k >= n {
                return s;
            }
        } else if passage.done() {
            return s;
        }
        let t = clock + k as f64 * h;
        if let Some(v) = spec.pinned_speed(s.speed, u) {
            // constant input keeps the state pinned: the rest is linear
            let remaining = n.map(|n| (n - k) as f64 * h);
            while let Some(target) = passage.next_target() {
                let dt = (target - s.pos) / v;
                match remaining {
                    Some(r) if dt > r => break,
                    _ => passage.times.push(t + dt),
                }
            }
            return match remaining {
                Some(r) => VehicleState {
                    pos: s.pos + v * r,
                    speed: v,
                },
                None => s,
            };
        }
        let next = substep(spec, s, u, h);
        while let Some(target) = passage.next_target() {
            if target <= next.pos {
                passage
                    .times
                    .push(t + locate_in_substep(spec, s, u, h, target));
            } else {
                break;
            }
        }
        s = next;
        k += 1;
    }
}

/// State after holding input `u` for `dt` seconds.
pub fn step(
    state: VehicleState,
    spec: &VehicleSpec,
    u: f64,
    dt: f64,
) -> Result<VehicleState, DynamicsError> {
    spec.check_input(u)?;
    spec.check_state(state)?;
    if !(dt > 0.0) {
        return Err(DynamicsError::NonPositiveDuration(dt));
    }
    Ok(advance_const(spec, spec.clamp_speed(state), u, dt))
}

/// Time until the position first reaches `target` under constant `u`.
/// Zero when the vehicle is already at or past the target.
pub fn time_to_position(
    state: VehicleState,
    spec: &VehicleSpec,
    u: f64,
    target: f64,
) -> Result<f64, DynamicsError> {
    Ok(crossing_times(state, spec, u, &[target])?[0])
}

/// First-passage times for several ascending targets in one integration pass.
pub fn crossing_times(
    state: VehicleState,
    spec: &VehicleSpec,
    u: f64,
    targets: &[f64],
) -> Result<Vec<f64>, DynamicsError> {
    spec.check_input(u)?;
    spec.check_state(state)?;
    check_ascending(targets)?;
    let mut passage = Passage::new(targets);
    pass_const(spec, spec.clamp_speed(state), u, None, 0.0, &mut passage);
    Ok(passage.times)
}

/// Earliest arrival at `target` over all admissible inputs.
pub fn min_time_to(
    state: VehicleState,
    spec: &VehicleSpec,
    target: f64,
) -> Result<f64, DynamicsError> {
    time_to_position(state, spec, spec.u_max, target)
}

/// Latest arrival at `target` over all admissible inputs. Finite since
/// `v_min > 0`.
pub fn max_time_to(
    state: VehicleState,
    spec: &VehicleSpec,
    target: f64,
) -> Result<f64, DynamicsError> {
    time_to_position(state, spec, spec.u_min, target)
}

/// Position reached after `duration` seconds under constant `u`.
pub fn position_after(
    state: VehicleState,
    spec: &VehicleSpec,
    u: f64,
    duration: f64,
) -> Result<f64, DynamicsError> {
    if duration == 0.0 {
        return Ok(state.pos);
    }
    step(state, spec, u, duration).map(|s| s.pos)
}

/// State after applying `signal` for `duration` seconds. The integration grid
/// is aligned to the signal's breakpoints.
pub fn advance(
    state: VehicleState,
    spec: &VehicleSpec,
    signal: &PiecewiseConstantInput,
    duration: f64,
) -> Result<VehicleState, DynamicsError> {
    signal.check_bounds(spec)?;
    spec.check_state(state)?;
    if !(duration > 0.0) {
        return Err(DynamicsError::NonPositiveDuration(duration));
    }
    let mut s = spec.clamp_speed(state);
    for (start, end, u) in signal.pieces() {
        if start >= duration {
            break;
        }
        let stop = end.map_or(duration, |e| e.min(duration));
        s = advance_const(spec, s, u, stop - start);
    }
    Ok(s)
}

/// First-passage times of ascending `targets` under `signal` (last piece held).
pub fn signal_crossing_times(
    state: VehicleState,
    spec: &VehicleSpec,
    signal: &PiecewiseConstantInput,
    targets: &[f64],
) -> Result<Vec<f64>, DynamicsError> {
    signal.check_bounds(spec)?;
    spec.check_state(state)?;
    check_ascending(targets)?;
    let mut passage = Passage::new(targets);
    let mut s = spec.clamp_speed(state);
    for (start, end, u) in signal.pieces() {
        if passage.done() {
            break;
        }
        s = pass_const(spec, s, u, end.map(|e| e - start), start, &mut passage);
    }
    Ok(passage.times)
}

/// Sampled trajectory at multiples of `dt` on `[0, horizon]`.
pub fn simulate_signal(
    state: VehicleState,
    spec: &VehicleSpec,
    signal: &PiecewiseConstantInput,
    horizon: f64,
    dt: f64,
) -> Result<Vec<(f64, VehicleState)>, DynamicsError> {
    if !(horizon > 0.0) {
        return Err(DynamicsError::NonPositiveDuration(horizon));
    }
    if !(dt > 0.0) {
        return Err(DynamicsError::NonPositiveDuration(dt));
    }
    signal.check_bounds(spec)?;
    spec.check_state(state)?;

    let samples = (horizon / dt + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(samples + 1);
    let mut s = spec.clamp_speed(state);
    let mut clock = 0.0;
    out.push((0.0, s));
    let mut pending = signal.breakpoints().iter().copied().filter(|&b| b > 0.0).peekable();
    for k in 1..=samples {
        let sample_time = k as f64 * dt;
        while let Some(&b) = pending.peek() {
            if b < sample_time {
                s = advance_const(spec, s, signal.value_at(clock), b - clock);
                clock = b;
                pending.next();
            } else {
                break;
            }
        }
        s = advance_const(spec, s, signal.value_at(clock), sample_time - clock);
        clock = sample_time;
        out.push((sample_time, s));
    }
    Ok(out)
}

fn check_ascending(targets: &[f64]) -> Result<(), DynamicsError> {
    if targets.iter().any(|t| !t.is_finite()) || targets.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::InvalidSignal(
            "crossing targets must be finite and ascending".into(),
        ));
    }
    Ok(())
}
