//! Least-restrictive supervisor.
//!
//! Every step the supervisor predicts where the drivers' inputs lead within
//! one period `tau` and checks the upper-bound problem there, as well as the
//! occupancy of every area during the period itself. If a zero-cost
//! schedule exists the drivers keep control and a safe signal for the next
//! step is derived from that schedule. Otherwise the stored safe signal is
//! applied instead; it was derived from a schedule that remains feasible one
//! period later, so a safe continuation always exists.

use thiserror::Error;

use crate::dtp::ZERO_TOL;
use crate::dynamics::{
    advance, signal_crossing_times, time_to_position, DynamicsError, PiecewiseConstantInput,
    VehicleState,
};
use crate::intersection::{IntersectionModel, ModelError, OpId};
use crate::schedparams::UpperBoundParams;
use crate::verifier::{SolveMode, UpperSolution, Verifier, VerifyError};

/// Arrival accuracy of the safe signal at the scheduled first entry.
pub const ARRIVAL_TOLERANCE: f64 = 1e-9;

/// Tolerance for checking the previous schedule one period later.
pub const SHIFT_TOLERANCE: f64 = 1e-7;

/// Shared occupancy (s) tolerated within a period under the safe signal.
pub const OVERLAP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SupervisorError {
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial state admits no safe schedule (upper bound {0})")]
    UnsafeStart(f64),
    #[error("step {step}: state reached under the safe signal failed verification (cost {cost})")]
    SafeBranchUnverified { step: usize, cost: f64 },
    #[error("step {step}: shifted schedule infeasible: {detail}")]
    ShiftedScheduleInvalid { step: usize, detail: String },
    #[error("step {step}: safe signal puts {first} and {second} in one area")]
    SafeSignalConflict { step: usize, first: OpId, second: OpId },
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("tau must be positive, got {0}")]
    BadPeriod(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorConfig {
    pub tau: f64,
    pub mode: SolveMode,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            mode: SolveMode::Feasibility,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisorStore {
    /// Safe signal per vehicle for the coming period.
    pub safe_signal: Vec<PiecewiseConstantInput>,
    /// First-entry schedule behind `safe_signal`, relative to the start of
    /// the coming period.
    pub last_schedule: Vec<Option<f64>>,
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Per-vehicle input applied on `[0, tau)`.
    pub applied: Vec<PiecewiseConstantInput>,
    pub overridden: bool,
    /// State at the end of the period under the applied input.
    pub next_state: Vec<VehicleState>,
}

/// Per-vehicle safe signals realizing the first-entry schedule: each vehicle
/// brakes, then switches to full throttle so it reaches its first area at the
/// scheduled time, and keeps full throttle afterwards. Vehicles already past
/// the start of their route, or without remaining areas, use full throttle.
pub fn sigma(
    model: &IntersectionModel,
    states: &[VehicleState],
    schedule: &[Option<f64>],
    params: &UpperBoundParams,
) -> Result<Vec<PiecewiseConstantInput>, DynamicsError> {
    sigma_window(model, states, schedule, params, None)
}

/// As [`sigma`], only resolving the signal on `[0, window)` when given.
fn sigma_window(
    model: &IntersectionModel,
    states: &[VehicleState],
    schedule: &[Option<f64>],
    params: &UpperBoundParams,
    window: Option<f64>,
) -> Result<Vec<PiecewiseConstantInput>, DynamicsError> {
    let mut out = Vec::with_capacity(states.len());
    for (j, &s) in states.iter().enumerate() {
        let spec = model.vehicle(j);
        let full = PiecewiseConstantInput::constant(spec.u_max);
        let (Some(pv), Some(target_time)) = (params.vehicle(j), schedule.get(j).copied().flatten())
        else {
            out.push(full);
            continue;
        };
        if pv.inside {
            out.push(full);
            continue;
        }
        let alpha = model.placement(pv.first).expect("model op").alpha;
        let goal = target_time.clamp(pv.release, pv.due);
        if goal - pv.release <= ARRIVAL_TOLERANCE {
            out.push(full);
            continue;
        }
        let arrival = |switch: f64| -> Result<f64, DynamicsError> {
            let sig = PiecewiseConstantInput::two_phase(spec.u_min, switch, spec.u_max);
            Ok(signal_crossing_times(s, spec, &sig, &[alpha])?[0])
        };
        let mut hi = goal;
        if let Some(w) = window {
            if w < hi && arrival(w)? <= goal {
                // the switch happens after the window: braking throughout
                out.push(PiecewiseConstantInput::constant(spec.u_min));
                continue;
            }
            hi = hi.min(w);
        }
        let mut lo = 0.0;
        if arrival(hi)? <= goal + ARRIVAL_TOLERANCE {
            // braking until arrival is no slower than the goal
            out.push(PiecewiseConstantInput::two_phase(spec.u_min, hi, spec.u_max));
            continue;
        }
        let mut switch = 0.5 * (lo + hi);
        while hi - lo > 1e-13 {
            switch = 0.5 * (lo + hi);
            let t = arrival(switch)?;
            if (t - goal).abs() <= ARRIVAL_TOLERANCE {
                break;
            }
            if t < goal {
                lo = switch;
            } else {
                hi = switch;
            }
        }
        out.push(PiecewiseConstantInput::two_phase(spec.u_min, switch, spec.u_max));
    }
    Ok(out)
}

/// Advance every vehicle by `tau` under its signal.
pub fn predict(
    model: &IntersectionModel,
    states: &[VehicleState],
    signals: &[PiecewiseConstantInput],
    tau: f64,
) -> Result<Vec<VehicleState>, DynamicsError> {
    states
        .iter()
        .zip(signals)
        .enumerate()
        .map(|(j, (&s, sig))| advance(s, model.vehicle(j), sig, tau))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Supervisor {
    verifier: Verifier,
    config: SupervisorConfig,
    store: SupervisorStore,
}

impl Supervisor {
    /// Verify the initial state and prepare the first safe signal; refuses
    /// to start from a state without a zero-cost upper-bound schedule.
    pub fn new(
        verifier: Verifier,
        initial: &[VehicleState],
        config: SupervisorConfig,
    ) -> Result<Self, SupervisorError> {
        if !(config.tau > 0.0) {
            return Err(SupervisorError::BadPeriod(config.tau));
        }
        let up = verifier.solve_upper(initial, config.mode)?;
        if !up.is_zero() {
            return Err(SupervisorError::UnsafeStart(up.cost));
        }
        let safe_signal = restricted_sigma(verifier.model(), initial, &up, config.tau)?;
        Ok(Self {
            verifier,
            config,
            store: SupervisorStore {
                safe_signal,
                last_schedule: up.first_entry,
                step_index: 0,
            },
        })
    }

    pub fn store(&self) -> &SupervisorStore {
        &self.store
    }

    pub fn config(&self) -> &SupervisorConfig {
        &self.config
    }

    pub fn verifier(&self) -> &Verifier {
        &self.verifier
    }

    /// One supervision period starting from the measured `states` with the
    /// drivers' constant `desired` inputs.
    pub fn step(
        &mut self,
        states: &[VehicleState],
        desired: &[f64],
    ) -> Result<StepOutcome, SupervisorError> {
        let model = self.verifier.model();
        if desired.len() != model.vehicle_count() {
            return Err(SupervisorError::InputCount {
                expected: model.vehicle_count(),
                got: desired.len(),
            });
        }
        let tau = self.config.tau;
        let desired: Vec<PiecewiseConstantInput> = desired
            .iter()
            .map(|&u| PiecewiseConstantInput::constant(u))
            .collect();
        let predicted = predict(model, states, &desired, tau)?;
        let step = self.store.step_index;
        self.store.step_index += 1;
        // a vehicle may enter an area and another leave it within one period,
        // which the state at the end of the period no longer shows
        let conflict = step_conflict(model, states, &desired, &predicted, 0.0)?;
        let up = match conflict {
            Some(_) => None,
            None => Some(self.verifier.solve_upper(&predicted, self.config.mode)?),
        };

        if let Some(up) = up.filter(|u| u.is_zero()) {
            self.store.safe_signal = restricted_sigma(model, &predicted, &up, tau)?;
            self.store.last_schedule = up.first_entry;
            return Ok(StepOutcome {
                applied: desired,
                overridden: false,
                next_state: predicted,
            });
        }

        let applied = self.store.safe_signal.clone();
        let safe_state = predict(model, states, &applied, tau)?;
        if let Some((a, b)) = step_conflict(model, states, &applied, &safe_state, OVERLAP_TOLERANCE)? {
            return Err(SupervisorError::SafeSignalConflict { step, first: a, second: b });
        }
        self.check_shifted_schedule(step, &safe_state)?;
        let up = self.verifier.solve_upper(&safe_state, self.config.mode)?;
        if !up.is_zero() {
            return Err(SupervisorError::SafeBranchUnverified { step, cost: up.cost });
        }
        self.store.safe_signal = restricted_sigma(model, &safe_state, &up, tau)?;
        self.store.last_schedule = up.first_entry;
        Ok(StepOutcome {
            applied,
            overridden: true,
            next_state: safe_state,
        })
    }

    /// The schedule behind the applied safe signal, moved one period ahead,
    /// must remain a zero-cost schedule for the state it leads to.
    fn check_shifted_schedule(
        &self,
        step: usize,
        safe_state: &[VehicleState],
    ) -> Result<(), SupervisorError> {
        let (problem, _, params) = self.verifier.upper_problem(safe_state)?;
        let invalid = |detail: String| SupervisorError::ShiftedScheduleInvalid { step, detail };
        let mut times = Vec::with_capacity(params.vehicles.len());
        for v in &params.vehicles {
            let prev = self.store.last_schedule[v.vehicle]
                .ok_or_else(|| invalid(format!("vehicle {} had no scheduled entry", v.vehicle)))?;
            times.push(if v.inside { v.release } else { prev - self.config.tau });
        }
        for (v, &t) in params.vehicles.iter().zip(&times) {
            if t < v.release - SHIFT_TOLERANCE || t > v.due + SHIFT_TOLERANCE {
                return Err(invalid(format!(
                    "vehicle {} entry {t} outside [{}, {}]",
                    v.vehicle, v.release, v.due
                )));
            }
        }
        for (k, d) in problem.disjunctions.iter().enumerate() {
            let worst = |bundle: &[crate::dtp::DiffConstraint]| {
                bundle.iter().map(|c| c.violation(&times)).fold(0.0, f64::max)
            };
            if worst(&d.first).min(worst(&d.second)) > SHIFT_TOLERANCE {
                return Err(invalid(format!("disjunction {k} violated in both orders")));
            }
        }
        Ok(())
    }
}

fn restricted_sigma(
    model: &IntersectionModel,
    states: &[VehicleState],
    up: &UpperSolution,
    tau: f64,
) -> Result<Vec<PiecewiseConstantInput>, DynamicsError> {
    Ok(
        sigma_window(model, states, &up.first_entry, &up.params, Some(tau))?
            .into_iter()
            .map(|s| s.restrict(tau))
            .collect(),
    )
}

/// A pair of operations on one area whose vehicles are both strictly inside
/// it, for longer than `tolerance`, at some time within the period that
/// takes `states` to `end_states` under `signals`.
pub fn step_conflict(
    model: &IntersectionModel,
    states: &[VehicleState],
    signals: &[PiecewiseConstantInput],
    end_states: &[VehicleState],
    tolerance: f64,
) -> Result<Option<(OpId, OpId)>, DynamicsError> {
    let mut windows: Vec<Option<(f64, f64)>> = vec![None; model.op_count()];
    for (j, (s, e)) in states.iter().zip(end_states).enumerate() {
        let route = model.route(j);
        let mut targets: Vec<f64> = route
            .iter()
            .flat_map(|p| [p.alpha, p.beta])
            .filter(|&t| t > s.pos && t <= e.pos)
            .collect();
        if targets.is_empty() && route.iter().all(|p| !(s.pos >= p.alpha && s.pos < p.beta)) {
            continue;
        }
        targets.sort_by(f64::total_cmp);
        let times = signal_crossing_times(*s, model.vehicle(j), &signals[j], &targets)?;
        let at = |x: f64| times[targets.partition_point(|&t| t < x)];
        for p in route {
            if s.pos >= p.beta || e.pos <= p.alpha {
                continue;
            }
            let lo = if s.pos >= p.alpha { 0.0 } else { at(p.alpha) };
            let hi = if e.pos >= p.beta { at(p.beta) } else { f64::INFINITY };
            windows[model.op_index(p.op()).expect("model op")] = Some((lo, hi));
        }
    }
    Ok(model.shared_pairs().into_iter().find(|&(a, b)| {
        let wa = windows[model.op_index(a).expect("model op")];
        let wb = windows[model.op_index(b).expect("model op")];
        matches!((wa, wb), (Some(x), Some(y)) if x.1.min(y.1) - x.0.max(y.0) > tolerance)
    }))
}

/// Arrival time of each vehicle at its first active area under `signals`.
pub fn first_arrivals(
    model: &IntersectionModel,
    states: &[VehicleState],
    params: &UpperBoundParams,
    signals: &[PiecewiseConstantInput],
) -> Result<Vec<Option<f64>>, DynamicsError> {
    let mut out = vec![None; states.len()];
    for v in &params.vehicles {
        let alpha = model.placement(v.first).expect("model op").alpha;
        let spec = model.vehicle(v.vehicle);
        out[v.vehicle] = Some(if states[v.vehicle].pos >= alpha {
            0.0
        } else {
            signal_crossing_times(states[v.vehicle], spec, &signals[v.vehicle], &[alpha])?[0]
        });
    }
    Ok(out)
}

/// Whether `u_max` from `state` reaches `target` no later than `deadline`.
pub fn reachable_by(
    model: &IntersectionModel,
    j: usize,
    state: VehicleState,
    target: f64,
    deadline: f64,
) -> Result<bool, DynamicsError> {
    let spec = model.vehicle(j);
    Ok(time_to_position(state, spec, spec.u_max, target)? <= deadline + ZERO_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::VehicleSpec;
    use crate::intersection::{tests::three_way, Placement};

    fn states(pos: &[f64], speed: &[f64]) -> Vec<VehicleState> {
        pos.iter()
            .zip(speed)
            .map(|(&x, &v)| VehicleState::new(x, v))
            .collect()
    }

    fn single() -> IntersectionModel {
        let spec = VehicleSpec::new(0, 1.0, 0.005, -2.0, 2.0, 1.0, 10.0).unwrap();
        IntersectionModel::new(
            vec![spec],
            1,
            vec![Placement { area: 0, vehicle: 0, alpha: 20.0, beta: 25.0 }],
        )
        .unwrap()
    }

    #[test]
    fn sigma_hits_scheduled_entry() {
        let model = three_way();
        let v = Verifier::new(model.clone()).unwrap();
        let x = states(&[0.0; 3], &[10.0, 8.0, 8.0]);
        let up = v.solve_upper(&x, SolveMode::Exact).unwrap();
        assert!(up.is_zero());
        for shift in [0.0, 0.3, 1.0] {
            let schedule: Vec<Option<f64>> = up
                .params
                .vehicles
                .iter()
                .map(|pv| Some((pv.release + shift).min(pv.due)))
                .collect();
            let sig = sigma(&model, &x, &schedule, &up.params).unwrap();
            let arrivals = first_arrivals(&model, &x, &up.params, &sig).unwrap();
            for (a, s) in arrivals.iter().zip(&schedule) {
                assert!((a.unwrap() - s.unwrap()).abs() <= 1e-6, "{a:?} vs {s:?}");
            }
        }
    }

    #[test]
    fn sigma_extremes() {
        let model = single();
        let v = Verifier::new(model.clone()).unwrap();
        let x = states(&[0.0], &[5.0]);
        let up = v.solve_upper(&x, SolveMode::Exact).unwrap();
        let pv = up.params.vehicles[0];
        let fastest = sigma(&model, &x, &[Some(pv.release)], &up.params).unwrap();
        assert_eq!(fastest[0], PiecewiseConstantInput::constant(2.0));
        let slowest = sigma(&model, &x, &[Some(pv.due)], &up.params).unwrap();
        assert_eq!(slowest[0].values()[0], -2.0);
        let arrival = first_arrivals(&model, &x, &up.params, &slowest).unwrap()[0].unwrap();
        assert!((arrival - pv.due).abs() < 1e-6);
        assert!(reachable_by(&model, 0, x[0], 20.0, pv.release).unwrap());
    }

    #[test]
    fn single_vehicle_never_overridden() {
        let model = single();
        let v = Verifier::new(model).unwrap();
        let mut x = states(&[0.0], &[5.0]);
        let mut sup = Supervisor::new(v, &x, SupervisorConfig::default()).unwrap();
        for k in 0..80 {
            let u = if k % 3 == 0 { -2.0 } else { 2.0 };
            let out = sup.step(&x, &[u]).unwrap();
            assert!(!out.overridden);
            assert_eq!(out.applied[0], PiecewiseConstantInput::constant(u));
            x = out.next_state;
        }
    }

    #[test]
    fn refuses_unsafe_start() {
        let spec = |id| VehicleSpec::new(id, 1.0, 0.005, -2.0, 2.0, 8.0, 10.0).unwrap();
        let model = IntersectionModel::new(
            vec![spec(0), spec(1)],
            1,
            vec![
                Placement { area: 0, vehicle: 0, alpha: 20.0, beta: 25.0 },
                Placement { area: 0, vehicle: 1, alpha: 20.0, beta: 25.0 },
            ],
        )
        .unwrap();
        let v = Verifier::new(model).unwrap();
        let x = states(&[21.0, 22.0], &[9.0, 9.0]);
        assert!(matches!(
            Supervisor::new(v, &x, SupervisorConfig::default()),
            Err(SupervisorError::UnsafeStart(_))
        ));
    }

    #[test]
    fn conflict_within_one_period_is_overridden() {
        // vehicle 1 leaves area 0 just after vehicle 0 enters it; by the end
        // of the period only vehicle 0 is inside
        let model = three_way();
        let v = Verifier::new(model.clone()).unwrap();
        let x = vec![
            VehicleState::new(19.5670314, 8.33826202),
            VehicleState::new(30.4796919, 10.0),
            VehicleState::new(21.3224439, 9.94523832),
        ];
        let full = vec![PiecewiseConstantInput::constant(2.0); 3];
        let end = predict(&model, &x, &full, 0.1).unwrap();
        assert!(v.solve_upper(&end, SolveMode::Exact).unwrap().is_zero());
        let conflict = step_conflict(&model, &x, &full, &end, 0.0).unwrap();
        assert_eq!(conflict, Some((OpId::new(0, 0), OpId::new(0, 1))));

        let mut sup = Supervisor::new(v, &x, SupervisorConfig::default()).unwrap();
        let out = sup.step(&x, &[2.0, 2.0, 2.0]).unwrap();
        assert!(out.overridden);
        assert_eq!(step_conflict(&model, &x, &out.applied, &out.next_state, 0.0).unwrap(), None);
    }

    #[test]
    fn no_conflict_for_separate_areas() {
        let model = three_way();
        let x = states(&[0.0; 3], &[10.0, 8.0, 8.0]);
        let full = vec![PiecewiseConstantInput::constant(2.0); 3];
        let end = predict(&model, &x, &full, 0.1).unwrap();
        assert_eq!(step_conflict(&model, &x, &full, &end, 0.0).unwrap(), None);
    }

    #[test]
    fn override_happens_on_collision_course() {
        let model = three_way();
        let v = Verifier::new(model).unwrap();
        let mut x = states(&[0.0; 3], &[10.0, 8.0, 8.0]);
        let mut sup = Supervisor::new(v, &x, SupervisorConfig::default()).unwrap();
        let mut overrides = 0;
        for _ in 0..60 {
            let out = sup.step(&x, &[-2.0, -2.0, 2.0]).unwrap();
            overrides += out.overridden as usize;
            x = out.next_state;
        }
        assert!(overrides >= 1);
    }
}
