//! Scheduling parameters for the lower- and upper-bound problems, and the
//! shrunk and inflated conflict areas.
//!
//! Every minimum or maximum over input signals is a single integration under
//! a constant extremal input (see [`crate::dynamics`]).

use crate::dynamics::{
    crossing_times, max_time_to, min_time_to, position_after, DynamicsError, VehicleState,
};
use crate::intersection::{
    BadSetKind, BadSetVariant, Interval, IntersectionModel, ModelError, OpId, OperationGraph,
};

/// Entry-time rule of one operation in the lower-bound problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerEntry {
    /// Absolute release time and deadline from the full dynamics.
    First { release: f64, deadline: f64 },
    /// Entry between `p_prev + gap_fast` and `p_prev + gap_slow`, where
    /// `p_prev` is the exit time from the route predecessor `prev`.
    After {
        prev: OpId,
        gap_fast: f64,
        gap_slow: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerOp {
    pub op: OpId,
    pub entry: LowerEntry,
    /// Occupancy duration bounds at constant `v_max` and `v_min`.
    pub proc_min: f64,
    pub proc_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundParams {
    /// One entry per active operation, in graph order.
    pub ops: Vec<LowerOp>,
}

impl LowerBoundParams {
    pub fn get(&self, op: OpId) -> Option<&LowerOp> {
        self.ops
            .binary_search_by(|o| o.op.cmp(&op))
            .ok()
            .map(|k| &self.ops[k])
    }
}

fn check_states(model: &IntersectionModel, states: &[VehicleState]) -> Result<(), ModelError> {
    if states.len() != model.vehicle_count() {
        return Err(ModelError::PositionCount {
            expected: model.vehicle_count(),
            got: states.len(),
        });
    }
    for (spec, s) in model.vehicles().iter().zip(states) {
        spec.check_state(*s)?;
    }
    Ok(())
}

pub fn lower_bound_params(
    model: &IntersectionModel,
    graph: &OperationGraph,
    states: &[VehicleState],
) -> Result<LowerBoundParams, ModelError> {
    check_states(model, states)?;
    let mut ops = Vec::with_capacity(graph.active_ops.len());
    for &op in &graph.active_ops {
        let p = model.placement(op).expect("graph built from model");
        let spec = model.vehicle(op.vehicle);
        let s = states[op.vehicle];
        let (entry, length) = if graph.is_first(op) {
            if p.alpha <= s.pos {
                // already inside: only the remaining stretch is left to cover
                (
                    LowerEntry::First {
                        release: 0.0,
                        deadline: 0.0,
                    },
                    p.beta - s.pos,
                )
            } else {
                (
                    LowerEntry::First {
                        release: min_time_to(s, spec, p.alpha)?,
                        deadline: max_time_to(s, spec, p.alpha)?,
                    },
                    p.beta - p.alpha,
                )
            }
        } else {
            let prev = model
                .previous_on_route(op)
                .expect("non-first active op has a predecessor");
            let gap = p.alpha - prev.beta;
            (
                LowerEntry::After {
                    prev: prev.op(),
                    gap_fast: gap / spec.v_max,
                    gap_slow: gap / spec.v_min,
                },
                p.beta - p.alpha,
            )
        };
        ops.push(LowerOp {
            op,
            entry,
            proc_min: length / spec.v_max,
            proc_max: length / spec.v_min,
        });
    }
    Ok(LowerBoundParams { ops })
}

/// State-independent offsets of each operation relative to the entry into
/// the first area of its route, for a vehicle still outside the intersection.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalOffsets {
    /// Earliest entry time starting at the first area at `v_max`.
    entry: Vec<f64>,
    /// Earliest exit time starting at the first area at `v_min`.
    exit: Vec<f64>,
}

impl ExtremalOffsets {
    pub fn new(model: &IntersectionModel) -> Result<Self, ModelError> {
        let mut entry = vec![0.0; model.op_count()];
        let mut exit = vec![0.0; model.op_count()];
        for j in 0..model.vehicle_count() {
            let route = model.route(j);
            let Some(first) = route.first() else { continue };
            let spec = model.vehicle(j);
            let alphas: Vec<f64> = route.iter().map(|p| p.alpha).collect();
            let betas: Vec<f64> = route.iter().map(|p| p.beta).collect();
            let fast = VehicleState::new(first.alpha, spec.v_max);
            let slow = VehicleState::new(first.alpha, spec.v_min);
            let t_in = crossing_times(fast, spec, spec.u_max, &alphas)?;
            let t_out = crossing_times(slow, spec, spec.u_max, &betas)?;
            for (k, p) in route.iter().enumerate() {
                let idx = model.op_index(p.op()).expect("route op");
                entry[idx] = t_in[k];
                exit[idx] = t_out[k];
            }
        }
        Ok(Self { entry, exit })
    }

    /// `(entry, exit)` offsets of `op`.
    pub fn get(&self, model: &IntersectionModel, op: OpId) -> Option<(f64, f64)> {
        model
            .op_index(op)
            .map(|k| (self.entry[k], self.exit[k]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperVehicle {
    pub vehicle: usize,
    pub first: OpId,
    /// Bounds on the entry time into the first active area.
    pub release: f64,
    pub due: f64,
    /// Whether the vehicle has passed the start of its first area.
    pub inside: bool,
}

/// Entry and exit of an operation as offsets from the vehicle's first entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperOp {
    pub op: OpId,
    pub entry_offset: f64,
    pub exit_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperBoundParams {
    /// One entry per engaged vehicle, by vehicle index.
    pub vehicles: Vec<UpperVehicle>,
    /// One entry per active operation, in graph order.
    pub ops: Vec<UpperOp>,
}

impl UpperBoundParams {
    pub fn vehicle(&self, j: usize) -> Option<&UpperVehicle> {
        self.vehicles.iter().find(|v| v.vehicle == j)
    }

    pub fn get(&self, op: OpId) -> Option<&UpperOp> {
        self.ops
            .binary_search_by(|o| o.op.cmp(&op))
            .ok()
            .map(|k| &self.ops[k])
    }
}

pub fn upper_bound_params(
    model: &IntersectionModel,
    graph: &OperationGraph,
    states: &[VehicleState],
) -> Result<UpperBoundParams, ModelError> {
    upper_bound_params_with(model, graph, states, &ExtremalOffsets::new(model)?)
}

/// As [`upper_bound_params`] with precomputed outside offsets.
pub fn upper_bound_params_with(
    model: &IntersectionModel,
    graph: &OperationGraph,
    states: &[VehicleState],
    offsets: &ExtremalOffsets,
) -> Result<UpperBoundParams, ModelError> {
    check_states(model, states)?;
    let mut vehicles = Vec::new();
    let mut ops = Vec::with_capacity(graph.active_ops.len());
    for j in graph.engaged_vehicles() {
        let spec = model.vehicle(j);
        let s = states[j];
        let route = graph.active_route(j);
        let first = route[0];
        let alpha_min = model.first_area_start(j)?;
        if s.pos < alpha_min {
            vehicles.push(UpperVehicle {
                vehicle: j,
                first,
                release: min_time_to(s, spec, alpha_min)?,
                due: max_time_to(s, spec, alpha_min)?,
                inside: false,
            });
            for &op in route {
                let (entry_offset, exit_offset) = offsets.get(model, op).expect("model op");
                ops.push(UpperOp {
                    op,
                    entry_offset,
                    exit_offset,
                });
            }
        } else {
            let targets: Vec<f64> = route
                .iter()
                .flat_map(|&op| {
                    let p = model.placement(op).expect("model op");
                    [p.alpha, p.beta]
                })
                .collect();
            let times = crossing_times(s, spec, spec.u_max, &targets)?;
            let release = times[0];
            vehicles.push(UpperVehicle {
                vehicle: j,
                first,
                release,
                due: release,
                inside: true,
            });
            for (k, &op) in route.iter().enumerate() {
                ops.push(UpperOp {
                    op,
                    entry_offset: times[2 * k] - release,
                    exit_offset: times[2 * k + 1] - release,
                });
            }
        }
    }
    ops.sort_by_key(|a| a.op);
    Ok(UpperBoundParams { vehicles, ops })
}

/// Under-approximated conflict areas: positions a vehicle certainly occupies
/// while its entries are bracketed by the extremal speeds.
pub fn shrunk_areas(model: &IntersectionModel) -> Result<BadSetVariant, DynamicsError> {
    let mut entries = Vec::with_capacity(model.op_count());
    for j in 0..model.vehicle_count() {
        let route = model.route(j);
        let Some(first) = route.first() else { continue };
        let spec = model.vehicle(j);
        let fast = VehicleState::new(first.alpha, spec.v_max);
        let slow = VehicleState::new(first.alpha, spec.v_min);
        for p in route {
            let lo = position_after(fast, spec, spec.u_max, (p.alpha - first.alpha) / spec.v_min)?;
            let hi = position_after(slow, spec, spec.u_min, (p.beta - first.alpha) / spec.v_max)?;
            entries.push((p.op(), Interval::new(lo, hi)));
        }
    }
    Ok(BadSetVariant::new(BadSetKind::Shrunk, entries))
}

/// Over-approximated conflict areas covering every position a vehicle may
/// hold during the upper-bound problem's occupancy windows.
pub fn inflated_areas(model: &IntersectionModel) -> Result<BadSetVariant, ModelError> {
    let offsets = ExtremalOffsets::new(model)?;
    let mut entries = Vec::with_capacity(model.op_count());
    for j in 0..model.vehicle_count() {
        let route = model.route(j);
        let Some(first) = route.first() else { continue };
        let spec = model.vehicle(j);
        let fast = VehicleState::new(first.alpha, spec.v_max);
        let slow = VehicleState::new(first.alpha, spec.v_min);
        for p in route {
            let (t_in, t_out) = offsets.get(model, p.op()).expect("model op");
            let lo = position_after(slow, spec, spec.u_min, t_in)?;
            let hi = position_after(fast, spec, spec.u_max, t_out)?;
            entries.push((p.op(), Interval::new(lo.min(p.alpha), hi.max(p.beta))));
        }
    }
    Ok(BadSetVariant::new(BadSetKind::Inflated, entries))
}

/// The shrunk, nominal and inflated bad sets of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct BadSets {
    pub shrunk: BadSetVariant,
    pub nominal: BadSetVariant,
    pub inflated: BadSetVariant,
}

impl BadSets {
    pub fn new(model: &IntersectionModel) -> Result<Self, ModelError> {
        Ok(Self {
            shrunk: shrunk_areas(model)?,
            nominal: model.nominal_variant(),
            inflated: inflated_areas(model)?,
        })
    }

    pub fn get(&self, kind: BadSetKind) -> &BadSetVariant {
        match kind {
            BadSetKind::Shrunk => &self.shrunk,
            BadSetKind::Nominal => &self.nominal,
            BadSetKind::Inflated => &self.inflated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::VehicleSpec;
    use crate::intersection::{build_operation_graph, tests::three_way, Placement};
    use proptest::prelude::*;

    fn states(pos: &[f64], speed: &[f64]) -> Vec<VehicleState> {
        pos.iter()
            .zip(speed)
            .map(|(&x, &v)| VehicleState::new(x, v))
            .collect()
    }

    fn linear_pair() -> IntersectionModel {
        let spec = |id| VehicleSpec::new(id, 1.0, 0.0, -2.0, 2.0, 8.0, 10.0).unwrap();
        IntersectionModel::new(
            vec![spec(0), spec(1)],
            2,
            vec![
                Placement { area: 0, vehicle: 0, alpha: 20.0, beta: 25.0 },
                Placement { area: 1, vehicle: 0, alpha: 26.0, beta: 31.0 },
                Placement { area: 0, vehicle: 1, alpha: 20.0, beta: 25.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn lower_params_on_regular_geometry() {
        let model = three_way();
        let x = states(&[0.0; 3], &[10.0, 8.0, 8.0]);
        let graph = build_operation_graph(&model, &[0.0; 3]).unwrap();
        let params = lower_bound_params(&model, &graph, &x).unwrap();
        let second = params.get(OpId::new(2, 0)).unwrap();
        match second.entry {
            LowerEntry::After { prev, gap_fast, gap_slow } => {
                assert_eq!(prev, OpId::new(0, 0));
                assert!((gap_fast - 0.1).abs() < 1e-15);
                assert!((gap_slow - 0.125).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!((second.proc_min - 0.5).abs() < 1e-15);
        assert!((second.proc_max - 0.625).abs() < 1e-15);
        // vehicle 0 cruises at v_max: release 2.0
        match params.get(OpId::new(0, 0)).unwrap().entry {
            LowerEntry::First { release, deadline } => {
                assert!((release - 2.0).abs() < 1e-12);
                assert!(deadline > release);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inside_first_op_has_zero_window() {
        let model = three_way();
        let x = states(&[22.0, 0.0, 0.0], &[9.0, 8.0, 8.0]);
        let graph = build_operation_graph(&model, &[22.0, 0.0, 0.0]).unwrap();
        let params = lower_bound_params(&model, &graph, &x).unwrap();
        let op = params.get(OpId::new(0, 0)).unwrap();
        assert_eq!(
            op.entry,
            LowerEntry::First { release: 0.0, deadline: 0.0 }
        );
        assert!((op.proc_min - 0.3).abs() < 1e-12);
        assert!((op.proc_max - 0.375).abs() < 1e-12);
    }

    #[test]
    fn linear_first_exit_offset_matches_closed_form() {
        // 8t + t² = 5
        let t_star = -4.0 + 21.0f64.sqrt();
        let model = linear_pair();
        let offsets = ExtremalOffsets::new(&model).unwrap();
        let (entry, exit) = offsets.get(&model, OpId::new(0, 1)).unwrap();
        assert_eq!(entry, 0.0);
        assert!((exit - t_star).abs() < 1e-9, "{exit}");
        assert!((t_star - 0.582_575_694_955_84).abs() < 1e-12);
    }

    #[test]
    fn inside_vehicles_have_pinned_release() {
        let model = three_way();
        let x = states(&[22.0, 0.0, 25.5], &[9.0, 8.0, 8.5]);
        let graph = build_operation_graph(&model, &[22.0, 0.0, 25.5]).unwrap();
        let params = upper_bound_params(&model, &graph, &x).unwrap();
        let v0 = params.vehicle(0).unwrap();
        assert!(v0.inside);
        assert_eq!(v0.release, 0.0);
        assert_eq!(v0.due, 0.0);
        let v2 = params.vehicle(2).unwrap();
        assert!(v2.inside);
        assert_eq!(v2.release, v2.due);
        assert!(v2.release > 0.0);
        let v1 = params.vehicle(1).unwrap();
        assert!(!v1.inside && v1.release < v1.due);
        let first_v1 = params.get(OpId::new(1, 1)).unwrap();
        assert_eq!(first_v1.entry_offset, 0.0);
    }

    #[test]
    fn regular_shrunk_first_end() {
        let model = three_way();
        let shrunk = shrunk_areas(&model).unwrap();
        let iv = shrunk.interval(OpId::new(0, 0)).unwrap();
        assert_eq!(iv.lo, 20.0);
        assert!((iv.hi - 24.0).abs() < 1e-9, "{iv:?}");
    }

    #[test]
    fn linear_inflated_first_end() {
        let model = linear_pair();
        let inflated = inflated_areas(&model).unwrap();
        let iv = inflated.interval(OpId::new(0, 0)).unwrap();
        assert_eq!(iv.lo, 20.0);
        assert!((iv.hi - 25.825_756_949_558_4).abs() < 1e-8, "{iv:?}");
    }

    #[test]
    fn equal_speed_bounds_collapse_variants() {
        let spec = |id| VehicleSpec::new(id, 1.0, 0.005, -2.0, 2.0, 9.0, 9.0).unwrap();
        let model = IntersectionModel::new(
            vec![spec(0), spec(1)],
            2,
            vec![
                Placement { area: 0, vehicle: 0, alpha: 10.0, beta: 14.0 },
                Placement { area: 1, vehicle: 0, alpha: 17.0, beta: 19.0 },
                Placement { area: 1, vehicle: 1, alpha: 5.0, beta: 8.0 },
            ],
        )
        .unwrap();
        let sets = BadSets::new(&model).unwrap();
        for (op, nominal) in sets.nominal.entries() {
            for other in [&sets.shrunk, &sets.inflated] {
                let iv = other.interval(op).unwrap();
                assert!((iv.lo - nominal.lo).abs() < 1e-9 && (iv.hi - nominal.hi).abs() < 1e-9);
            }
        }
    }

    fn random_model(
        lengths: &[f64],
        gaps: &[f64],
        v_min: f64,
        v_max: f64,
        b: f64,
    ) -> IntersectionModel {
        let spec = VehicleSpec::new(0, 1.0, b, -2.0, 2.0, v_min, v_max).unwrap();
        let mut placements = Vec::new();
        let mut at = 10.0;
        for (area, (len, gap)) in lengths.iter().zip(gaps).enumerate() {
            placements.push(Placement { area, vehicle: 0, alpha: at, beta: at + len });
            at += len + gap;
        }
        IntersectionModel::new(vec![spec], lengths.len(), placements).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn areas_nest_and_offsets_order(
            lengths in proptest::collection::vec(1.0f64..8.0, 1..4),
            gaps in proptest::collection::vec(0.0f64..6.0, 4),
            v_min in 1.0f64..8.0,
            dv in 0.0f64..6.0,
            b in 0.0f64..0.01,
        ) {
            let model = random_model(&lengths, &gaps, v_min, v_min + dv, b);
            let sets = BadSets::new(&model).unwrap();
            for (op, nominal) in sets.nominal.entries() {
                prop_assert!(sets.shrunk.interval(op).unwrap().is_subset_of(&nominal));
                prop_assert!(nominal.is_subset_of(&sets.inflated.interval(op).unwrap()));
            }
            let offsets = ExtremalOffsets::new(&model).unwrap();
            let mut last_entry = -1.0;
            for p in model.route(0) {
                let (entry, exit) = offsets.get(&model, p.op()).unwrap();
                prop_assert!(entry < exit);
                prop_assert!(entry > last_entry);
                last_entry = entry;
            }
        }

        #[test]
        fn lower_windows_are_ordered(x0 in -10.0f64..40.0, v0 in 1.0f64..10.0) {
            let model = random_model(&[5.0, 3.0, 4.0], &[1.0, 2.0, 0.0], 1.0, 10.0, 0.005);
            let x = vec![VehicleState::new(x0, v0)];
            let graph = build_operation_graph(&model, &[x0]).unwrap();
            let params = lower_bound_params(&model, &graph, &x).unwrap();
            let upper = upper_bound_params(&model, &graph, &x).unwrap();
            for op in &params.ops {
                prop_assert!(op.proc_min <= op.proc_max && op.proc_min > 0.0);
                match op.entry {
                    LowerEntry::First { release, deadline } => prop_assert!(release <= deadline),
                    LowerEntry::After { gap_fast, gap_slow, .. } => prop_assert!(gap_fast <= gap_slow),
                }
            }
            for v in &upper.vehicles {
                prop_assert!(v.release <= v.due);
            }
            for op in &upper.ops {
                prop_assert!(op.entry_offset < op.exit_offset);
            }
        }
    }
}
