//! Intersection geometry, the operation graph and bad-set membership.
//!
//! An operation `(i, j)` is vehicle `j` crossing conflict area `i`, occupying
//! the open position interval `(alpha_ij, beta_ij)` along its own path. All
//! operation collections are kept sorted by `(area, vehicle)` so iteration
//! order, and therefore solver branching, is reproducible.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dynamics::{DynamicsError, VehicleSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("vehicle at index {index} has id {id}")]
    VehicleId { index: usize, id: usize },
    #[error("placement references unknown area {0}")]
    UnknownArea(usize),
    #[error("placement references unknown vehicle {0}")]
    UnknownVehicle(usize),
    #[error("area {0} is not on any route")]
    UnusedArea(usize),
    #[error("operation {0} is placed twice")]
    DuplicatePlacement(OpId),
    #[error("operation {op}: need finite alpha < beta, got ({alpha}, {beta})")]
    BadInterval { op: OpId, alpha: f64, beta: f64 },
    #[error("vehicle {vehicle}: areas {first} and {second} overlap on the route")]
    OverlappingRoute {
        vehicle: usize,
        first: usize,
        second: usize,
    },
    #[error("vehicle {0} has an empty route")]
    EmptyRoute(usize),
    #[error("expected {expected} positions, got {got}")]
    PositionCount { expected: usize, got: usize },
}

/// Operation identifier: vehicle `vehicle` crossing area `area`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId {
    pub area: usize,
    pub vehicle: usize,
}

impl OpId {
    pub fn new(area: usize, vehicle: usize) -> Self {
        Self { area, vehicle }
    }
}

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.area, self.vehicle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub area: usize,
    pub vehicle: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl Placement {
    pub fn op(&self) -> OpId {
        OpId::new(self.area, self.vehicle)
    }
}

/// Open interval `(lo, hi)`; empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionModel {
    vehicles: Vec<VehicleSpec>,
    area_count: usize,
    /// Per vehicle, placements in route order.
    routes: Vec<Vec<Placement>>,
    /// Every placement, sorted by `(area, vehicle)`.
    ops: Vec<Placement>,
}

impl IntersectionModel {
    pub fn new(
        vehicles: Vec<VehicleSpec>,
        area_count: usize,
        placements: Vec<Placement>,
    ) -> Result<Self, ModelError> {
        for (index, spec) in vehicles.iter().enumerate() {
            if spec.id != index {
                return Err(ModelError::VehicleId { index, id: spec.id });
            }
            spec.validate()?;
        }
        let mut by_op = BTreeMap::new();
        for p in &placements {
            if p.area >= area_count {
                return Err(ModelError::UnknownArea(p.area));
            }
            if p.vehicle >= vehicles.len() {
                return Err(ModelError::UnknownVehicle(p.vehicle));
            }
            if !(p.alpha.is_finite() && p.beta.is_finite() && p.alpha < p.beta) {
                return Err(ModelError::BadInterval {
                    op: p.op(),
                    alpha: p.alpha,
                    beta: p.beta,
                });
            }
            if by_op.insert(p.op(), *p).is_some() {
                return Err(ModelError::DuplicatePlacement(p.op()));
            }
        }
        let mut used = vec![false; area_count];
        for op in by_op.keys() {
            used[op.area] = true;
        }
        if let Some(area) = used.iter().position(|u| !u) {
            return Err(ModelError::UnusedArea(area));
        }

        let mut routes = vec![Vec::new(); vehicles.len()];
        for p in by_op.values() {
            routes[p.vehicle].push(*p);
        }
        for (vehicle, route) in routes.iter_mut().enumerate() {
            route.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
            for w in route.windows(2) {
                if w[0].beta > w[1].alpha {
                    return Err(ModelError::OverlappingRoute {
                        vehicle,
                        first: w[0].area,
                        second: w[1].area,
                    });
                }
            }
        }
        Ok(Self {
            vehicles,
            area_count,
            routes,
            ops: by_op.into_values().collect(),
        })
    }

    pub fn vehicles(&self) -> &[VehicleSpec] {
        &self.vehicles
    }

    pub fn vehicle(&self, j: usize) -> &VehicleSpec {
        &self.vehicles[j]
    }

    pub fn vehicle_count(&self) -> usize {
        self.vehicles.len()
    }

    pub fn area_count(&self) -> usize {
        self.area_count
    }

    /// Placements of vehicle `j` in route order.
    pub fn route(&self, j: usize) -> &[Placement] {
        &self.routes[j]
    }

    /// Every placement sorted by `(area, vehicle)`.
    pub fn placements(&self) -> &[Placement] {
        &self.ops
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    /// Dense index of `op` in [`Self::placements`].
    pub fn op_index(&self, op: OpId) -> Option<usize> {
        self.ops.binary_search_by(|p| p.op().cmp(&op)).ok()
    }

    pub fn placement(&self, op: OpId) -> Option<&Placement> {
        self.op_index(op).map(|k| &self.ops[k])
    }

    /// Route predecessor of `op`, if any.
    pub fn previous_on_route(&self, op: OpId) -> Option<&Placement> {
        let route = &self.routes[op.vehicle];
        let k = route.iter().position(|p| p.area == op.area)?;
        k.checked_sub(1).map(|k| &route[k])
    }

    /// Start of the first area on vehicle `j`'s route.
    pub fn first_area_start(&self, j: usize) -> Result<f64, ModelError> {
        if j >= self.vehicles.len() {
            return Err(ModelError::UnknownVehicle(j));
        }
        self.routes[j]
            .first()
            .map(|p| p.alpha)
            .ok_or(ModelError::EmptyRoute(j))
    }

    /// Position past which vehicle `j` has left every area.
    pub fn route_end(&self, j: usize) -> Option<f64> {
        self.routes[j].last().map(|p| p.beta)
    }

    /// Unordered pairs of operations of distinct vehicles on a shared area,
    /// lower vehicle first, sorted.
    pub fn shared_pairs(&self) -> Vec<(OpId, OpId)> {
        shared_pairs(self.ops.iter().map(Placement::op))
    }

    /// The nominal conflict intervals.
    pub fn nominal_variant(&self) -> BadSetVariant {
        BadSetVariant::new(
            BadSetKind::Nominal,
            self.ops
                .iter()
                .map(|p| (p.op(), Interval::new(p.alpha, p.beta)))
                .collect(),
        )
    }
}

fn shared_pairs(sorted_ops: impl Iterator<Item = OpId>) -> Vec<(OpId, OpId)> {
    let ops: Vec<OpId> = sorted_ops.collect();
    let mut pairs = Vec::new();
    let mut start = 0;
    while start < ops.len() {
        let area = ops[start].area;
        let end = start + ops[start..].iter().take_while(|o| o.area == area).count();
        for a in start..end {
            for b in a + 1..end {
                pairs.push((ops[a], ops[b]));
            }
        }
        start = end;
    }
    pairs
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationGraph {
    /// N̄: every operation.
    pub all_ops: Vec<OpId>,
    /// N: operations whose area the vehicle has not yet left.
    pub active_ops: Vec<OpId>,
    /// F: first active operation per vehicle.
    pub first_ops: Vec<OpId>,
    /// L: last active operation per vehicle.
    pub last_ops: Vec<OpId>,
    /// C: consecutive active operations of one vehicle, `(earlier, later)`.
    pub conjunctive: Vec<(OpId, OpId)>,
    /// D: active operations of distinct vehicles sharing an area.
    pub disjunctive: Vec<(OpId, OpId)>,
    /// Shared-area pairs over N̄, used for bad-set membership.
    pub all_disjunctive: Vec<(OpId, OpId)>,
    /// Active operations per vehicle in route order.
    active_routes: Vec<Vec<OpId>>,
}

impl OperationGraph {
    /// Active operations of vehicle `j` in route order.
    pub fn active_route(&self, j: usize) -> &[OpId] {
        &self.active_routes[j]
    }

    pub fn first_of(&self, j: usize) -> Option<OpId> {
        self.active_routes[j].first().copied()
    }

    pub fn is_first(&self, op: OpId) -> bool {
        self.first_of(op.vehicle) == Some(op)
    }

    pub fn vehicle_count(&self) -> usize {
        self.active_routes.len()
    }

    /// Vehicles that still have an active operation.
    pub fn engaged_vehicles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.active_routes.len()).filter(|&j| !self.active_routes[j].is_empty())
    }
}

pub fn build_operation_graph(
    model: &IntersectionModel,
    x0: &[f64],
) -> Result<OperationGraph, ModelError> {
    if x0.len() != model.vehicle_count() {
        return Err(ModelError::PositionCount {
            expected: model.vehicle_count(),
            got: x0.len(),
        });
    }
    let active_routes: Vec<Vec<OpId>> = (0..model.vehicle_count())
        .map(|j| {
            model
                .route(j)
                .iter()
                .filter(|p| x0[j] < p.beta)
                .map(Placement::op)
                .collect()
        })
        .collect();

    let mut active_ops: Vec<OpId> = active_routes.iter().flatten().copied().collect();
    active_ops.sort();
    let mut first_ops: Vec<OpId> = active_routes.iter().filter_map(|r| r.first().copied()).collect();
    first_ops.sort();
    let mut last_ops: Vec<OpId> = active_routes.iter().filter_map(|r| r.last().copied()).collect();
    last_ops.sort();
    let mut conjunctive: Vec<(OpId, OpId)> = active_routes
        .iter()
        .flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
        .collect();
    conjunctive.sort();

    Ok(OperationGraph {
        all_ops: model.placements().iter().map(Placement::op).collect(),
        disjunctive: shared_pairs(active_ops.iter().copied()),
        all_disjunctive: model.shared_pairs(),
        active_ops,
        first_ops,
        last_ops,
        conjunctive,
        active_routes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BadSetKind {
    Nominal,
    Shrunk,
    Inflated,
}

impl fmt::Display for BadSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BadSetKind::Nominal => "nominal",
            BadSetKind::Shrunk => "shrunk",
            BadSetKind::Inflated => "inflated",
        })
    }
}

/// Per-operation occupancy intervals defining one bad set.
#[derive(Debug, Clone, PartialEq)]
pub struct BadSetVariant {
    pub kind: BadSetKind,
    ops: Vec<OpId>,
    intervals: Vec<Interval>,
}

impl BadSetVariant {
    pub fn new(kind: BadSetKind, mut entries: Vec<(OpId, Interval)>) -> Self {
        entries.sort_by_key(|a| a.0);
        let (ops, intervals) = entries.into_iter().unzip();
        Self {
            kind,
            ops,
            intervals,
        }
    }

    pub fn interval(&self, op: OpId) -> Option<Interval> {
        self.ops
            .binary_search(&op)
            .ok()
            .map(|k| self.intervals[k])
    }

    pub fn entries(&self) -> impl Iterator<Item = (OpId, Interval)> + '_ {
        self.ops.iter().copied().zip(self.intervals.iter().copied())
    }

    /// Pair of operations whose vehicles are both strictly inside, if any.
    pub fn violating_pair(
        &self,
        pairs: &[(OpId, OpId)],
        x: &[f64],
    ) -> Option<(OpId, OpId)> {
        pairs.iter().copied().find(|&(a, b)| {
            let inside = |op: OpId| self.interval(op).is_some_and(|iv| iv.contains(x[op.vehicle]));
            inside(a) && inside(b)
        })
    }
}

/// True iff two vehicles are strictly inside the variant's intervals of one
/// shared area. Checked over every shared-area pair of the model.
pub fn in_bad_set(graph: &OperationGraph, variant: &BadSetVariant, x: &[f64]) -> bool {
    variant.violating_pair(&graph.all_disjunctive, x).is_some()
}
