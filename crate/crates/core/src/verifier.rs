//! Lower- and upper-bound scheduling problems and the three-way verdict.
//!
//! The lower bound treats vehicles as first-order (speed is the input) after
//! their first area; zero cost is necessary for safety. The upper bound fixes
//! every vehicle to full throttle after its first entry and only schedules
//! that entry; zero cost is sufficient for safety.

use std::fmt;

use thiserror::Error;

use crate::dtp::{
    feasible_zero_lateness, min_max_lateness, DiffConstraint, Disjunction,
    DisjunctiveTemporalProblem, DtpError, DtpSolution, DueDate, LowerBound, RelativeDue, Side,
    ZERO_TOL,
};
use crate::dynamics::VehicleState;
use crate::intersection::{build_operation_graph, IntersectionModel, ModelError, OpId, OperationGraph};
use crate::schedparams::{
    lower_bound_params, upper_bound_params_with, ExtremalOffsets, LowerEntry, UpperBoundParams,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dtp(#[from] DtpError),
    #[error("inconsistent bounds: lower {s_lower} > 0 but upper {s_upper} = 0")]
    Inconsistent { s_lower: f64, s_upper: f64 },
    #[error("negative cost ({0})")]
    NegativeCost(f64),
}

/// How the deadline of a non-first operation, which depends on the exit
/// time from the preceding area, enters the lower-bound problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowerBoundEncoding {
    /// `t_ij <= p_prev + gap_slow` as a hard constraint.
    #[default]
    Hard,
    /// The same inequality contributes lateness instead.
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Exact minimum lateness.
    #[default]
    Exact,
    /// Only decide whether zero lateness is attainable; positive costs are
    /// reported as infinite.
    Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Safe,
    Undecided,
    Unsafe,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Safe => "safe",
            Classification::Undecided => "undecided",
            Classification::Unsafe => "unsafe",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub s_lower: f64,
    pub s_upper: f64,
    pub classification: Classification,
}

/// Safe iff the upper bound is zero, unsafe iff the lower bound is positive.
pub fn classify(s_lower: f64, s_upper: f64) -> Result<Verdict, VerifyError> {
    for c in [s_lower, s_upper] {
        if c < 0.0 || c.is_nan() {
            return Err(VerifyError::NegativeCost(c));
        }
    }
    let lower_zero = s_lower <= ZERO_TOL;
    let upper_zero = s_upper <= ZERO_TOL;
    let classification = match (lower_zero, upper_zero) {
        (true, true) => Classification::Safe,
        (true, false) => Classification::Undecided,
        (false, false) => Classification::Unsafe,
        (false, true) => return Err(VerifyError::Inconsistent { s_lower, s_upper }),
    };
    Ok(Verdict {
        s_lower,
        s_upper,
        classification,
    })
}

/// Optimal lower-bound schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerSolution {
    pub cost: f64,
    /// `(op, entry, exit)` per active operation.
    pub schedule: Vec<(OpId, f64, f64)>,
    /// Chosen order per shared-area pair; `First` means the lower vehicle
    /// index crosses first.
    pub orientation: Vec<(OpId, OpId, Side)>,
    pub nodes: usize,
}

impl LowerSolution {
    pub fn is_zero(&self) -> bool {
        self.cost <= ZERO_TOL
    }
}

/// Upper-bound schedule of first entries.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperSolution {
    pub cost: f64,
    /// Entry time into the first active area, per vehicle; `None` for
    /// vehicles with no active operation or when no zero-cost schedule exists.
    pub first_entry: Vec<Option<f64>>,
    pub orientation: Vec<(OpId, OpId, Side)>,
    pub params: UpperBoundParams,
    pub nodes: usize,
}

impl UpperSolution {
    pub fn is_zero(&self) -> bool {
        self.cost <= ZERO_TOL
    }
}

/// Bound computations for one intersection model. Holds the
/// state-independent offsets so repeated calls only integrate from the
/// current state.
#[derive(Debug, Clone)]
pub struct Verifier {
    model: IntersectionModel,
    offsets: ExtremalOffsets,
    encoding: LowerBoundEncoding,
}

impl Verifier {
    pub fn new(model: IntersectionModel) -> Result<Self, VerifyError> {
        let offsets = ExtremalOffsets::new(&model)?;
        Ok(Self {
            model,
            offsets,
            encoding: LowerBoundEncoding::default(),
        })
    }

    pub fn with_encoding(mut self, encoding: LowerBoundEncoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn model(&self) -> &IntersectionModel {
        &self.model
    }

    pub fn graph(&self, states: &[VehicleState]) -> Result<OperationGraph, VerifyError> {
        let x: Vec<f64> = states.iter().map(|s| s.pos).collect();
        Ok(build_operation_graph(&self.model, &x)?)
    }

    /// The lower-bound problem as a disjunctive temporal problem. Variables
    /// `2k` and `2k + 1` are entry and exit of the `k`-th active operation.
    pub fn lower_problem(
        &self,
        states: &[VehicleState],
    ) -> Result<(DisjunctiveTemporalProblem, OperationGraph), VerifyError> {
        let graph = self.graph(states)?;
        let params = lower_bound_params(&self.model, &graph, states)?;
        let index = |op: OpId| graph.active_ops.binary_search(&op).expect("active op");
        let mut p = DisjunctiveTemporalProblem::new(2 * graph.active_ops.len());
        p.names = graph
            .active_ops
            .iter()
            .flat_map(|op| {
                [
                    format!("t_{}_{}", op.area, op.vehicle),
                    format!("p_{}_{}", op.area, op.vehicle),
                ]
            })
            .collect();
        for (k, lop) in params.ops.iter().enumerate() {
            let (t, e) = (2 * k, 2 * k + 1);
            match lop.entry {
                LowerEntry::First { release, deadline } => {
                    p.lower_bounds.push(LowerBound { var: t, value: release });
                    p.due_dates.push(DueDate { var: t, due: deadline });
                }
                LowerEntry::After {
                    prev,
                    gap_fast,
                    gap_slow,
                } => {
                    let pe = 2 * index(prev) + 1;
                    p.diff_constraints.push(DiffConstraint::new(t, pe, gap_fast));
                    match self.encoding {
                        LowerBoundEncoding::Hard => {
                            p.diff_constraints.push(DiffConstraint::new(pe, t, -gap_slow))
                        }
                        LowerBoundEncoding::Soft => p.relative_dues.push(RelativeDue {
                            var: t,
                            reference: pe,
                            slack: gap_slow,
                        }),
                    }
                }
            }
            p.diff_constraints.push(DiffConstraint::new(e, t, lop.proc_min));
            p.diff_constraints.push(DiffConstraint::new(t, e, -lop.proc_max));
        }
        for &(a, b) in &graph.disjunctive {
            let (ka, kb) = (index(a), index(b));
            p.disjunctions.push(Disjunction {
                first: vec![DiffConstraint::new(2 * kb, 2 * ka + 1, 0.0)],
                second: vec![DiffConstraint::new(2 * ka, 2 * kb + 1, 0.0)],
            });
        }
        Ok((p, graph))
    }

    pub fn solve_lower(
        &self,
        states: &[VehicleState],
        mode: SolveMode,
    ) -> Result<LowerSolution, VerifyError> {
        let (problem, graph) = self.lower_problem(states)?;
        let sol = run(&problem, mode)?;
        let schedule = if sol.times.is_empty() {
            Vec::new()
        } else {
            graph
                .active_ops
                .iter()
                .enumerate()
                .map(|(k, &op)| (op, sol.times[2 * k], sol.times[2 * k + 1]))
                .collect()
        };
        Ok(LowerSolution {
            cost: sol.cost,
            schedule,
            orientation: zip_orientation(&graph, &sol),
            nodes: sol.nodes,
        })
    }

    /// The upper-bound problem with one variable per engaged vehicle, in
    /// vehicle order.
    pub fn upper_problem(
        &self,
        states: &[VehicleState],
    ) -> Result<(DisjunctiveTemporalProblem, OperationGraph, UpperBoundParams), VerifyError> {
        let graph = self.graph(states)?;
        let params = upper_bound_params_with(&self.model, &graph, states, &self.offsets)?;
        let var_of = |j: usize| {
            params
                .vehicles
                .iter()
                .position(|v| v.vehicle == j)
                .expect("engaged vehicle")
        };
        let mut p = DisjunctiveTemporalProblem::new(params.vehicles.len());
        p.names = params.vehicles.iter().map(|v| format!("T_{}", v.vehicle)).collect();
        for (k, v) in params.vehicles.iter().enumerate() {
            p.lower_bounds.push(LowerBound { var: k, value: v.release });
            p.due_dates.push(DueDate { var: k, due: v.due });
        }
        for &(a, b) in &graph.disjunctive {
            let (va, vb) = (var_of(a.vehicle), var_of(b.vehicle));
            let oa = params.get(a).expect("active op");
            let ob = params.get(b).expect("active op");
            p.disjunctions.push(Disjunction {
                first: vec![DiffConstraint::new(vb, va, oa.exit_offset - ob.entry_offset)],
                second: vec![DiffConstraint::new(va, vb, ob.exit_offset - oa.entry_offset)],
            });
        }
        Ok((p, graph, params))
    }

    pub fn solve_upper(
        &self,
        states: &[VehicleState],
        mode: SolveMode,
    ) -> Result<UpperSolution, VerifyError> {
        let (problem, graph, params) = self.upper_problem(states)?;
        let sol = run(&problem, mode)?;
        let mut first_entry = vec![None; self.model.vehicle_count()];
        if !sol.times.is_empty() {
            for (k, v) in params.vehicles.iter().enumerate() {
                first_entry[v.vehicle] = Some(sol.times[k]);
            }
        }
        Ok(UpperSolution {
            cost: sol.cost,
            first_entry,
            orientation: zip_orientation(&graph, &sol),
            params,
            nodes: sol.nodes,
        })
    }

    /// Both bounds and their classification.
    pub fn verify(&self, states: &[VehicleState], mode: SolveMode) -> Result<Verdict, VerifyError> {
        let upper = self.solve_upper(states, mode)?;
        let lower = self.solve_lower(states, mode)?;
        classify(lower.cost, upper.cost)
    }
}

fn run(problem: &DisjunctiveTemporalProblem, mode: SolveMode) -> Result<DtpSolution, VerifyError> {
    let sol = match mode {
        SolveMode::Exact => min_max_lateness(problem)?,
        SolveMode::Feasibility => match feasible_zero_lateness(problem)? {
            Some(mut s) => {
                s.cost = 0.0;
                s
            }
            None => DtpSolution {
                cost: f64::INFINITY,
                times: Vec::new(),
                orientation: Vec::new(),
                nodes: 0,
            },
        },
    };
    debug_assert!(
        sol.cost.is_finite() || mode == SolveMode::Feasibility,
        "dropping every disjunction leaves a feasible system"
    );
    Ok(sol)
}

fn zip_orientation(graph: &OperationGraph, sol: &DtpSolution) -> Vec<(OpId, OpId, Side)> {
    graph
        .disjunctive
        .iter()
        .zip(&sol.orientation)
        .map(|(&(a, b), &s)| (a, b, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtp::enumerate_exact;
    use crate::dynamics::VehicleSpec;
    use crate::intersection::tests::three_way;
    use crate::intersection::Placement;

    fn states(pos: &[f64], speed: &[f64]) -> Vec<VehicleState> {
        pos.iter()
            .zip(speed)
            .map(|(&x, &v)| VehicleState::new(x, v))
            .collect()
    }

    /// Two vehicles crossing one shared area placed identically on both paths.
    pub(crate) fn head_on(v_min: f64, v_max: f64) -> IntersectionModel {
        let spec = |id| VehicleSpec::new(id, 1.0, 0.005, -2.0, 2.0, v_min, v_max).unwrap();
        IntersectionModel::new(
            vec![spec(0), spec(1)],
            1,
            vec![
                Placement { area: 0, vehicle: 0, alpha: 20.0, beta: 25.0 },
                Placement { area: 0, vehicle: 1, alpha: 20.0, beta: 25.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify(0.0, 0.0).unwrap().classification, Classification::Safe);
        assert_eq!(classify(0.0, 0.3).unwrap().classification, Classification::Undecided);
        assert_eq!(classify(0.1, 0.4).unwrap().classification, Classification::Unsafe);
        assert!(matches!(classify(0.1, 0.0), Err(VerifyError::Inconsistent { .. })));
        assert!(classify(-1.0, 0.0).is_err());
    }

    #[test]
    fn empty_problem_is_safe() {
        let v = Verifier::new(three_way()).unwrap();
        let x = states(&[40.0, 40.0, 40.0], &[9.0; 3]);
        let verdict = v.verify(&x, SolveMode::Exact).unwrap();
        assert_eq!(verdict.classification, Classification::Safe);
    }

    #[test]
    fn regular_start_is_safe() {
        let v = Verifier::new(three_way()).unwrap();
        let x = states(&[0.0; 3], &[10.0, 8.0, 8.0]);
        assert_eq!(v.solve_lower(&x, SolveMode::Exact).unwrap().cost, 0.0);
        assert_eq!(
            v.verify(&x, SolveMode::Exact).unwrap().classification,
            Classification::Safe
        );
    }

    #[test]
    fn single_vehicle_enters_at_release() {
        let spec = VehicleSpec::new(0, 1.0, 0.005, -2.0, 2.0, 1.0, 10.0).unwrap();
        let model = IntersectionModel::new(
            vec![spec],
            1,
            vec![Placement { area: 0, vehicle: 0, alpha: 20.0, beta: 25.0 }],
        )
        .unwrap();
        let v = Verifier::new(model).unwrap();
        let x = states(&[0.0], &[5.0]);
        let up = v.solve_upper(&x, SolveMode::Exact).unwrap();
        assert_eq!(up.cost, 0.0);
        assert_eq!(up.first_entry[0], Some(up.params.vehicles[0].release));
    }

    #[test]
    fn forced_overlap_is_unsafe() {
        // both inside the shared area with no room to wait
        let v = Verifier::new(head_on(8.0, 10.0)).unwrap();
        let x = states(&[21.0, 22.0], &[9.0, 9.0]);
        let lower = v.solve_lower(&x, SolveMode::Exact).unwrap();
        let (p, _) = v.lower_problem(&x).unwrap();
        assert!((enumerate_exact(&p).unwrap().cost - lower.cost).abs() < 1e-12);
        assert!(lower.cost > 0.0);
        let verdict = v.verify(&x, SolveMode::Exact).unwrap();
        assert_eq!(verdict.classification, Classification::Unsafe);
    }

    #[test]
    fn pinned_upper_windows_conflict() {
        // both inside the intersection: entries fixed, windows overlap
        let v = Verifier::new(head_on(8.0, 10.0)).unwrap();
        let x = states(&[20.5, 19.0], &[9.0, 9.0]);
        let up = v.solve_upper(&x, SolveMode::Exact).unwrap();
        let (p, _, params) = v.upper_problem(&x).unwrap();
        assert!(params.vehicles.iter().all(|pv| pv.release == pv.due || !pv.inside));
        assert!((enumerate_exact(&p).unwrap().cost - up.cost).abs() < 1e-12);
        assert!(up.cost > 0.0);
    }

    #[test]
    fn feasibility_mode_agrees_on_zero() {
        let v = Verifier::new(head_on(1.0, 10.0)).unwrap();
        for gap in [0.0, 2.0, 6.0, 12.0] {
            let x = states(&[0.0, gap], &[5.0, 5.0]);
            let exact = v.verify(&x, SolveMode::Exact).unwrap();
            let quick = v.verify(&x, SolveMode::Feasibility).unwrap();
            assert_eq!(exact.classification, quick.classification);
        }
    }

    #[test]
    fn soft_encoding_is_no_larger() {
        let hard = Verifier::new(three_way()).unwrap();
        let soft = Verifier::new(three_way())
            .unwrap()
            .with_encoding(LowerBoundEncoding::Soft);
        let x = states(&[4.0, 0.0, 2.0], &[10.0, 8.0, 9.0]);
        let a = hard.solve_lower(&x, SolveMode::Exact).unwrap().cost;
        let b = soft.solve_lower(&x, SolveMode::Exact).unwrap().cost;
        assert!(b <= a + 1e-12 || b <= ZERO_TOL);
    }
}
