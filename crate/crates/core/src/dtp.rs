//! Minimum maximum-lateness over disjunctive temporal problems.
//!
//! A problem is a system of difference constraints `later >= earlier + c`
//! plus disjunctions, each offering two alternative bundles of such
//! constraints. For a fixed choice of bundles the constraint system is solved
//! by longest paths from a virtual source; the componentwise-least solution
//! minimizes any objective that is monotone in every variable, so absolute due
//! dates need no LP solver. Relative due dates (lateness measured against
//! another variable) break monotonicity; those are handled by parametric
//! search on the lateness level.
//!
//! Orientations are explored by depth-first branch-and-bound. All variables
//! are implicitly non-negative.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

/// Costs at or below this value count as zero lateness.
pub const ZERO_TOL: f64 = 1e-9;

/// Minimum improvement for a label update; also the slack on satisfied bundles.
const RELAX_EPS: f64 = 1e-12;

/// Largest instance [`enumerate_exact`] accepts.
pub const ENUMERATION_LIMIT: usize = 20;

pub type Var = usize;

/// `later >= earlier + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConstraint {
    pub later: Var,
    pub earlier: Var,
    pub offset: f64,
}

impl DiffConstraint {
    pub fn new(later: Var, earlier: Var, offset: f64) -> Self {
        Self {
            later,
            earlier,
            offset,
        }
    }

    /// Amount by which `times` violate the constraint, zero if satisfied.
    #[inline]
    pub fn violation(&self, times: &[f64]) -> f64 {
        (times[self.earlier] + self.offset - times[self.later]).max(0.0)
    }
}

/// `var >= value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub var: Var,
    pub value: f64,
}

/// Two alternative bundles; exactly one is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct Disjunction {
    pub first: Vec<DiffConstraint>,
    pub second: Vec<DiffConstraint>,
}

impl Disjunction {
    pub fn bundle(&self, side: Side) -> &[DiffConstraint] {
        match side {
            Side::First => &self.first,
            Side::Second => &self.second,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

/// Lateness term `max(var - due, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DueDate {
    pub var: Var,
    pub due: f64,
}

/// Lateness term `max(var - reference - slack, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeDue {
    pub var: Var,
    pub reference: Var,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisjunctiveTemporalProblem {
    pub var_count: usize,
    pub lower_bounds: Vec<LowerBound>,
    pub diff_constraints: Vec<DiffConstraint>,
    pub disjunctions: Vec<Disjunction>,
    pub due_dates: Vec<DueDate>,
    pub relative_dues: Vec<RelativeDue>,
    /// Optional variable names used by the LP export.
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DtpError {
    #[error("variable {var} out of range for {count} variables")]
    VarOutOfRange { var: Var, count: usize },
    #[error("non-finite constant {0}")]
    NonFinite(f64),
    #[error("{0} disjunctions exceed the enumeration limit of {ENUMERATION_LIMIT}")]
    TooManyDisjunctions(usize),
    #[error("expected {expected} names, got {got}")]
    NameCount { expected: usize, got: usize },
}

/// Positive cycle among the listed variables; `None` marks the virtual source.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("positive cycle through variables {vars:?}")]
pub struct InfeasibleCycle {
    pub vars: Vec<Option<Var>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtpSolution {
    /// Maximum lateness; `INFINITY` if no orientation is feasible.
    pub cost: f64,
    pub times: Vec<f64>,
    pub orientation: Vec<Side>,
    /// Search nodes evaluated.
    pub nodes: usize,
}

impl DtpSolution {
    pub fn is_zero(&self) -> bool {
        self.cost <= ZERO_TOL
    }

    fn infeasible(nodes: usize) -> Self {
        Self {
            cost: f64::INFINITY,
            times: Vec::new(),
            orientation: Vec::new(),
            nodes,
        }
    }
}

impl DisjunctiveTemporalProblem {
    pub fn new(var_count: usize) -> Self {
        Self {
            var_count,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DtpError> {
        let n = self.var_count;
        let var = |v: Var| {
            if v < n {
                Ok(())
            } else {
                Err(DtpError::VarOutOfRange { var: v, count: n })
            }
        };
        let finite = |c: f64| {
            if c.is_finite() {
                Ok(())
            } else {
                Err(DtpError::NonFinite(c))
            }
        };
        for lb in &self.lower_bounds {
            var(lb.var)?;
            finite(lb.value)?;
        }
        let all_diffs = self
            .diff_constraints
            .iter()
            .chain(self.disjunctions.iter().flat_map(|d| d.first.iter().chain(&d.second)));
        for c in all_diffs {
            var(c.later)?;
            var(c.earlier)?;
            finite(c.offset)?;
        }
        for d in &self.due_dates {
            var(d.var)?;
            finite(d.due)?;
        }
        for r in &self.relative_dues {
            var(r.var)?;
            var(r.reference)?;
            finite(r.slack)?;
        }
        if !self.names.is_empty() && self.names.len() != n {
            return Err(DtpError::NameCount {
                expected: n,
                got: self.names.len(),
            });
        }
        Ok(())
    }

    /// Maximum lateness of `times` over every due-date term.
    pub fn lateness(&self, times: &[f64]) -> f64 {
        let absolute = self
            .due_dates
            .iter()
            .map(|d| times[d.var] - d.due);
        let relative = self
            .relative_dues
            .iter()
            .map(|r| times[r.var] - times[r.reference] - r.slack);
        absolute.chain(relative).fold(0.0, f64::max)
    }

    /// Whether `times` satisfy the fixed constraints and the chosen bundles.
    pub fn satisfies(&self, times: &[f64], orientation: &[Side], tol: f64) -> bool {
        times.iter().all(|&t| t >= -tol)
            && self.lower_bounds.iter().all(|lb| times[lb.var] >= lb.value - tol)
            && self
                .diff_constraints
                .iter()
                .chain(
                    self.disjunctions
                        .iter()
                        .zip(orientation)
                        .flat_map(|(d, &s)| d.bundle(s)),
                )
                .all(|c| c.violation(times) <= tol)
    }
}

/// Weighted edge `from -> to` of weight `w0 - lambda_coeff * lambda`.
#[derive(Debug, Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    w0: f64,
    lambda_coeff: f64,
}

enum Paths {
    Times(Vec<f64>),
    /// Edge indices of a positive cycle.
    Cycle(Vec<usize>),
}

/// Label-correcting longest paths from the source node `n_vars`. `init`
/// must be a lower bound on the least solution.
fn longest_paths(n_vars: usize, edges: &[Edge], lambda: f64, init: Option<&[f64]>) -> Paths {
    let n = n_vars + 1;
    let src = n_vars;
    let mut start = vec![0usize; n + 1];
    for e in edges {
        start[e.from + 1] += 1;
    }
    for k in 0..n {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; edges.len()];
    for (idx, e) in edges.iter().enumerate() {
        order[fill[e.from]] = idx;
        fill[e.from] += 1;
    }

    let mut dist = vec![0.0; n];
    if let Some(init) = init {
        dist[..n_vars].copy_from_slice(init);
    }
    let mut pred = vec![usize::MAX; n];
    let mut count = vec![0usize; n];
    let mut queued = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).collect();
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        for &idx in &order[start[u]..start[u + 1]] {
            let e = &edges[idx];
            let cand = dist[u] + e.w0 - e.lambda_coeff * lambda;
            if cand > dist[e.to] + RELAX_EPS {
                dist[e.to] = cand;
                pred[e.to] = idx;
                count[e.to] += 1;
                if e.to == src || count[e.to].is_multiple_of(n) {
                    if let Some(cycle) = pred_cycle(&pred, edges) {
                        return Paths::Cycle(cycle);
                    }
                }
                if !queued[e.to] {
                    queued[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
    }
    dist.truncate(n_vars);
    Paths::Times(dist)
}

/// A cycle in the predecessor graph, as edge indices.
fn pred_cycle(pred: &[usize], edges: &[Edge]) -> Option<Vec<usize>> {
    const DONE: usize = usize::MAX;
    let n = pred.len();
    let mut mark = vec![0usize; n];
    let mut path = Vec::new();
    for start in 0..n {
        if mark[start] != 0 {
            continue;
        }
        path.clear();
        let stamp = start + 1;
        let mut v = start;
        while mark[v] == 0 {
            mark[v] = stamp;
            path.push(v);
            if pred[v] == usize::MAX {
                break;
            }
            v = edges[pred[v]].from;
        }
        if mark[v] == stamp && pred[v] != usize::MAX {
            let mut cycle = Vec::new();
            let mut x = v;
            loop {
                let e = pred[x];
                cycle.push(e);
                x = edges[e].from;
                if x == v {
                    break;
                }
            }
            return Some(cycle);
        }
        for &p in &path {
            mark[p] = DONE;
        }
    }
    None
}

/// Public entry point for plain difference systems.
pub fn earliest_times(
    var_count: usize,
    lower_bounds: &[LowerBound],
    diff_constraints: &[DiffConstraint],
) -> Result<Vec<f64>, InfeasibleCycle> {
    let mut edges = source_edges(var_count, lower_bounds);
    edges.extend(diff_constraints.iter().map(diff_edge));
    match longest_paths(var_count, &edges, 0.0, None) {
        Paths::Times(t) => Ok(t),
        Paths::Cycle(cycle) => Err(InfeasibleCycle {
            vars: cycle
                .iter()
                .rev()
                .map(|&e| edges[e].to)
                .map(|v| (v < var_count).then_some(v))
                .collect(),
        }),
    }
}

fn diff_edge(c: &DiffConstraint) -> Edge {
    Edge {
        from: c.earlier,
        to: c.later,
        w0: c.offset,
        lambda_coeff: 0.0,
    }
}

/// Non-negativity and lower bounds as edges out of the source.
fn source_edges(var_count: usize, lower_bounds: &[LowerBound]) -> Vec<Edge> {
    let src = var_count;
    (0..var_count)
        .map(|v| Edge {
            from: src,
            to: v,
            w0: 0.0,
            lambda_coeff: 0.0,
        })
        .chain(lower_bounds.iter().map(|lb| Edge {
            from: src,
            to: lb.var,
            w0: lb.value,
            lambda_coeff: 0.0,
        }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeMode {
    /// Least solution, lateness evaluated afterwards. Only valid without
    /// relative due dates.
    Least,
    /// Minimal lateness level by parametric cycle-ratio search.
    Parametric,
    /// Due dates enforced as hard constraints at level [`ZERO_TOL`].
    Feasibility,
}

struct Evaluator<'a> {
    problem: &'a DisjunctiveTemporalProblem,
    /// Fixed constraints without due-date edges.
    base: Vec<Edge>,
    /// Due-date edges carrying the lateness level.
    dues: Vec<Edge>,
    bundles: Vec<[Vec<Edge>; 2]>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a DisjunctiveTemporalProblem) -> Self {
        let n = problem.var_count;
        let mut base = source_edges(n, &problem.lower_bounds);
        base.extend(problem.diff_constraints.iter().map(diff_edge));
        let dues = problem
            .due_dates
            .iter()
            .map(|d| Edge {
                from: d.var,
                to: n,
                w0: -d.due,
                lambda_coeff: 1.0,
            })
            .chain(problem.relative_dues.iter().map(|r| Edge {
                from: r.var,
                to: r.reference,
                w0: -r.slack,
                lambda_coeff: 1.0,
            }))
            .collect();
        let bundles = problem
            .disjunctions
            .iter()
            .map(|d| {
                [
                    d.first.iter().map(diff_edge).collect(),
                    d.second.iter().map(diff_edge).collect(),
                ]
            })
            .collect();
        Self {
            problem,
            base,
            dues,
            bundles,
        }
    }

    fn edges(&self, chosen: &[Option<Side>], with_dues: bool) -> Vec<Edge> {
        let mut edges = self.base.clone();
        if with_dues {
            edges.extend_from_slice(&self.dues);
        }
        for (b, side) in self.bundles.iter().zip(chosen) {
            match side {
                Some(Side::First) => edges.extend_from_slice(&b[0]),
                Some(Side::Second) => edges.extend_from_slice(&b[1]),
                None => {}
            }
        }
        edges
    }

    /// Latest times consistent with the chosen bundles and due dates at
    /// level `lambda`; infinite where unbounded. Assumes no positive cycle.
    fn latest_times(&self, chosen: &[Option<Side>], lambda: f64) -> Vec<f64> {
        let n = self.problem.var_count;
        let edges = self.edges(chosen, true);
        let mut latest = vec![f64::INFINITY; n + 1];
        latest[n] = 0.0;
        for _ in 0..=n {
            let mut changed = false;
            for e in &edges {
                let cand = latest[e.to] - (e.w0 - e.lambda_coeff * lambda);
                if cand < latest[e.from] - RELAX_EPS {
                    latest[e.from] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        latest.truncate(n);
        latest
    }

    /// Cost and times of the relaxation keeping only the chosen bundles.
    fn evaluate(
        &self,
        mode: NodeMode,
        chosen: &[Option<Side>],
        warm: Option<&[f64]>,
    ) -> Option<(f64, Vec<f64>)> {
        let n = self.problem.var_count;
        match mode {
            NodeMode::Least => match longest_paths(n, &self.edges(chosen, false), 0.0, warm) {
                Paths::Times(t) => Some((self.problem.lateness(&t), t)),
                Paths::Cycle(_) => None,
            },
            NodeMode::Feasibility => {
                match longest_paths(n, &self.edges(chosen, true), ZERO_TOL, None) {
                    Paths::Times(t) => Some((self.problem.lateness(&t), t)),
                    Paths::Cycle(_) => None,
                }
            }
            NodeMode::Parametric => {
                let edges = self.edges(chosen, true);
                let mut lambda = 0.0;
                loop {
                    match longest_paths(n, &edges, lambda, None) {
                        Paths::Times(t) => return Some((self.problem.lateness(&t), t)),
                        Paths::Cycle(cycle) => {
                            let w0: f64 = cycle.iter().map(|&e| edges[e].w0).sum();
                            let k: f64 = cycle.iter().map(|&e| edges[e].lambda_coeff).sum();
                            if k == 0.0 {
                                return None;
                            }
                            let next = w0 / k;
                            if !(next > lambda) {
                                // numerically stalled; step past the cycle
                                lambda = lambda + RELAX_EPS.max(lambda.abs() * 1e-15);
                            } else {
                                lambda = next;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn objective_mode(problem: &DisjunctiveTemporalProblem) -> NodeMode {
    if problem.relative_dues.is_empty() {
        NodeMode::Least
    } else {
        NodeMode::Parametric
    }
}

fn bundle_violation(bundle: &[DiffConstraint], times: &[f64]) -> f64 {
    bundle.iter().map(|c| c.violation(times)).fold(0.0, f64::max)
}

struct Search<'a> {
    ev: Evaluator<'a>,
    mode: NodeMode,
    chosen: Vec<Option<Side>>,
    best: Option<DtpSolution>,
    nodes: usize,
    /// Stop at the first leaf (feasibility search).
    first_leaf: bool,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.best
            .as_ref()
            .is_some_and(|b| self.first_leaf || b.cost <= ZERO_TOL)
    }

    fn dfs(&mut self, warm: Option<&[f64]>) {
        self.nodes += 1;
        let warm = if self.mode == NodeMode::Least { warm } else { None };
        let mut forced = Vec::new();
        if let Some((cost, times)) = self.node(warm, &mut forced) {
            self.expand(cost, times);
        }
        for k in forced {
            self.chosen[k] = None;
        }
    }

    /// Relaxation at the current node. In feasibility mode, sides that
    /// cannot fit between earliest and latest times are ruled out and the
    /// remaining side is fixed, recording it in `forced`.
    fn node(&mut self, warm: Option<&[f64]>, forced: &mut Vec<usize>) -> Option<(f64, Vec<f64>)> {
        let mut eval = self.ev.evaluate(self.mode, &self.chosen, warm)?;
        if self.mode != NodeMode::Feasibility {
            return Some(eval);
        }
        loop {
            let latest = self.ev.latest_times(&self.chosen, ZERO_TOL);
            let earliest = &eval.1;
            let fits = |bundle: &[DiffConstraint]| {
                bundle
                    .iter()
                    .all(|c| earliest[c.earlier] + c.offset <= latest[c.later] + ZERO_TOL)
            };
            let mut changed = false;
            for (k, d) in self.ev.problem.disjunctions.iter().enumerate() {
                if self.chosen[k].is_some() {
                    continue;
                }
                let side = match (fits(&d.first), fits(&d.second)) {
                    (false, false) => return None,
                    (true, false) => Side::First,
                    (false, true) => Side::Second,
                    (true, true) => continue,
                };
                self.chosen[k] = Some(side);
                forced.push(k);
                changed = true;
            }
            if !changed {
                return Some(eval);
            }
            eval = self.ev.evaluate(self.mode, &self.chosen, None)?;
        }
    }

    fn expand(&mut self, cost: f64, times: Vec<f64>) {
        if let Some(best) = &self.best {
            if cost >= best.cost - RELAX_EPS {
                return;
            }
        }
        let disjunctions = &self.ev.problem.disjunctions;
        let mut pick: Option<(usize, f64, f64, f64)> = None;
        for (k, d) in disjunctions.iter().enumerate() {
            if self.chosen[k].is_some() {
                continue;
            }
            let vf = bundle_violation(&d.first, &times);
            let vs = bundle_violation(&d.second, &times);
            if vf > RELAX_EPS && vs > RELAX_EPS {
                let overlap = vf.min(vs);
                if pick.is_none_or(|(_, o, _, _)| overlap > o) {
                    pick = Some((k, overlap, vf, vs));
                }
            }
        }
        match pick {
            None => {
                let orientation = disjunctions
                    .iter()
                    .zip(&self.chosen)
                    .map(|(d, c)| {
                        c.unwrap_or_else(|| {
                            if bundle_violation(&d.first, &times) <= RELAX_EPS {
                                Side::First
                            } else {
                                Side::Second
                            }
                        })
                    })
                    .collect();
                self.best = Some(DtpSolution {
                    cost,
                    times,
                    orientation,
                    nodes: 0,
                });
            }
            Some((k, _, vf, vs)) => {
                let order = if vf <= vs {
                    [Side::First, Side::Second]
                } else {
                    [Side::Second, Side::First]
                };
                for side in order {
                    self.chosen[k] = Some(side);
                    self.dfs(Some(&times));
                    self.chosen[k] = None;
                    if self.done() {
                        return;
                    }
                }
            }
        }
    }
}

fn search(problem: &DisjunctiveTemporalProblem, mode: NodeMode, first_leaf: bool) -> Option<DtpSolution> {
    let mut s = Search {
        ev: Evaluator::new(problem),
        mode,
        chosen: vec![None; problem.disjunctions.len()],
        best: None,
        nodes: 0,
        first_leaf,
    };
    s.dfs(None);
    let nodes = s.nodes;
    s.best.map(|mut b| {
        b.nodes = nodes;
        b
    })
}

/// Exact minimum of the maximum lateness over all orientations.
pub fn min_max_lateness(problem: &DisjunctiveTemporalProblem) -> Result<DtpSolution, DtpError> {
    problem.validate()?;
    let mode = objective_mode(problem);
    Ok(search(problem, mode, false).unwrap_or_else(|| DtpSolution::infeasible(0)))
}

/// Some orientation with zero lateness, or `None` if none exists.
pub fn feasible_zero_lateness(
    problem: &DisjunctiveTemporalProblem,
) -> Result<Option<DtpSolution>, DtpError> {
    problem.validate()?;
    Ok(search(problem, NodeMode::Feasibility, true))
}

/// Exhaustive enumeration of every orientation. Ties keep the orientation
/// with the most `First` choices at the lowest indices.
pub fn enumerate_exact(problem: &DisjunctiveTemporalProblem) -> Result<DtpSolution, DtpError> {
    problem.validate()?;
    let m = problem.disjunctions.len();
    if m > ENUMERATION_LIMIT {
        return Err(DtpError::TooManyDisjunctions(m));
    }
    let ev = Evaluator::new(problem);
    let mode = objective_mode(problem);
    let mut best = DtpSolution::infeasible(0);
    for mask in 0u32..(1u32 << m) {
        let orientation: Vec<Side> = (0..m)
            .map(|k| if mask >> k & 1 == 0 { Side::First } else { Side::Second })
            .collect();
        let chosen: Vec<Option<Side>> = orientation.iter().copied().map(Some).collect();
        if let Some((cost, times)) = ev.evaluate(mode, &chosen, None) {
            if cost < best.cost {
                best = DtpSolution {
                    cost,
                    times,
                    orientation,
                    nodes: 0,
                };
            }
        }
        best.nodes += 1;
    }
    Ok(best)
}

/// Big-M constant of the LP export.
pub fn big_m(problem: &DisjunctiveTemporalProblem) -> f64 {
    let constants = problem
        .lower_bounds
        .iter()
        .map(|lb| lb.value.abs())
        .chain(
            problem
                .diff_constraints
                .iter()
                .chain(problem.disjunctions.iter().flat_map(|d| d.first.iter().chain(&d.second)))
                .map(|c| c.offset.abs()),
        )
        .chain(problem.due_dates.iter().map(|d| d.due.abs()))
        .chain(problem.relative_dues.iter().map(|r| r.slack.abs()))
        .sum::<f64>();
    let max_due = problem
        .due_dates
        .iter()
        .map(|d| d.due)
        .fold(0.0, f64::max);
    constants + max_due + 1.0
}

/// CPLEX LP text with explicit big-M disjunctions. Binary `k<n>` = 1 selects
/// the first bundle of disjunction `n`; the objective variable `s` is the
/// maximum lateness.
pub fn to_lp(problem: &DisjunctiveTemporalProblem) -> Result<String, DtpError> {
    problem.validate()?;
    let name = |v: Var| -> String {
        match problem.names.get(v) {
            Some(s) => s.clone(),
            None => format!("t{v}"),
        }
    };
    let m = big_m(problem);
    let mut out = String::new();
    out.push_str("\\ disjunctive temporal problem, maximum lateness\n");
    let _ = writeln!(out, "\\ big-M = {m}");
    out.push_str("Minimize\n obj: s\nSubject To\n");
    for (k, lb) in problem.lower_bounds.iter().enumerate() {
        let _ = writeln!(out, " lb{k}: {} >= {}", name(lb.var), lb.value);
    }
    for (k, c) in problem.diff_constraints.iter().enumerate() {
        let _ = writeln!(out, " c{k}: {} - {} >= {}", name(c.later), name(c.earlier), c.offset);
    }
    for (k, d) in problem.disjunctions.iter().enumerate() {
        for (q, c) in d.first.iter().enumerate() {
            let _ = writeln!(
                out,
                " d{k}a{q}: {} - {} - {m} k{k} >= {}",
                name(c.later),
                name(c.earlier),
                c.offset - m
            );
        }
        for (q, c) in d.second.iter().enumerate() {
            let _ = writeln!(
                out,
                " d{k}b{q}: {} - {} + {m} k{k} >= {}",
                name(c.later),
                name(c.earlier),
                c.offset
            );
        }
    }
    for (k, d) in problem.due_dates.iter().enumerate() {
        let _ = writeln!(out, " due{k}: {} - s <= {}", name(d.var), d.due);
    }
    for (k, r) in problem.relative_dues.iter().enumerate() {
        let _ = writeln!(
            out,
            " rel{k}: {} - {} - s <= {}",
            name(r.var),
            name(r.reference),
            r.slack
        );
    }
    out.push_str("Bounds\n s >= 0\n");
    for v in 0..problem.var_count {
        let _ = writeln!(out, " {} >= 0", name(v));
    }
    if !problem.disjunctions.is_empty() {
        out.push_str("Binary\n");
        for k in 0..problem.disjunctions.len() {
            let _ = writeln!(out, " k{k}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}
