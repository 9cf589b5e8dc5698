//! Brute-force search for a collision-free joint input signal.
//!
//! Each vehicle chooses a piecewise-constant signal over an evenly spaced set
//! of input levels, switching only on a fixed time grid. A joint choice is
//! accepted if no two vehicles are ever strictly inside the same conflict
//! area together. Finding a signal proves existence; exhausting the
//! candidates proves nothing, since the grid is coarse.
//!
//! Occupancy is checked on exact crossing times rather than on samples, so a
//! brief overlap between samples cannot slip through.

use thiserror::Error;

use crate::dynamics::{signal_crossing_times, DynamicsError, PiecewiseConstantInput, VehicleState};
use crate::intersection::{BadSetVariant, IntersectionModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle limited to {max_vehicles} vehicles and {max_ops} operations, got {vehicles} and {ops}")]
    TooLarge {
        vehicles: usize,
        ops: usize,
        max_vehicles: usize,
        max_ops: usize,
    },
    #[error("need at least 2 input levels and a positive switch grid")]
    BadConfig,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub const MAX_VEHICLES: usize = 3;
pub const MAX_OPS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Latest switch time; defaults to the time every vehicle needs to clear
    /// its route at minimum speed.
    pub horizon: Option<f64>,
    pub input_levels: usize,
    pub switch_grid: f64,
    /// Maximum number of input changes per vehicle.
    pub max_switches: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            horizon: None,
            input_levels: 3,
            switch_grid: 0.25,
            max_switches: 1,
        }
    }
}

/// One candidate signal and the time window of each operation's occupancy.
struct Candidate {
    signal: PiecewiseConstantInput,
    /// Per route placement, open occupancy window `(enter, exit)`; `None`
    /// if the vehicle is never strictly inside.
    windows: Vec<Option<(f64, f64)>>,
}

fn levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            if k + 1 == count {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Level sequences with switch times, up to `max_switches` changes.
fn signals(levels: &[f64], grid: &[f64], max_switches: usize) -> Vec<PiecewiseConstantInput> {
    fn extend(
        out: &mut Vec<PiecewiseConstantInput>,
        levels: &[f64],
        grid: &[f64],
        left: usize,
        bps: &mut Vec<f64>,
        vals: &mut Vec<f64>,
    ) {
        out.push(PiecewiseConstantInput::new(bps.clone(), vals.clone()).expect("valid signal"));
        if left == 0 {
            return;
        }
        let last_bp = *bps.last().expect("non-empty");
        let last_val = *vals.last().expect("non-empty");
        for &t in grid.iter().filter(|&&t| t > last_bp) {
            for &u in levels.iter().filter(|&&u| u != last_val) {
                bps.push(t);
                vals.push(u);
                extend(out, levels, grid, left - 1, bps, vals);
                bps.pop();
                vals.pop();
            }
        }
    }
    let mut out = Vec::new();
    for &u in levels {
        extend(&mut out, levels, grid, max_switches, &mut vec![0.0], &mut vec![u]);
    }
    out
}

fn overlaps(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a.0.max(b.0) < a.1.min(b.1),
        _ => false,
    }
}

/// Search for per-vehicle signals keeping the joint trajectory out of the
/// given bad set. Returns one signal per vehicle on success.
pub fn oracle_search(
    model: &IntersectionModel,
    states: &[VehicleState],
    variant: &BadSetVariant,
    config: &OracleConfig,
) -> Result<Option<Vec<PiecewiseConstantInput>>, OracleError> {
    let n = model.vehicle_count();
    if n > MAX_VEHICLES || model.op_count() > MAX_OPS {
        return Err(OracleError::TooLarge {
            vehicles: n,
            ops: model.op_count(),
            max_vehicles: MAX_VEHICLES,
            max_ops: MAX_OPS,
        });
    }
    if config.input_levels < 2 || !(config.switch_grid > 0.0) {
        return Err(OracleError::BadConfig);
    }
    let horizon = match config.horizon {
        Some(h) => h,
        None => (0..n)
            .filter_map(|j| {
                model
                    .route_end(j)
                    .map(|end| (end - states[j].pos).max(0.0) / model.vehicle(j).v_min)
            })
            .fold(0.0, f64::max),
    };
    let grid: Vec<f64> = (1..)
        .map(|k| k as f64 * config.switch_grid)
        .take_while(|&t| t < horizon)
        .collect();

    let mut candidates: Vec<Vec<Candidate>> = Vec::with_capacity(n);
    for j in 0..n {
        let spec = model.vehicle(j);
        let route = model.route(j);
        let intervals: Vec<_> = route
            .iter()
            .map(|p| variant.interval(p.op()).filter(|iv| !iv.is_empty()))
            .collect();
        let mut targets: Vec<f64> = intervals
            .iter()
            .flatten()
            .flat_map(|iv| [iv.lo, iv.hi])
            .collect();
        targets.sort_by(f64::total_cmp);
        let finish = targets.last().copied();

        let mut list = Vec::new();
        for signal in signals(&levels(spec.u_min, spec.u_max, config.input_levels), &grid, config.max_switches) {
            let Some(finish) = finish else {
                list.push(Candidate { signal, windows: vec![None; route.len()] });
                break;
            };
            // switches after the route is cleared change nothing
            if let Some(&last) = signal.breakpoints().get(1..).and_then(|b| b.last()) {
                let prefix = signal.restrict(last);
                if signal_crossing_times(states[j], spec, &prefix, &[finish])?[0] <= last {
                    continue;
                }
            }
            let times = signal_crossing_times(states[j], spec, &signal, &targets)?;
            let at = |x: f64| times[targets.partition_point(|&t| t < x)];
            let windows = intervals
                .iter()
                .map(|iv| {
                    iv.and_then(|iv| {
                        if states[j].pos >= iv.hi {
                            None
                        } else {
                            Some((at(iv.lo), at(iv.hi)))
                        }
                    })
                })
                .collect();
            list.push(Candidate { signal, windows });
        }
        candidates.push(list);
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    if pick(model, &candidates, &mut chosen) {
        Ok(Some(
            chosen
                .iter()
                .enumerate()
                .map(|(j, &c)| candidates[j][c].signal.clone())
                .collect(),
        ))
    } else {
        Ok(None)
    }
}

fn pick(model: &IntersectionModel, candidates: &[Vec<Candidate>], chosen: &mut Vec<usize>) -> bool {
    let j = chosen.len();
    if j == candidates.len() {
        return true;
    }
    'next: for (c, cand) in candidates[j].iter().enumerate() {
        for (k, &ck) in chosen.iter().enumerate() {
            let other = &candidates[k][ck];
            for (pj, wj) in model.route(j).iter().zip(&cand.windows) {
                for (pk, wk) in model.route(k).iter().zip(&other.windows) {
                    if pj.area == pk.area && overlaps(*wj, *wk) {
                        continue 'next;
                    }
                }
            }
        }
        chosen.push(c);
        if pick(model, candidates, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{advance, VehicleSpec};
    use crate::intersection::{build_operation_graph, in_bad_set, Placement};
    use crate::schedparams::BadSets;
    use crate::verifier::{SolveMode, Verifier};

    fn head_on(v_min: f64, v_max: f64) -> IntersectionModel {
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
    fn level_grid() {
        assert_eq!(levels(-2.0, 2.0, 3), vec![-2.0, 0.0, 2.0]);
        assert_eq!(levels(-1.0, 1.0, 2), vec![-1.0, 1.0]);
        let s = signals(&[0.0, 1.0], &[0.5, 1.0], 1);
        // 2 constants + 2 * 1 * 2 single-switch signals
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn single_vehicle_always_succeeds() {
        let spec = VehicleSpec::new(0, 1.0, 0.005, -2.0, 2.0, 1.0, 10.0).unwrap();
        let model = IntersectionModel::new(
            vec![spec],
            1,
            vec![Placement { area: 0, vehicle: 0, alpha: 20.0, beta: 25.0 }],
        )
        .unwrap();
        let found = oracle_search(
            &model,
            &[VehicleState::new(0.0, 5.0)],
            &model.nominal_variant(),
            &OracleConfig::default(),
        )
        .unwrap();
        assert!(found.is_some());
    }

    #[test]
    fn symmetric_pair_found_and_checked_by_sampling() {
        let model = head_on(1.0, 10.0);
        let x = [VehicleState::new(0.0, 5.0), VehicleState::new(0.0, 5.0)];
        let found = oracle_search(&model, &x, &model.nominal_variant(), &OracleConfig::default())
            .unwrap()
            .expect("generous windows admit a schedule");
        let graph = build_operation_graph(&model, &[0.0, 0.0]).unwrap();
        let nominal = model.nominal_variant();
        for k in 1..=20_000 {
            let t = k as f64 * 1e-3;
            let pos: Vec<f64> = (0..2)
                .map(|j| advance(x[j], model.vehicle(j), &found[j], t).unwrap().pos)
                .collect();
            assert!(!in_bad_set(&graph, &nominal, &pos), "t = {t}");
        }
        let v = Verifier::new(model).unwrap();
        assert_eq!(v.solve_lower(&x, SolveMode::Exact).unwrap().cost, 0.0);
    }

    #[test]
    fn forced_overlap_has_no_inflated_escape() {
        let model = head_on(8.0, 10.0);
        let x = [VehicleState::new(21.0, 9.0), VehicleState::new(22.0, 9.0)];
        let sets = BadSets::new(&model).unwrap();
        let found = oracle_search(&model, &x, &sets.inflated, &OracleConfig::default()).unwrap();
        assert!(found.is_none());
        let v = Verifier::new(model).unwrap();
        assert!(v.solve_upper(&x, SolveMode::Exact).unwrap().cost > 0.0);
    }

    #[test]
    fn rejects_large_models() {
        let spec = |id| VehicleSpec::new(id, 1.0, 0.0, -1.0, 1.0, 1.0, 2.0).unwrap();
        let model = IntersectionModel::new(
            (0..4).map(spec).collect(),
            1,
            (0..4)
                .map(|j| Placement { area: 0, vehicle: j, alpha: 1.0, beta: 2.0 })
                .collect(),
        )
        .unwrap();
        let x = vec![VehicleState::new(0.0, 1.0); 4];
        assert!(matches!(
            oracle_search(&model, &x, &model.nominal_variant(), &OracleConfig::default()),
            Err(OracleError::TooLarge { .. })
        ));
    }
}
