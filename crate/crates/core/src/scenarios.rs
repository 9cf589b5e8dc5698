//! Built-in scenarios.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{VehicleSpec, VehicleState};
use crate::intersection::{IntersectionModel, Placement};
use crate::simharness::{DesiredProfile, Scenario};

pub const ACCEL_GAIN: f64 = 1.0;
pub const DRAG_COEFF: f64 = 0.005;
pub const U_MIN: f64 = -2.0;
pub const U_MAX: f64 = 2.0;
pub const TAU: f64 = 0.1;

/// Start of the first conflict area on every route (m).
pub const FIRST_AREA: f64 = 20.0;
pub const AREA_LENGTH: f64 = 5.0;
/// Distance between the starts of consecutive areas on a route (m).
pub const AREA_SPACING: f64 = 6.0;

/// Seed of the default 20-vehicle topology.
pub const TWENTY_VEHICLE_SEED: u64 = 7;

/// Initial positions of the 20-vehicle scenario (m).
pub const TWENTY_VEHICLE_POSITIONS: [f64; 20] = [
    0.0, -2.0, 5.0, -5.0, 0.0, 5.0, 0.0, 1.0, 5.0, 4.0, 0.0, -2.0, 5.0, 5.0, 0.0, 5.0, -2.0, 0.0, -2.0,
    0.0,
];

fn spec(id: usize, v_min: f64, v_max: f64) -> VehicleSpec {
    VehicleSpec::new(id, ACCEL_GAIN, DRAG_COEFF, U_MIN, U_MAX, v_min, v_max).expect("valid spec")
}

fn slot(area: usize, vehicle: usize, k: usize) -> Placement {
    let alpha = FIRST_AREA + AREA_SPACING * k as f64;
    Placement {
        area,
        vehicle,
        alpha,
        beta: alpha + AREA_LENGTH,
    }
}

/// Three vehicles, three areas, each vehicle crossing two of them. The
/// first two drivers brake while the third accelerates, which leads to a
/// collision without supervision.
pub fn three_vehicle() -> Scenario {
    let model = IntersectionModel::new(
        (0..3).map(|j| spec(j, 8.0, 10.0)).collect(),
        3,
        vec![
            slot(0, 0, 0),
            slot(2, 0, 1),
            slot(1, 1, 0),
            slot(0, 1, 1),
            slot(2, 2, 0),
            slot(1, 2, 1),
        ],
    )
    .expect("valid model");
    Scenario::new(
        model,
        vec![
            VehicleState::new(0.0, 10.0),
            VehicleState::new(0.0, 8.0),
            VehicleState::new(0.0, 8.0),
        ],
        TAU,
        60,
        vec![
            DesiredProfile::Constant(-2.0),
            DesiredProfile::Constant(-2.0),
            DesiredProfile::Constant(2.0),
        ],
    )
    .expect("valid scenario")
}

/// One vehicle crossing one area.
pub fn single_vehicle() -> Scenario {
    let model = IntersectionModel::new(vec![spec(0, 1.0, 10.0)], 1, vec![slot(0, 0, 0)])
        .expect("valid model");
    Scenario::new(
        model,
        vec![VehicleState::new(0.0, 5.0)],
        TAU,
        60,
        vec![DesiredProfile::Constant(U_MAX)],
    )
    .expect("valid scenario")
}

/// Two vehicles already inside the same area.
pub fn forced_overlap() -> Scenario {
    let model = IntersectionModel::new(
        vec![spec(0, 8.0, 10.0), spec(1, 8.0, 10.0)],
        1,
        vec![slot(0, 0, 0), slot(0, 1, 0)],
    )
    .expect("valid model");
    Scenario::new(
        model,
        vec![VehicleState::new(21.0, 9.0), VehicleState::new(22.0, 9.0)],
        TAU,
        10,
        vec![DesiredProfile::Constant(0.0); 2],
    )
    .expect("valid scenario")
}

/// Area memberships of the 20-vehicle topology: 48 areas, 24 of them shared
/// by three vehicles and 24 by two, six areas per vehicle, and no two
/// vehicles sharing more than one area.
fn twenty_vehicle_areas(rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    const VEHICLES: usize = 20;
    const PER_VEHICLE: usize = 6;
    let sizes: Vec<usize> = (0..48).map(|a| if a < 24 { 3 } else { 2 }).collect();
    'attempt: loop {
        let mut routes: Vec<Vec<usize>> = vec![Vec::new(); VEHICLES];
        let mut met = vec![[false; VEHICLES]; VEHICLES];
        let mut order: Vec<usize> = (0..sizes.len()).collect();
        order.shuffle(rng);
        // larger areas first, they are harder to place
        order.sort_by_key(|&a| std::cmp::Reverse(sizes[a]));
        for a in order {
            let mut members: Vec<usize> = Vec::new();
            let mut candidates: Vec<usize> = (0..VEHICLES).collect();
            candidates.shuffle(rng);
            candidates.sort_by_key(|&j| routes[j].len());
            for j in candidates {
                if members.len() == sizes[a] {
                    break;
                }
                if routes[j].len() < PER_VEHICLE && members.iter().all(|&m| !met[m][j]) {
                    members.push(j);
                }
            }
            if members.len() < sizes[a] {
                continue 'attempt;
            }
            for &m in &members {
                routes[m].push(a);
                for &o in &members {
                    met[m][o] = true;
                }
            }
        }
        for r in routes.iter_mut() {
            r.shuffle(rng);
        }
        return routes;
    }
}

/// Twenty vehicles on a representative 48-area, 120-operation topology
/// drawn from `seed`. All drivers request full throttle.
pub fn twenty_vehicle_with_seed(seed: u64, steps: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let routes = twenty_vehicle_areas(&mut rng);
    let placements = routes
        .iter()
        .enumerate()
        .flat_map(|(j, r)| r.iter().enumerate().map(move |(k, &a)| slot(a, j, k)))
        .collect();
    let model = IntersectionModel::new((0..20).map(|j| spec(j, 1.0, 10.0)).collect(), 48, placements)
        .expect("valid model");
    Scenario::new(
        model,
        TWENTY_VEHICLE_POSITIONS
            .iter()
            .map(|&x| VehicleState::new(x, 5.0))
            .collect(),
        TAU,
        steps,
        vec![DesiredProfile::Constant(U_MAX); 20],
    )
    .expect("valid scenario")
}

pub fn twenty_vehicle() -> Scenario {
    twenty_vehicle_with_seed(TWENTY_VEHICLE_SEED, 200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::{Classification, SolveMode, Verifier};

    #[test]
    fn twenty_vehicle_topology() {
        let s = twenty_vehicle();
        let m = &s.model;
        assert_eq!((m.vehicle_count(), m.area_count(), m.op_count()), (20, 48, 120));
        let mut per_area = [0; 48];
        for p in m.placements() {
            per_area[p.area] += 1;
        }
        assert_eq!(per_area.iter().filter(|&&c| c == 3).count(), 24);
        assert_eq!(per_area.iter().filter(|&&c| c == 2).count(), 24);
        for j in 0..20 {
            assert_eq!(m.route(j).len(), 6);
            for k in 0..j {
                let shared = m
                    .route(j)
                    .iter()
                    .filter(|p| m.route(k).iter().any(|q| q.area == p.area))
                    .count();
                assert!(shared <= 1, "vehicles {k} and {j} share {shared} areas");
            }
        }
    }

    #[test]
    fn topology_is_seed_deterministic() {
        assert_eq!(twenty_vehicle_with_seed(3, 1), twenty_vehicle_with_seed(3, 1));
        assert_ne!(twenty_vehicle_with_seed(3, 1).model, twenty_vehicle_with_seed(4, 1).model);
    }

    #[test]
    fn starting_states_are_verified_safe() {
        for s in [three_vehicle(), twenty_vehicle(), single_vehicle()] {
            let v = Verifier::new(s.model.clone()).unwrap();
            assert!(v.solve_upper(&s.initial, SolveMode::Feasibility).unwrap().is_zero());
        }
        let s = three_vehicle();
        let v = Verifier::new(s.model.clone()).unwrap();
        assert_eq!(v.verify(&s.initial, SolveMode::Exact).unwrap().classification, Classification::Safe);
        let s = forced_overlap();
        let v = Verifier::new(s.model.clone()).unwrap();
        assert_eq!(v.verify(&s.initial, SolveMode::Exact).unwrap().classification, Classification::Unsafe);
    }
}
