use std::path::{Path, PathBuf};

use sentinel::scenarios::{forced_overlap, single_vehicle, three_vehicle, twenty_vehicle};
use sentinel::simharness::{load_scenario, save_scenario, Scenario, ScenarioError};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn fixtures_match_builders() {
    for (name, built) in [
        ("three_vehicle.json", three_vehicle()),
        ("twenty_vehicle.json", twenty_vehicle()),
        ("single_vehicle.json", single_vehicle()),
        ("forced_overlap.json", forced_overlap()),
    ] {
        assert_eq!(load_scenario(fixture(name)).unwrap(), built, "{name}");
    }
}

#[test]
fn three_vehicle_geometry() {
    let s = load_scenario(fixture("three_vehicle.json")).unwrap();
    assert_eq!(s.model.vehicle_count(), 3);
    assert_eq!(s.model.area_count(), 3);
    assert_eq!(s.model.op_count(), 6);
    assert_eq!(s.desired_at(0), vec![-2.0, -2.0, 2.0]);
}

#[test]
fn files_round_trip_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["three_vehicle.json", "twenty_vehicle.json", "single_vehicle.json", "forced_overlap.json"] {
        let original = std::fs::read_to_string(fixture(name)).unwrap();
        let s = Scenario::from_json(&original).unwrap();
        let path = dir.path().join(name);
        save_scenario(&s, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), original, "{name}");
    }
}

#[test]
fn unknown_field_is_rejected_with_position() {
    let text = std::fs::read_to_string(fixture("single_vehicle.json"))
        .unwrap()
        .replacen("\"x0\"", "\"position\"", 1);
    match Scenario::from_json(&text) {
        Err(ScenarioError::Parse { line, message, .. }) => {
            assert!(message.contains("position"), "{message}");
            assert!(line > 1);
        }
        other => panic!("unexpected {other:?}"),
    }
}
