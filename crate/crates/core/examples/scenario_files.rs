//! Write the built-in scenarios as JSON files and read them back.
//!
//! Usage: `cargo run --example scenario_files [DIR]` (default `fixtures`).

use std::path::PathBuf;

use sentinel::scenarios::{forced_overlap, single_vehicle, three_vehicle, twenty_vehicle};
use sentinel::simharness::{load_scenario, save_scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, scenario) in [
        ("three_vehicle", three_vehicle()),
        ("twenty_vehicle", twenty_vehicle()),
        ("single_vehicle", single_vehicle()),
        ("forced_overlap", forced_overlap()),
    ] {
        let path = dir.join(format!("{name}.json"));
        save_scenario(&scenario, &path)?;
        assert_eq!(load_scenario(&path)?, scenario);
        println!(
            "{}: {} vehicles, {} areas, {} operations",
            path.display(),
            scenario.model.vehicle_count(),
            scenario.model.area_count(),
            scenario.model.op_count()
        );
    }
    Ok(())
}
