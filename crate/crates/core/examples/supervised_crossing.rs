//! The three-vehicle scenario under the supervisor, written as CSV.
//!
//! Usage: `cargo run --example supervised_crossing [OUT.csv]`

use sentinel::scenarios::three_vehicle;
use sentinel::simharness::{run_closed_loop, write_log, HarnessOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = three_vehicle();
    let run = run_closed_loop(&scenario, &HarnessOptions::default())?;
    let log = &run.log;
    println!("override steps: {:?}", log.override_steps());
    println!("nominal bad set entered:  {}", log.any_bad());
    println!("shrunk bad set entered:   {}", log.any_shrunk());
    println!("inflated bad set entered: {}", log.any_inflated());
    for r in log.rows.iter().filter(|r| r.overridden).take(6) {
        println!(
            "  step {:>2} vehicle {} at x = {:.3} v = {:.3}: applied u = {:+.1}",
            r.step, r.vehicle, r.pos, r.speed, r.u_applied
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        write_log(log, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
