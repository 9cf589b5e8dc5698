//! Supervised run of the 20-vehicle, 48-area scenario with per-step latency.

use sentinel::scenarios::twenty_vehicle;
use sentinel::simharness::{latency_percentiles, run_closed_loop, HarnessOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = twenty_vehicle();
    let options = HarnessOptions {
        log_bounds: false,
        ..HarnessOptions::default()
    };
    let run = run_closed_loop(&scenario, &options)?;
    let (p50, p95, max) = latency_percentiles(&run.step_latency).expect("at least one step");
    println!("steps: {}", scenario.steps);
    println!("override steps: {}", run.log.override_count());
    println!("nominal bad set entered: {}", run.log.any_bad());
    println!("latency p50 {:.3} ms, p95 {:.3} ms, max {:.3} ms", p50 * 1e3, p95 * 1e3, max * 1e3);
    let finished = run
        .final_state
        .iter()
        .enumerate()
        .filter(|(j, s)| scenario.model.route_end(*j).is_some_and(|end| s.pos >= end))
        .count();
    println!("vehicles past their last area: {finished}/20");
    Ok(())
}
