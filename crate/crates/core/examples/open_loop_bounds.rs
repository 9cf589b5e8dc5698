//! Both cost bounds along an unsupervised run of the three-vehicle scenario.

use sentinel::scenarios::three_vehicle;
use sentinel::simharness::{run_open_loop, HarnessOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = three_vehicle();
    let log = run_open_loop(&scenario, &HarnessOptions::default())?;
    println!("{:>5} {:>6} {:>10} {:>10}  bad", "step", "time", "s_lower", "s_upper");
    for row in log.rows.iter().filter(|r| r.vehicle == 0 && r.step % 2 == 0) {
        let bad = log.rows.iter().any(|r| r.step == row.step && r.in_bad);
        println!(
            "{:>5} {:>6.2} {:>10.4} {:>10.4}  {}",
            row.step, row.time, row.s_lower, row.s_upper, if bad { "yes" } else { "" }
        );
    }
    Ok(())
}
