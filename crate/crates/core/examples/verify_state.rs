//! Classify states of the three-vehicle scenario as safe, undecided or unsafe.

use sentinel::dynamics::VehicleState;
use sentinel::scenarios::{forced_overlap, three_vehicle};
use sentinel::verifier::{SolveMode, Verifier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let verifier = Verifier::new(three_vehicle().model)?;
    let cases = [
        ("start", [(0.0, 10.0), (0.0, 8.0), (0.0, 8.0)]),
        ("closer", [(12.0, 10.0), (12.0, 8.0), (12.0, 10.0)]),
        ("tight", [(17.0, 10.0), (16.5, 10.0), (15.0, 10.0)]),
        ("inside", [(21.0, 10.0), (19.0, 8.0), (20.5, 9.0)]),
    ];
    for (name, state) in cases {
        let x: Vec<VehicleState> = state.iter().map(|&(p, v)| VehicleState::new(p, v)).collect();
        let verdict = verifier.verify(&x, SolveMode::Exact)?;
        println!(
            "{name:>7}: s_lower = {:.4}, s_upper = {:.4} -> {}",
            verdict.s_lower, verdict.s_upper, verdict.classification
        );
    }

    let overlap = forced_overlap();
    let verdict = Verifier::new(overlap.model)?.verify(&overlap.initial, SolveMode::Exact)?;
    println!("two vehicles inside one area: {}", verdict.classification);
    Ok(())
}
