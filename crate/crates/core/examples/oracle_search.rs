//! Brute-force search for collision-free inputs, compared with the bounds.

use sentinel::dynamics::VehicleState;
use sentinel::oracle::{oracle_search, OracleConfig};
use sentinel::scenarios::three_vehicle;
use sentinel::schedparams::BadSets;
use sentinel::verifier::{SolveMode, Verifier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = three_vehicle().model;
    let sets = BadSets::new(&model)?;
    let verifier = Verifier::new(model.clone())?;
    let config = OracleConfig::default();
    for state in [
        [(0.0, 10.0), (0.0, 8.0), (0.0, 8.0)],
        [(15.0, 10.0), (15.0, 10.0), (14.0, 10.0)],
    ] {
        let x: Vec<VehicleState> = state.iter().map(|&(p, v)| VehicleState::new(p, v)).collect();
        let verdict = verifier.verify(&x, SolveMode::Exact)?;
        println!("state {state:?}: {}", verdict.classification);
        for variant in [&sets.shrunk, &sets.nominal, &sets.inflated] {
            match oracle_search(&model, &x, variant, &config)? {
                Some(signals) => {
                    let shown: Vec<String> = signals
                        .iter()
                        .map(|s| format!("{:?}@{:?}", s.values(), s.breakpoints()))
                        .collect();
                    println!("  avoids {}: {}", variant.kind, shown.join(", "));
                }
                None => println!("  avoids {}: no signal on the search grid", variant.kind),
            }
        }
    }
    Ok(())
}
