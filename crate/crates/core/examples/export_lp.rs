//! Upper-bound scheduling problem of the three-vehicle scenario in LP format,
//! ready for an external MILP solver.

use sentinel::dtp::to_lp;
use sentinel::scenarios::three_vehicle;
use sentinel::verifier::Verifier;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = three_vehicle();
    let verifier = Verifier::new(scenario.model.clone())?;
    let (problem, _, _) = verifier.upper_problem(&scenario.initial)?;
    print!("{}", to_lp(&problem)?);
    Ok(())
}
