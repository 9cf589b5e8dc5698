//! Nominal, shrunk and inflated occupancy intervals of each operation.

use sentinel::scenarios::{three_vehicle, twenty_vehicle};
use sentinel::schedparams::BadSets;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, scenario) in [("three vehicles", three_vehicle()), ("twenty vehicles", twenty_vehicle())] {
        let sets = BadSets::new(&scenario.model)?;
        println!("{name}");
        for ((op, nominal), ((_, shrunk), (_, inflated))) in sets
            .nominal
            .entries()
            .zip(sets.shrunk.entries().zip(sets.inflated.entries()))
            .take(6)
        {
            println!(
                "  {op}: shrunk ({:.3}, {:.3})  nominal ({:.1}, {:.1})  inflated ({:.3}, {:.3})",
                shrunk.lo, shrunk.hi, nominal.lo, nominal.hi, inflated.lo, inflated.hi
            );
        }
    }
    Ok(())
}
