//! Operation graph and bound-problem parameters of the three-vehicle scenario.

use sentinel::intersection::build_operation_graph;
use sentinel::scenarios::three_vehicle;
use sentinel::schedparams::{lower_bound_params, upper_bound_params, LowerEntry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = three_vehicle();
    let model = &scenario.model;
    let x: Vec<f64> = scenario.initial.iter().map(|s| s.pos).collect();
    let graph = build_operation_graph(model, &x)?;

    println!("operations:  {}", fmt_ops(&graph.active_ops));
    println!("first:       {}", fmt_ops(&graph.first_ops));
    println!("last:        {}", fmt_ops(&graph.last_ops));
    for (a, b) in &graph.conjunctive {
        println!("route order  {a} -> {b}");
    }
    for (a, b) in &graph.disjunctive {
        println!("shared area  {a} <-> {b}");
    }

    println!("\nlower-bound parameters");
    let lower = lower_bound_params(model, &graph, &scenario.initial)?;
    for op in &lower.ops {
        match op.entry {
            LowerEntry::First { release, deadline } => println!(
                "  {}: enter in [{release:.4}, {deadline:.4}], occupy [{:.4}, {:.4}]",
                op.op, op.proc_min, op.proc_max
            ),
            LowerEntry::After { prev, gap_fast, gap_slow } => println!(
                "  {}: enter {gap_fast:.4}..{gap_slow:.4} after leaving {prev}, occupy [{:.4}, {:.4}]",
                op.op, op.proc_min, op.proc_max
            ),
        }
    }

    println!("\nupper-bound parameters");
    let upper = upper_bound_params(model, &graph, &scenario.initial)?;
    for v in &upper.vehicles {
        println!("  vehicle {}: first entry in [{:.4}, {:.4}]", v.vehicle, v.release, v.due);
    }
    for op in &upper.ops {
        println!(
            "  {}: occupied from T + {:.4} to T + {:.4}",
            op.op, op.entry_offset, op.exit_offset
        );
    }
    Ok(())
}

fn fmt_ops(ops: &[sentinel::intersection::OpId]) -> String {
    ops.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" ")
}
