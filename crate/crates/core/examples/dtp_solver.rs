//! Two jobs competing for one machine, solved as a disjunctive temporal
//! problem by branch and bound and by enumeration.

use sentinel::dtp::{
    enumerate_exact, feasible_zero_lateness, min_max_lateness, DiffConstraint, Disjunction,
    DisjunctiveTemporalProblem, DueDate, LowerBound,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // variables: start and end of job A (0, 1) and job B (2, 3)
    let mut p = DisjunctiveTemporalProblem::new(4);
    p.names = vec!["a_start".into(), "a_end".into(), "b_start".into(), "b_end".into()];
    p.lower_bounds.push(LowerBound { var: 0, value: 0.0 });
    p.lower_bounds.push(LowerBound { var: 2, value: 0.2 });
    p.diff_constraints.push(DiffConstraint::new(1, 0, 1.0));
    p.diff_constraints.push(DiffConstraint::new(3, 2, 0.5));
    p.due_dates.push(DueDate { var: 0, due: 0.4 });
    p.due_dates.push(DueDate { var: 2, due: 0.6 });
    p.disjunctions.push(Disjunction {
        first: vec![DiffConstraint::new(2, 1, 0.0)],
        second: vec![DiffConstraint::new(0, 3, 0.0)],
    });

    let bb = min_max_lateness(&p)?;
    let ex = enumerate_exact(&p)?;
    println!("branch and bound: lateness {:.3} at {:?} ({} nodes)", bb.cost, bb.times, bb.nodes);
    println!("enumeration:      lateness {:.3} order {:?}", ex.cost, ex.orientation);
    println!("zero lateness attainable: {}", feasible_zero_lateness(&p)?.is_some());

    p.due_dates[1].due = 1.0;
    let w = feasible_zero_lateness(&p)?.expect("relaxed due date");
    println!("after relaxing b's due date: witness {:?}", w.times);
    Ok(())
}
