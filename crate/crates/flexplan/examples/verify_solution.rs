//! The independent verifier recomputes every constraint row and bound from
//! scratch. A backend can never return a silently wrong answer: injecting
//! a tiny fault into any dispatch variable trips an equality row.
//!
//!     cargo run --example verify_solution

use flexplan::builder::build_lp;
use flexplan::sample;
use flexplan::solver::{solve, verify_solution, SolveOptions};

fn main() {
    let model = sample::dispatch_12h();
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());

    let report = verify_solution(&built.lp, &solution).unwrap();
    println!("clean solution: pass = {}", report.pass);
    for (family, check) in &report.families {
        println!(
            "  {family:<6} {:>4} rows, max violation {:.2e}",
            check.constraints, check.max_rel_violation
        );
    }
    println!(
        "  objective reported {:.6} vs recomputed {:.6}",
        report.reported_objective.unwrap(),
        report.recomputed_objective
    );

    // Nudge one generation value by 1 MW.
    let mut tampered = solution.clone();
    let g = built.lp.variable_index("G|base|r|5").unwrap();
    tampered.values.as_mut().unwrap()[g] += 0.001;
    let report = verify_solution(&built.lp, &tampered).unwrap();
    println!();
    println!("after +1 MW on G|base|r|5: pass = {}", report.pass);
    println!(
        "  worst constraint: {} (violation {:.2e})",
        report.worst_constraint.as_deref().unwrap_or("-"),
        report.max_rel_violation
    );
}
