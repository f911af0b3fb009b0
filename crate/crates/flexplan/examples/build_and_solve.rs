//! Smallest possible round trip: build a one-technology model in code,
//! translate it to an LP, solve, and read the result back by name.
//!
//!     cargo run --example build_and_solve

use flexplan::builder::build_lp;
use flexplan::model::{Carrier, EnergyModel, Technology};
use flexplan::solver::{solve, SolveOptions};

fn main() {
    // One region, hourly electricity with demand [3, 5] GW, one turbine.
    // Fixed cost 100/20 + 2 = 7 Mil.€/GW/a, variable 0.01 Mil.€/GWh.
    let model = EnergyModel::assemble(
        "hello-plan",
        2,
        vec!["r".into()],
        vec![Carrier::new("electricity", 1).demand("r", vec![3.0, 5.0])],
        vec![Technology::new("turbine")
            .in_region("r")
            .output("electricity", 1.0)
            .costs(100.0, 2.0, 0.01, 20.0)],
        vec![],
        vec![],
        vec![],
    )
    .with_interest(0.0);

    let built = build_lp(&model).expect("valid model");
    println!(
        "LP has {} variables and {} constraints",
        built.lp.num_variables(),
        built.lp.num_constraints()
    );

    let solution = solve(&built.lp, &SolveOptions::default());
    println!("status: {:?}", solution.status);
    println!("objective: {:.4} Mil.€", solution.objective.unwrap());
    println!(
        "capacity sized to peak demand: K = {:.1} GW",
        solution.value(&built.lp, "K|turbine|r").unwrap()
    );
    for t in 0..2 {
        println!(
            "hour {t}: generation {:.1} GW",
            solution
                .value(&built.lp, &format!("G|turbine|r|{t}"))
                .unwrap()
        );
    }

    // The LP exports as fixed-form MPS for cross-checking with any solver.
    let mps = built.lp.to_mps("HELLO");
    println!("--- MPS ---\n{mps}");
}
