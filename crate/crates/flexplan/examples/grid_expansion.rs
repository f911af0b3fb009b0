//! Piecewise transmission expansion: the capacity-cost curve fills in cost
//! order without integer variables, and forbidding expansion raises system
//! cost while local backup substitutes imports.
//!
//!     cargo run --example grid_expansion

use flexplan::builder::build_lp;
use flexplan::plan::SolvedPlan;
use flexplan::sample;
use flexplan::solver::{solve, SolveOptions};

fn solved(model: flexplan::EnergyModel) -> SolvedPlan {
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    SolvedPlan::new(model, built, solution).unwrap()
}

fn main() {
    let with_grid = solved(sample::corridor_pair());
    let corridor = &with_grid.model.corridors[0];
    println!(
        "capacity-cost curve ({} -> {}):",
        corridor.from, corridor.to
    );
    let built = with_grid.corridor_expansion("coast-city");
    for (segment, (spec, value)) in corridor.segments.iter().zip(&built).enumerate() {
        println!(
            "  segment {segment}: {value:.2} of {:.1} GW at {:>6.0} Mil.€/GW",
            spec.capacity, spec.unit_cost
        );
    }
    println!(
        "  pre-existing {:.1} GW, expansion limit {:.1} GW",
        corridor.preexisting,
        corridor.expansion_limit()
    );

    let without_grid = solved(sample::corridor_pair().without_grid_expansion());
    let a = with_grid.objective_breakdown().total;
    let b = without_grid.objective_breakdown().total;
    println!();
    println!("objective with expansion:    {a:>10.2} Mil.€");
    println!(
        "objective without expansion: {b:>10.2} Mil.€ ({:+.1}%)",
        (b - a) / a * 100.0
    );
    println!(
        "city backstop capacity: {:.2} GW -> {:.2} GW",
        with_grid.capacity(&"city-backstop".into(), &"city".into()),
        without_grid.capacity(&"city-backstop".into(), &"city".into())
    );
}
