//! A 4-hour heat carrier lets hourly output drift from the hourly demand
//! profile as long as each block's energy matches. The boiler shifts its
//! electricity draw into wind-rich hours.
//!
//!     cargo run --example heat_resolution

use flexplan::builder::build_lp;
use flexplan::plan::SolvedPlan;
use flexplan::sample;
use flexplan::solver::{solve, SolveOptions};

fn main() {
    let model = sample::heat_blocks();
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    let plan = SolvedPlan::new(model, built, solution).unwrap();

    let demand = plan
        .model
        .demand(&"process-heat".into(), &"r".into())
        .unwrap()
        .to_vec();
    let output = plan.generation(&"e-boiler".into(), &"r".into());
    let wind = plan.model.technology(&"wind".into()).unwrap();

    println!("hour  wind-cf  heat-demand  boiler-output");
    for t in 0..8 {
        println!(
            "{t:>4}  {:>7.2}  {:>11.2}  {:>13.2}",
            wind.capacity_factor.at(&"r".into(), t),
            demand[t],
            output[t]
        );
    }
    for block in 0..2 {
        let produced: f64 = output[block * 4..(block + 1) * 4].iter().sum();
        let demanded: f64 = demand[block * 4..(block + 1) * 4].iter().sum();
        println!(
            "block {block}: produced {produced:.2} GWh vs demanded {demanded:.2} GWh \
             (residual {:.1e})",
            (produced - demanded).abs()
        );
    }
}
