//! Flexible BEV charging: each day's charged energy matches the driving
//! consumption, hourly charging stays under the grid-connection profile,
//! and the optimizer moves charging into cheap wind hours.
//!
//!     cargo run --example bev_charging

use flexplan::builder::build_lp;
use flexplan::plan::SolvedPlan;
use flexplan::sample;
use flexplan::solver::{solve, SolveOptions};

fn main() {
    let model = sample::bev_two_days();
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    let plan = SolvedPlan::new(model, built, solution).unwrap();

    let bev = plan.model.technology(&"bev".into()).unwrap();
    let profile = bev.availability_profile.clone().unwrap();
    let capacity = plan.capacity(&"bev".into(), &"r".into());
    let charge = plan.input(&"bev".into(), &"r".into());
    let demand = plan
        .model
        .demand(&"transport".into(), &"r".into())
        .unwrap()
        .to_vec();

    println!("fleet connection capacity: {capacity:.2} GW");
    println!("hour  avail-cap  charge  driving");
    for t in 0..48 {
        println!(
            "{t:>4}  {:>9.2}  {:>6.2}  {:>7.2}",
            profile[t] * capacity,
            charge[t],
            demand[t]
        );
    }
    for day in 0..2 {
        let charged: f64 = charge[day * 24..(day + 1) * 24].iter().sum();
        let driven: f64 = demand[day * 24..(day + 1) * 24].iter().sum::<f64>() / bev.efficiency;
        println!(
            "day {day}: charged {charged:.2} GWh vs consumed {driven:.2} GWh \
             (residual {:.1e})",
            (charged - driven).abs()
        );
    }
}
