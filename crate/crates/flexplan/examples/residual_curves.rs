//! Residual-load analytics on the two-region week: counterfactual
//! inflexible demand, step-wise flexibility attribution, and the supply
//! decomposition of the residual curve.
//!
//!     cargo run --example residual_curves

use flexplan::analysis::{
    aggregate_flows, attribute_flexibility, supply_decomposition, trade_summary,
};
use flexplan::builder::build_lp;
use flexplan::model::FlexClass;
use flexplan::plan::SolvedPlan;
use flexplan::sample;
use flexplan::solver::{solve, SolveOptions};

fn main() {
    let model = sample::two_region_week();
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    let plan = SolvedPlan::new(model, built, solution).unwrap();
    let elec = "electricity".into();
    let city = "city".into();

    println!("flexibility attribution for 'city' (reference order):");
    println!(
        "{:<22} {:>9} {:>14} {:>12} {:>8}",
        "curve", "peak[GW]", "residual[GWh]", "excess[GWh]", "hours<0"
    );
    let curves = attribute_flexibility(&plan, &elec, &city, &FlexClass::ALL).unwrap();
    for labeled in &curves {
        let c = &labeled.curve;
        println!(
            "{:<22} {:>9.2} {:>14.1} {:>12.1} {:>8}",
            labeled.label, c.peak, c.residual_demand, c.excess_generation, c.hours_negative
        );
    }

    println!();
    println!("how the residual load is met (top five hours):");
    let d = supply_decomposition(&plan, &elec, &city);
    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9} {:>11}",
        "hour", "residual", "imports", "thermal", "storage", "curtailment"
    );
    for k in 0..5 {
        println!(
            "{:>5} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>11.2}",
            d.hour[k],
            d.residual[k],
            d.net_imports[k],
            d.thermal[k],
            d.storage_net[k],
            d.curtailment[k]
        );
    }

    println!();
    let trade = trade_summary(&plan, &elec, &city);
    println!(
        "city trade: {:.1} GWh imported / {:.1} GWh exported annually; \
         hourly net positions sum to {:.1} / {:.1} GWh",
        trade.annual_import,
        trade.annual_export,
        trade.net_import_hour_sum,
        trade.net_export_hour_sum
    );

    println!();
    println!("largest annual flows:");
    let mut edges = aggregate_flows(&plan).edges;
    edges.sort_by(|a, b| b.quantity.total_cmp(&a.quantity));
    for edge in edges.iter().take(10) {
        println!(
            "  {:<24} -> {:<24} {:>10.1}",
            edge.source, edge.target, edge.quantity
        );
    }
}
