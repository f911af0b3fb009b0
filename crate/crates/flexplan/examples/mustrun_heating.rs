//! Must-run local heating: joint capacity sized to peak demand, output
//! proportional to the demand profile, and an embedded heat store that
//! reshapes the heat pump's electricity draw.
//!
//!     cargo run --example mustrun_heating

use flexplan::builder::build_lp;
use flexplan::model::{
    CapacityFactor, Carrier, EmbeddedStorageSpec, EnergyModel, ImportOption, Technology,
};
use flexplan::plan::SolvedPlan;
use flexplan::sample;
use flexplan::solver::{solve, SolveOptions};

fn main() {
    // Two heaters share one local demand: capacities must sum to the peak.
    let model = sample::mustrun_pair();
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    let plan = SolvedPlan::new(model, built, solution).unwrap();
    let k_hp = plan.capacity(&"heat-pump".into(), &"r".into());
    let k_boiler = plan.capacity(&"h2-boiler".into(), &"r".into());
    println!("demand [2, 4, 8] GW, peak 8 GW");
    println!(
        "capacity split: heat pump {k_hp:.1} GW + boiler {k_boiler:.1} GW = {:.1} GW",
        k_hp + k_boiler
    );
    for (tech, k) in [("heat-pump", k_hp), ("h2-boiler", k_boiler)] {
        let gen = plan.generation(&tech.into(), &"r".into());
        println!(
            "  {tech:<9} hourly output {gen:?} (profile share {:.3})",
            k / 8.0
        );
    }

    // Embedded storage: same heat pump, but a store lets it pre-produce in
    // cheap wind hours and discharge later.
    let heat =
        Carrier::new("space-heat", 4).demand("r", vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    let electricity = Carrier::new("electricity", 1);
    let hp = Technology::new("hp")
        .in_region("r")
        .input("electricity", 1.0)
        .output("space-heat", 1.0)
        .efficiency(2.0)
        .must_run()
        .costs(4.0, 0.0, 0.0, 20.0)
        .embedded(EmbeddedStorageSpec {
            energy_cost: 0.001,
            power_cost: 0.001,
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            self_discharge: 0.99,
            max_duration: 8.0,
        });
    let wind = Technology::new("wind")
        .in_region("r")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series(
            [("r".into(), vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0])].into(),
        ))
        .preexisting("r", 20.0)
        .bounds("r", 0.0, 0.0);
    let model = EnergyModel::assemble(
        "embedded-demo",
        8,
        vec!["r".into()],
        vec![heat, electricity],
        vec![hp, wind],
        vec![],
        vec![],
        vec![ImportOption {
            carrier: "electricity".into(),
            region: "r".into(),
            price_eur_per_mwh: 500.0,
            limit_gw: None,
        }],
    )
    .with_interest(0.0);
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    let plan = SolvedPlan::new(model, built, solution).unwrap();

    println!();
    println!("embedded heat store (wind only in hours 0-3, imports cost 0.5 Mil.€/GWh):");
    println!("hour  elec-draw  boundary-heat  charge  discharge  level");
    let draw = plan.input(&"hp".into(), &"r".into());
    let heat_out = plan.generation(&"hp".into(), &"r".into());
    let charge = plan.embedded_charge(&"hp".into(), &"r".into());
    let discharge = plan.embedded_discharge(&"hp".into(), &"r".into());
    let level = plan.embedded_level(&"hp".into(), &"r".into());
    for t in 0..8 {
        println!(
            "{t:>4}  {:>9.2}  {:>13.2}  {:>6.2}  {:>9.2}  {:>5.2}",
            draw[t], heat_out[t], charge[t], discharge[t], level[t]
        );
    }
    println!(
        "store built: {:.2} GW / {:.2} GWh",
        plan.embedded_power(&"hp".into(), &"r".into()),
        plan.embedded_energy(&"hp".into(), &"r".into())
    );
}
