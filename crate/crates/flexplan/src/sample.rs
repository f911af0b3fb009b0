//! Ready-made models used by the examples and the test suite: small
//! hand-checkable instances plus a two-region week with every flexibility
//! mechanism active.

use crate::model::{
    CapacityFactor, Carrier, EmbeddedStorageSpec, EnergyModel, ExchangeCorridor, FlexClass,
    ImportOption, StorageTechnology, Technology,
};

/// `base + amplitude * sin(2*pi*(t + phase)/period)`, never below `floor`.
pub fn wave(
    horizon: usize,
    base: f64,
    amplitude: f64,
    period: f64,
    phase: f64,
    floor: f64,
) -> Vec<f64> {
    (0..horizon)
        .map(|t| {
            let x = base + amplitude * (std::f64::consts::TAU * (t as f64 + phase) / period).sin();
            x.max(floor)
        })
        .collect()
}

/// Deterministic wind-like capacity factor in [lo, hi]: two incommensurate
/// sine components.
pub fn windy(horizon: usize, mean: f64, lo: f64, hi: f64, seed: f64) -> Vec<f64> {
    (0..horizon)
        .map(|t| {
            let t = t as f64;
            let v = mean
                + 0.32 * (std::f64::consts::TAU * (t + seed) / 37.0).sin()
                + 0.21 * (std::f64::consts::TAU * (t + 2.0 * seed) / 13.1).sin();
            v.clamp(lo, hi)
        })
        .collect()
}

/// Solar-like diurnal capacity factor, zero at night.
pub fn sunny(horizon: usize, peak: f64) -> Vec<f64> {
    (0..horizon)
        .map(|t| {
            let hour = (t % 24) as f64;
            if (6.0..18.0).contains(&hour) {
                peak * (std::f64::consts::PI * (hour - 6.0) / 12.0).sin()
            } else {
                0.0
            }
        })
        .collect()
}

fn repeat_daily(template: [f64; 24], days: usize) -> Vec<f64> {
    template.iter().copied().cycle().take(24 * days).collect()
}

/// One region, one hourly carrier, one pure source over two hours with
/// demand [3, 5]: 3 variables, 4 constraints, optimum K = 5.
pub fn single_tech_two_hours() -> EnergyModel {
    let carrier = Carrier::new("electricity", 1).demand("r", vec![3.0, 5.0]);
    // annuity 100/20 = 5 plus O&M 2 -> v_fix 7
    let tech = Technology::new("turbine")
        .in_region("r")
        .output("electricity", 1.0)
        .costs(100.0, 2.0, 0.01, 20.0);
    EnergyModel::assemble(
        "single-tech",
        2,
        vec!["r".into()],
        vec![carrier],
        vec![tech],
        vec![],
        vec![],
        vec![],
    )
    .with_interest(0.0)
}

/// One region, two merit-order technologies, one storage, 12 hours; demand
/// in exact tenths so vertex optima land on the 0.1 capacity grid.
pub fn dispatch_12h() -> EnergyModel {
    let demand = vec![3.0, 3.2, 3.6, 4.4, 5.6, 6.4, 6.0, 5.2, 4.4, 3.6, 3.2, 3.0];
    let carrier = Carrier::new("electricity", 1).demand("r", demand);
    let base = Technology::new("base")
        .in_region("r")
        .output("electricity", 1.0)
        .costs(80.0, 1.0, 0.002, 10.0)
        .bounds("r", 0.0, 10.0);
    let peaker = Technology::new("peaker")
        .in_region("r")
        .output("electricity", 1.0)
        .costs(30.0, 0.5, 0.08, 10.0)
        .bounds("r", 0.0, 10.0);
    let storage = StorageTechnology::new("store", "electricity")
        .in_region("r")
        .power_costs(16.0, 0.0)
        .energy_costs(1.0, 0.0)
        .lifetime(10.0)
        .efficiencies(1.0, 1.0, 1.0)
        .energy_to_power(4.0, 4.0);
    EnergyModel::assemble(
        "dispatch-12h",
        12,
        vec!["r".into()],
        vec![carrier],
        vec![base, peaker],
        vec![storage],
        vec![],
        vec![],
    )
    .with_interest(0.0)
}

/// Two must-run heaters sharing a local demand d = [2, 4, 8]: peak 8, the
/// cheap heat pump capped at 5 GW so the optimum splits K = (5, 3).
pub fn mustrun_pair() -> EnergyModel {
    let heat = Carrier::new("heat-local", 1).demand("r", vec![2.0, 4.0, 8.0]);
    let electricity = Carrier::new("electricity", 1);
    let hydrogen = Carrier::new("hydrogen", 1);
    let heat_pump = Technology::new("heat-pump")
        .in_region("r")
        .input("electricity", 1.0)
        .output("heat-local", 1.0)
        .efficiency(3.0)
        .must_run()
        .costs(20.0, 0.0, 0.0, 20.0)
        .bounds("r", 0.0, 5.0);
    let boiler = Technology::new("h2-boiler")
        .in_region("r")
        .input("hydrogen", 1.0)
        .output("heat-local", 1.0)
        .efficiency(0.95)
        .must_run()
        .costs(16.0, 0.0, 0.0, 20.0);
    EnergyModel::assemble(
        "mustrun-pair",
        3,
        vec!["r".into()],
        vec![heat, electricity, hydrogen],
        vec![heat_pump, boiler],
        vec![],
        vec![],
        vec![
            ImportOption {
                carrier: "electricity".into(),
                region: "r".into(),
                price_eur_per_mwh: 50.0,
                limit_gw: None,
            },
            ImportOption {
                carrier: "hydrogen".into(),
                region: "r".into(),
                price_eur_per_mwh: 300.0,
                limit_gw: None,
            },
        ],
    )
    .with_interest(0.0)
}

/// A 4-hour process-heat carrier over 8 hours served by one must-run
/// electric boiler; wind availability varies within blocks, so the hourly
/// output profile shifts while block energy stays fixed.
pub fn heat_blocks() -> EnergyModel {
    let heat =
        Carrier::new("process-heat", 4).demand("r", vec![1.0, 2.0, 3.0, 6.0, 2.0, 2.0, 2.0, 2.0]);
    let electricity = Carrier::new("electricity", 1);
    let boiler = Technology::new("e-boiler")
        .in_region("r")
        .input("electricity", 1.0)
        .output("process-heat", 1.0)
        .must_run()
        .costs(12.0, 0.0, 0.0, 20.0);
    let wind = Technology::new("wind")
        .in_region("r")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series(
            [("r".into(), vec![1.0, 1.0, 0.05, 0.05, 1.0, 0.05, 1.0, 0.05])].into(),
        ))
        .preexisting("r", 10.0)
        .bounds("r", 0.0, 0.0);
    EnergyModel::assemble(
        "heat-blocks",
        8,
        vec!["r".into()],
        vec![heat, electricity],
        vec![boiler, wind],
        vec![],
        vec![],
        vec![ImportOption {
            carrier: "electricity".into(),
            region: "r".into(),
            price_eur_per_mwh: 500.0,
            limit_gw: None,
        }],
    )
    .with_interest(0.0)
}

/// BEV charging over two days: transport services at daily resolution, an
/// hourly grid-connection profile, cheap wind at night.
pub fn bev_two_days() -> EnergyModel {
    let mut driving = [0.0; 24];
    for h in [7, 8, 9] {
        driving[h] = 2.0;
    }
    for h in [16, 17, 18, 19] {
        driving[h] = 2.5;
    }
    let mut availability = [0.9; 24];
    for h in 7..20 {
        availability[h] = 0.25;
    }
    let transport = Carrier::new("transport", 24).demand("r", repeat_daily(driving, 2));
    let electricity = Carrier::new("electricity", 1);
    let bev = Technology::new("bev")
        .in_region("r")
        .input("electricity", 1.0)
        .output("transport", 1.0)
        .availability(repeat_daily(availability, 2))
        .costs(2.0, 0.0, 0.0, 12.0);
    let wind = Technology::new("wind")
        .in_region("r")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series(
            [(
                "r".into(),
                repeat_daily(
                    {
                        let mut cf = [0.9; 24];
                        for h in 8..20 {
                            cf[h] = 0.15;
                        }
                        cf
                    },
                    2,
                ),
            )]
            .into(),
        ))
        .costs(25.0, 0.0, 0.0, 25.0)
        .bounds("r", 0.0, 40.0);
    EnergyModel::assemble(
        "bev-two-days",
        48,
        vec!["r".into()],
        vec![transport, electricity],
        vec![bev, wind],
        vec![],
        vec![],
        vec![ImportOption {
            carrier: "electricity".into(),
            region: "r".into(),
            price_eur_per_mwh: 400.0,
            limit_gw: None,
        }],
    )
    .with_interest(0.0)
}

/// Fixed wind against flat demand with one storage; `self_discharge` 1.0
/// makes it lossless.
pub fn storage_cycle(self_discharge: f64) -> EnergyModel {
    let demand = vec![4.0; 12];
    let cf = vec![1.0, 1.0, 1.0, 0.1, 0.1, 0.1, 1.0, 1.0, 1.0, 0.1, 0.1, 0.1];
    let electricity = Carrier::new("electricity", 1).demand("r", demand);
    let wind = Technology::new("wind")
        .in_region("r")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series([("r".into(), cf)].into()))
        .preexisting("r", 8.0)
        .bounds("r", 0.0, 0.0);
    let storage = StorageTechnology::new("battery", "electricity")
        .in_region("r")
        .power_costs(0.4, 0.0)
        .energy_costs(0.02, 0.0)
        .lifetime(10.0)
        .efficiencies(1.0, 1.0, self_discharge);
    EnergyModel::assemble(
        "storage-cycle",
        12,
        vec!["r".into()],
        vec![electricity],
        vec![wind],
        vec![storage],
        vec![],
        vec![ImportOption {
            carrier: "electricity".into(),
            region: "r".into(),
            price_eur_per_mwh: 1000.0,
            limit_gw: None,
        }],
    )
    .with_interest(0.0)
}

/// Two regions joined by a piecewise-expandable corridor (2 GW @ 200,
/// 2 GW @ 900, 3.5 GW @ 3700 Mil.€/GW): cheap generation on one side,
/// a costly backstop on the other, flat 5.5 GW of demand.
pub fn corridor_pair() -> EnergyModel {
    let horizon = 48;
    let electricity = Carrier::new("electricity", 1).demand("city", vec![5.5; horizon]);
    let wind = Technology::new("wind-coast")
        .in_region("coast")
        .output("electricity", 1.0)
        .fluctuating()
        .costs(20.0, 0.2, 0.001, 30.0)
        .bounds("coast", 0.0, 40.0);
    let backstop = Technology::new("city-backstop")
        .in_region("city")
        .output("electricity", 1.0)
        .costs(1.0, 0.0, 5.0, 30.0);
    let corridor = ExchangeCorridor::new("coast-city", "coast", "city", "electricity")
        .distance(400.0, 0.05)
        .preexisting(1.0)
        .segment(2.0, 200.0)
        .segment(2.0, 900.0)
        .segment(3.5, 3700.0);
    EnergyModel::assemble(
        "corridor-pair",
        horizon as u32,
        vec!["coast".into(), "city".into()],
        vec![electricity],
        vec![wind, backstop],
        vec![],
        vec![corridor],
        vec![],
    )
}

/// Two regions over one week with every flexibility mechanism active:
/// fluctuating wind and PV, an electrolyzer feeding exogenous hydrogen
/// demand with cavern storage and hydrogen turbines, must-run space heating
/// with embedded storage, merit-order district heating with network thermal
/// storage, BEV charging at daily resolution, and a piecewise-expandable
/// electricity corridor.
pub fn two_region_week() -> EnergyModel {
    let horizon = 168usize;
    let days = 7;

    let elec_demand_city = wave(horizon, 10.0, 3.0, 24.0, -10.0, 4.0);
    let elec_demand_coast = wave(horizon, 2.0, 0.5, 24.0, -8.0, 0.8);
    let heat_demand_city = wave(horizon, 6.0, 2.0, 24.0, -4.0, 2.0);
    let dh_demand_city = wave(horizon, 5.0, 2.0, 24.0, -2.0, 1.5);

    let mut driving = [0.0; 24];
    for h in [7, 8, 9] {
        driving[h] = 3.0;
    }
    for h in [16, 17, 18, 19] {
        driving[h] = 3.5;
    }
    let mut availability = [0.9; 24];
    for h in 7..20 {
        availability[h] = 0.3;
    }

    let electricity = Carrier::new("electricity", 1)
        .demand("city", elec_demand_city)
        .demand("coast", elec_demand_coast);
    let hydrogen = Carrier::new("hydrogen", 1).demand("city", vec![3.0; horizon]);
    let space_heat = Carrier::new("space-heat", 4).demand("city", heat_demand_city);
    let district_heat = Carrier::new("district-heat", 4).demand("city", dh_demand_city);
    let transport = Carrier::new("transport", 24).demand("city", repeat_daily(driving, days));

    let wind_coast = Technology::new("wind-coast")
        .in_region("coast")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series(
            [("coast".into(), windy(horizon, 0.48, 0.02, 0.95, 3.0))].into(),
        ))
        .costs(18.0, 0.2, 0.0, 30.0)
        .bounds("coast", 0.0, 80.0);
    let wind_city = Technology::new("wind-city")
        .in_region("city")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series(
            [("city".into(), windy(horizon, 0.22, 0.01, 0.7, 11.0))].into(),
        ))
        .costs(35.0, 0.3, 0.0, 30.0)
        .bounds("city", 0.0, 6.0);
    let pv_city = Technology::new("pv-city")
        .in_region("city")
        .output("electricity", 1.0)
        .fluctuating()
        .capacity_factor(CapacityFactor::Series(
            [("city".into(), sunny(horizon, 0.75))].into(),
        ))
        .costs(10.0, 0.1, 0.0, 25.0)
        .bounds("city", 0.0, 40.0);
    let h2_turbine = Technology::new("h2-turbine")
        .in_region("city")
        .input("hydrogen", 1.0)
        .output("electricity", 1.0)
        .efficiency(0.415)
        .capacity_factor(CapacityFactor::Constant(0.972))
        .costs(8.0, 0.1, 0.001, 25.0);
    let electrolyzer = Technology::new("electrolyzer")
        .in_region("city")
        .input("electricity", 1.0)
        .output("hydrogen", 1.0)
        .efficiency(0.7)
        .costs(7.0, 0.1, 0.0, 25.0)
        .flex_class(FlexClass::Ptx);
    let hp_space = Technology::new("hp-space")
        .in_region("city")
        .input("electricity", 1.0)
        .output("space-heat", 1.0)
        .efficiency(3.0)
        .must_run()
        .costs(9.0, 0.1, 0.0, 20.0)
        .embedded(EmbeddedStorageSpec {
            energy_cost: 0.15,
            power_cost: 0.8,
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            self_discharge: 0.98,
            max_duration: 6.0,
        })
        .flex_class(FlexClass::SpaceProcessHeat);
    let hp_district = Technology::new("hp-district")
        .in_region("city")
        .input("electricity", 1.0)
        .output("district-heat", 1.0)
        .efficiency(3.0)
        .costs(9.0, 0.1, 0.0, 20.0)
        .flex_class(FlexClass::DistrictHeat);
    let h2_boiler_dh = Technology::new("h2-boiler-dh")
        .in_region("city")
        .input("hydrogen", 1.0)
        .output("district-heat", 1.0)
        .efficiency(0.99)
        .costs(1.5, 0.02, 0.0005, 20.0);
    let bev = Technology::new("bev-fleet")
        .in_region("city")
        .input("electricity", 1.0)
        .output("transport", 1.0)
        .efficiency(1.0)
        .availability(repeat_daily(availability, days))
        .costs(2.0, 0.02, 0.0, 12.0)
        .flex_class(FlexClass::Bev);

    let h2_cavern = StorageTechnology::new("h2-cavern", "hydrogen")
        .in_region("city")
        .power_costs(0.2, 0.0)
        .energy_costs(0.01, 0.0)
        .lifetime(30.0)
        .efficiencies(0.95, 0.95, 1.0);
    let dh_store = StorageTechnology::new("dh-store", "district-heat")
        .in_region("city")
        .power_costs(0.3, 0.0)
        .energy_costs(0.05, 0.0)
        .lifetime(20.0)
        .efficiencies(0.95, 0.95, 0.99)
        .energy_to_power(1.0, 12.0);

    let corridor = ExchangeCorridor::new("coast-city", "coast", "city", "electricity")
        .distance(500.0, 0.05)
        .preexisting(1.0)
        .segment(2.0, 20.0)
        .segment(2.0, 80.0)
        .segment(3.5, 320.0);

    EnergyModel::assemble(
        "two-region-week",
        horizon as u32,
        vec!["coast".into(), "city".into()],
        vec![electricity, hydrogen, space_heat, district_heat, transport],
        vec![
            wind_coast,
            wind_city,
            pv_city,
            h2_turbine,
            electrolyzer,
            hp_space,
            hp_district,
            h2_boiler_dh,
            bev,
        ],
        vec![h2_cavern, dh_store],
        vec![corridor],
        vec![ImportOption {
            carrier: "hydrogen".into(),
            region: "city".into(),
            price_eur_per_mwh: 111.71,
            limit_gw: None,
        }],
    )
}
