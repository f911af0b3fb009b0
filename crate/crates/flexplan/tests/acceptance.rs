//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines on success.

use std::sync::OnceLock;

use flexplan::analysis::{
    attribute_flexibility, demand_split, fluctuating_available, residual_curve,
};
use flexplan::builder::build_lp;
use flexplan::model::FlexClass;
use flexplan::plan::SolvedPlan;
use flexplan::sample;
use flexplan::solver::{solve, verify_solution, Solution, SolveOptions};
use flexplan::EnergyModel;

use rand::{Rng, SeedableRng};

fn criterion(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {number:>2} {}: {name} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} failed: {name} ({detail})");
}

fn solved(model: EnergyModel) -> SolvedPlan {
    let built = build_lp(&model).unwrap();
    let solution = solve(&built.lp, &SolveOptions::default());
    assert!(
        solution.is_optimal(),
        "fixture must solve: {:?}",
        solution.message
    );
    let report = verify_solution(&built.lp, &solution).unwrap();
    assert!(report.pass, "fixture must verify: {report:?}");
    SolvedPlan::new(model, built, solution).unwrap()
}

fn week_plan() -> &'static SolvedPlan {
    static PLAN: OnceLock<SolvedPlan> = OnceLock::new();
    PLAN.get_or_init(|| solved(sample::two_region_week()))
}

fn week_plan_no_grid() -> &'static SolvedPlan {
    static PLAN: OnceLock<SolvedPlan> = OnceLock::new();
    PLAN.get_or_init(|| solved(sample::two_region_week().without_grid_expansion()))
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence on the tiny instance
// ---------------------------------------------------------------------------

/// Optimal dispatch cost for fixed capacities, as its own little LP built
/// directly against the backend (independent of the model builder).
/// Mirrors the dispatch_12h fixture: two merit technologies and one
/// lossless storage with a fixed 4-hour duration.
fn dispatch_cost(demand: &[f64], k_base: f64, k_peak: f64, k_store: f64) -> Option<f64> {
    use flexplan::lp::{LinearProgram, Sense};
    let horizon = demand.len();
    let mut lp = LinearProgram::new();
    let mut g_base = Vec::with_capacity(horizon);
    let mut g_peak = Vec::with_capacity(horizon);
    let mut s_in = Vec::with_capacity(horizon);
    let mut s_out = Vec::with_capacity(horizon);
    let mut level = Vec::with_capacity(horizon);
    for t in 0..horizon {
        g_base.push(
            lp.add_variable(format!("gb{t}"), 0.0, k_base, 0.002)
                .unwrap(),
        );
        g_peak.push(
            lp.add_variable(format!("gp{t}"), 0.0, k_peak, 0.08)
                .unwrap(),
        );
        s_in.push(
            lp.add_variable(format!("si{t}"), 0.0, f64::INFINITY, 0.0)
                .unwrap(),
        );
        s_out.push(
            lp.add_variable(format!("so{t}"), 0.0, f64::INFINITY, 0.0)
                .unwrap(),
        );
        level.push(
            lp.add_variable(format!("sl{t}"), 0.0, 4.0 * k_store, 0.0)
                .unwrap(),
        );
    }
    for t in 0..horizon {
        let prev = if t == 0 { horizon - 1 } else { t - 1 };
        lp.add_constraint(
            format!("bal{t}"),
            vec![
                (g_base[t], 1.0),
                (g_peak[t], 1.0),
                (s_out[t], 1.0),
                (s_in[t], -1.0),
            ],
            Sense::Eq,
            demand[t],
        )
        .unwrap();
        lp.add_constraint(
            format!("lvl{t}"),
            vec![
                (level[prev], 1.0),
                (s_in[t], 1.0),
                (s_out[t], -1.0),
                (level[t], -1.0),
            ],
            Sense::Eq,
            0.0,
        )
        .unwrap();
        lp.add_constraint(
            format!("pw{t}"),
            vec![(s_in[t], 1.0), (s_out[t], 1.0)],
            Sense::Le,
            k_store,
        )
        .unwrap();
    }
    let solution = solve(&lp, &SolveOptions::default());
    solution.is_optimal().then(|| solution.objective.unwrap())
}

#[test]
fn criterion_01_oracle_equivalence_tiny_instance() {
    let started = std::time::Instant::now();
    let model = sample::dispatch_12h();
    let built = build_lp(&model).unwrap();
    let lp_solution = solve(&built.lp, &SolveOptions::default());
    let lp_objective = lp_solution.objective.unwrap();

    let demand: Vec<f64> = model
        .demand(&"electricity".into(), &"r".into())
        .unwrap()
        .to_vec();
    // Annualized fixed costs of the fixture (interest 0).
    let fix = [
        80.0 / 10.0 + 1.0,
        30.0 / 10.0 + 0.5,
        16.0 / 10.0 + 4.0 * 0.1,
    ];
    let fixed_cost = |k: &[f64; 3]| fix[0] * k[0] + fix[1] * k[1] + fix[2] * k[2];

    // Incumbent: the LP capacities rounded up to the grid stay feasible.
    let grid_up = |v: f64| ((v * 10.0).ceil() / 10.0).clamp(0.0, 10.0);
    let k_lp = [
        lp_solution.value(&built.lp, "K|base|r").unwrap(),
        lp_solution.value(&built.lp, "K|peaker|r").unwrap(),
        lp_solution.value(&built.lp, "KS|store|r").unwrap(),
    ];
    let seed = [grid_up(k_lp[0]), grid_up(k_lp[1]), grid_up(k_lp[2])];
    let mut best = fixed_cost(&seed)
        + dispatch_cost(&demand, seed[0], seed[1], seed[2]).expect("rounded-up point feasible");

    let peak = demand.iter().cloned().fold(0.0, f64::max);
    let energy_per_hour = demand.iter().sum::<f64>() / demand.len() as f64;
    let mut evaluated = 0usize;
    // Full 0:0.1:10 grid; points whose fixed cost alone beats the incumbent
    // cannot improve the minimum (dispatch cost is nonnegative).
    for kb in 0..=100u32 {
        let k_base = kb as f64 * 0.1;
        if fix[0] * k_base >= best {
            break;
        }
        for kp in 0..=100u32 {
            let k_peak = kp as f64 * 0.1;
            if fix[0] * k_base + fix[1] * k_peak >= best {
                break;
            }
            for ks in 0..=100u32 {
                let k_store = ks as f64 * 0.1;
                let k = [k_base, k_peak, k_store];
                let fixed = fixed_cost(&k);
                if fixed >= best {
                    break;
                }
                // Cheap infeasibility screens: hourly power and cyclic energy.
                if k_base + k_peak + k_store < peak || k_base + k_peak < energy_per_hour {
                    continue;
                }
                evaluated += 1;
                if let Some(dispatch) = dispatch_cost(&demand, k_base, k_peak, k_store) {
                    let total = fixed + dispatch;
                    if total < best {
                        best = total;
                    }
                }
            }
        }
    }

    let elapsed = started.elapsed();
    let gap = (best - lp_objective).abs() / lp_objective.abs().max(1e-12);
    criterion(
        1,
        "oracle equivalence, tiny instance",
        gap < 0.01 && elapsed.as_secs_f64() < 60.0,
        &format!(
            "LP {lp_objective:.6} vs grid oracle {best:.6}, gap {:.4}%, {} dispatch LPs in {:.1?}",
            gap * 100.0,
            evaluated,
            elapsed
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Must-run exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_mustrun_exactness() {
    let plan = solved(sample::mustrun_pair());
    let demand = [2.0, 4.0, 8.0];
    let p = 8.0;
    let k_hp = plan.capacity(&"heat-pump".into(), &"r".into());
    let k_boiler = plan.capacity(&"h2-boiler".into(), &"r".into());
    let capacity_balance = ((k_hp + k_boiler) - p).abs();

    let mut worst = 0.0_f64;
    for (tech, k) in [("heat-pump", k_hp), ("h2-boiler", k_boiler)] {
        let gen = plan.generation(&tech.into(), &"r".into());
        for (t, &d) in demand.iter().enumerate() {
            worst = worst.max((gen[t] * p - d * k).abs());
        }
    }
    let bound = 1e-6 * p * k_hp.max(k_boiler);
    criterion(
        2,
        "must-run capacity balance and proportional output",
        capacity_balance < 1e-6 && worst <= bound.max(1e-9),
        &format!(
            "sum K = {:.9}, split ({k_hp:.3}, {k_boiler:.3}), worst proportionality residual {worst:.2e}",
            k_hp + k_boiler
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Coarse-resolution conservation
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_coarse_resolution_conservation() {
    let plan = solved(sample::heat_blocks());
    let demand = plan
        .model
        .demand(&"process-heat".into(), &"r".into())
        .unwrap()
        .to_vec();
    let gen = plan.generation(&"e-boiler".into(), &"r".into());
    let mut worst_block = 0.0_f64;
    for block in 0..2 {
        let lhs: f64 = gen[block * 4..(block + 1) * 4].iter().sum();
        let rhs: f64 = demand[block * 4..(block + 1) * 4].iter().sum();
        worst_block = worst_block.max((lhs - rhs).abs());
    }
    let max_hourly_deviation = gen
        .iter()
        .zip(&demand)
        .map(|(g, d)| (g - d).abs())
        .fold(0.0, f64::max);
    criterion(
        3,
        "coarse-resolution conservation with hourly deviation",
        worst_block < 1e-9 && max_hourly_deviation > 0.1,
        &format!(
            "block residual {worst_block:.2e}, max hourly deviation {max_hourly_deviation:.3} GW"
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. BEV daily balance
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_bev_daily_balance() {
    let plan = solved(sample::bev_two_days());
    let model = &plan.model;
    let bev = model.technology(&"bev".into()).unwrap();
    let eta = bev.efficiency;
    let profile = bev.availability_profile.clone().unwrap();
    let demand = model.demand(&"transport".into(), &"r".into()).unwrap();
    let charge = plan.input(&"bev".into(), &"r".into());
    let capacity = plan.capacity(&"bev".into(), &"r".into());

    let mut worst_day = 0.0_f64;
    for day in 0..2 {
        let charged: f64 = charge[day * 24..(day + 1) * 24].iter().sum();
        let consumed: f64 = demand[day * 24..(day + 1) * 24].iter().sum::<f64>() / eta;
        worst_day = worst_day.max((charged - consumed).abs());
    }
    let worst_cap = charge
        .iter()
        .zip(&profile)
        .map(|(u, a)| u - a * capacity)
        .fold(f64::NEG_INFINITY, f64::max);
    criterion(
        4,
        "BEV daily balance and hourly availability cap",
        worst_day < 1e-9 && worst_cap < 1e-7,
        &format!("day residual {worst_day:.2e} GWh, cap violation {worst_cap:.2e} GW"),
    );
}

// ---------------------------------------------------------------------------
// 5. Storage cyclic conservation
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_storage_cyclic_conservation() {
    // Lossless case.
    let plan = solved(sample::storage_cycle(1.0));
    let charge: f64 = plan
        .storage_charge(&"battery".into(), &"r".into())
        .iter()
        .sum();
    let discharge: f64 = plan
        .storage_discharge(&"battery".into(), &"r".into())
        .iter()
        .sum();
    let lossless_gap = (charge - discharge).abs();
    let cycles = charge > 0.1;

    // Self-discharge case: the gap equals the accumulated self-discharge.
    let plan_lossy = solved(sample::storage_cycle(0.99));
    let charge_l: f64 = plan_lossy
        .storage_charge(&"battery".into(), &"r".into())
        .iter()
        .sum();
    let discharge_l: f64 = plan_lossy
        .storage_discharge(&"battery".into(), &"r".into())
        .iter()
        .sum();
    let level = plan_lossy.storage_level(&"battery".into(), &"r".into());
    let accumulated: f64 = (0..level.len())
        .map(|t| {
            let prev = if t == 0 { level.len() - 1 } else { t - 1 };
            (1.0 - 0.99) * level[prev]
        })
        .sum();
    let gap = charge_l - discharge_l;
    let relative = (gap - accumulated).abs() / accumulated.abs().max(1e-12);
    criterion(
        5,
        "storage cyclic conservation",
        cycles && lossless_gap < 1e-9 && relative < 1e-6,
        &format!(
            "lossless gap {lossless_gap:.2e} over {charge:.2} GWh cycled; \
             self-discharge gap {gap:.6} vs recomputed {accumulated:.6} (rel {relative:.2e})"
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Piecewise expansion ordering
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_piecewise_expansion_ordering() {
    let plan = solved(sample::corridor_pair());
    let expansion = plan.corridor_expansion("coast-city");
    let caps = [2.0, 2.0, 3.5];
    let mut ordered = true;
    for k in 0..expansion.len() - 1 {
        if expansion[k + 1] > 1e-6 && expansion[k] < caps[k] - 1e-6 {
            ordered = false;
        }
    }
    // The fixture fills the curve partway so the property actually bites.
    let meaningful = expansion[0] > 1e-6 && expansion.iter().sum::<f64>() < 7.5 - 1e-6;
    criterion(
        6,
        "piecewise expansion fills segments in cost order",
        ordered && meaningful,
        &format!("segments built: {expansion:?}"),
    );
}

// ---------------------------------------------------------------------------
// 7. Residual curve identities
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_residual_curve_identities() {
    let started = std::time::Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut pass = true;
    for _ in 0..100 {
        let n = rng.gen_range(1..=400usize);
        // Dyadic rationals (multiples of 2^-10) keep every sum exact in f64.
        let demand: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0..65_536u32) as f64 / 1024.0)
            .collect();
        let gen: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0..65_536u32) as f64 / 1024.0)
            .collect();
        let curve = residual_curve(&demand, &gen).unwrap();
        let direct: f64 = demand.iter().zip(&gen).map(|(d, g)| d - g).sum();
        if curve.residual_demand - curve.excess_generation != direct {
            pass = false;
        }
        if !curve.sorted.windows(2).all(|w| w[0] >= w[1]) {
            pass = false;
        }
        let max = demand
            .iter()
            .zip(&gen)
            .map(|(d, g)| d - g)
            .fold(f64::NEG_INFINITY, f64::max);
        if curve.peak != max {
            pass = false;
        }
    }
    let elapsed = started.elapsed();
    criterion(
        7,
        "residual curve identities on 100 random pairs",
        pass && elapsed.as_secs_f64() < 5.0,
        &format!("exact identity, monotone, peak = max; {elapsed:.2?}"),
    );
}

// ---------------------------------------------------------------------------
// 8. Attribution endpoint invariance
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_attribution_endpoint_invariance() {
    use itertools::Itertools;
    let plan = week_plan();
    let elec = "electricity".into();
    let city = "city".into();
    let split = demand_split(plan, &elec, &city);
    let fluct = fluctuating_available(plan, &elec, &city);
    let reference = residual_curve(&split.actual_total(), &fluct).unwrap();

    let mut identical = 0usize;
    let mut total = 0usize;
    for order in FlexClass::ALL.iter().copied().permutations(4) {
        total += 1;
        let curves = attribute_flexibility(plan, &elec, &city, &order).unwrap();
        let last = &curves.last().unwrap().curve;
        let bitwise = last.sorted.len() == reference.sorted.len()
            && last
                .sorted
                .iter()
                .zip(&reference.sorted)
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if bitwise {
            identical += 1;
        }
    }
    criterion(
        8,
        "attribution endpoint invariance over all 24 permutations",
        identical == 24 && total == 24,
        &format!("{identical}/{total} permutations bitwise identical"),
    );
}

// ---------------------------------------------------------------------------
// 9. Directional reproduction of the headline result
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_directional_headline() {
    let started = std::time::Instant::now();
    let plan = week_plan();
    let elec = "electricity".into();
    let city = "city".into();
    let curves = attribute_flexibility(plan, &elec, &city, &FlexClass::ALL).unwrap();
    let inflexible = &curves.first().unwrap().curve;
    let flexible = &curves.last().unwrap().curve;

    let peak_ok = inflexible.peak > 1.05 * flexible.peak;
    let excess_ok = inflexible.excess_generation > 1.05 * flexible.excess_generation;

    // PtX must hold the largest share of flexible electricity demand...
    let split = demand_split(plan, &elec, &city);
    let share = |class: FlexClass| split.actual[&class].iter().sum::<f64>();
    let ptx_share = share(FlexClass::Ptx);
    let largest_share = FlexClass::ALL
        .iter()
        .all(|&c| c == FlexClass::Ptx || ptx_share > share(c));

    // ... and the largest single residual-demand reduction among the steps.
    let reductions: Vec<(String, f64)> = curves
        .windows(2)
        .map(|w| {
            (
                w[1].label.clone(),
                w[0].curve.residual_demand - w[1].curve.residual_demand,
            )
        })
        .collect();
    let ptx_reduction = reductions
        .iter()
        .find(|(label, _)| label == "+ptx")
        .map(|(_, v)| *v)
        .unwrap();
    let ptx_largest = reductions
        .iter()
        .all(|(label, v)| label == "+ptx" || ptx_reduction > 1.05 * v.max(0.0));

    let elapsed = started.elapsed();
    criterion(
        9,
        "directional headline: flexibility halves peaks, PtX dominates",
        peak_ok && excess_ok && largest_share && ptx_largest && elapsed.as_secs_f64() < 120.0,
        &format!(
            "peak {:.2}->{:.2} GW, excess {:.1}->{:.1} GWh, PtX reduction {:.1} GWh of {:?}",
            inflexible.peak,
            flexible.peak,
            inflexible.excess_generation,
            flexible.excess_generation,
            ptx_reduction,
            reductions
                .iter()
                .map(|(l, v)| format!("{l}:{v:.1}"))
                .collect::<Vec<_>>()
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. No-grid-expansion monotonicity
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_no_grid_expansion_monotonicity() {
    let base = week_plan();
    let restricted = week_plan_no_grid();
    let objective_ok =
        restricted.objective_breakdown().total >= base.objective_breakdown().total - 1e-9;

    let corridor_base = solved(sample::corridor_pair());
    let corridor_restricted = solved(sample::corridor_pair().without_grid_expansion());
    let corridor_ok = corridor_restricted.objective_breakdown().total
        >= corridor_base.objective_breakdown().total - 1e-9;

    let thermal_base = base.capacity(&"h2-turbine".into(), &"city".into());
    let thermal_restricted = restricted.capacity(&"h2-turbine".into(), &"city".into());
    let thermal_up = thermal_restricted > thermal_base + 1e-6;
    criterion(
        10,
        "no-grid-expansion raises cost and thermal backup substitutes imports",
        objective_ok && corridor_ok && thermal_up,
        &format!(
            "objective {:.2} -> {:.2} Mil.€, thermal capacity {:.3} -> {:.3} GW",
            base.objective_breakdown().total,
            restricted.objective_breakdown().total,
            thermal_base,
            thermal_restricted
        ),
    );
}

// ---------------------------------------------------------------------------
// 11. Verifier independence
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_verifier_detects_injected_faults() {
    let plan = week_plan();
    let dispatch = plan.built.index.dispatch_variables();
    let clean = verify_solution(&plan.built.lp, &plan.solution).unwrap();
    assert!(clean.pass);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut detected = 0usize;
    let trials = 1000usize;
    for _ in 0..trials {
        let var = dispatch[rng.gen_range(0..dispatch.len())];
        let mut perturbed: Solution = plan.solution.clone();
        perturbed.values.as_mut().unwrap()[var] += 1e-3;
        let report = verify_solution(&plan.built.lp, &perturbed).unwrap();
        if !report.pass {
            detected += 1;
        }
    }
    criterion(
        11,
        "verifier detects 1e-3 GW dispatch perturbations",
        detected * 100 >= trials * 99,
        &format!("{detected}/{trials} detected"),
    );
}

// ---------------------------------------------------------------------------
// 12. Determinism of cmd_run
// ---------------------------------------------------------------------------

#[test]
fn criterion_12_cmd_run_determinism() {
    use flexplan::pipeline::{cmd_run, RunConfig};
    let scenario = tempfile::tempdir().unwrap();
    let model = sample::two_region_week();
    let settings = flexplan::scenario::Settings {
        name: model.name.clone(),
        horizon_hours: model.horizon(),
        interest_rate: model.interest_rate,
        charge_om_on_preexisting: model.charge_om_on_preexisting,
        electricity_carrier: "electricity".into(),
        solver: Default::default(),
    };
    flexplan::scenario::write_scenario(&model, &settings, scenario.path()).unwrap();

    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    assert_eq!(cmd_run(scenario.path(), &RunConfig::new(out_a.path())), 0);
    assert_eq!(cmd_run(scenario.path(), &RunConfig::new(out_b.path())), 0);

    let mut all_equal = true;
    let mut compared = 0usize;
    let mut stack = vec![std::path::PathBuf::new()];
    while let Some(rel) = stack.pop() {
        for entry in std::fs::read_dir(out_a.path().join(&rel)).unwrap() {
            let entry = entry.unwrap();
            let rel_path = rel.join(entry.file_name());
            if entry.path().is_dir() {
                stack.push(rel_path);
            } else if rel_path.extension().is_some_and(|e| e == "csv") {
                compared += 1;
                let a = std::fs::read(out_a.path().join(&rel_path)).unwrap();
                let b = std::fs::read(out_b.path().join(&rel_path)).unwrap();
                if a != b {
                    all_equal = false;
                }
            }
        }
    }
    criterion(
        12,
        "repeated cmd_run yields byte-identical solution CSVs",
        all_equal && compared >= 8,
        &format!("{compared} CSV files compared"),
    );
}
