//! Property tests for library invariants: residual-curve identities on
//! arbitrary floats, annuity monotonicity, validated-models-always-build,
//! scaling and refinement monotonicity, and verifier tightness on balances.

use flexplan::analysis::residual_curve;
use flexplan::builder::build_lp;
use flexplan::model::{annuitize, CapacityFactor, Carrier, EnergyModel, ImportOption, Technology};
use flexplan::sample;
use flexplan::solver::{solve, verify_solution, SolveOptions};
use flexplan::validate::{has_errors, validate_model};

use proptest::prelude::*;

proptest! {
    #[test]
    fn residual_identity_within_float_noise(
        pairs in prop::collection::vec((0.0f64..500.0, 0.0f64..500.0), 1..300)
    ) {
        let demand: Vec<f64> = pairs.iter().map(|(d, _)| *d).collect();
        let gen: Vec<f64> = pairs.iter().map(|(_, g)| *g).collect();
        let curve = residual_curve(&demand, &gen).unwrap();
        let direct: f64 = demand.iter().zip(&gen).map(|(d, g)| d - g).sum();
        let scale = demand.iter().sum::<f64>() + gen.iter().sum::<f64>() + 1.0;
        prop_assert!((curve.residual_demand - curve.excess_generation - direct).abs() < 1e-9 * scale);
        prop_assert!(curve.sorted.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(curve.peak, curve.sorted[0]);
        prop_assert!(curve.residual_demand >= 0.0 && curve.excess_generation >= 0.0);
    }

    #[test]
    fn residual_metrics_permutation_invariant(
        pairs in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 2..50),
        rotate in 0usize..50
    ) {
        let n = pairs.len();
        let rotated: Vec<(f64, f64)> = (0..n).map(|i| pairs[(i + rotate) % n]).collect();
        let curve = |p: &[(f64, f64)]| {
            let d: Vec<f64> = p.iter().map(|(d, _)| *d).collect();
            let g: Vec<f64> = p.iter().map(|(_, g)| *g).collect();
            residual_curve(&d, &g).unwrap()
        };
        let a = curve(&pairs);
        let b = curve(&rotated);
        prop_assert_eq!(a.sorted, b.sorted);
        prop_assert_eq!(a.peak, b.peak);
        prop_assert_eq!(a.hours_negative, b.hours_negative);
    }

    #[test]
    fn annuity_monotone(
        investment in 0.0f64..5000.0,
        lifetime in 1.0f64..80.0,
        interest in 0.0f64..0.2,
    ) {
        let base = annuitize(investment, lifetime, interest).unwrap();
        prop_assert!(annuitize(investment + 10.0, lifetime, interest).unwrap() >= base);
        prop_assert!(annuitize(investment, lifetime, interest + 0.01).unwrap() >= base - 1e-12);
        prop_assert!(annuitize(investment, lifetime + 5.0, interest).unwrap() <= base + 1e-12);
    }

    /// Models that pass validation never fail to build on structural
    /// grounds.
    #[test]
    fn validated_models_build(
        horizon in prop::sample::select(vec![2u32, 4, 8, 12]),
        demand_level in 0.5f64..20.0,
        efficiency in 0.3f64..3.5,
        resolution in prop::sample::select(vec![1u32, 2, 4]),
        capacity_factor in 0.05f64..1.0,
        with_storage in any::<bool>(),
        must_run in any::<bool>(),
    ) {
        let demand: Vec<f64> = (0..horizon).map(|t| demand_level * (1.0 + 0.3 * (t as f64).sin()).abs()).collect();
        let load = Carrier::new("load", resolution).demand("r", demand);
        let fuel = Carrier::new("fuel", 1);
        let mut converter = Technology::new("converter")
            .in_region("r")
            .input("fuel", 1.0)
            .output("load", 1.0)
            .efficiency(efficiency)
            .capacity_factor(CapacityFactor::Constant(capacity_factor))
            .costs(10.0, 0.1, 0.01, 20.0);
        if must_run {
            converter = converter.must_run();
        }
        let mut storages = Vec::new();
        if with_storage && !must_run {
            storages.push(
                flexplan::model::StorageTechnology::new("store", "load")
                    .in_region("r")
                    .power_costs(1.0, 0.0)
                    .energy_costs(0.1, 0.0)
                    .efficiencies(0.9, 0.9, 0.99)
                    .energy_to_power(0.1, 10.0),
            );
        }
        let model = EnergyModel::assemble(
            "prop",
            horizon,
            vec!["r".into()],
            vec![load, fuel],
            vec![converter],
            storages,
            vec![],
            vec![ImportOption {
                carrier: "fuel".into(),
                region: "r".into(),
                price_eur_per_mwh: 25.0,
                limit_gw: None,
            }],
        );
        let diagnostics = validate_model(&model);
        if !has_errors(&diagnostics) {
            prop_assert!(build_lp(&model).is_ok());
        }
    }
}

/// Exact lambda-scaling when nothing binds: no bounds, no pre-existing
/// capacity, no segment caps.
#[test]
fn objective_scales_linearly_with_demand() {
    let base = sample::single_tech_two_hours();
    let built = build_lp(&base).unwrap();
    let objective = solve(&built.lp, &SolveOptions::default())
        .objective
        .unwrap();
    for lambda in [0.5, 2.0, 3.7] {
        let mut scaled = base.clone();
        for carrier in &mut scaled.carriers {
            for series in carrier.exogenous_demand.values_mut() {
                for v in series.iter_mut() {
                    *v *= lambda;
                }
            }
        }
        let built = build_lp(&scaled).unwrap();
        let scaled_objective = solve(&built.lp, &SolveOptions::default())
            .objective
            .unwrap();
        let expected = lambda * objective;
        assert!(
            (scaled_objective - expected).abs() <= 1e-6 * expected.abs(),
            "lambda {lambda}: {scaled_objective} vs {expected}"
        );
    }
}

/// Subadditivity on a fixture with bounds: scaling demand by lambda scales
/// the objective by at most lambda.
#[test]
fn objective_subadditive_under_scaling() {
    let base = sample::mustrun_pair();
    let objective = solve(&build_lp(&base).unwrap().lp, &SolveOptions::default())
        .objective
        .unwrap();
    let lambda = 0.6; // downscaling keeps the bounded fixture feasible
    let mut scaled = base.clone();
    for carrier in &mut scaled.carriers {
        for series in carrier.exogenous_demand.values_mut() {
            for v in series.iter_mut() {
                *v *= lambda;
            }
        }
    }
    let scaled_objective = solve(&build_lp(&scaled).unwrap().lp, &SolveOptions::default())
        .objective
        .unwrap();
    assert!(scaled_objective <= lambda * objective + 1e-9);
}

/// Refining a coarse carrier to hourly balances never lowers the optimum.
#[test]
fn finer_resolution_never_cheaper() {
    let coarse = sample::heat_blocks();
    let coarse_objective = solve(&build_lp(&coarse).unwrap().lp, &SolveOptions::default())
        .objective
        .unwrap();
    let mut fine = coarse.clone();
    for carrier in &mut fine.carriers {
        if carrier.id.as_str() == "process-heat" {
            carrier.resolution = 1;
        }
    }
    let fine = EnergyModel::assemble(
        "heat-blocks-hourly",
        8,
        fine.regions.clone(),
        fine.carriers.clone(),
        fine.technologies.clone(),
        fine.storages.clone(),
        fine.corridors.clone(),
        fine.imports.clone(),
    )
    .with_interest(0.0);
    let fine_objective = solve(&build_lp(&fine).unwrap().lp, &SolveOptions::default())
        .objective
        .unwrap();
    assert!(
        fine_objective >= coarse_objective - 1e-9,
        "hourly {fine_objective} vs 4-hour {coarse_objective}"
    );
}

/// Embedded storage only reshapes electricity draw; losses mean the lossy
/// system never consumes less than its loss-free relaxation, while
/// delivered heat stays pinned to demand.
#[test]
fn embedded_storage_losses_never_reduce_consumption() {
    fn model_with(charge_eff: f64, discharge_eff: f64, self_discharge: f64) -> EnergyModel {
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
            .embedded(flexplan::model::EmbeddedStorageSpec {
                energy_cost: 0.001,
                power_cost: 0.001,
                charge_efficiency: charge_eff,
                discharge_efficiency: discharge_eff,
                self_discharge,
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
        EnergyModel::assemble(
            "embedded-loss",
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
        .with_interest(0.0)
    }

    let solve_draw = |model: EnergyModel| {
        let built = build_lp(&model).unwrap();
        let solution = solve(&built.lp, &SolveOptions::default());
        assert!(solution.is_optimal());
        let draw: f64 = (0..8)
            .map(|t| solution.value(&built.lp, &format!("U|hp|r|{t}")).unwrap())
            .sum();
        let delivered: f64 = (0..8)
            .map(|t| solution.value(&built.lp, &format!("G|hp|r|{t}")).unwrap())
            .sum();
        (draw, delivered)
    };
    let (lossless_draw, lossless_heat) = solve_draw(model_with(1.0, 1.0, 1.0));
    let (lossy_draw, lossy_heat) = solve_draw(model_with(0.9, 0.9, 0.95));
    assert!(lossy_draw >= lossless_draw - 1e-9);
    // Heat leaving the boundary equals demand in both cases.
    assert!((lossless_heat - 12.0).abs() < 1e-9);
    assert!((lossy_heat - 12.0).abs() < 1e-9);
}

/// Balance rows of solved fixtures close at the verifier's tightest scale.
#[test]
fn balances_close_to_1e9_on_solved_fixtures() {
    for model in [
        sample::single_tech_two_hours(),
        sample::dispatch_12h(),
        sample::heat_blocks(),
        sample::bev_two_days(),
        sample::corridor_pair(),
    ] {
        let built = build_lp(&model).unwrap();
        let solution = solve(&built.lp, &SolveOptions::default());
        assert!(solution.is_optimal());
        let report = verify_solution(&built.lp, &solution).unwrap();
        if let Some(family) = report.families.get("bal") {
            assert!(
                family.max_rel_violation <= 1e-9,
                "balance drift {} on {}",
                family.max_rel_violation,
                model.name
            );
        }
    }
}

/// Every variable appears in at least one constraint or carries finite
/// bounds.
#[test]
fn no_free_floating_variables() {
    for model in [sample::two_region_week(), sample::corridor_pair()] {
        let built = build_lp(&model).unwrap();
        let mut used = vec![false; built.lp.num_variables()];
        for con in &built.lp.constraints {
            for &(v, _) in &con.terms {
                used[v] = true;
            }
        }
        for (i, var) in built.lp.variables.iter().enumerate() {
            assert!(
                used[i] || (var.lower.is_finite() && var.upper.is_finite()),
                "variable {} is unconstrained",
                var.name
            );
        }
    }
}
