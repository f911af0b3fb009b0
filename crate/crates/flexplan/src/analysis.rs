//! Residual-load analytics: sorted residual curves, ex-post inflexible
//! demand reconstruction, step-wise flexibility attribution, supply
//! decomposition, and annual flow aggregates.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{CarrierId, DispatchMode, FlexClass, RegionId};
use crate::plan::SolvedPlan;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("series must contain at least one element")]
    Empty,
    #[error("flexibility class '{0}' appears more than once in the order")]
    DuplicateClass(FlexClass),
}

/// Residual series sorted in descending order with its headline metrics.
/// Hourly steps, so GW values integrate to GWh one-to-one.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualCurve {
    /// Descending residual values, GW.
    pub sorted: Vec<f64>,
    /// First element of the sorted series, GW.
    pub peak: f64,
    /// Area above zero, GWh.
    pub residual_demand: f64,
    /// Area below zero as a positive number, GWh.
    pub excess_generation: f64,
    pub hours_negative: usize,
}

/// Demand minus fluctuating generation, sorted descending.
pub fn residual_curve(
    demand: &[f64],
    fluctuating_gen: &[f64],
) -> Result<ResidualCurve, AnalysisError> {
    if demand.len() != fluctuating_gen.len() {
        return Err(AnalysisError::LengthMismatch(
            demand.len(),
            fluctuating_gen.len(),
        ));
    }
    if demand.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut sorted: Vec<f64> = demand
        .iter()
        .zip(fluctuating_gen)
        .map(|(d, g)| d - g)
        .collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let peak = sorted[0];
    let mut residual_demand = 0.0;
    let mut excess = 0.0;
    let mut hours_negative = 0;
    for &v in &sorted {
        if v > 0.0 {
            residual_demand += v;
        } else if v < 0.0 {
            excess += -v;
            hours_negative += 1;
        }
    }
    Ok(ResidualCurve {
        sorted,
        peak,
        residual_demand,
        excess_generation: excess,
        hours_negative,
    })
}

/// Hourly electricity demand of one region split into the unclassified base
/// and per-class actual/counterfactual series. Sums are always taken in the
/// canonical class order so attribution endpoints are bit-reproducible.
#[derive(Debug, Clone)]
pub struct DemandSplit {
    pub base: Vec<f64>,
    pub actual: BTreeMap<FlexClass, Vec<f64>>,
    pub inflexible: BTreeMap<FlexClass, Vec<f64>>,
}

impl DemandSplit {
    /// base + all actual class series (canonical order).
    pub fn actual_total(&self) -> Vec<f64> {
        self.total(FlexClass::ALL.as_ref())
    }

    /// base + all counterfactual class series (canonical order).
    pub fn inflexible_total(&self) -> Vec<f64> {
        self.total(&[])
    }

    /// base + actual for `replaced` classes, counterfactual for the rest.
    pub fn total(&self, replaced: &[FlexClass]) -> Vec<f64> {
        let mut out = self.base.clone();
        for class in FlexClass::ALL {
            let series = if replaced.contains(&class) {
                &self.actual[&class]
            } else {
                &self.inflexible[&class]
            };
            for (o, v) in out.iter_mut().zip(series) {
                *o += v;
            }
        }
        out
    }
}

fn add_into(acc: &mut [f64], series: &[f64]) {
    for (a, v) in acc.iter_mut().zip(series) {
        *a += v;
    }
}

/// Reconstructs the counterfactual split for one region:
/// heat-driven draw follows the hourly heat demand profile through the
/// technology's efficiency, BEV charging follows the availability profile
/// rescaled to the solution's annual charge, PtX draws its annual input at
/// constant power, everything else is copied from the solution.
pub fn demand_split(plan: &SolvedPlan, electricity: &CarrierId, region: &RegionId) -> DemandSplit {
    let horizon = plan.horizon();
    let mut base = vec![0.0; horizon];
    if let Some(d) = plan.model.demand(electricity, region) {
        add_into(&mut base, d);
    }
    let mut actual: BTreeMap<FlexClass, Vec<f64>> = FlexClass::ALL
        .iter()
        .map(|&c| (c, vec![0.0; horizon]))
        .collect();
    let mut inflexible = actual.clone();

    let mut techs: Vec<_> = plan.model.technologies.iter().collect();
    techs.sort_by(|a, b| a.id.cmp(&b.id));
    for tech in techs {
        if !tech.regions.contains(region) {
            continue;
        }
        let draw = plan.input_of(&tech.id, region, electricity);
        if draw.is_empty() {
            continue;
        }
        match tech.flex_class {
            None => add_into(&mut base, &draw),
            Some(class) => {
                let counterfactual = match class {
                    FlexClass::SpaceProcessHeat | FlexClass::DistrictHeat => {
                        heat_counterfactual(plan, tech, region, &draw)
                    }
                    FlexClass::Bev => {
                        profile_counterfactual(tech.availability_profile.as_deref(), &draw)
                    }
                    FlexClass::Ptx => {
                        let total: f64 = draw.iter().sum();
                        vec![total / horizon as f64; horizon]
                    }
                };
                add_into(actual.get_mut(&class).unwrap(), &draw);
                add_into(inflexible.get_mut(&class).unwrap(), &counterfactual);
            }
        }
    }
    DemandSplit {
        base,
        actual,
        inflexible,
    }
}

/// Electricity draw if output had followed the hourly profile of the output
/// carrier's demand with no coarse-block shifting and no embedded storage.
fn heat_counterfactual(
    plan: &SolvedPlan,
    tech: &crate::model::Technology,
    region: &RegionId,
    actual_draw: &[f64],
) -> Vec<f64> {
    let horizon = plan.horizon();
    let annual_draw: f64 = actual_draw.iter().sum();
    if annual_draw == 0.0 {
        return vec![0.0; horizon];
    }
    // Profile carrier: the output with the largest share.
    let profile_carrier = tech
        .outputs
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, _)| c.clone());
    let profile = profile_carrier.and_then(|carrier| {
        let exogenous = plan.model.demand(&carrier, region).map(|d| d.to_vec());
        match exogenous {
            Some(d) if d.iter().sum::<f64>() > 0.0 => Some(d),
            _ => {
                // Induced demand: use the solved hourly consumption instead.
                let mut consumed = vec![0.0; horizon];
                for other in &plan.model.technologies {
                    if other.regions.contains(region) {
                        add_into(&mut consumed, &plan.input_of(&other.id, region, &carrier));
                    }
                }
                (consumed.iter().sum::<f64>() > 0.0).then_some(consumed)
            }
        }
    });
    match profile {
        None => vec![annual_draw / horizon as f64; horizon],
        Some(profile) => {
            let total: f64 = profile.iter().sum();
            profile.iter().map(|p| annual_draw * p / total).collect()
        }
    }
}

/// Charging proportional to the availability profile, rescaled so the
/// annual charge matches the solution.
fn profile_counterfactual(profile: Option<&[f64]>, actual_draw: &[f64]) -> Vec<f64> {
    let annual: f64 = actual_draw.iter().sum();
    match profile {
        Some(profile) if profile.iter().sum::<f64>() > 0.0 => {
            let total: f64 = profile.iter().sum();
            profile.iter().map(|p| annual * p / total).collect()
        }
        _ => vec![annual / actual_draw.len().max(1) as f64; actual_draw.len()],
    }
}

/// Counterfactual hourly electricity demand per region (all classes
/// replaced by their inflexible reconstruction).
pub fn inflexible_demand(
    plan: &SolvedPlan,
    electricity: &CarrierId,
) -> BTreeMap<RegionId, Vec<f64>> {
    let mut regions = plan.model.regions.clone();
    regions.sort();
    regions
        .into_iter()
        .map(|region| {
            let split = demand_split(plan, electricity, &region);
            (region, split.inflexible_total())
        })
        .collect()
}

/// Available fluctuating-renewable generation alpha * (K + preexisting),
/// before implicit curtailment.
pub fn fluctuating_available(
    plan: &SolvedPlan,
    electricity: &CarrierId,
    region: &RegionId,
) -> Vec<f64> {
    let horizon = plan.horizon();
    let mut out = vec![0.0; horizon];
    let mut techs: Vec<_> = plan.model.technologies.iter().collect();
    techs.sort_by(|a, b| a.id.cmp(&b.id));
    for tech in techs {
        if !tech.fluctuating || !tech.regions.contains(region) {
            continue;
        }
        let share = tech
            .outputs
            .iter()
            .find(|(c, _)| c == electricity)
            .map(|(_, s)| *s)
            .unwrap_or(0.0);
        if share == 0.0 {
            continue;
        }
        let cap = plan.capacity(&tech.id, region) + tech.preexisting_in(region);
        for (t, o) in out.iter_mut().enumerate() {
            *o += share * tech.capacity_factor.at(region, t) * cap;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledCurve {
    pub label: String,
    #[serde(flatten)]
    pub curve: ResidualCurve,
}

/// Successively replaces counterfactual class demand with the solution's
/// hourly series, returning one curve per step: the first is fully
/// inflexible, the last equals the actual residual curve for every
/// permutation of the order.
pub fn attribute_flexibility(
    plan: &SolvedPlan,
    electricity: &CarrierId,
    region: &RegionId,
    order: &[FlexClass],
) -> Result<Vec<LabeledCurve>, AnalysisError> {
    for (i, class) in order.iter().enumerate() {
        if order[..i].contains(class) {
            return Err(AnalysisError::DuplicateClass(*class));
        }
    }
    let split = demand_split(plan, electricity, region);
    let fluct = fluctuating_available(plan, electricity, region);
    let mut curves = Vec::with_capacity(order.len() + 1);
    let mut replaced: Vec<FlexClass> = Vec::new();
    curves.push(LabeledCurve {
        label: "inflexible".to_string(),
        curve: residual_curve(&split.total(&replaced), &fluct)?,
    });
    for class in order {
        replaced.push(*class);
        curves.push(LabeledCurve {
            label: format!("+{class}"),
            curve: residual_curve(&split.total(&replaced), &fluct)?,
        });
    }
    Ok(curves)
}

/// How the system meets the residual load, hour by hour, sorted by
/// residual value descending. Columns sum to the residual exactly up to
/// float rounding.
#[derive(Debug, Clone, Serialize)]
pub struct SupplyDecomposition {
    /// Original hour index per sorted row.
    pub hour: Vec<usize>,
    pub residual: Vec<f64>,
    pub net_imports: Vec<f64>,
    pub thermal: Vec<f64>,
    pub storage_net: Vec<f64>,
    /// Nonpositive: implicitly spilled fluctuating generation.
    pub curtailment: Vec<f64>,
}

pub fn supply_decomposition(
    plan: &SolvedPlan,
    electricity: &CarrierId,
    region: &RegionId,
) -> SupplyDecomposition {
    let horizon = plan.horizon();
    let split = demand_split(plan, electricity, region);
    let demand = split.actual_total();
    let fluct = fluctuating_available(plan, electricity, region);

    let mut thermal = vec![0.0; horizon];
    let mut curtail = vec![0.0; horizon];
    let mut techs: Vec<_> = plan.model.technologies.iter().collect();
    techs.sort_by(|a, b| a.id.cmp(&b.id));
    for tech in techs {
        if !tech.regions.contains(region) {
            continue;
        }
        let share = tech
            .outputs
            .iter()
            .find(|(c, _)| c == electricity)
            .map(|(_, s)| *s)
            .unwrap_or(0.0);
        if share == 0.0 {
            continue;
        }
        let gen = plan.generation_of(&tech.id, region, electricity);
        if tech.fluctuating {
            let cap = plan.capacity(&tech.id, region) + tech.preexisting_in(region);
            for t in 0..horizon {
                let available = share * tech.capacity_factor.at(region, t) * cap;
                curtail[t] -= (available - gen[t]).max(0.0);
            }
        } else {
            add_into(&mut thermal, &gen);
        }
    }

    let mut storage_net = vec![0.0; horizon];
    for storage in &plan.model.storages {
        if &storage.carrier != electricity || !storage.regions.contains(region) {
            continue;
        }
        let discharge = plan.storage_discharge(&storage.id, region);
        let charge = plan.storage_charge(&storage.id, region);
        for t in 0..horizon {
            storage_net[t] += storage.discharge_efficiency * discharge[t] - charge[t];
        }
    }

    let mut net_imports = vec![0.0; horizon];
    for corridor in &plan.model.corridors {
        if &corridor.carrier != electricity {
            continue;
        }
        let delivered = 1.0 - corridor.loss_fraction();
        let fwd = plan.corridor_flow_fwd(&corridor.id);
        let bwd = plan.corridor_flow_bwd(&corridor.id);
        if &corridor.to == region {
            for t in 0..horizon {
                net_imports[t] += delivered * fwd[t] - bwd[t];
            }
        } else if &corridor.from == region {
            for t in 0..horizon {
                net_imports[t] += delivered * bwd[t] - fwd[t];
            }
        }
    }
    add_into(&mut net_imports, &plan.imports_into(electricity, region));

    let residual: Vec<f64> = demand.iter().zip(&fluct).map(|(d, g)| d - g).collect();
    let mut order: Vec<usize> = (0..horizon).collect();
    order.sort_by(|&a, &b| residual[b].total_cmp(&residual[a]));

    let pick = |v: &[f64]| order.iter().map(|&t| v[t]).collect::<Vec<f64>>();
    SupplyDecomposition {
        residual: pick(&residual),
        net_imports: pick(&net_imports),
        thermal: pick(&thermal),
        storage_net: pick(&storage_net),
        curtailment: pick(&curtail),
        hour: order,
    }
}

/// Annual import/export totals versus sums of hourly net positions; the
/// two differ and both are reported.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TradeSummary {
    /// Sum of delivered inflows, GWh.
    pub annual_import: f64,
    /// Sum of outflows as sent, GWh.
    pub annual_export: f64,
    /// Sum of positive hourly net positions, GWh.
    pub net_import_hour_sum: f64,
    /// Sum of negative hourly net positions (as a positive number), GWh.
    pub net_export_hour_sum: f64,
}

pub fn trade_summary(plan: &SolvedPlan, carrier: &CarrierId, region: &RegionId) -> TradeSummary {
    let horizon = plan.horizon();
    let mut inflow = vec![0.0; horizon];
    let mut outflow = vec![0.0; horizon];
    for corridor in &plan.model.corridors {
        if &corridor.carrier != carrier {
            continue;
        }
        let delivered = 1.0 - corridor.loss_fraction();
        let fwd = plan.corridor_flow_fwd(&corridor.id);
        let bwd = plan.corridor_flow_bwd(&corridor.id);
        if &corridor.to == region {
            for t in 0..horizon {
                inflow[t] += delivered * fwd[t];
                outflow[t] += bwd[t];
            }
        } else if &corridor.from == region {
            for t in 0..horizon {
                inflow[t] += delivered * bwd[t];
                outflow[t] += fwd[t];
            }
        }
    }
    let mut net_import = 0.0;
    let mut net_export = 0.0;
    for t in 0..horizon {
        let net = inflow[t] - outflow[t];
        if net > 0.0 {
            net_import += net;
        } else {
            net_export += -net;
        }
    }
    TradeSummary {
        annual_import: inflow.iter().sum(),
        annual_export: outflow.iter().sum(),
        net_import_hour_sum: net_import,
        net_export_hour_sum: net_export,
    }
}

/// A directed edge of the aggregated annual flow graph. Quantities are in
/// model units: GWh for energy carriers, service units for transport.
#[derive(Debug, Clone, Serialize)]
pub struct FlowEdge {
    pub source: String,
    pub target: String,
    pub quantity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowAggregate {
    pub edges: Vec<FlowEdge>,
}

/// Aggregates annual flows over regions and hours. Technologies sharing a
/// group label collapse into one node; storage in/out pairs land on the
/// same carrier; exchange is netted per corridor.
pub fn aggregate_flows(plan: &SolvedPlan) -> FlowAggregate {
    let mut edges: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut add = |source: String, target: String, quantity: f64| {
        if quantity != 0.0 {
            *edges.entry((source, target)).or_insert(0.0) += quantity;
        }
    };

    let mut techs: Vec<_> = plan.model.technologies.iter().collect();
    techs.sort_by(|a, b| a.id.cmp(&b.id));
    for tech in techs {
        let node = tech.group_name().to_string();
        for region in &tech.regions {
            for (carrier, _) in &tech.inputs {
                let total: f64 = plan.input_of(&tech.id, region, carrier).iter().sum();
                add(carrier.to_string(), node.clone(), total);
            }
            for (carrier, _) in &tech.outputs {
                let total: f64 = plan.generation_of(&tech.id, region, carrier).iter().sum();
                add(node.clone(), carrier.to_string(), total);
            }
        }
    }
    for storage in &plan.model.storages {
        let node = storage.id.to_string();
        for region in &storage.regions {
            let charged: f64 = plan.storage_charge(&storage.id, region).iter().sum();
            let discharged: f64 = plan
                .storage_discharge(&storage.id, region)
                .iter()
                .sum::<f64>()
                * storage.discharge_efficiency;
            add(storage.carrier.to_string(), node.clone(), charged);
            add(node.clone(), storage.carrier.to_string(), discharged);
        }
    }
    for corridor in &plan.model.corridors {
        let delivered = 1.0 - corridor.loss_fraction();
        let fwd: f64 = plan.corridor_flow_fwd(&corridor.id).iter().sum();
        let bwd: f64 = plan.corridor_flow_bwd(&corridor.id).iter().sum();
        let net = delivered * (fwd - bwd);
        let (source, target, quantity) = if net >= 0.0 {
            (corridor.from.to_string(), corridor.to.to_string(), net)
        } else {
            (corridor.to.to_string(), corridor.from.to_string(), -net)
        };
        add(
            source.to_string(),
            format!("{target}:{}", corridor.carrier),
            quantity,
        );
    }
    for (carrier, region, _) in plan.built.index.import_flow.keys() {
        let total: f64 = plan.imports_into(carrier, region).iter().sum();
        add(format!("import:{carrier}"), carrier.to_string(), total);
    }
    // Final demand sinks.
    for carrier in &plan.model.carriers {
        let total: f64 = carrier
            .exogenous_demand
            .values()
            .map(|d| d.iter().sum::<f64>())
            .sum();
        add(carrier.id.to_string(), "final-demand".to_string(), total);
    }

    FlowAggregate {
        edges: edges
            .into_iter()
            .map(|((source, target), quantity)| FlowEdge {
                source,
                target,
                quantity,
            })
            .collect(),
    }
}

/// Electricity draw of must-run technologies, used by tests comparing
/// against loss-free relief relaxations.
pub fn annual_input(plan: &SolvedPlan, tech: &crate::model::TechId, region: &RegionId) -> f64 {
    plan.input(tech, region).iter().sum()
}

/// Fluctuating flag helper used by reports.
pub fn is_dispatchable(plan: &SolvedPlan, tech: &crate::model::TechId) -> bool {
    plan.model
        .technology(tech)
        .map(|t| !t.fluctuating && t.dispatch == DispatchMode::MeritOrder)
        .unwrap_or(false)
}


#[cfg(test)]
mod plan_tests {
    use super::*;
    use crate::builder::build_lp;
    use crate::model::{Carrier, EnergyModel, FlexClass, ImportOption, Technology};
    use crate::plan::SolvedPlan;
    use crate::sample;
    use crate::solver::{solve, SolveOptions};

    fn solved(model: EnergyModel) -> SolvedPlan {
        let built = build_lp(&model).unwrap();
        let solution = solve(&built.lp, &SolveOptions::default());
        SolvedPlan::new(model, built, solution).unwrap()
    }

    fn ptx_only(horizon: usize) -> EnergyModel {
        let electricity = Carrier::new("electricity", 1);
        let hydrogen = Carrier::new("hydrogen", horizon as u32).demand("r", vec![0.7; horizon]);
        let electrolyzer = Technology::new("electrolyzer")
            .in_region("r")
            .input("electricity", 1.0)
            .output("hydrogen", 1.0)
            .efficiency(0.7)
            .costs(1.0, 0.0, 0.0, 10.0)
            .flex_class(FlexClass::Ptx);
        EnergyModel::assemble(
            "ptx-only",
            horizon as u32,
            vec!["r".into()],
            vec![electricity, hydrogen],
            vec![electrolyzer],
            vec![],
            vec![],
            vec![ImportOption {
                carrier: "electricity".into(),
                region: "r".into(),
                price_eur_per_mwh: 30.0,
                limit_gw: None,
            }],
        )
        .with_interest(0.0)
    }

    #[test]
    fn no_flex_classes_mean_inflexible_equals_actual() {
        let plan = solved(sample::dispatch_12h());
        let elec = "electricity".into();
        let split = demand_split(&plan, &elec, &"r".into());
        assert_eq!(split.actual_total(), split.inflexible_total());
    }

    #[test]
    fn ptx_counterfactual_is_flat() {
        // Hydrogen balanced over the whole horizon: the electrolyzer is free
        // to follow prices, the counterfactual spreads it uniformly.
        let plan = solved(ptx_only(8));
        let split = demand_split(&plan, &"electricity".into(), &"r".into());
        let inflex = &split.inflexible[&FlexClass::Ptx];
        let total: f64 = split.actual[&FlexClass::Ptx].iter().sum();
        for v in inflex {
            assert!((v - total / 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bev_counterfactual_follows_profile() {
        let plan = solved(sample::bev_two_days());
        let split = demand_split(&plan, &"electricity".into(), &"r".into());
        let actual_total: f64 = split.actual[&FlexClass::Bev].iter().sum();
        let inflex = &split.inflexible[&FlexClass::Bev];
        assert!((inflex.iter().sum::<f64>() - actual_total).abs() < 1e-9);
        // Proportionality to the availability profile: ratio constant.
        let profile = plan
            .model
            .technology(&"bev".into())
            .unwrap()
            .availability_profile
            .clone()
            .unwrap();
        let scale = actual_total / profile.iter().sum::<f64>();
        for (v, p) in inflex.iter().zip(&profile) {
            assert!((v - p * scale).abs() < 1e-9);
        }
    }

    #[test]
    fn heat_counterfactual_preserves_annual_energy() {
        let plan = solved(sample::two_region_week());
        let split = demand_split(&plan, &"electricity".into(), &"city".into());
        for class in [FlexClass::SpaceProcessHeat, FlexClass::DistrictHeat] {
            let actual: f64 = split.actual[&class].iter().sum();
            let inflex: f64 = split.inflexible[&class].iter().sum();
            assert!(
                (actual - inflex).abs() <= 1e-9 * actual.max(1.0),
                "{class}: {actual} vs {inflex}"
            );
        }
    }

    #[test]
    fn attribution_empty_order_is_single_curve() {
        let plan = solved(sample::dispatch_12h());
        let curves = attribute_flexibility(&plan, &"electricity".into(), &"r".into(), &[]).unwrap();
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].label, "inflexible");
    }

    #[test]
    fn attribution_rejects_duplicates() {
        let plan = solved(sample::dispatch_12h());
        let order = [FlexClass::Ptx, FlexClass::Ptx];
        assert!(matches!(
            attribute_flexibility(&plan, &"electricity".into(), &"r".into(), &order),
            Err(AnalysisError::DuplicateClass(FlexClass::Ptx))
        ));
    }

    #[test]
    fn per_step_peak_reductions_telescope() {
        let plan = solved(sample::bev_two_days());
        let order = [FlexClass::Bev];
        let curves =
            attribute_flexibility(&plan, &"electricity".into(), &"r".into(), &order).unwrap();
        let summed: f64 = curves
            .windows(2)
            .map(|w| w[0].curve.peak - w[1].curve.peak)
            .sum();
        let direct = curves.first().unwrap().curve.peak - curves.last().unwrap().curve.peak;
        assert!((summed - direct).abs() < 1e-12);
    }

    #[test]
    fn decomposition_closes_on_bev_fixture() {
        let plan = solved(sample::bev_two_days());
        let d = supply_decomposition(&plan, &"electricity".into(), &"r".into());
        for k in 0..d.residual.len() {
            let sum = d.net_imports[k] + d.thermal[k] + d.storage_net[k] + d.curtailment[k];
            assert!((sum - d.residual[k]).abs() < 1e-6);
        }
        // Autarkic single region: imports identically zero.
        assert!(d.net_imports.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn all_thermal_fixture_is_all_thermal() {
        let plan = solved(sample::single_tech_two_hours());
        let d = supply_decomposition(&plan, &"electricity".into(), &"r".into());
        for k in 0..d.residual.len() {
            assert!((d.thermal[k] - d.residual[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn flow_ratios_match_efficiency() {
        let plan = solved(ptx_only(4));
        let flows = aggregate_flows(&plan);
        let input = flows
            .edges
            .iter()
            .find(|e| e.source == "electricity" && e.target == "electrolyzer")
            .unwrap()
            .quantity;
        let output = flows
            .edges
            .iter()
            .find(|e| e.source == "electrolyzer" && e.target == "hydrogen")
            .unwrap()
            .quantity;
        assert!((output / input - 0.7).abs() < 1e-9);
    }

    #[test]
    fn storage_flows_reflect_losses() {
        let plan = solved(sample::storage_cycle(1.0));
        let flows = aggregate_flows(&plan);
        let charged = flows
            .edges
            .iter()
            .find(|e| e.source == "electricity" && e.target == "battery")
            .map(|e| e.quantity)
            .unwrap_or(0.0);
        let discharged = flows
            .edges
            .iter()
            .find(|e| e.source == "battery" && e.target == "electricity")
            .map(|e| e.quantity)
            .unwrap_or(0.0);
        assert!(charged > 1.0, "storage should cycle, got {charged}");
        assert!((charged - discharged).abs() < 1e-6); // lossless
    }

    #[test]
    fn trade_summary_splits_hourly_net_positions() {
        let plan = solved(sample::corridor_pair());
        let trade = trade_summary(&plan, &"electricity".into(), &"city".into());
        assert!(trade.annual_import > 0.0);
        assert_eq!(trade.annual_export, 0.0);
        // One-way corridor: hourly net sums equal the annual totals.
        assert!((trade.net_import_hour_sum - trade.annual_import).abs() < 1e-9);
    }
}
