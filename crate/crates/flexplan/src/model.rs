//! Domain model: carriers, technologies, storage, exchange corridors,
//! regions, imports, and cost annuitization.
//!
//! All values are immutable after construction and safe to share across
//! threads. Unit convention project-wide: power GW, energy GWh, costs
//! Mil.€, specific import prices €/MWh (converted to 0.001 Mil.€/GWh when
//! objective coefficients are built).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::TimeHierarchy;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("annuity domain error: {0}")]
    Annuity(String),
    #[error("time hierarchy error: {0}")]
    TimeHierarchy(String),
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
        )]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_type!(RegionId);
id_type!(CarrierId);
id_type!(TechId);
id_type!(StorageId);

/// How demand for a carrier arises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BalanceKind {
    /// Networked carrier balanced against exogenous demand per block.
    Network,
    /// Demand induced endogenously by consuming technologies; no exogenous
    /// demand series allowed (e.g. district heat drawn by substations).
    InducedDemand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchMode {
    /// Networked technologies deployed in ascending order of marginal cost.
    MeritOrder,
    /// Unconnected local technologies whose output follows local demand;
    /// joint capacity is sized to peak demand.
    MustRun,
}

/// Demand-flexibility class a technology belongs to, used by the
/// residual-load attribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlexClass {
    SpaceProcessHeat,
    DistrictHeat,
    Bev,
    Ptx,
}

impl FlexClass {
    /// Canonical order, also the default attribution order.
    pub const ALL: [FlexClass; 4] = [
        FlexClass::SpaceProcessHeat,
        FlexClass::DistrictHeat,
        FlexClass::Bev,
        FlexClass::Ptx,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FlexClass::SpaceProcessHeat => "space-process-heat",
            FlexClass::DistrictHeat => "district-heat",
            FlexClass::Bev => "bev",
            FlexClass::Ptx => "ptx",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "space-process-heat" | "space/process heat" | "heat" => {
                Some(FlexClass::SpaceProcessHeat)
            }
            "district-heat" | "district heat" => Some(FlexClass::DistrictHeat),
            "bev" => Some(FlexClass::Bev),
            "ptx" => Some(FlexClass::Ptx),
            _ => None,
        }
    }
}

impl fmt::Display for FlexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An energy carrier with its balance resolution in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct Carrier {
    pub id: CarrierId,
    /// Coarse-group size in hours (1 = hourly balances, 4, 24, ...).
    pub resolution: u32,
    pub balance_kind: BalanceKind,
    /// Per-region hourly series; GW for power carriers, unit/h for services.
    pub exogenous_demand: BTreeMap<RegionId, Vec<f64>>,
}

impl Carrier {
    pub fn new(id: impl Into<CarrierId>, resolution: u32) -> Self {
        Self {
            id: id.into(),
            resolution,
            balance_kind: BalanceKind::Network,
            exogenous_demand: BTreeMap::new(),
        }
    }

    pub fn induced(mut self) -> Self {
        self.balance_kind = BalanceKind::InducedDemand;
        self
    }

    pub fn demand(mut self, region: impl Into<RegionId>, series: Vec<f64>) -> Self {
        self.exogenous_demand.insert(region.into(), series);
        self
    }
}

/// Heat storage embedded inside a single must-run heating technology.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedStorageSpec {
    /// Investment per GWh of storage energy capacity, Mil.€/GWh.
    pub energy_cost: f64,
    /// Investment per GW of storage power capacity, Mil.€/GW.
    pub power_cost: f64,
    /// Charge efficiency rho, (0, 1].
    pub charge_efficiency: f64,
    /// Discharge efficiency applied on the heat leaving the storage, (0, 1].
    pub discharge_efficiency: f64,
    /// Fraction of the level retained per hour, [0, 1].
    pub self_discharge: f64,
    /// Energy-to-power cap: K_lvl <= max_duration * K_st, hours.
    pub max_duration: f64,
}

/// Hourly capacity factor; either one scalar or per-region hourly series.
#[derive(Debug, Clone, PartialEq)]
pub enum CapacityFactor {
    Constant(f64),
    Series(BTreeMap<RegionId, Vec<f64>>),
}

impl CapacityFactor {
    pub fn at(&self, region: &RegionId, hour: usize) -> f64 {
        match self {
            CapacityFactor::Constant(v) => *v,
            CapacityFactor::Series(map) => map.get(region).map(|s| s[hour]).unwrap_or(1.0),
        }
    }
}

/// A conversion, generation, or end-use technology.
#[derive(Debug, Clone, PartialEq)]
pub struct Technology {
    pub id: TechId,
    pub regions: Vec<RegionId>,
    /// Input carriers with shares summing to 1 (empty for pure sources).
    pub inputs: Vec<(CarrierId, f64)>,
    /// Output carriers with shares summing to 1.
    pub outputs: Vec<(CarrierId, f64)>,
    /// Total output per total input; may exceed 1 (heat pumps).
    pub efficiency: f64,
    pub dispatch: DispatchMode,
    pub capacity_factor: CapacityFactor,
    /// Mil.€ per GW of the capacity variable.
    pub investment_cost: f64,
    /// Mil.€ per GW per year.
    pub fixed_om: f64,
    /// Mil.€ per GWh of generation.
    pub variable_cost: f64,
    /// Years.
    pub lifetime: f64,
    /// Per-region [min, max] GW on newly built capacity; default [0, inf).
    pub capacity_bounds: BTreeMap<RegionId, (f64, f64)>,
    /// Per-region brownfield capacity, GW.
    pub preexisting: BTreeMap<RegionId, f64>,
    pub embedded_storage: Option<EmbeddedStorageSpec>,
    /// Hourly cap on input power as a fraction of capacity (BEV grid
    /// connection). When present, the capacity variable is input-denominated.
    pub availability_profile: Option<Vec<f64>>,
    /// Included in "fluctuating renewables" for residual-load analytics.
    pub fluctuating: bool,
    pub flex_class: Option<FlexClass>,
    /// Aggregation node for flow diagrams; defaults to the technology id.
    pub group: Option<String>,
}

impl Technology {
    pub fn new(id: impl Into<TechId>) -> Self {
        Self {
            id: id.into(),
            regions: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            efficiency: 1.0,
            dispatch: DispatchMode::MeritOrder,
            capacity_factor: CapacityFactor::Constant(1.0),
            investment_cost: 0.0,
            fixed_om: 0.0,
            variable_cost: 0.0,
            lifetime: 25.0,
            capacity_bounds: BTreeMap::new(),
            preexisting: BTreeMap::new(),
            embedded_storage: None,
            availability_profile: None,
            fluctuating: false,
            flex_class: None,
            group: None,
        }
    }

    pub fn in_region(mut self, region: impl Into<RegionId>) -> Self {
        self.regions.push(region.into());
        self
    }

    pub fn input(mut self, carrier: impl Into<CarrierId>, share: f64) -> Self {
        self.inputs.push((carrier.into(), share));
        self
    }

    pub fn output(mut self, carrier: impl Into<CarrierId>, share: f64) -> Self {
        self.outputs.push((carrier.into(), share));
        self
    }

    pub fn efficiency(mut self, eta: f64) -> Self {
        self.efficiency = eta;
        self
    }

    pub fn must_run(mut self) -> Self {
        self.dispatch = DispatchMode::MustRun;
        self
    }

    pub fn fluctuating(mut self) -> Self {
        self.fluctuating = true;
        self
    }

    /// Investment Mil.€/GW, fixed O&M Mil.€/GW/a, variable Mil.€/GWh, lifetime a.
    pub fn costs(mut self, investment: f64, fixed_om: f64, variable: f64, lifetime: f64) -> Self {
        self.investment_cost = investment;
        self.fixed_om = fixed_om;
        self.variable_cost = variable;
        self.lifetime = lifetime;
        self
    }

    pub fn capacity_factor(mut self, cf: CapacityFactor) -> Self {
        self.capacity_factor = cf;
        self
    }

    pub fn bounds(mut self, region: impl Into<RegionId>, min: f64, max: f64) -> Self {
        self.capacity_bounds.insert(region.into(), (min, max));
        self
    }

    pub fn preexisting(mut self, region: impl Into<RegionId>, gw: f64) -> Self {
        self.preexisting.insert(region.into(), gw);
        self
    }

    pub fn embedded(mut self, spec: EmbeddedStorageSpec) -> Self {
        self.embedded_storage = Some(spec);
        self
    }

    pub fn availability(mut self, profile: Vec<f64>) -> Self {
        self.availability_profile = Some(profile);
        self
    }

    pub fn flex_class(mut self, class: FlexClass) -> Self {
        self.flex_class = Some(class);
        self
    }

    pub fn group(mut self, name: impl Into<String>) -> Self {
        self.group = Some(name.into());
        self
    }

    pub fn bounds_in(&self, region: &RegionId) -> (f64, f64) {
        self.capacity_bounds
            .get(region)
            .copied()
            .unwrap_or((0.0, f64::INFINITY))
    }

    pub fn preexisting_in(&self, region: &RegionId) -> f64 {
        self.preexisting.get(region).copied().unwrap_or(0.0)
    }

    pub fn group_name(&self) -> &str {
        self.group.as_deref().unwrap_or(self.id.as_str())
    }

    /// Annualized fixed cost per GW: capital-recovery annuity plus fixed O&M.
    pub fn fixed_cost(&self, interest: f64) -> Result<f64, ModelError> {
        Ok(annuitize(self.investment_cost, self.lifetime, interest)? + self.fixed_om)
    }
}

/// A network-side storage technology with separate power and energy costs.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageTechnology {
    pub id: StorageId,
    pub carrier: CarrierId,
    pub regions: Vec<RegionId>,
    pub power_investment: f64,
    pub power_fixed_om: f64,
    pub energy_investment: f64,
    pub energy_fixed_om: f64,
    pub lifetime: f64,
    /// Charge efficiency rho, (0, 1].
    pub charge_efficiency: f64,
    /// Applied on the discharged quantity's contribution to the balance.
    pub discharge_efficiency: f64,
    /// Fraction of the level retained per hour, (0, 1].
    pub self_discharge: f64,
    /// [min, max] hours of energy per unit of power capacity.
    pub energy_to_power_bounds: (f64, f64),
    /// Per-region (power GW, energy GWh) brownfield capacity.
    pub preexisting: BTreeMap<RegionId, (f64, f64)>,
    /// Per-region hourly charging series (hydro reservoirs), GWh/h.
    pub exogenous_inflow: BTreeMap<RegionId, Vec<f64>>,
}

impl StorageTechnology {
    pub fn new(id: impl Into<StorageId>, carrier: impl Into<CarrierId>) -> Self {
        Self {
            id: id.into(),
            carrier: carrier.into(),
            regions: Vec::new(),
            power_investment: 0.0,
            power_fixed_om: 0.0,
            energy_investment: 0.0,
            energy_fixed_om: 0.0,
            lifetime: 25.0,
            charge_efficiency: 1.0,
            discharge_efficiency: 1.0,
            self_discharge: 1.0,
            energy_to_power_bounds: (0.0, f64::INFINITY),
            preexisting: BTreeMap::new(),
            exogenous_inflow: BTreeMap::new(),
        }
    }

    pub fn in_region(mut self, region: impl Into<RegionId>) -> Self {
        self.regions.push(region.into());
        self
    }

    pub fn power_costs(mut self, investment: f64, fixed_om: f64) -> Self {
        self.power_investment = investment;
        self.power_fixed_om = fixed_om;
        self
    }

    pub fn energy_costs(mut self, investment: f64, fixed_om: f64) -> Self {
        self.energy_investment = investment;
        self.energy_fixed_om = fixed_om;
        self
    }

    pub fn lifetime(mut self, years: f64) -> Self {
        self.lifetime = years;
        self
    }

    pub fn efficiencies(mut self, charge: f64, discharge: f64, self_discharge: f64) -> Self {
        self.charge_efficiency = charge;
        self.discharge_efficiency = discharge;
        self.self_discharge = self_discharge;
        self
    }

    pub fn energy_to_power(mut self, min: f64, max: f64) -> Self {
        self.energy_to_power_bounds = (min, max);
        self
    }

    pub fn preexisting(mut self, region: impl Into<RegionId>, power: f64, energy: f64) -> Self {
        self.preexisting.insert(region.into(), (power, energy));
        self
    }

    pub fn inflow(mut self, region: impl Into<RegionId>, series: Vec<f64>) -> Self {
        self.exogenous_inflow.insert(region.into(), series);
        self
    }

    pub fn preexisting_in(&self, region: &RegionId) -> (f64, f64) {
        self.preexisting.get(region).copied().unwrap_or((0.0, 0.0))
    }

    pub fn power_fixed_cost(&self, interest: f64) -> Result<f64, ModelError> {
        Ok(annuitize(self.power_investment, self.lifetime, interest)? + self.power_fixed_om)
    }

    pub fn energy_fixed_cost(&self, interest: f64) -> Result<f64, ModelError> {
        Ok(annuitize(self.energy_investment, self.lifetime, interest)? + self.energy_fixed_om)
    }
}

/// One step of a piecewise NTC capacity-cost curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionSegment {
    /// GW available at this cost step.
    pub capacity: f64,
    /// Investment per GW, Mil.€/GW. Must be non-decreasing along the curve.
    pub unit_cost: f64,
}

/// A transmission corridor between two regions for one carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeCorridor {
    pub id: String,
    pub from: RegionId,
    pub to: RegionId,
    pub carrier: CarrierId,
    pub distance_km: f64,
    /// Fraction of the flow lost per 1000 km, charged to the importer.
    pub loss_per_1000km: f64,
    /// Pre-existing NTC, GW.
    pub preexisting: f64,
    /// Ordered capacity-cost curve; expansion limit is the capacity sum.
    pub segments: Vec<ExpansionSegment>,
    pub lifetime: f64,
    pub fixed_om: f64,
}

impl ExchangeCorridor {
    pub fn new(
        id: impl Into<String>,
        from: impl Into<RegionId>,
        to: impl Into<RegionId>,
        carrier: impl Into<CarrierId>,
    ) -> Self {
        Self {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            carrier: carrier.into(),
            distance_km: 0.0,
            loss_per_1000km: 0.0,
            preexisting: 0.0,
            segments: Vec::new(),
            lifetime: 40.0,
            fixed_om: 0.0,
        }
    }

    pub fn distance(mut self, km: f64, loss_per_1000km: f64) -> Self {
        self.distance_km = km;
        self.loss_per_1000km = loss_per_1000km;
        self
    }

    pub fn preexisting(mut self, gw: f64) -> Self {
        self.preexisting = gw;
        self
    }

    pub fn segment(mut self, capacity: f64, unit_cost: f64) -> Self {
        self.segments.push(ExpansionSegment {
            capacity,
            unit_cost,
        });
        self
    }

    pub fn expansion_limit(&self) -> f64 {
        self.segments.iter().map(|s| s.capacity).sum()
    }

    /// Total loss fraction over the corridor length.
    pub fn loss_fraction(&self) -> f64 {
        self.loss_per_1000km * self.distance_km / 1000.0
    }

    pub fn segment_fixed_cost(&self, unit_cost: f64, interest: f64) -> Result<f64, ModelError> {
        Ok(annuitize(unit_cost, self.lifetime, interest)? + self.fixed_om)
    }
}

/// Option to import a carrier from outside the system at a fixed price.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportOption {
    pub carrier: CarrierId,
    pub region: RegionId,
    /// €/MWh as quoted; converted to 0.001 Mil.€/GWh in the objective.
    pub price_eur_per_mwh: f64,
    /// Optional hourly cap, GW.
    pub limit_gw: Option<f64>,
}

/// The carrier/technology/region/corridor graph plus time hierarchy and
/// cost data; the single input to LP construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    pub name: String,
    pub regions: Vec<RegionId>,
    pub carriers: Vec<Carrier>,
    pub technologies: Vec<Technology>,
    pub storages: Vec<StorageTechnology>,
    pub corridors: Vec<ExchangeCorridor>,
    pub imports: Vec<ImportOption>,
    pub time: TimeHierarchy,
    /// Uniform interest rate for annuitization; default 0.05.
    pub interest_rate: f64,
    /// Charge fixed O&M on pre-existing capacity (reported constant).
    pub charge_om_on_preexisting: bool,
}

impl EnergyModel {
    /// Assembles the model and derives the time hierarchy from the carriers'
    /// resolutions. Unusable resolutions are dropped here and reported by
    /// `validate_model`.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        name: impl Into<String>,
        horizon: u32,
        regions: Vec<RegionId>,
        carriers: Vec<Carrier>,
        technologies: Vec<Technology>,
        storages: Vec<StorageTechnology>,
        corridors: Vec<ExchangeCorridor>,
        imports: Vec<ImportOption>,
    ) -> Self {
        let sizes: BTreeSet<u32> = carriers.iter().map(|c| c.resolution).collect();
        let (time, _dropped) = TimeHierarchy::build_lenient(horizon, &sizes);
        Self {
            name: name.into(),
            regions,
            carriers,
            technologies,
            storages,
            corridors,
            imports,
            time,
            interest_rate: 0.05,
            charge_om_on_preexisting: true,
        }
    }

    pub fn with_interest(mut self, rate: f64) -> Self {
        self.interest_rate = rate;
        self
    }

    pub fn horizon(&self) -> u32 {
        self.time.horizon()
    }

    pub fn carrier(&self, id: &CarrierId) -> Option<&Carrier> {
        self.carriers.iter().find(|c| &c.id == id)
    }

    pub fn technology(&self, id: &TechId) -> Option<&Technology> {
        self.technologies.iter().find(|t| &t.id == id)
    }

    pub fn storage(&self, id: &StorageId) -> Option<&StorageTechnology> {
        self.storages.iter().find(|s| &s.id == id)
    }

    pub fn has_region(&self, id: &RegionId) -> bool {
        self.regions.iter().any(|r| r == id)
    }

    /// Exogenous demand series, or `None` when absent.
    pub fn demand(&self, carrier: &CarrierId, region: &RegionId) -> Option<&[f64]> {
        self.carrier(carrier)
            .and_then(|c| c.exogenous_demand.get(region))
            .map(|v| v.as_slice())
    }

    /// Zeroes every corridor's expansion segments (grid-expansion lockdown).
    pub fn without_grid_expansion(mut self) -> Self {
        for corridor in &mut self.corridors {
            corridor.segments.clear();
        }
        self
    }
}

/// Annualized investment via the standard capital-recovery factor:
/// `investment * i / (1 - (1 + i)^-L)`, straight-line for `i = 0`.
/// Callers add fixed O&M separately to obtain the full fixed cost.
pub fn annuitize(investment: f64, lifetime: f64, interest: f64) -> Result<f64, ModelError> {
    if investment.is_nan() || investment < 0.0 {
        return Err(ModelError::Annuity(format!(
            "investment must be >= 0, got {investment}"
        )));
    }
    if lifetime.is_nan() || lifetime < 1.0 {
        return Err(ModelError::Annuity(format!(
            "lifetime must be >= 1 year, got {lifetime}"
        )));
    }
    if interest.is_nan() || interest < 0.0 {
        return Err(ModelError::Annuity(format!(
            "interest must be >= 0, got {interest}"
        )));
    }
    if interest == 0.0 {
        return Ok(investment / lifetime);
    }
    let factor = interest / (1.0 - (1.0 + interest).powf(-lifetime));
    Ok(investment * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annuity_onshore_wind() {
        // 963.1 Mil.€/GW over 30 a at 5%
        let v = annuitize(963.1, 30.0, 0.05).unwrap();
        assert!((v - 62.65).abs() < 0.01, "got {v}");
    }

    #[test]
    fn annuity_zero_interest() {
        assert_eq!(annuitize(100.0, 20.0, 0.0).unwrap(), 5.0);
    }

    #[test]
    fn annuity_cc_gas_turbine() {
        // 586.0 Mil.€/GW over 25 a at 5%
        let v = annuitize(586.0, 25.0, 0.05).unwrap();
        assert!((v - 41.58).abs() < 0.01, "got {v}");
    }

    #[test]
    fn annuity_domain_errors() {
        assert!(annuitize(100.0, 0.0, 0.05).is_err());
        assert!(annuitize(-1.0, 10.0, 0.05).is_err());
        assert!(annuitize(1.0, 10.0, -0.1).is_err());
        assert!(annuitize(1.0, f64::NAN, 0.05).is_err());
    }

    #[test]
    fn annuity_monotonicity() {
        let base = annuitize(100.0, 20.0, 0.05).unwrap();
        assert!(annuitize(110.0, 20.0, 0.05).unwrap() > base);
        assert!(annuitize(100.0, 20.0, 0.06).unwrap() > base);
        assert!(annuitize(100.0, 25.0, 0.05).unwrap() < base);
    }

    #[test]
    fn corridor_expansion_limit_is_segment_sum() {
        let c = ExchangeCorridor::new("de-nl", "de", "nl", "electricity")
            .segment(2.0, 200.0)
            .segment(2.0, 900.0)
            .segment(3.5, 3700.0);
        assert!((c.expansion_limit() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn loss_fraction_scales_with_distance() {
        let c = ExchangeCorridor::new("x", "a", "b", "electricity").distance(500.0, 0.05);
        assert!((c.loss_fraction() - 0.025).abs() < 1e-12);
    }
}
