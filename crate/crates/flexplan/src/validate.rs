//! Content validation producing diagnostics instead of errors. Severity
//! `Error` blocks LP construction; warnings do not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::flex::must_run_groups;
use crate::model::{BalanceKind, CarrierId, DispatchMode, EnergyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Id of the offending entity (carrier, technology, corridor, ...).
    pub entity: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            entity: entity.into(),
            message: message.into(),
        }
    }

    pub fn warning(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            entity: entity.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.entity, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

const SHARE_TOL: f64 = 1e-9;

/// Checks every model invariant; returns an empty list iff the model is
/// well-formed. Content problems never raise, they are reported.
pub fn validate_model(model: &EnergyModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let horizon = model.horizon() as usize;

    if horizon == 0 {
        out.push(Diagnostic::error(&model.name, "empty horizon"));
        return out;
    }
    if model.interest_rate.is_nan() || model.interest_rate < 0.0 {
        out.push(Diagnostic::error(
            &model.name,
            format!("interest rate must be >= 0, got {}", model.interest_rate),
        ));
    }
    if model.technologies.is_empty() {
        out.push(Diagnostic::warning(&model.name, "no technologies defined"));
    }

    check_unique_ids(model, &mut out);
    check_carriers(model, horizon, &mut out);
    check_technologies(model, horizon, &mut out);
    check_storages(model, horizon, &mut out);
    check_corridors(model, &mut out);
    check_imports(model, &mut out);
    check_must_run(model, &mut out);
    check_induced_demand_cycles(model, &mut out);
    check_supply_exists(model, &mut out);

    out
}

fn check_id(kind: &str, id: &str, out: &mut Vec<Diagnostic>) {
    if id.is_empty() {
        out.push(Diagnostic::error(format!("<{kind}>"), "empty id"));
        return;
    }
    // Ids land in LP names, CSV cells, and file names.
    if !id
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
    {
        out.push(Diagnostic::error(
            id,
            "id may only contain ASCII letters, digits, '-', '_', '.'",
        ));
    }
}

fn check_unique_ids(model: &EnergyModel, out: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for r in &model.regions {
        check_id("region", r.as_str(), out);
        if !seen.insert(("region", r.as_str())) {
            out.push(Diagnostic::error(r.as_str(), "duplicate region id"));
        }
    }
    for c in &model.carriers {
        check_id("carrier", c.id.as_str(), out);
        if !seen.insert(("carrier", c.id.as_str())) {
            out.push(Diagnostic::error(c.id.as_str(), "duplicate carrier id"));
        }
    }
    for t in &model.technologies {
        check_id("technology", t.id.as_str(), out);
        if !seen.insert(("technology", t.id.as_str())) {
            out.push(Diagnostic::error(t.id.as_str(), "duplicate technology id"));
        }
    }
    for s in &model.storages {
        check_id("storage", s.id.as_str(), out);
        if !seen.insert(("storage", s.id.as_str())) {
            out.push(Diagnostic::error(s.id.as_str(), "duplicate storage id"));
        }
    }
    for c in &model.corridors {
        check_id("corridor", &c.id, out);
        if !seen.insert(("corridor", c.id.as_str())) {
            out.push(Diagnostic::error(c.id.clone(), "duplicate corridor id"));
        }
    }
}

fn check_carriers(model: &EnergyModel, horizon: usize, out: &mut Vec<Diagnostic>) {
    for carrier in &model.carriers {
        let id = carrier.id.as_str();
        if carrier.resolution == 0 {
            out.push(Diagnostic::error(id, "resolution must be >= 1"));
            continue;
        }
        if !model.time.has_size(carrier.resolution) {
            if !horizon.is_multiple_of(carrier.resolution as usize) {
                out.push(Diagnostic::error(
                    id,
                    format!(
                        "resolution does not divide horizon ({} vs {horizon})",
                        carrier.resolution
                    ),
                ));
            } else {
                out.push(Diagnostic::error(
                    id,
                    format!(
                        "resolution {} is not nested with the other carrier resolutions",
                        carrier.resolution
                    ),
                ));
            }
        }
        if carrier.balance_kind == BalanceKind::InducedDemand
            && !carrier.exogenous_demand.is_empty()
        {
            out.push(Diagnostic::error(
                id,
                "induced-demand carrier may not carry an exogenous demand series",
            ));
        }
        for (region, series) in &carrier.exogenous_demand {
            if !model.has_region(region) {
                out.push(Diagnostic::error(
                    id,
                    format!("demand references unknown region '{region}'"),
                ));
            }
            if series.len() != horizon {
                out.push(Diagnostic::error(
                    id,
                    format!(
                        "demand series for '{region}' has length {} but horizon is {horizon}",
                        series.len()
                    ),
                ));
            }
            if series.iter().any(|v| !v.is_finite() || *v < 0.0) {
                out.push(Diagnostic::error(
                    id,
                    format!("demand series for '{region}' contains negative or non-finite values"),
                ));
            }
        }
    }
}

fn shares_sum_to_one(shares: &[(CarrierId, f64)]) -> bool {
    if shares.is_empty() {
        return true;
    }
    let sum: f64 = shares.iter().map(|(_, s)| s).sum();
    (sum - 1.0).abs() <= SHARE_TOL && shares.iter().all(|(_, s)| *s > 0.0)
}

fn check_technologies(model: &EnergyModel, horizon: usize, out: &mut Vec<Diagnostic>) {
    for tech in &model.technologies {
        let id = tech.id.as_str();
        if tech.regions.is_empty() {
            out.push(Diagnostic::warning(id, "not sited in any region"));
        }
        let mut region_seen = BTreeSet::new();
        for region in &tech.regions {
            if !model.has_region(region) {
                out.push(Diagnostic::error(id, format!("unknown region '{region}'")));
            }
            if !region_seen.insert(region.clone()) {
                out.push(Diagnostic::error(
                    id,
                    format!("region '{region}' listed twice"),
                ));
            }
        }
        for (carrier, _) in tech.inputs.iter().chain(tech.outputs.iter()) {
            if model.carrier(carrier).is_none() {
                out.push(Diagnostic::error(
                    id,
                    format!("references unknown carrier '{carrier}'"),
                ));
            }
        }
        if !shares_sum_to_one(&tech.inputs) {
            out.push(Diagnostic::error(id, "input shares must sum to 1"));
        }
        if !shares_sum_to_one(&tech.outputs) {
            out.push(Diagnostic::error(id, "output shares must sum to 1"));
        }
        if tech.efficiency.is_nan() || tech.efficiency <= 0.0 {
            out.push(Diagnostic::error(
                id,
                format!("efficiency must be > 0, got {}", tech.efficiency),
            ));
        }
        if tech.lifetime.is_nan() || tech.lifetime < 1.0 {
            out.push(Diagnostic::error(
                id,
                format!("lifetime must be >= 1 year, got {}", tech.lifetime),
            ));
        }
        if tech.investment_cost < 0.0 || tech.fixed_om < 0.0 {
            out.push(Diagnostic::error(id, "fixed costs must be >= 0"));
        }
        match &tech.capacity_factor {
            crate::model::CapacityFactor::Constant(v) => {
                if !(0.0..=1.0).contains(v) {
                    out.push(Diagnostic::error(
                        id,
                        format!("capacity factor {v} outside [0, 1]"),
                    ));
                }
            }
            crate::model::CapacityFactor::Series(map) => {
                for region in &tech.regions {
                    match map.get(region) {
                        None => out.push(Diagnostic::error(
                            id,
                            format!("capacity-factor series missing for region '{region}'"),
                        )),
                        Some(series) => {
                            if series.len() != horizon {
                                out.push(Diagnostic::error(
                                    id,
                                    format!(
                                        "capacity-factor series for '{region}' has length {} \
                                         but horizon is {horizon}",
                                        series.len()
                                    ),
                                ));
                            }
                            if series.iter().any(|v| !(0.0..=1.0).contains(v)) {
                                out.push(Diagnostic::error(
                                    id,
                                    format!("capacity factor for '{region}' outside [0, 1]"),
                                ));
                            }
                        }
                    }
                }
            }
        }
        for (region, (min, max)) in &tech.capacity_bounds {
            if min > max || *min < 0.0 {
                out.push(Diagnostic::error(
                    id,
                    format!("capacity bounds for '{region}' invalid: [{min}, {max}]"),
                ));
            }
        }
        if tech.preexisting.values().any(|v| *v < 0.0) {
            out.push(Diagnostic::error(id, "pre-existing capacity must be >= 0"));
        }
        if let Some(profile) = &tech.availability_profile {
            if tech.inputs.is_empty() {
                out.push(Diagnostic::error(
                    id,
                    "availability profile requires an input carrier to cap",
                ));
            }
            if profile.len() != horizon {
                out.push(Diagnostic::error(
                    id,
                    format!(
                        "availability profile has length {} but horizon is {horizon}",
                        profile.len()
                    ),
                ));
            }
            if profile.iter().any(|v| !(0.0..=1.0).contains(v)) {
                out.push(Diagnostic::error(id, "availability values outside [0, 1]"));
            }
            if tech.dispatch == DispatchMode::MustRun {
                out.push(Diagnostic::error(
                    id,
                    "availability profiles are not supported on must-run technologies",
                ));
            }
        }
        if tech.dispatch == DispatchMode::MustRun && tech.outputs.len() != 1 {
            out.push(Diagnostic::error(
                id,
                "must-run technologies output exactly one carrier",
            ));
        }
        if let Some(spec) = &tech.embedded_storage {
            if tech.dispatch != DispatchMode::MustRun {
                out.push(Diagnostic::error(
                    id,
                    "embedded storage is defined only for must-run technologies",
                ));
            }
            if tech.inputs.is_empty() {
                out.push(Diagnostic::error(
                    id,
                    "embedded storage requires an input carrier",
                ));
            }
            // Substations draw from a network-side heat carrier; storage for
            // that heat belongs on the network, not inside the substation.
            for (carrier, _) in &tech.inputs {
                if model
                    .carrier(carrier)
                    .is_some_and(|c| c.balance_kind == BalanceKind::InducedDemand)
                {
                    out.push(Diagnostic::error(
                        id,
                        format!(
                            "embedded storage is not allowed on technologies fed from the \
                             induced-demand carrier '{carrier}'"
                        ),
                    ));
                }
            }
            if !(spec.charge_efficiency > 0.0 && spec.charge_efficiency <= 1.0)
                || !(spec.discharge_efficiency > 0.0 && spec.discharge_efficiency <= 1.0)
            {
                out.push(Diagnostic::error(
                    id,
                    "embedded-storage efficiencies must lie in (0, 1]",
                ));
            }
            if !(0.0..=1.0).contains(&spec.self_discharge) {
                out.push(Diagnostic::error(
                    id,
                    "embedded-storage self-discharge must lie in [0, 1]",
                ));
            }
            if spec.max_duration.is_nan() || spec.max_duration <= 0.0 {
                out.push(Diagnostic::error(
                    id,
                    "embedded-storage max duration must be > 0",
                ));
            }
            if spec.energy_cost < 0.0 || spec.power_cost < 0.0 {
                out.push(Diagnostic::error(id, "embedded-storage costs must be >= 0"));
            }
        }
    }
}

fn check_storages(model: &EnergyModel, horizon: usize, out: &mut Vec<Diagnostic>) {
    for storage in &model.storages {
        let id = storage.id.as_str();
        if model.carrier(&storage.carrier).is_none() {
            out.push(Diagnostic::error(
                id,
                format!("references unknown carrier '{}'", storage.carrier),
            ));
        }
        for region in &storage.regions {
            if !model.has_region(region) {
                out.push(Diagnostic::error(id, format!("unknown region '{region}'")));
            }
        }
        let ok = |v: f64| v > 0.0 && v <= 1.0;
        if !ok(storage.charge_efficiency)
            || !ok(storage.discharge_efficiency)
            || !ok(storage.self_discharge)
        {
            out.push(Diagnostic::error(
                id,
                "charge/discharge/self-discharge efficiencies must lie in (0, 1]",
            ));
        }
        let (min, max) = storage.energy_to_power_bounds;
        if min < 0.0 || min > max {
            out.push(Diagnostic::error(
                id,
                format!("energy-to-power bounds invalid: [{min}, {max}]"),
            ));
        }
        if storage.lifetime.is_nan() || storage.lifetime < 1.0 {
            out.push(Diagnostic::error(id, "lifetime must be >= 1 year"));
        }
        if storage.power_investment < 0.0
            || storage.energy_investment < 0.0
            || storage.power_fixed_om < 0.0
            || storage.energy_fixed_om < 0.0
        {
            out.push(Diagnostic::error(id, "costs must be >= 0"));
        }
        if storage
            .preexisting
            .values()
            .any(|(p, e)| *p < 0.0 || *e < 0.0)
        {
            out.push(Diagnostic::error(id, "pre-existing capacity must be >= 0"));
        }
        for (region, series) in &storage.exogenous_inflow {
            if !model.has_region(region) {
                out.push(Diagnostic::error(
                    id,
                    format!("inflow references unknown region '{region}'"),
                ));
            }
            if series.len() != horizon {
                out.push(Diagnostic::error(
                    id,
                    format!(
                        "inflow series for '{region}' has length {} but horizon is {horizon}",
                        series.len()
                    ),
                ));
            }
            if series.iter().any(|v| !v.is_finite() || *v < 0.0) {
                out.push(Diagnostic::error(
                    id,
                    format!("inflow series for '{region}' contains negative values"),
                ));
            }
        }
    }
}

fn check_corridors(model: &EnergyModel, out: &mut Vec<Diagnostic>) {
    for corridor in &model.corridors {
        let id = corridor.id.as_str();
        if corridor.from == corridor.to {
            out.push(Diagnostic::error(id, "corridor endpoints must differ"));
        }
        for region in [&corridor.from, &corridor.to] {
            if !model.has_region(region) {
                out.push(Diagnostic::error(id, format!("unknown region '{region}'")));
            }
        }
        if model.carrier(&corridor.carrier).is_none() {
            out.push(Diagnostic::error(
                id,
                format!("references unknown carrier '{}'", corridor.carrier),
            ));
        }
        if corridor.distance_km < 0.0 {
            out.push(Diagnostic::error(id, "distance must be >= 0"));
        }
        if !(0.0..1.0).contains(&corridor.loss_per_1000km) {
            out.push(Diagnostic::error(id, "loss per 1000 km must lie in [0, 1)"));
        }
        if corridor.loss_fraction() >= 1.0 {
            out.push(Diagnostic::error(
                id,
                "total corridor loss reaches 100% of the flow",
            ));
        }
        if corridor.preexisting < 0.0 {
            out.push(Diagnostic::error(id, "pre-existing capacity must be >= 0"));
        }
        if corridor.lifetime.is_nan() || corridor.lifetime < 1.0 {
            out.push(Diagnostic::error(id, "lifetime must be >= 1 year"));
        }
        let mut prev = f64::NEG_INFINITY;
        for segment in &corridor.segments {
            if segment.capacity.is_nan() || segment.capacity <= 0.0 {
                out.push(Diagnostic::error(id, "segment capacity must be > 0"));
            }
            if segment.unit_cost < 0.0 {
                out.push(Diagnostic::error(id, "segment cost must be >= 0"));
            }
            if segment.unit_cost < prev {
                out.push(Diagnostic::error(id, "non-monotone expansion cost"));
                break;
            }
            prev = segment.unit_cost;
        }
    }
}

fn check_imports(model: &EnergyModel, out: &mut Vec<Diagnostic>) {
    for import in &model.imports {
        let entity = format!("import:{}:{}", import.carrier, import.region);
        if model.carrier(&import.carrier).is_none() {
            out.push(Diagnostic::error(
                &entity,
                format!("references unknown carrier '{}'", import.carrier),
            ));
        }
        if !model.has_region(&import.region) {
            out.push(Diagnostic::error(
                &entity,
                format!("unknown region '{}'", import.region),
            ));
        }
        if import.price_eur_per_mwh < 0.0 {
            out.push(Diagnostic::error(&entity, "import price must be >= 0"));
        }
        if import.limit_gw.is_some_and(|v| v < 0.0) {
            out.push(Diagnostic::error(&entity, "import limit must be >= 0"));
        }
    }
}

fn check_must_run(model: &EnergyModel, out: &mut Vec<Diagnostic>) {
    // Carriers served by must-run groups lose their network balance (it is
    // replaced by the capacity balance and the proportional-output rows), so
    // nothing else may interact with them.
    let must_run_carriers: BTreeSet<&CarrierId> = model
        .technologies
        .iter()
        .filter(|t| t.dispatch == DispatchMode::MustRun)
        .flat_map(|t| t.outputs.iter().map(|(c, _)| c))
        .collect();

    for carrier in &must_run_carriers {
        for tech in &model.technologies {
            if tech.dispatch == DispatchMode::MeritOrder
                && tech.outputs.iter().any(|(c, _)| &c == carrier)
            {
                out.push(Diagnostic::error(
                    tech.id.as_str(),
                    format!(
                        "merit-order technology produces must-run carrier '{carrier}'; \
                         all producers of a must-run carrier must be must-run"
                    ),
                ));
            }
            if tech.inputs.iter().any(|(c, _)| &c == carrier) {
                out.push(Diagnostic::error(
                    tech.id.as_str(),
                    format!("must-run carrier '{carrier}' may not be consumed by technologies"),
                ));
            }
        }
        for storage in &model.storages {
            if &&storage.carrier == carrier {
                out.push(Diagnostic::error(
                    storage.id.as_str(),
                    format!("network storage on must-run carrier '{carrier}' is not allowed"),
                ));
            }
        }
        for corridor in &model.corridors {
            if &&corridor.carrier == carrier {
                out.push(Diagnostic::error(
                    corridor.id.as_str(),
                    format!("exchange of must-run carrier '{carrier}' is not allowed"),
                ));
            }
        }
        for import in &model.imports {
            if &&import.carrier == carrier {
                out.push(Diagnostic::error(
                    format!("import:{}:{}", import.carrier, import.region),
                    format!("imports of must-run carrier '{carrier}' are not allowed"),
                ));
            }
        }
    }

    let (groups, diagnostics) = must_run_groups(model);
    out.extend(diagnostics);
    for group in &groups {
        let entity = format!("{}:{}", group.carrier, group.region);
        let preexisting: f64 = group
            .members
            .iter()
            .filter_map(|m| model.technology(m))
            .map(|t| t.preexisting_in(&group.region))
            .sum();
        if preexisting > group.peak_demand + 1e-9 {
            out.push(Diagnostic::warning(
                entity,
                format!(
                    "pre-existing must-run capacity {preexisting} GW exceeds peak demand {} GW; \
                     the capacity balance cannot hold",
                    group.peak_demand
                ),
            ));
        }
    }

    // BEV-style day feasibility: only checkable when a single availability
    // technology serves the daily carrier in a region and its capacity is
    // bounded above.
    for tech in &model.technologies {
        let Some(profile) = &tech.availability_profile else {
            continue;
        };
        let Some((carrier_id, share)) = tech.outputs.first() else {
            continue;
        };
        let Some(carrier) = model.carrier(carrier_id) else {
            continue;
        };
        if carrier.resolution == 0 || !model.time.has_size(carrier.resolution) {
            continue;
        }
        if profile.len() != model.horizon() as usize {
            continue;
        }
        let sole_producer = model
            .technologies
            .iter()
            .filter(|t| t.outputs.iter().any(|(c, _)| c == carrier_id))
            .count()
            == 1;
        if !sole_producer {
            continue;
        }
        for region in &tech.regions {
            let (_, max) = tech.bounds_in(region);
            if !max.is_finite() {
                continue;
            }
            let cap = max + tech.preexisting_in(region);
            let Some(demand) = model.demand(carrier_id, region) else {
                continue;
            };
            if demand.len() != profile.len() {
                continue;
            }
            let blocks = model.time.blocks(carrier.resolution).unwrap();
            for (day, &(start, end)) in blocks.iter().enumerate() {
                let need: f64 = (start..end).map(|t| demand[t as usize]).sum::<f64>()
                    / (tech.efficiency * share);
                let can: f64 = (start..end)
                    .map(|t| {
                        profile[t as usize] * tech.capacity_factor.at(region, t as usize) * cap
                    })
                    .sum();
                if need > can + 1e-9 {
                    out.push(Diagnostic::warning(
                        tech.id.as_str(),
                        format!(
                            "day {day} in '{region}': charging demand {need:.3} GWh exceeds \
                             the connectable maximum {can:.3} GWh at the capacity upper bound"
                        ),
                    ));
                }
            }
        }
    }
}

fn check_induced_demand_cycles(model: &EnergyModel, out: &mut Vec<Diagnostic>) {
    let induced: BTreeSet<&CarrierId> = model
        .carriers
        .iter()
        .filter(|c| c.balance_kind == BalanceKind::InducedDemand)
        .map(|c| &c.id)
        .collect();
    if induced.is_empty() {
        return;
    }
    // Edge produced -> consumed for every technology touching two induced
    // carriers; a cycle means circular induced demand.
    let mut edges: BTreeMap<&CarrierId, BTreeSet<&CarrierId>> = BTreeMap::new();
    for tech in &model.technologies {
        for (output, _) in &tech.outputs {
            if !induced.contains(output) {
                continue;
            }
            for (input, _) in &tech.inputs {
                if induced.contains(input) {
                    edges.entry(output).or_default().insert(input);
                }
            }
        }
    }
    // Iterative DFS with colors.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color: BTreeMap<&CarrierId, Color> =
        induced.iter().map(|c| (*c, Color::White)).collect();
    fn visit<'a>(
        node: &'a CarrierId,
        edges: &BTreeMap<&'a CarrierId, BTreeSet<&'a CarrierId>>,
        color: &mut BTreeMap<&'a CarrierId, Color>,
    ) -> Option<&'a CarrierId> {
        color.insert(node, Color::Gray);
        if let Some(next) = edges.get(node) {
            for &n in next {
                match color.get(n) {
                    Some(Color::Gray) => return Some(n),
                    Some(Color::White) => {
                        if let Some(hit) = visit(n, edges, color) {
                            return Some(hit);
                        }
                    }
                    _ => {}
                }
            }
        }
        color.insert(node, Color::Black);
        None
    }
    for carrier in &induced {
        if color[*carrier] == Color::White {
            if let Some(hit) = visit(carrier, &edges, &mut color) {
                out.push(Diagnostic::error(
                    hit.as_str(),
                    "induced-demand carriers form a cycle",
                ));
                return;
            }
        }
    }
}

fn check_supply_exists(model: &EnergyModel, out: &mut Vec<Diagnostic>) {
    for carrier in &model.carriers {
        for (region, series) in &carrier.exogenous_demand {
            if series.iter().all(|v| *v <= 0.0) {
                continue;
            }
            let produced = model.technologies.iter().any(|t| {
                t.regions.contains(region) && t.outputs.iter().any(|(c, _)| c == &carrier.id)
            });
            let stored = model
                .storages
                .iter()
                .any(|s| s.carrier == carrier.id && s.regions.contains(region));
            let wired = model
                .corridors
                .iter()
                .any(|c| c.carrier == carrier.id && (&c.from == region || &c.to == region));
            let imported = model
                .imports
                .iter()
                .any(|i| i.carrier == carrier.id && &i.region == region);
            if !(produced || stored || wired || imported) {
                out.push(Diagnostic::warning(
                    carrier.id.as_str(),
                    format!(
                        "nonzero demand in '{region}' but no producer, storage, corridor, \
                             or import can supply it"
                    ),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Carrier, EnergyModel, ExchangeCorridor, Technology};
    use crate::sample;

    fn assemble(carriers: Vec<Carrier>, technologies: Vec<Technology>) -> EnergyModel {
        EnergyModel::assemble(
            "test",
            24,
            vec!["r".into()],
            carriers,
            technologies,
            vec![],
            vec![],
            vec![],
        )
    }

    #[test]
    fn resolution_must_divide_horizon() {
        let model = assemble(vec![Carrier::new("heat", 5)], vec![]);
        let diagnostics = validate_model(&model);
        assert!(diagnostics.iter().any(|d| d.severity == Severity::Error
            && d.message.contains("resolution does not divide horizon")));
    }

    #[test]
    fn non_monotone_expansion_cost_is_an_error() {
        let mut model = assemble(vec![Carrier::new("electricity", 1)], vec![]);
        model.regions.push("s".into());
        model.corridors.push(
            ExchangeCorridor::new("r-s", "r", "s", "electricity")
                .segment(2.0, 300.0)
                .segment(2.0, 200.0),
        );
        let diagnostics = validate_model(&model);
        assert!(diagnostics
            .iter()
            .any(|d| d.message.contains("non-monotone expansion cost")));
    }

    #[test]
    fn well_formed_fixtures_have_no_errors() {
        for model in [
            sample::single_tech_two_hours(),
            sample::corridor_pair(),
            sample::two_region_week(),
        ] {
            let diagnostics = validate_model(&model);
            assert!(
                !has_errors(&diagnostics),
                "unexpected errors: {diagnostics:?}"
            );
        }
    }

    #[test]
    fn empty_technology_list_warns() {
        let model = assemble(vec![Carrier::new("electricity", 1)], vec![]);
        let diagnostics = validate_model(&model);
        assert!(diagnostics
            .iter()
            .any(|d| d.severity == Severity::Warning
                && d.message.contains("no technologies defined")));
    }

    #[test]
    fn induced_demand_cycle_detected() {
        let model = assemble(
            vec![
                Carrier::new("a-heat", 1).induced(),
                Carrier::new("b-heat", 1).induced(),
            ],
            vec![
                Technology::new("a-from-b")
                    .in_region("r")
                    .input("b-heat", 1.0)
                    .output("a-heat", 1.0),
                Technology::new("b-from-a")
                    .in_region("r")
                    .input("a-heat", 1.0)
                    .output("b-heat", 1.0),
            ],
        );
        let diagnostics = validate_model(&model);
        assert!(diagnostics.iter().any(|d| d.message.contains("cycle")));
    }

    #[test]
    fn induced_demand_chain_is_fine() {
        // substation: district-heat -> space-heat; no cycle.
        let model = assemble(
            vec![
                Carrier::new("district-heat", 4).induced(),
                Carrier::new("space-heat", 4).demand("r", vec![1.0; 24]),
                Carrier::new("electricity", 1),
            ],
            vec![
                Technology::new("substation")
                    .in_region("r")
                    .input("district-heat", 1.0)
                    .output("space-heat", 1.0)
                    .must_run(),
                Technology::new("dh-hp")
                    .in_region("r")
                    .input("electricity", 1.0)
                    .output("district-heat", 1.0)
                    .efficiency(3.0),
            ],
        );
        let diagnostics = validate_model(&model);
        assert!(!diagnostics.iter().any(|d| d.message.contains("cycle")));
    }

    #[test]
    fn induced_carrier_rejects_exogenous_demand() {
        let model = assemble(
            vec![Carrier::new("district-heat", 4)
                .induced()
                .demand("r", vec![1.0; 24])],
            vec![],
        );
        assert!(has_errors(&validate_model(&model)));
    }

    #[test]
    fn mustrun_needs_single_output() {
        let model = assemble(
            vec![
                Carrier::new("heat", 1).demand("r", vec![1.0; 24]),
                Carrier::new("electricity", 1).demand("r", vec![1.0; 24]),
            ],
            vec![Technology::new("dual")
                .in_region("r")
                .output("heat", 0.5)
                .output("electricity", 0.5)
                .must_run()],
        );
        assert!(validate_model(&model)
            .iter()
            .any(|d| d.message.contains("exactly one carrier")));
    }

    #[test]
    fn mustrun_carrier_must_not_be_consumed() {
        let model = assemble(
            vec![
                Carrier::new("heat", 1).demand("r", vec![1.0; 24]),
                Carrier::new("electricity", 1),
            ],
            vec![
                Technology::new("boiler")
                    .in_region("r")
                    .input("electricity", 1.0)
                    .output("heat", 1.0)
                    .must_run(),
                Technology::new("heat-eater")
                    .in_region("r")
                    .input("heat", 1.0)
                    .output("electricity", 1.0),
            ],
        );
        assert!(validate_model(&model)
            .iter()
            .any(|d| d.message.contains("may not be consumed")));
    }

    #[test]
    fn embedded_storage_on_merit_order_is_an_error() {
        let model = assemble(
            vec![
                Carrier::new("heat", 1).demand("r", vec![1.0; 24]),
                Carrier::new("electricity", 1),
            ],
            vec![Technology::new("hp")
                .in_region("r")
                .input("electricity", 1.0)
                .output("heat", 1.0)
                .embedded(crate::model::EmbeddedStorageSpec {
                    energy_cost: 1.0,
                    power_cost: 1.0,
                    charge_efficiency: 1.0,
                    discharge_efficiency: 1.0,
                    self_discharge: 1.0,
                    max_duration: 4.0,
                })],
        );
        assert!(validate_model(&model)
            .iter()
            .any(|d| d.message.contains("only for must-run")));
    }

    #[test]
    fn substations_cannot_carry_embedded_storage() {
        let model = assemble(
            vec![
                Carrier::new("district-heat", 4).induced(),
                Carrier::new("space-heat", 4).demand("r", vec![1.0; 24]),
                Carrier::new("electricity", 1),
            ],
            vec![
                Technology::new("substation")
                    .in_region("r")
                    .input("district-heat", 1.0)
                    .output("space-heat", 1.0)
                    .must_run()
                    .embedded(crate::model::EmbeddedStorageSpec {
                        energy_cost: 1.0,
                        power_cost: 1.0,
                        charge_efficiency: 1.0,
                        discharge_efficiency: 1.0,
                        self_discharge: 1.0,
                        max_duration: 4.0,
                    }),
                Technology::new("dh-hp")
                    .in_region("r")
                    .input("electricity", 1.0)
                    .output("district-heat", 1.0)
                    .efficiency(3.0),
            ],
        );
        assert!(validate_model(&model)
            .iter()
            .any(|d| d.message.contains("induced-demand carrier 'district-heat'")));
    }

    #[test]
    fn unsupplied_demand_warns() {
        let model = assemble(
            vec![Carrier::new("electricity", 1).demand("r", vec![1.0; 24])],
            vec![],
        );
        assert!(validate_model(&model)
            .iter()
            .any(|d| { d.severity == Severity::Warning && d.message.contains("no producer") }));
    }

    #[test]
    fn capacity_factor_out_of_range_is_an_error() {
        let model = assemble(
            vec![Carrier::new("electricity", 1)],
            vec![Technology::new("gen")
                .in_region("r")
                .output("electricity", 1.0)
                .capacity_factor(crate::model::CapacityFactor::Constant(1.2))],
        );
        assert!(has_errors(&validate_model(&model)));
    }

    #[test]
    fn bev_overcommitted_day_is_named() {
        let mut model = sample::bev_two_days();
        // Cap the fleet so day 0 cannot charge enough.
        for tech in &mut model.technologies {
            if tech.id.as_str() == "bev" {
                tech.capacity_bounds.insert("r".into(), (0.0, 0.5));
            }
        }
        let diagnostics = validate_model(&model);
        assert!(diagnostics
            .iter()
            .any(|d| d.severity == Severity::Warning && d.message.contains("day 0")));
    }
}
