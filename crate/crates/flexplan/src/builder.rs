//! Translates an [`EnergyModel`] into the capacity-expansion and dispatch
//! LP: objective, capacity restrictions, energy/conversion/storage balances,
//! piecewise transmission expansion, and the flexibility constructs.
//!
//! Variable and constraint ordering is deterministic: entities sorted by id,
//! then region, then hour. Identical models serialize to byte-identical LPs.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::flex;
use crate::lp::{LinearProgram, LpError, Sense};
use crate::model::{CarrierId, EnergyModel, ModelError, RegionId, StorageId, TechId};
use crate::validate::{has_errors, validate_model};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("model validation failed with {0} error(s); run validate_model for details")]
    InvalidModel(usize),
    #[error("empty horizon")]
    EmptyHorizon,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Typed side of the bidirectional name map: semantic keys to column ids.
#[derive(Debug, Clone, Default)]
pub struct LpIndex {
    pub horizon: usize,
    pub tech_capacity: BTreeMap<(TechId, RegionId), usize>,
    pub tech_gen: BTreeMap<(TechId, RegionId), Vec<usize>>,
    pub tech_use: BTreeMap<(TechId, RegionId), Vec<usize>>,
    pub emb_power: BTreeMap<(TechId, RegionId), usize>,
    pub emb_energy: BTreeMap<(TechId, RegionId), usize>,
    pub emb_charge: BTreeMap<(TechId, RegionId), Vec<usize>>,
    pub emb_discharge: BTreeMap<(TechId, RegionId), Vec<usize>>,
    pub emb_level: BTreeMap<(TechId, RegionId), Vec<usize>>,
    pub storage_power: BTreeMap<(StorageId, RegionId), usize>,
    pub storage_energy: BTreeMap<(StorageId, RegionId), usize>,
    pub storage_in: BTreeMap<(StorageId, RegionId), Vec<usize>>,
    pub storage_out: BTreeMap<(StorageId, RegionId), Vec<usize>>,
    pub storage_level: BTreeMap<(StorageId, RegionId), Vec<usize>>,
    pub storage_spill: BTreeMap<(StorageId, RegionId), Vec<usize>>,
    /// Keyed by corridor id.
    pub corridor_segments: BTreeMap<String, Vec<usize>>,
    pub corridor_fwd: BTreeMap<String, Vec<usize>>,
    pub corridor_bwd: BTreeMap<String, Vec<usize>>,
    /// Keyed by (carrier, region, option ordinal).
    pub import_flow: BTreeMap<(CarrierId, RegionId, usize), Vec<usize>>,
}

impl LpIndex {
    /// Column ids of all operational (dispatch) variables.
    pub fn dispatch_variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for vars in self
            .tech_gen
            .values()
            .chain(self.tech_use.values())
            .chain(self.emb_charge.values())
            .chain(self.emb_discharge.values())
            .chain(self.emb_level.values())
            .chain(self.storage_in.values())
            .chain(self.storage_out.values())
            .chain(self.storage_level.values())
            .chain(self.storage_spill.values())
            .chain(self.corridor_fwd.values())
            .chain(self.corridor_bwd.values())
            .chain(self.import_flow.values())
        {
            out.extend_from_slice(vars);
        }
        out
    }
}

/// A built LP plus the typed index and the reported fixed-cost constant of
/// pre-existing capacity (not part of the objective vector).
#[derive(Debug, Clone)]
pub struct BuiltLp {
    pub lp: LinearProgram,
    pub index: LpIndex,
    pub preexisting_fixed_cost: f64,
}

/// Assembles the full LP. Requires a model without validation errors.
pub fn build_lp(model: &EnergyModel) -> Result<BuiltLp, BuildError> {
    if model.horizon() == 0 {
        return Err(BuildError::EmptyHorizon);
    }
    let diagnostics = validate_model(model);
    if has_errors(&diagnostics) {
        let n = diagnostics
            .iter()
            .filter(|d| d.severity == crate::validate::Severity::Error)
            .count();
        return Err(BuildError::InvalidModel(n));
    }
    let mut builder = Builder::new(model);
    builder.add_variables()?;
    builder.add_balances()?;
    builder.add_conversion_rows()?;
    builder.add_capacity_rows()?;
    builder.add_mustrun_rows()?;
    builder.add_embedded_rows()?;
    builder.add_storage_rows()?;
    builder.add_corridor_rows()?;
    Ok(BuiltLp {
        lp: builder.lp,
        index: builder.index,
        preexisting_fixed_cost: builder.preexisting_fixed_cost,
    })
}

struct Builder<'m> {
    model: &'m EnergyModel,
    horizon: usize,
    lp: LinearProgram,
    index: LpIndex,
    preexisting_fixed_cost: f64,
    /// (carrier, region) pairs whose balance the must-run rows replace.
    mustrun_governed: BTreeSet<(CarrierId, RegionId)>,
    groups: Vec<flex::MustRunGroup>,
}

impl<'m> Builder<'m> {
    fn new(model: &'m EnergyModel) -> Self {
        let (groups, _) = flex::must_run_groups(model);
        let mustrun_governed = groups
            .iter()
            .map(|g| (g.carrier.clone(), g.region.clone()))
            .collect();
        Self {
            model,
            horizon: model.horizon() as usize,
            lp: LinearProgram::new(),
            index: LpIndex {
                horizon: model.horizon() as usize,
                ..LpIndex::default()
            },
            preexisting_fixed_cost: 0.0,
            mustrun_governed,
            groups,
        }
    }

    fn sorted_techs(&self) -> Vec<&'m crate::model::Technology> {
        let mut techs: Vec<_> = self.model.technologies.iter().collect();
        techs.sort_by(|a, b| a.id.cmp(&b.id));
        techs
    }

    fn sorted_regions_of(&self, regions: &[RegionId]) -> Vec<RegionId> {
        let mut out = regions.to_vec();
        out.sort();
        out
    }

    fn sorted_storages(&self) -> Vec<&'m crate::model::StorageTechnology> {
        let mut storages: Vec<_> = self.model.storages.iter().collect();
        storages.sort_by(|a, b| a.id.cmp(&b.id));
        storages
    }

    fn sorted_corridors(&self) -> Vec<&'m crate::model::ExchangeCorridor> {
        let mut corridors: Vec<_> = self.model.corridors.iter().collect();
        corridors.sort_by(|a, b| a.id.cmp(&b.id));
        corridors
    }

    fn sorted_imports(&self) -> Vec<(usize, &'m crate::model::ImportOption)> {
        let mut imports: Vec<_> = self.model.imports.iter().enumerate().collect();
        imports.sort_by(|(ia, a), (ib, b)| {
            (&a.carrier, &a.region, ia).cmp(&(&b.carrier, &b.region, ib))
        });
        imports
    }

    fn add_variables(&mut self) -> Result<(), BuildError> {
        let interest = self.model.interest_rate;
        let om_flag = self.model.charge_om_on_preexisting;

        for tech in self.sorted_techs() {
            let fixed = tech.fixed_cost(interest)?;
            for region in self.sorted_regions_of(&tech.regions) {
                let key = (tech.id.clone(), region.clone());
                let (min, max) = tech.bounds_in(&region);
                let k =
                    self.lp
                        .add_variable(format!("K|{}|{}", tech.id, region), min, max, fixed)?;
                self.index.tech_capacity.insert(key.clone(), k);
                if om_flag {
                    self.preexisting_fixed_cost += tech.preexisting_in(&region) * tech.fixed_om;
                }

                if !tech.outputs.is_empty() {
                    let gen: Vec<usize> = (0..self.horizon)
                        .map(|t| {
                            self.lp.add_variable(
                                format!("G|{}|{}|{}", tech.id, region, t),
                                0.0,
                                f64::INFINITY,
                                tech.variable_cost,
                            )
                        })
                        .collect::<Result<_, _>>()?;
                    self.index.tech_gen.insert(key.clone(), gen);
                }
                if !tech.inputs.is_empty() {
                    let used: Vec<usize> = (0..self.horizon)
                        .map(|t| {
                            self.lp.add_variable(
                                format!("U|{}|{}|{}", tech.id, region, t),
                                0.0,
                                f64::INFINITY,
                                0.0,
                            )
                        })
                        .collect::<Result<_, _>>()?;
                    self.index.tech_use.insert(key.clone(), used);
                }
                if let Some(spec) = &tech.embedded_storage {
                    let power_cost =
                        crate::model::annuitize(spec.power_cost, tech.lifetime, interest)?;
                    let energy_cost =
                        crate::model::annuitize(spec.energy_cost, tech.lifetime, interest)?;
                    let ks = self.lp.add_variable(
                        format!("EKS|{}|{}", tech.id, region),
                        0.0,
                        f64::INFINITY,
                        power_cost,
                    )?;
                    let kl = self.lp.add_variable(
                        format!("EKL|{}|{}", tech.id, region),
                        0.0,
                        f64::INFINITY,
                        energy_cost,
                    )?;
                    self.index.emb_power.insert(key.clone(), ks);
                    self.index.emb_energy.insert(key.clone(), kl);
                    let mut charge = Vec::with_capacity(self.horizon);
                    let mut discharge = Vec::with_capacity(self.horizon);
                    let mut level = Vec::with_capacity(self.horizon);
                    for t in 0..self.horizon {
                        charge.push(self.lp.add_variable(
                            format!("EC|{}|{}|{}", tech.id, region, t),
                            0.0,
                            f64::INFINITY,
                            0.0,
                        )?);
                        discharge.push(self.lp.add_variable(
                            format!("ED|{}|{}|{}", tech.id, region, t),
                            0.0,
                            f64::INFINITY,
                            0.0,
                        )?);
                        level.push(self.lp.add_variable(
                            format!("EL|{}|{}|{}", tech.id, region, t),
                            0.0,
                            f64::INFINITY,
                            0.0,
                        )?);
                    }
                    self.index.emb_charge.insert(key.clone(), charge);
                    self.index.emb_discharge.insert(key.clone(), discharge);
                    self.index.emb_level.insert(key, level);
                }
            }
        }

        for storage in self.sorted_storages() {
            let power_fixed = storage.power_fixed_cost(interest)?;
            let energy_fixed = storage.energy_fixed_cost(interest)?;
            for region in self.sorted_regions_of(&storage.regions) {
                let key = (storage.id.clone(), region.clone());
                let ks = self.lp.add_variable(
                    format!("KS|{}|{}", storage.id, region),
                    0.0,
                    f64::INFINITY,
                    power_fixed,
                )?;
                let kl = self.lp.add_variable(
                    format!("KL|{}|{}", storage.id, region),
                    0.0,
                    f64::INFINITY,
                    energy_fixed,
                )?;
                self.index.storage_power.insert(key.clone(), ks);
                self.index.storage_energy.insert(key.clone(), kl);
                if om_flag {
                    let (pre_p, pre_e) = storage.preexisting_in(&region);
                    self.preexisting_fixed_cost +=
                        pre_p * storage.power_fixed_om + pre_e * storage.energy_fixed_om;
                }
                let has_inflow = storage.exogenous_inflow.contains_key(&region);
                let mut s_in = Vec::with_capacity(self.horizon);
                let mut s_out = Vec::with_capacity(self.horizon);
                let mut level = Vec::with_capacity(self.horizon);
                let mut spill = Vec::with_capacity(if has_inflow { self.horizon } else { 0 });
                for t in 0..self.horizon {
                    s_in.push(self.lp.add_variable(
                        format!("SIN|{}|{}|{}", storage.id, region, t),
                        0.0,
                        f64::INFINITY,
                        0.0,
                    )?);
                    s_out.push(self.lp.add_variable(
                        format!("SOUT|{}|{}|{}", storage.id, region, t),
                        0.0,
                        f64::INFINITY,
                        0.0,
                    )?);
                    level.push(self.lp.add_variable(
                        format!("SLVL|{}|{}|{}", storage.id, region, t),
                        0.0,
                        f64::INFINITY,
                        0.0,
                    )?);
                    if has_inflow {
                        spill.push(self.lp.add_variable(
                            format!("SPILL|{}|{}|{}", storage.id, region, t),
                            0.0,
                            f64::INFINITY,
                            0.0,
                        )?);
                    }
                }
                self.index.storage_in.insert(key.clone(), s_in);
                self.index.storage_out.insert(key.clone(), s_out);
                self.index.storage_level.insert(key.clone(), level);
                if has_inflow {
                    self.index.storage_spill.insert(key, spill);
                }
            }
        }

        for corridor in self.sorted_corridors() {
            let mut segments = Vec::with_capacity(corridor.segments.len());
            for (s, segment) in corridor.segments.iter().enumerate() {
                let cost = corridor.segment_fixed_cost(segment.unit_cost, interest)?;
                segments.push(self.lp.add_variable(
                    format!("X|{}|{}", corridor.id, s),
                    0.0,
                    segment.capacity,
                    cost,
                )?);
            }
            self.index
                .corridor_segments
                .insert(corridor.id.clone(), segments);
            if om_flag {
                self.preexisting_fixed_cost += corridor.preexisting * corridor.fixed_om;
            }
            let mut fwd = Vec::with_capacity(self.horizon);
            let mut bwd = Vec::with_capacity(self.horizon);
            for t in 0..self.horizon {
                fwd.push(self.lp.add_variable(
                    format!("EF|{}|{}", corridor.id, t),
                    0.0,
                    f64::INFINITY,
                    0.0,
                )?);
                bwd.push(self.lp.add_variable(
                    format!("EB|{}|{}", corridor.id, t),
                    0.0,
                    f64::INFINITY,
                    0.0,
                )?);
            }
            self.index.corridor_fwd.insert(corridor.id.clone(), fwd);
            self.index.corridor_bwd.insert(corridor.id.clone(), bwd);
        }

        for (ordinal, import) in self.sorted_imports() {
            let price = import.price_eur_per_mwh * 1e-3; // €/MWh -> Mil.€/GWh
            let upper = import.limit_gw.unwrap_or(f64::INFINITY);
            let flow: Vec<usize> = (0..self.horizon)
                .map(|t| {
                    self.lp.add_variable(
                        format!("IMP|{}|{}|{}|{}", import.carrier, import.region, ordinal, t),
                        0.0,
                        upper,
                        price,
                    )
                })
                .collect::<Result<_, _>>()?;
            self.index.import_flow.insert(
                (import.carrier.clone(), import.region.clone(), ordinal),
                flow,
            );
        }
        Ok(())
    }

    /// Energy balances per (carrier, region, block at the carrier's
    /// resolution). Losses are charged to the importer. Balances governed by
    /// a must-run group are replaced by its capacity/output rows.
    fn add_balances(&mut self) -> Result<(), BuildError> {
        let mut carriers: Vec<_> = self.model.carriers.iter().collect();
        carriers.sort_by(|a, b| a.id.cmp(&b.id));
        let mut regions = self.model.regions.clone();
        regions.sort();

        for carrier in carriers {
            let Some(blocks) = self.model.time.blocks(carrier.resolution) else {
                continue;
            };
            let blocks = blocks.to_vec();
            for region in &regions {
                if self
                    .mustrun_governed
                    .contains(&(carrier.id.clone(), region.clone()))
                {
                    continue;
                }
                let demand = self.model.demand(&carrier.id, region);
                for (b, &(start, end)) in blocks.iter().enumerate() {
                    let mut terms: Vec<(usize, f64)> = Vec::new();
                    for tech in self.sorted_techs() {
                        if !tech.regions.contains(region) {
                            continue;
                        }
                        let key = (tech.id.clone(), region.clone());
                        if let Some(share) = share_of(&tech.outputs, &carrier.id) {
                            let gen = &self.index.tech_gen[&key];
                            for t in start..end {
                                terms.push((gen[t as usize], share));
                            }
                        }
                        if let Some(share) = share_of(&tech.inputs, &carrier.id) {
                            let used = &self.index.tech_use[&key];
                            for t in start..end {
                                terms.push((used[t as usize], -share));
                            }
                        }
                    }
                    for storage in self.sorted_storages() {
                        if storage.carrier != carrier.id || !storage.regions.contains(region) {
                            continue;
                        }
                        let key = (storage.id.clone(), region.clone());
                        let s_in = &self.index.storage_in[&key];
                        let s_out = &self.index.storage_out[&key];
                        for t in start..end {
                            terms.push((s_out[t as usize], storage.discharge_efficiency));
                            terms.push((s_in[t as usize], -1.0));
                        }
                    }
                    for corridor in self.sorted_corridors() {
                        if corridor.carrier != carrier.id {
                            continue;
                        }
                        let delivered = 1.0 - corridor.loss_fraction();
                        let fwd = &self.index.corridor_fwd[&corridor.id];
                        let bwd = &self.index.corridor_bwd[&corridor.id];
                        if &corridor.to == region {
                            for t in start..end {
                                terms.push((fwd[t as usize], delivered));
                                terms.push((bwd[t as usize], -1.0));
                            }
                        } else if &corridor.from == region {
                            for t in start..end {
                                terms.push((bwd[t as usize], delivered));
                                terms.push((fwd[t as usize], -1.0));
                            }
                        }
                    }
                    for ((c, r, _), flow) in &self.index.import_flow {
                        if c == &carrier.id && r == region {
                            for t in start..end {
                                terms.push((flow[t as usize], 1.0));
                            }
                        }
                    }
                    let rhs: f64 = demand
                        .map(|d| (start..end).map(|t| d[t as usize]).sum())
                        .unwrap_or(0.0);
                    if terms.is_empty() && rhs == 0.0 {
                        continue;
                    }
                    self.lp.add_constraint(
                        format!("bal|{}|{}|{}", carrier.id, region, b),
                        terms,
                        Sense::Eq,
                        rhs,
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Conversion rows per (technology, region, hour). For embedded-storage
    /// technologies the row defines the net boundary output instead:
    /// G = eta*U - charge + eta_dis*discharge.
    fn add_conversion_rows(&mut self) -> Result<(), BuildError> {
        for tech in self.sorted_techs() {
            if tech.inputs.is_empty() || tech.outputs.is_empty() {
                continue;
            }
            for region in self.sorted_regions_of(&tech.regions) {
                let key = (tech.id.clone(), region.clone());
                let gen = self.index.tech_gen[&key].clone();
                let used = self.index.tech_use[&key].clone();
                match &tech.embedded_storage {
                    None => {
                        for t in 0..self.horizon {
                            self.lp.add_constraint(
                                format!("conv|{}|{}|{}", tech.id, region, t),
                                vec![(gen[t], 1.0), (used[t], -tech.efficiency)],
                                Sense::Eq,
                                0.0,
                            )?;
                        }
                    }
                    Some(spec) => {
                        let charge = self.index.emb_charge[&key].clone();
                        let discharge = self.index.emb_discharge[&key].clone();
                        for t in 0..self.horizon {
                            self.lp.add_constraint(
                                format!("conv|{}|{}|{}", tech.id, region, t),
                                vec![
                                    (gen[t], 1.0),
                                    (used[t], -tech.efficiency),
                                    (charge[t], 1.0),
                                    (discharge[t], -spec.discharge_efficiency),
                                ],
                                Sense::Eq,
                                0.0,
                            )?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Capacity caps per (technology, region, hour). Output-denominated capacity
    /// caps summed output; availability-profile technologies cap input
    /// instead (grid connection); embedded-storage technologies cap hourly
    /// production eta*U, which feeds demand or the store.
    fn add_capacity_rows(&mut self) -> Result<(), BuildError> {
        for tech in self.sorted_techs() {
            for region in self.sorted_regions_of(&tech.regions) {
                let key = (tech.id.clone(), region.clone());
                let k_var = self.index.tech_capacity[&key];
                let pre = tech.preexisting_in(&region);
                if tech.availability_profile.is_some() {
                    flex::build_bev_constraints(
                        &mut self.lp,
                        self.model,
                        &self.index,
                        &tech.id,
                        &region,
                    )?;
                    continue;
                }
                if tech.embedded_storage.is_some() {
                    let used = self.index.tech_use[&key].clone();
                    for t in 0..self.horizon {
                        let alpha = tech.capacity_factor.at(&region, t);
                        self.lp.add_constraint(
                            format!("cap|{}|{}|{}", tech.id, region, t),
                            vec![(used[t], tech.efficiency), (k_var, -alpha)],
                            Sense::Le,
                            alpha * pre,
                        )?;
                    }
                    continue;
                }
                if !tech.outputs.is_empty() {
                    let gen = self.index.tech_gen[&key].clone();
                    for t in 0..self.horizon {
                        let alpha = tech.capacity_factor.at(&region, t);
                        self.lp.add_constraint(
                            format!("cap|{}|{}|{}", tech.id, region, t),
                            vec![(gen[t], 1.0), (k_var, -alpha)],
                            Sense::Le,
                            alpha * pre,
                        )?;
                    }
                } else if !tech.inputs.is_empty() {
                    let used = self.index.tech_use[&key].clone();
                    for t in 0..self.horizon {
                        let alpha = tech.capacity_factor.at(&region, t);
                        self.lp.add_constraint(
                            format!("cap|{}|{}|{}", tech.id, region, t),
                            vec![(used[t], 1.0), (k_var, -alpha)],
                            Sense::Le,
                            alpha * pre,
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    fn add_mustrun_rows(&mut self) -> Result<(), BuildError> {
        let groups = self.groups.clone();
        for group in &groups {
            flex::build_mustrun_constraints(&mut self.lp, self.model, &self.index, group)?;
        }
        Ok(())
    }

    fn add_embedded_rows(&mut self) -> Result<(), BuildError> {
        for tech in self.sorted_techs() {
            if tech.embedded_storage.is_none() {
                continue;
            }
            for region in self.sorted_regions_of(&tech.regions) {
                flex::build_embedded_storage(
                    &mut self.lp,
                    self.model,
                    &self.index,
                    &tech.id,
                    &region,
                )?;
            }
        }
        Ok(())
    }

    /// Cyclic level balance, power cap, level cap, and energy-to-power links per
    /// (storage, region). Exogenous inflow lands on the rhs negated; a spill
    /// variable keeps wet years feasible.
    fn add_storage_rows(&mut self) -> Result<(), BuildError> {
        for storage in self.sorted_storages() {
            for region in self.sorted_regions_of(&storage.regions) {
                let key = (storage.id.clone(), region.clone());
                let s_in = self.index.storage_in[&key].clone();
                let s_out = self.index.storage_out[&key].clone();
                let level = self.index.storage_level[&key].clone();
                let spill = self.index.storage_spill.get(&key).cloned();
                let inflow = storage.exogenous_inflow.get(&region);
                let (pre_p, pre_e) = storage.preexisting_in(&region);
                let ks = self.index.storage_power[&key];
                let kl = self.index.storage_energy[&key];

                for t in 0..self.horizon {
                    let prev = if t == 0 { self.horizon - 1 } else { t - 1 };
                    // delta*L_{t-1} + rho*S_in - S_out - L_t (- spill) = -inflow_t
                    let mut terms = vec![
                        (level[prev], storage.self_discharge),
                        (s_in[t], storage.charge_efficiency),
                        (s_out[t], -1.0),
                        (level[t], -1.0),
                    ];
                    if let Some(spill) = &spill {
                        terms.push((spill[t], -1.0));
                    }
                    let rhs = -inflow.map(|s| s[t]).unwrap_or(0.0);
                    self.lp.add_constraint(
                        format!("sbal|{}|{}|{}", storage.id, region, t),
                        terms,
                        Sense::Eq,
                        rhs,
                    )?;
                    self.lp.add_constraint(
                        format!("scap|{}|{}|{}", storage.id, region, t),
                        vec![(s_in[t], 1.0), (s_out[t], 1.0), (ks, -1.0)],
                        Sense::Le,
                        pre_p,
                    )?;
                    self.lp.add_constraint(
                        format!("slvl|{}|{}|{}", storage.id, region, t),
                        vec![(level[t], 1.0), (kl, -1.0)],
                        Sense::Le,
                        pre_e,
                    )?;
                }
                let (e2p_min, e2p_max) = storage.energy_to_power_bounds;
                if e2p_min > 0.0 {
                    // K_lvl + pre_e >= e2p_min * (K_st + pre_p)
                    self.lp.add_constraint(
                        format!("slink_lo|{}|{}", storage.id, region),
                        vec![(kl, 1.0), (ks, -e2p_min)],
                        Sense::Ge,
                        e2p_min * pre_p - pre_e,
                    )?;
                }
                if e2p_max.is_finite() {
                    self.lp.add_constraint(
                        format!("slink_hi|{}|{}", storage.id, region),
                        vec![(kl, 1.0), (ks, -e2p_max)],
                        Sense::Le,
                        e2p_max * pre_p - pre_e,
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Exchange caps per (corridor, hour): both directions share the capacity.
    fn add_corridor_rows(&mut self) -> Result<(), BuildError> {
        for corridor in self.sorted_corridors() {
            let fwd = self.index.corridor_fwd[&corridor.id].clone();
            let bwd = self.index.corridor_bwd[&corridor.id].clone();
            let segments = self.index.corridor_segments[&corridor.id].clone();
            for t in 0..self.horizon {
                let mut terms = vec![(fwd[t], 1.0), (bwd[t], 1.0)];
                for &seg in &segments {
                    terms.push((seg, -1.0));
                }
                self.lp.add_constraint(
                    format!("xcap|{}|{}", corridor.id, t),
                    terms,
                    Sense::Le,
                    corridor.preexisting,
                )?;
            }
        }
        Ok(())
    }
}

fn share_of(shares: &[(CarrierId, f64)], carrier: &CarrierId) -> Option<f64> {
    shares.iter().find(|(c, _)| c == carrier).map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Sense;
    use crate::model::{
        CapacityFactor, Carrier, EnergyModel, ExchangeCorridor, ImportOption, StorageTechnology,
        Technology,
    };
    use crate::sample;

    fn one_region(
        carriers: Vec<Carrier>,
        technologies: Vec<Technology>,
        storages: Vec<StorageTechnology>,
        horizon: u32,
    ) -> EnergyModel {
        EnergyModel::assemble(
            "test",
            horizon,
            vec!["r".into()],
            carriers,
            technologies,
            storages,
            vec![],
            vec![],
        )
        .with_interest(0.0)
    }

    #[test]
    fn minimal_instance_counts() {
        let built = build_lp(&sample::single_tech_two_hours()).unwrap();
        assert_eq!(built.lp.num_variables(), 3); // K, G_0, G_1
        assert_eq!(built.lp.num_constraints(), 4); // 2 balances + 2 capacity rows
        assert!(built.lp.variable_index("K|turbine|r").is_some());
        assert!(built.lp.constraint_index("bal|electricity|r|1").is_some());
        // v_fix = 100/20 + 2
        let k = built.lp.variable_index("K|turbine|r").unwrap();
        assert_eq!(built.lp.variables[k].objective, 7.0);
    }

    #[test]
    fn storage_adds_3t_plus_2_variables() {
        let t = 6u32;
        let demand = vec![2.0; t as usize];
        let base = one_region(
            vec![Carrier::new("electricity", 1).demand("r", demand.clone())],
            vec![Technology::new("gen")
                .in_region("r")
                .output("electricity", 1.0)
                .costs(10.0, 0.0, 0.01, 10.0)],
            vec![],
            t,
        );
        let with_storage = one_region(
            vec![Carrier::new("electricity", 1).demand("r", demand)],
            vec![Technology::new("gen")
                .in_region("r")
                .output("electricity", 1.0)
                .costs(10.0, 0.0, 0.01, 10.0)],
            vec![StorageTechnology::new("st", "electricity")
                .in_region("r")
                .energy_to_power(0.1, 10.0)],
            t,
        );
        let a = build_lp(&base).unwrap();
        let b = build_lp(&with_storage).unwrap();
        // S_in, S_out, S_lvl per hour plus K_st and K_lvl
        assert_eq!(
            b.lp.num_variables() - a.lp.num_variables(),
            3 * t as usize + 2
        );
        // T level balances + T power caps + T level caps + 2 linking rows
        assert_eq!(
            b.lp.num_constraints() - a.lp.num_constraints(),
            3 * t as usize + 2
        );
    }

    #[test]
    fn capacity_factor_lands_on_capacity_column() {
        let model = one_region(
            vec![Carrier::new("electricity", 1).demand("r", vec![1.0, 1.0])],
            vec![Technology::new("cc-turbine")
                .in_region("r")
                .output("electricity", 1.0)
                .capacity_factor(CapacityFactor::Constant(0.93))
                .costs(10.0, 0.0, 0.0, 10.0)],
            vec![],
            2,
        );
        let built = build_lp(&model).unwrap();
        let k = built.lp.variable_index("K|cc-turbine|r").unwrap();
        for t in 0..2 {
            let row = &built.lp.constraints[built
                .lp
                .constraint_index(&format!("cap|cc-turbine|r|{t}"))
                .unwrap()];
            let coef = row.terms.iter().find(|(v, _)| *v == k).unwrap().1;
            assert_eq!(coef, -0.93);
            assert_eq!(row.sense, Sense::Le);
        }
    }

    #[test]
    fn fixed_corridor_caps_both_directions() {
        let model = EnergyModel::assemble(
            "two",
            2,
            vec!["a".into(), "b".into()],
            vec![Carrier::new("electricity", 1).demand("b", vec![1.0, 1.0])],
            vec![Technology::new("gen")
                .in_region("a")
                .output("electricity", 1.0)
                .costs(1.0, 0.0, 0.01, 10.0)],
            vec![],
            vec![ExchangeCorridor::new("a-b", "a", "b", "electricity").preexisting(1.0)],
            vec![],
        );
        let built = build_lp(&model).unwrap();
        let row = &built.lp.constraints[built.lp.constraint_index("xcap|a-b|0").unwrap()];
        assert_eq!(row.rhs, 1.0);
        assert_eq!(row.terms.len(), 2); // EF + EB, no expansion columns
    }

    #[test]
    fn energy_to_power_linking_rows() {
        let model = one_region(
            vec![Carrier::new("electricity", 1).demand("r", vec![1.0])],
            vec![Technology::new("gen")
                .in_region("r")
                .output("electricity", 1.0)
                .costs(1.0, 0.0, 0.0, 10.0)],
            vec![StorageTechnology::new("battery", "electricity")
                .in_region("r")
                .energy_to_power(0.1, 10.0)],
            1,
        );
        let built = build_lp(&model).unwrap();
        let ks = built.lp.variable_index("KS|battery|r").unwrap();
        let lo = &built.lp.constraints[built.lp.constraint_index("slink_lo|battery|r").unwrap()];
        assert_eq!(lo.sense, Sense::Ge);
        assert_eq!(lo.terms.iter().find(|(v, _)| *v == ks).unwrap().1, -0.1);
        let hi = &built.lp.constraints[built.lp.constraint_index("slink_hi|battery|r").unwrap()];
        assert_eq!(hi.sense, Sense::Le);
        assert_eq!(hi.terms.iter().find(|(v, _)| *v == ks).unwrap().1, -10.0);
    }

    #[test]
    fn importer_pays_the_losses() {
        // 500 km at 5% per 1000 km: receiving balance sees 0.975.
        let model = EnergyModel::assemble(
            "loss",
            1,
            vec!["a".into(), "b".into()],
            vec![Carrier::new("electricity", 1).demand("b", vec![1.0])],
            vec![Technology::new("gen")
                .in_region("a")
                .output("electricity", 1.0)
                .costs(1.0, 0.0, 0.01, 10.0)],
            vec![],
            vec![ExchangeCorridor::new("a-b", "a", "b", "electricity")
                .distance(500.0, 0.05)
                .preexisting(2.0)],
            vec![],
        );
        let built = build_lp(&model).unwrap();
        let ef = built.lp.variable_index("EF|a-b|0").unwrap();
        let bal_b =
            &built.lp.constraints[built.lp.constraint_index("bal|electricity|b|0").unwrap()];
        assert_eq!(bal_b.terms.iter().find(|(v, _)| *v == ef).unwrap().1, 0.975);
        let bal_a =
            &built.lp.constraints[built.lp.constraint_index("bal|electricity|a|0").unwrap()];
        assert_eq!(bal_a.terms.iter().find(|(v, _)| *v == ef).unwrap().1, -1.0);
    }

    #[test]
    fn conversion_rows_single_and_shares() {
        let model = one_region(
            vec![
                Carrier::new("electricity", 1).demand("r", vec![6.0]),
                Carrier::new("heat", 1).demand("r", vec![4.0]),
                Carrier::new("gas", 1),
            ],
            vec![Technology::new("chp")
                .in_region("r")
                .input("gas", 1.0)
                .output("electricity", 0.6)
                .output("heat", 0.4)
                .efficiency(1.0)
                .costs(1.0, 0.0, 0.0, 10.0)],
            vec![],
            1,
        );
        let mut model = model;
        model.imports.push(ImportOption {
            carrier: "gas".into(),
            region: "r".into(),
            price_eur_per_mwh: 20.0,
            limit_gw: None,
        });
        let built = build_lp(&model).unwrap();
        let g = built.lp.variable_index("G|chp|r|0").unwrap();
        let u = built.lp.variable_index("U|chp|r|0").unwrap();
        let conv = &built.lp.constraints[built.lp.constraint_index("conv|chp|r|0").unwrap()];
        assert_eq!(conv.terms.iter().find(|(v, _)| *v == g).unwrap().1, 1.0);
        assert_eq!(conv.terms.iter().find(|(v, _)| *v == u).unwrap().1, -1.0);
        // balance shares: 0.6 on electricity, 0.4 on heat
        let bal_e =
            &built.lp.constraints[built.lp.constraint_index("bal|electricity|r|0").unwrap()];
        assert_eq!(bal_e.terms.iter().find(|(v, _)| *v == g).unwrap().1, 0.6);
        let bal_h = &built.lp.constraints[built.lp.constraint_index("bal|heat|r|0").unwrap()];
        assert_eq!(bal_h.terms.iter().find(|(v, _)| *v == g).unwrap().1, 0.4);
    }

    #[test]
    fn heat_pump_cop_above_one() {
        let model = one_region(
            vec![
                Carrier::new("heat", 1).demand("r", vec![9.0]),
                Carrier::new("electricity", 1),
            ],
            vec![Technology::new("hp")
                .in_region("r")
                .input("electricity", 1.0)
                .output("heat", 1.0)
                .efficiency(3.0)
                .costs(1.0, 0.0, 0.0, 10.0)],
            vec![],
            1,
        );
        let mut model = model;
        model.imports.push(ImportOption {
            carrier: "electricity".into(),
            region: "r".into(),
            price_eur_per_mwh: 50.0,
            limit_gw: None,
        });
        let built = build_lp(&model).unwrap();
        let solution = crate::solver::solve(&built.lp, &Default::default());
        assert!(solution.is_optimal());
        let g = solution.value(&built.lp, "G|hp|r|0").unwrap();
        let u = solution.value(&built.lp, "U|hp|r|0").unwrap();
        assert!((g - 9.0).abs() < 1e-9);
        assert!((u - 3.0).abs() < 1e-9);
    }

    #[test]
    fn import_price_converts_to_mil_eur_per_gwh() {
        let model = sample::mustrun_pair();
        let built = build_lp(&model).unwrap();
        let imp = built
            .lp
            .variable_index("IMP|hydrogen|r|1|0")
            .expect("hydrogen import column");
        assert!((built.lp.variables[imp].objective - 0.3).abs() < 1e-12);
    }

    #[test]
    fn mustrun_rows_follow_the_profile() {
        let model = sample::mustrun_pair();
        let built = build_lp(&model).unwrap();
        // capacity balance: K_hp + K_boiler = 8
        let row = &built.lp.constraints[built.lp.constraint_index("mr5a|heat-local|r").unwrap()];
        assert_eq!(row.sense, Sense::Eq);
        assert_eq!(row.rhs, 8.0);
        // proportional output at hour 0: G - (2/8) K = 0
        let k = built.lp.variable_index("K|heat-pump|r").unwrap();
        let row = &built.lp.constraints[built.lp.constraint_index("mr5b|heat-pump|r|0").unwrap()];
        assert_eq!(row.terms.iter().find(|(v, _)| *v == k).unwrap().1, -0.25);
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn mustrun_fixed_split_outputs() {
        // Pin K = (3, 5) via bounds; hour 0 (d=2) outputs must be (0.75, 1.25).
        let mut model = sample::mustrun_pair();
        for tech in &mut model.technologies {
            if tech.id.as_str() == "heat-pump" {
                tech.capacity_bounds.insert("r".into(), (3.0, 3.0));
            } else {
                tech.capacity_bounds.insert("r".into(), (5.0, 5.0));
            }
        }
        let built = build_lp(&model).unwrap();
        let solution = crate::solver::solve(&built.lp, &Default::default());
        assert!(solution.is_optimal());
        assert!((solution.value(&built.lp, "G|heat-pump|r|0").unwrap() - 0.75).abs() < 1e-9);
        assert!((solution.value(&built.lp, "G|h2-boiler|r|0").unwrap() - 1.25).abs() < 1e-9);
    }

    #[test]
    fn deterministic_under_input_reordering() {
        let model = sample::two_region_week();
        let mut shuffled = model.clone();
        shuffled.technologies.reverse();
        shuffled.carriers.reverse();
        shuffled.storages.reverse();
        let a = build_lp(&model).unwrap().lp.to_mps("M");
        let b = build_lp(&shuffled).unwrap().lp.to_mps("M");
        assert_eq!(a, b);
    }

    #[test]
    fn empty_horizon_is_a_build_error() {
        let model = EnergyModel::assemble(
            "empty",
            0,
            vec!["r".into()],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
        );
        assert!(matches!(build_lp(&model), Err(BuildError::EmptyHorizon)));
    }

    #[test]
    fn invalid_model_is_rejected() {
        let model = one_region(
            vec![Carrier::new("electricity", 5).demand("r", vec![1.0; 24])],
            vec![],
            vec![],
            24,
        );
        assert!(matches!(build_lp(&model), Err(BuildError::InvalidModel(_))));
    }

    #[test]
    fn validated_models_always_build() {
        for model in [
            sample::single_tech_two_hours(),
            sample::dispatch_12h(),
            sample::mustrun_pair(),
            sample::heat_blocks(),
            sample::bev_two_days(),
            sample::storage_cycle(1.0),
            sample::corridor_pair(),
            sample::two_region_week(),
        ] {
            assert!(!crate::validate::has_errors(
                &crate::validate::validate_model(&model)
            ));
            assert!(build_lp(&model).is_ok());
        }
    }

    #[test]
    fn reservoir_inflow_lands_negated_on_rhs() {
        let model = one_region(
            vec![Carrier::new("electricity", 1).demand("r", vec![1.0, 1.0])],
            vec![Technology::new("gen")
                .in_region("r")
                .output("electricity", 1.0)
                .costs(1.0, 0.0, 0.01, 10.0)],
            vec![StorageTechnology::new("reservoir", "electricity")
                .in_region("r")
                .inflow("r", vec![0.5, 0.25])],
            2,
        );
        let built = build_lp(&model).unwrap();
        let row = &built.lp.constraints[built.lp.constraint_index("sbal|reservoir|r|1").unwrap()];
        assert_eq!(row.rhs, -0.25);
        assert!(built.lp.variable_index("SPILL|reservoir|r|0").is_some());
    }
}
