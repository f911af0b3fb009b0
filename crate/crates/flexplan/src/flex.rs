//! Demand-flexibility constructs: must-run dispatch with joint capacity
//! sized to peak demand, heat storage embedded inside a single must-run
//! technology, and availability-capped BEV charging.
//!
//! Must-run proportionality is enforced at the output carrier's own
//! resolution: hourly carriers get hourly rows, a 4-hour heat carrier gets
//! one row per block, which is what lets hourly output drift from the
//! hourly profile while block energy stays fixed. With embedded storage the
//! row binds the net heat leaving the system boundary (direct output plus
//! discharge after losses minus charge).

use std::collections::BTreeMap;

use crate::builder::LpIndex;
use crate::lp::{LinearProgram, LpError, Sense};
use crate::model::{DispatchMode, EnergyModel, RegionId, TechId};
use crate::validate::Diagnostic;

/// Unconnected technologies jointly serving one local demand.
#[derive(Debug, Clone, PartialEq)]
pub struct MustRunGroup {
    pub carrier: crate::model::CarrierId,
    pub region: RegionId,
    /// Member technology ids, sorted.
    pub members: Vec<TechId>,
    /// Peak demand p: the maximum block-average power, GW.
    pub peak_demand: f64,
    /// Demand energy per block at the carrier's resolution, GWh.
    pub block_energy: Vec<f64>,
}

/// Forms one group per (carrier, region) with at least one must-run
/// producer. Groups with zero peak demand are reported and dropped.
pub fn must_run_groups(model: &EnergyModel) -> (Vec<MustRunGroup>, Vec<Diagnostic>) {
    let horizon = model.horizon() as usize;
    let mut diagnostics = Vec::new();
    let mut grouped: BTreeMap<(crate::model::CarrierId, RegionId), Vec<TechId>> = BTreeMap::new();

    for tech in &model.technologies {
        if tech.dispatch != DispatchMode::MustRun {
            continue;
        }
        let Some((carrier, _)) = tech.outputs.first() else {
            continue;
        };
        if tech.outputs.len() != 1 {
            continue; // reported by validate_model
        }
        for region in &tech.regions {
            grouped
                .entry((carrier.clone(), region.clone()))
                .or_default()
                .push(tech.id.clone());
        }
    }

    let mut groups = Vec::new();
    for ((carrier_id, region), mut members) in grouped {
        members.sort();
        let entity = format!("{carrier_id}:{region}");
        let Some(carrier) = model.carrier(&carrier_id) else {
            continue;
        };
        let Some(blocks) = model.time.blocks(carrier.resolution) else {
            continue; // unusable resolution, reported by validate_model
        };
        let demand = match model.demand(&carrier_id, &region) {
            Some(series) if series.len() == horizon => series,
            _ => {
                diagnostics.push(Diagnostic::error(
                    entity,
                    "must-run group has no usable demand series (p = 0); group rejected",
                ));
                continue;
            }
        };
        let block_energy: Vec<f64> = blocks
            .iter()
            .map(|&(s, e)| (s..e).map(|t| demand[t as usize]).sum())
            .collect();
        let peak_demand = block_energy
            .iter()
            .zip(blocks)
            .map(|(d, &(s, e))| d / f64::from(e - s))
            .fold(0.0_f64, f64::max);
        if peak_demand <= 0.0 {
            diagnostics.push(Diagnostic::error(
                entity,
                "must-run group has zero peak demand (p = 0); group rejected",
            ));
            continue;
        }
        groups.push(MustRunGroup {
            carrier: carrier_id,
            region,
            members,
            peak_demand,
            block_energy,
        });
    }
    (groups, diagnostics)
}

/// Emits the capacity balance (sum of member capacities equals peak demand)
/// and one proportional-output row per member and carrier block.
pub fn build_mustrun_constraints(
    lp: &mut LinearProgram,
    model: &EnergyModel,
    index: &LpIndex,
    group: &MustRunGroup,
) -> Result<(), LpError> {
    let p = group.peak_demand;
    let carrier = model.carrier(&group.carrier).expect("group carrier exists");
    let blocks = model
        .time
        .blocks(carrier.resolution)
        .expect("group resolution exists");

    // capacity balance: sum_i (K_i + pre_i) = p
    let mut terms = Vec::with_capacity(group.members.len());
    let mut preexisting = 0.0;
    for member in &group.members {
        let key = (member.clone(), group.region.clone());
        terms.push((index.tech_capacity[&key], 1.0));
        let tech = model.technology(member).expect("member exists");
        preexisting += tech.preexisting_in(&group.region);
    }
    lp.add_constraint(
        format!("mr5a|{}|{}", group.carrier, group.region),
        terms,
        Sense::Eq,
        p - preexisting,
    )?;

    // proportional output per member and block: sum_{t in block} G_t = (d_block / p) * (K + pre)
    for member in &group.members {
        let key = (member.clone(), group.region.clone());
        let tech = model.technology(member).expect("member exists");
        let pre = tech.preexisting_in(&group.region);
        let k_var = index.tech_capacity[&key];
        let gen = &index.tech_gen[&key];
        for (b, &(start, end)) in blocks.iter().enumerate() {
            let ratio = group.block_energy[b] / p;
            let mut terms: Vec<(usize, f64)> =
                (start..end).map(|t| (gen[t as usize], 1.0)).collect();
            terms.push((k_var, -ratio));
            lp.add_constraint(
                format!("mr5b|{}|{}|{}", member, group.region, b),
                terms,
                Sense::Eq,
                ratio * pre,
            )?;
        }
    }
    Ok(())
}

/// Emits the storage level balance, power and energy caps, and the
/// duration link for a must-run technology's embedded heat storage. The
/// boundary-output definition (G = eta*U - charge + eta_dis*discharge) is
/// the technology's conversion row, emitted by the builder.
pub fn build_embedded_storage(
    lp: &mut LinearProgram,
    model: &EnergyModel,
    index: &LpIndex,
    tech_id: &TechId,
    region: &RegionId,
) -> Result<(), LpError> {
    let tech = model.technology(tech_id).expect("tech exists");
    let spec = tech
        .embedded_storage
        .as_ref()
        .expect("embedded storage spec");
    let key = (tech_id.clone(), region.clone());
    let horizon = index.horizon;
    let charge = &index.emb_charge[&key];
    let discharge = &index.emb_discharge[&key];
    let level = &index.emb_level[&key];
    let k_power = index.emb_power[&key];
    let k_energy = index.emb_energy[&key];

    for t in 0..horizon {
        let prev = if t == 0 { horizon - 1 } else { t - 1 };
        // delta * L_{t-1} + rho * C_t - D_t - L_t = 0, cyclic wrap.
        lp.add_constraint(
            format!("ebal|{tech_id}|{region}|{t}"),
            vec![
                (level[prev], spec.self_discharge),
                (charge[t], spec.charge_efficiency),
                (discharge[t], -1.0),
                (level[t], -1.0),
            ],
            Sense::Eq,
            0.0,
        )?;
        lp.add_constraint(
            format!("ecap|{tech_id}|{region}|{t}"),
            vec![(charge[t], 1.0), (discharge[t], 1.0), (k_power, -1.0)],
            Sense::Le,
            0.0,
        )?;
        lp.add_constraint(
            format!("elvl|{tech_id}|{region}|{t}"),
            vec![(level[t], 1.0), (k_energy, -1.0)],
            Sense::Le,
            0.0,
        )?;
    }
    lp.add_constraint(
        format!("edur|{tech_id}|{region}"),
        vec![(k_energy, 1.0), (k_power, -spec.max_duration)],
        Sense::Le,
        0.0,
    )?;
    Ok(())
}

/// Hourly grid-connection caps for a technology with an availability
/// profile: U_t <= alpha_t * avail_t * (K + pre). The daily
/// charge/consumption matching is the output carrier's balance at its
/// 24-hour resolution, emitted by the builder.
pub fn build_bev_constraints(
    lp: &mut LinearProgram,
    model: &EnergyModel,
    index: &LpIndex,
    tech_id: &TechId,
    region: &RegionId,
) -> Result<(), LpError> {
    let tech = model.technology(tech_id).expect("tech exists");
    let profile = tech
        .availability_profile
        .as_ref()
        .expect("availability profile");
    let key = (tech_id.clone(), region.clone());
    let k_var = index.tech_capacity[&key];
    let used = &index.tech_use[&key];
    let pre = tech.preexisting_in(region);
    for t in 0..index.horizon {
        let cap = tech.capacity_factor.at(region, t) * profile[t];
        lp.add_constraint(
            format!("cap|{tech_id}|{region}|{t}"),
            vec![(used[t], 1.0), (k_var, -cap)],
            Sense::Le,
            cap * pre,
        )?;
    }
    Ok(())
}
