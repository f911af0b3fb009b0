//! Writes solved-plan artifacts as diff-able CSV tables and reads them back
//! for reporting. Output is deterministic byte-for-byte.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use crate::plan::SolvedPlan;

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes capacities, hourly dispatch, exchange flows, storage levels,
/// imports, corridor expansion, and the objective breakdown.
pub fn write_solution(plan: &SolvedPlan, dir: impl AsRef<Path>) -> io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let horizon = plan.horizon();
    let model = &plan.model;

    let mut techs: Vec<_> = model.technologies.iter().collect();
    techs.sort_by(|a, b| a.id.cmp(&b.id));
    let mut storages: Vec<_> = model.storages.iter().collect();
    storages.sort_by(|a, b| a.id.cmp(&b.id));
    let mut corridors: Vec<_> = model.corridors.iter().collect();
    corridors.sort_by(|a, b| a.id.cmp(&b.id));

    // capacities.csv
    let mut out = String::from("kind,entity,region,carrier,built,preexisting,total\n");
    for tech in &techs {
        let mut regions = tech.regions.clone();
        regions.sort();
        let carrier = tech
            .outputs
            .first()
            .map(|(c, _)| c.as_str())
            .unwrap_or_default();
        for region in &regions {
            let built = plan.capacity(&tech.id, region);
            let pre = tech.preexisting_in(region);
            out.push_str(&format!(
                "technology,{},{},{},{},{},{}\n",
                tech.id,
                region,
                carrier,
                fmt(built),
                fmt(pre),
                fmt(built + pre)
            ));
            if tech.embedded_storage.is_some() {
                let power = plan.embedded_power(&tech.id, region);
                let energy = plan.embedded_energy(&tech.id, region);
                out.push_str(&format!(
                    "embedded-storage-power,{},{},{},{},0,{}\n",
                    tech.id,
                    region,
                    carrier,
                    fmt(power),
                    fmt(power)
                ));
                out.push_str(&format!(
                    "embedded-storage-energy,{},{},{},{},0,{}\n",
                    tech.id,
                    region,
                    carrier,
                    fmt(energy),
                    fmt(energy)
                ));
            }
        }
    }
    for storage in &storages {
        let mut regions = storage.regions.clone();
        regions.sort();
        for region in &regions {
            let (pre_p, pre_e) = storage.preexisting_in(region);
            let power = plan.storage_power(&storage.id, region);
            let energy = plan.storage_energy(&storage.id, region);
            out.push_str(&format!(
                "storage-power,{},{},{},{},{},{}\n",
                storage.id,
                region,
                storage.carrier,
                fmt(power),
                fmt(pre_p),
                fmt(power + pre_p)
            ));
            out.push_str(&format!(
                "storage-energy,{},{},{},{},{},{}\n",
                storage.id,
                region,
                storage.carrier,
                fmt(energy),
                fmt(pre_e),
                fmt(energy + pre_e)
            ));
        }
    }
    for corridor in &corridors {
        let built: f64 = plan.corridor_expansion(&corridor.id).iter().sum();
        out.push_str(&format!(
            "corridor,{},{}>{},{},{},{},{}\n",
            corridor.id,
            corridor.from,
            corridor.to,
            corridor.carrier,
            fmt(built),
            fmt(corridor.preexisting),
            fmt(built + corridor.preexisting)
        ));
    }
    fs::write(dir.join("capacities.csv"), out)?;

    // expansion.csv: per-segment fill.
    if corridors.iter().any(|c| !c.segments.is_empty()) {
        let mut out =
            String::from("corridor,carrier,from,to,segment,built,segment_capacity,unit_cost\n");
        for corridor in &corridors {
            let built = plan.corridor_expansion(&corridor.id);
            for (s, segment) in corridor.segments.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    corridor.id,
                    corridor.carrier,
                    corridor.from,
                    corridor.to,
                    s,
                    fmt(built.get(s).copied().unwrap_or(0.0)),
                    fmt(segment.capacity),
                    fmt(segment.unit_cost)
                ));
            }
        }
        fs::write(dir.join("expansion.csv"), out)?;
    }

    // dispatch.csv: per (hour, technology, region, carrier).
    let mut out = String::from("hour,technology,region,carrier,generation,use\n");
    for tech in &techs {
        let mut regions = tech.regions.clone();
        regions.sort();
        for region in &regions {
            let mut carriers: Vec<&crate::model::CarrierId> = tech
                .outputs
                .iter()
                .map(|(c, _)| c)
                .chain(tech.inputs.iter().map(|(c, _)| c))
                .collect();
            carriers.sort();
            carriers.dedup();
            for carrier in carriers {
                let gen = plan.generation_of(&tech.id, region, carrier);
                let used = plan.input_of(&tech.id, region, carrier);
                for t in 0..horizon {
                    out.push_str(&format!(
                        "{t},{},{},{},{},{}\n",
                        tech.id,
                        region,
                        carrier,
                        fmt(gen.get(t).copied().unwrap_or(0.0)),
                        fmt(used.get(t).copied().unwrap_or(0.0)),
                    ));
                }
            }
        }
    }
    fs::write(dir.join("dispatch.csv"), out)?;

    // storage.csv: network and embedded levels.
    let mut out = String::from("kind,entity,region,hour,charge,discharge,level,spill\n");
    for storage in &storages {
        let mut regions = storage.regions.clone();
        regions.sort();
        for region in &regions {
            let charge = plan.storage_charge(&storage.id, region);
            let discharge = plan.storage_discharge(&storage.id, region);
            let level = plan.storage_level(&storage.id, region);
            let spill = plan.storage_spill(&storage.id, region);
            for t in 0..horizon {
                out.push_str(&format!(
                    "network,{},{},{t},{},{},{},{}\n",
                    storage.id,
                    region,
                    fmt(charge[t]),
                    fmt(discharge[t]),
                    fmt(level[t]),
                    fmt(spill.get(t).copied().unwrap_or(0.0)),
                ));
            }
        }
    }
    for tech in &techs {
        if tech.embedded_storage.is_none() {
            continue;
        }
        let mut regions = tech.regions.clone();
        regions.sort();
        for region in &regions {
            let charge = plan.embedded_charge(&tech.id, region);
            let discharge = plan.embedded_discharge(&tech.id, region);
            let level = plan.embedded_level(&tech.id, region);
            for t in 0..horizon {
                out.push_str(&format!(
                    "embedded,{},{},{t},{},{},{},0\n",
                    tech.id,
                    region,
                    fmt(charge[t]),
                    fmt(discharge[t]),
                    fmt(level[t]),
                ));
            }
        }
    }
    fs::write(dir.join("storage.csv"), out)?;

    // exchange.csv
    if !corridors.is_empty() {
        let mut out = String::from("hour,corridor,carrier,from,to,flow_fwd,flow_bwd\n");
        for corridor in &corridors {
            let fwd = plan.corridor_flow_fwd(&corridor.id);
            let bwd = plan.corridor_flow_bwd(&corridor.id);
            for t in 0..horizon {
                out.push_str(&format!(
                    "{t},{},{},{},{},{},{}\n",
                    corridor.id,
                    corridor.carrier,
                    corridor.from,
                    corridor.to,
                    fmt(fwd[t]),
                    fmt(bwd[t]),
                ));
            }
        }
        fs::write(dir.join("exchange.csv"), out)?;
    }

    // imports.csv
    if !plan.built.index.import_flow.is_empty() {
        let mut seen: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for (carrier, region, _) in plan.built.index.import_flow.keys() {
            seen.entry((carrier.to_string(), region.to_string()))
                .or_insert_with(|| plan.imports_into(carrier, region));
        }
        let mut out = String::from("hour,carrier,region,quantity\n");
        for ((carrier, region), series) in &seen {
            for t in 0..horizon {
                out.push_str(&format!("{t},{carrier},{region},{}\n", fmt(series[t])));
            }
        }
        fs::write(dir.join("imports.csv"), out)?;
    }

    // objective.csv
    let breakdown = plan.objective_breakdown();
    let mut out = String::from("component,value\n");
    out.push_str(&format!("fixed_cost,{}\n", fmt(breakdown.fixed_cost)));
    out.push_str(&format!("variable_cost,{}\n", fmt(breakdown.variable_cost)));
    out.push_str(&format!("import_cost,{}\n", fmt(breakdown.import_cost)));
    out.push_str(&format!("objective,{}\n", fmt(breakdown.total)));
    out.push_str(&format!(
        "preexisting_fixed_cost,{}\n",
        fmt(breakdown.preexisting_fixed_cost)
    ));
    out.push_str(&format!(
        "grand_total,{}\n",
        fmt(breakdown.total + breakdown.preexisting_fixed_cost)
    ));
    fs::write(dir.join("objective.csv"), out)?;

    Ok(())
}

/// Reads an `objective.csv` back into component/value pairs.
pub fn read_objective(path: impl AsRef<Path>) -> io::Result<BTreeMap<String, f64>> {
    let data = fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for line in data.lines().skip(1) {
        if let Some((key, value)) = line.split_once(',') {
            if let Ok(v) = value.parse::<f64>() {
                out.insert(key.to_string(), v);
            }
        }
    }
    Ok(out)
}

/// Reads a `capacities.csv` back as rows of (kind, entity, region, total).
pub fn read_capacities(path: impl AsRef<Path>) -> io::Result<Vec<(String, String, String, f64)>> {
    let data = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in data.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() == 7 {
            if let Ok(total) = fields[6].parse::<f64>() {
                out.push((
                    fields[0].to_string(),
                    fields[1].to_string(),
                    fields[2].to_string(),
                    total,
                ));
            }
        }
    }
    Ok(out)
}
