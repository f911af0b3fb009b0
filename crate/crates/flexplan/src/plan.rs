//! Bundles a model, its built LP, and an optimal solution, with typed
//! accessors for dispatch series and capacities.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::builder::BuiltLp;
use crate::model::{CarrierId, EnergyModel, RegionId, StorageId, TechId};
use crate::solver::{Solution, SolveStatus};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("solution status is {0:?}, not optimal")]
    NotOptimal(SolveStatus),
    #[error("solution carries no variable values")]
    MissingValues,
}

/// Objective cost components of a solved plan, Mil.€.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ObjectiveBreakdown {
    pub fixed_cost: f64,
    pub variable_cost: f64,
    pub import_cost: f64,
    /// fixed + variable + import; equals the LP objective.
    pub total: f64,
    /// Reported constant for pre-existing capacity; outside the argmin.
    pub preexisting_fixed_cost: f64,
}

/// A solved capacity-expansion plan.
#[derive(Debug, Clone)]
pub struct SolvedPlan {
    pub model: EnergyModel,
    pub built: BuiltLp,
    pub solution: Solution,
}

impl SolvedPlan {
    pub fn new(model: EnergyModel, built: BuiltLp, solution: Solution) -> Result<Self, PlanError> {
        if solution.status != SolveStatus::Optimal {
            return Err(PlanError::NotOptimal(solution.status));
        }
        if solution.values.is_none() {
            return Err(PlanError::MissingValues);
        }
        Ok(Self {
            model,
            built,
            solution,
        })
    }

    pub fn values(&self) -> &[f64] {
        self.solution.values.as_deref().expect("checked at new()")
    }

    pub fn horizon(&self) -> usize {
        self.built.index.horizon
    }

    fn series(&self, vars: &[usize]) -> Vec<f64> {
        let values = self.values();
        vars.iter().map(|&v| values[v]).collect()
    }

    fn keyed<T: Ord + Clone>(&self, map: &BTreeMap<T, Vec<usize>>, key: &T) -> Vec<f64> {
        map.get(key).map(|v| self.series(v)).unwrap_or_default()
    }

    /// Newly built capacity, GW of the capacity variable's denomination.
    pub fn capacity(&self, tech: &TechId, region: &RegionId) -> f64 {
        self.built
            .index
            .tech_capacity
            .get(&(tech.clone(), region.clone()))
            .map(|&v| self.values()[v])
            .unwrap_or(0.0)
    }

    /// Hourly total generation of a technology (all output carriers).
    pub fn generation(&self, tech: &TechId, region: &RegionId) -> Vec<f64> {
        self.keyed(&self.built.index.tech_gen, &(tech.clone(), region.clone()))
    }

    /// Hourly total input of a technology (all input carriers).
    pub fn input(&self, tech: &TechId, region: &RegionId) -> Vec<f64> {
        self.keyed(&self.built.index.tech_use, &(tech.clone(), region.clone()))
    }

    /// Hourly generation delivered to one carrier (output share applied).
    pub fn generation_of(&self, tech: &TechId, region: &RegionId, carrier: &CarrierId) -> Vec<f64> {
        let Some(technology) = self.model.technology(tech) else {
            return Vec::new();
        };
        let share = technology
            .outputs
            .iter()
            .find(|(c, _)| c == carrier)
            .map(|(_, s)| *s)
            .unwrap_or(0.0);
        let mut series = self.generation(tech, region);
        for v in &mut series {
            *v *= share;
        }
        series
    }

    /// Hourly draw from one carrier (input share applied).
    pub fn input_of(&self, tech: &TechId, region: &RegionId, carrier: &CarrierId) -> Vec<f64> {
        let Some(technology) = self.model.technology(tech) else {
            return Vec::new();
        };
        let share = technology
            .inputs
            .iter()
            .find(|(c, _)| c == carrier)
            .map(|(_, s)| *s)
            .unwrap_or(0.0);
        let mut series = self.input(tech, region);
        for v in &mut series {
            *v *= share;
        }
        series
    }

    pub fn storage_power(&self, storage: &StorageId, region: &RegionId) -> f64 {
        self.built
            .index
            .storage_power
            .get(&(storage.clone(), region.clone()))
            .map(|&v| self.values()[v])
            .unwrap_or(0.0)
    }

    pub fn storage_energy(&self, storage: &StorageId, region: &RegionId) -> f64 {
        self.built
            .index
            .storage_energy
            .get(&(storage.clone(), region.clone()))
            .map(|&v| self.values()[v])
            .unwrap_or(0.0)
    }

    pub fn storage_charge(&self, storage: &StorageId, region: &RegionId) -> Vec<f64> {
        self.keyed(
            &self.built.index.storage_in,
            &(storage.clone(), region.clone()),
        )
    }

    pub fn storage_discharge(&self, storage: &StorageId, region: &RegionId) -> Vec<f64> {
        self.keyed(
            &self.built.index.storage_out,
            &(storage.clone(), region.clone()),
        )
    }

    pub fn storage_level(&self, storage: &StorageId, region: &RegionId) -> Vec<f64> {
        self.keyed(
            &self.built.index.storage_level,
            &(storage.clone(), region.clone()),
        )
    }

    pub fn storage_spill(&self, storage: &StorageId, region: &RegionId) -> Vec<f64> {
        self.keyed(
            &self.built.index.storage_spill,
            &(storage.clone(), region.clone()),
        )
    }

    pub fn embedded_charge(&self, tech: &TechId, region: &RegionId) -> Vec<f64> {
        self.keyed(
            &self.built.index.emb_charge,
            &(tech.clone(), region.clone()),
        )
    }

    pub fn embedded_discharge(&self, tech: &TechId, region: &RegionId) -> Vec<f64> {
        self.keyed(
            &self.built.index.emb_discharge,
            &(tech.clone(), region.clone()),
        )
    }

    pub fn embedded_level(&self, tech: &TechId, region: &RegionId) -> Vec<f64> {
        self.keyed(&self.built.index.emb_level, &(tech.clone(), region.clone()))
    }

    pub fn embedded_power(&self, tech: &TechId, region: &RegionId) -> f64 {
        self.built
            .index
            .emb_power
            .get(&(tech.clone(), region.clone()))
            .map(|&v| self.values()[v])
            .unwrap_or(0.0)
    }

    pub fn embedded_energy(&self, tech: &TechId, region: &RegionId) -> f64 {
        self.built
            .index
            .emb_energy
            .get(&(tech.clone(), region.clone()))
            .map(|&v| self.values()[v])
            .unwrap_or(0.0)
    }

    /// Built expansion per corridor segment, GW.
    pub fn corridor_expansion(&self, corridor_id: &str) -> Vec<f64> {
        self.built
            .index
            .corridor_segments
            .get(corridor_id)
            .map(|v| self.series(v))
            .unwrap_or_default()
    }

    pub fn corridor_flow_fwd(&self, corridor_id: &str) -> Vec<f64> {
        self.built
            .index
            .corridor_fwd
            .get(corridor_id)
            .map(|v| self.series(v))
            .unwrap_or_default()
    }

    pub fn corridor_flow_bwd(&self, corridor_id: &str) -> Vec<f64> {
        self.built
            .index
            .corridor_bwd
            .get(corridor_id)
            .map(|v| self.series(v))
            .unwrap_or_default()
    }

    /// Hourly imports summed over all options for (carrier, region).
    pub fn imports_into(&self, carrier: &CarrierId, region: &RegionId) -> Vec<f64> {
        let mut out = vec![0.0; self.horizon()];
        for ((c, r, _), vars) in &self.built.index.import_flow {
            if c == carrier && r == region {
                let values = self.values();
                for (t, &v) in vars.iter().enumerate() {
                    out[t] += values[v];
                }
            }
        }
        out
    }

    /// Splits the LP objective into its cost terms.
    pub fn objective_breakdown(&self) -> ObjectiveBreakdown {
        let values = self.values();
        let index = &self.built.index;
        let lp = &self.built.lp;
        let cost_of = |var: usize| lp.variables[var].objective * values[var];

        let mut fixed = 0.0;
        for &v in index
            .tech_capacity
            .values()
            .chain(index.storage_power.values())
            .chain(index.storage_energy.values())
            .chain(index.emb_power.values())
            .chain(index.emb_energy.values())
        {
            fixed += cost_of(v);
        }
        for vars in index.corridor_segments.values() {
            for &v in vars {
                fixed += cost_of(v);
            }
        }
        let mut variable = 0.0;
        for vars in index.tech_gen.values() {
            for &v in vars {
                variable += cost_of(v);
            }
        }
        let mut import = 0.0;
        for vars in index.import_flow.values() {
            for &v in vars {
                import += cost_of(v);
            }
        }
        ObjectiveBreakdown {
            fixed_cost: fixed,
            variable_cost: variable,
            import_cost: import,
            total: fixed + variable + import,
            preexisting_fixed_cost: self.built.preexisting_fixed_cost,
        }
    }
}
