//! Sparse linear-program representation with a bidirectional name map
//! between model entities and variables/constraints.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("duplicate variable name '{0}'")]
    DuplicateVariable(String),
    #[error("duplicate constraint name '{0}'")]
    DuplicateConstraint(String),
    #[error("non-finite coefficient on '{0}'")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Sparse row; variable indices are unique, coefficients nonzero.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Minimization LP over named variables and constraints. Construction is
/// append-only; ordering is whatever the builder emitted, which the builder
/// keeps deterministic.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    var_index: HashMap<String, usize>,
    con_index: HashMap<String, usize>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> Result<usize, LpError> {
        let name = name.into();
        if !objective.is_finite() || lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(LpError::NonFinite(name));
        }
        if self.var_index.contains_key(&name) {
            return Err(LpError::DuplicateVariable(name));
        }
        let idx = self.variables.len();
        self.var_index.insert(name.clone(), idx);
        self.variables.push(Variable {
            name,
            lower,
            upper,
            objective,
        });
        Ok(idx)
    }

    /// Adds a row. Zero coefficients are dropped, duplicate variables merged.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, LpError> {
        let name = name.into();
        if self.con_index.contains_key(&name) {
            return Err(LpError::DuplicateConstraint(name));
        }
        if !rhs.is_finite() || terms.iter().any(|(_, c)| !c.is_finite()) {
            return Err(LpError::NonFinite(name));
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (var, coef) in terms {
            debug_assert!(var < self.variables.len());
            match merged.iter_mut().find(|(v, _)| *v == var) {
                Some((_, c)) => *c += coef,
                None => merged.push((var, coef)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        let idx = self.constraints.len();
        self.con_index.insert(name.clone(), idx);
        self.constraints.push(Constraint {
            name,
            terms: merged,
            sense,
            rhs,
        });
        Ok(idx)
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn constraint_index(&self, name: &str) -> Option<usize> {
        self.con_index.get(name).copied()
    }

    pub fn variable_name(&self, index: usize) -> &str {
        &self.variables[index].name
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Objective value of a candidate point.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    /// Serializes to fixed-form MPS with generated short names (the name map
    /// ties them back to entities). Output is byte-deterministic.
    pub fn to_mps(&self, problem_name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME          {problem_name}");
        out.push_str("ROWS\n N  COST\n");
        for (i, con) in self.constraints.iter().enumerate() {
            let tag = match con.sense {
                Sense::Le => 'L',
                Sense::Eq => 'E',
                Sense::Ge => 'G',
            };
            let _ = writeln!(out, " {tag}  c{i:07}");
        }
        out.push_str("COLUMNS\n");
        // Column-major walk: collect rows per variable.
        let mut per_var: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.variables.len()];
        for (ci, con) in self.constraints.iter().enumerate() {
            for &(vi, coef) in &con.terms {
                per_var[vi].push((ci, coef));
            }
        }
        for (vi, var) in self.variables.iter().enumerate() {
            if var.objective != 0.0 {
                let _ = writeln!(out, "    x{vi:07}  COST  {}", fmt_num(var.objective));
            }
            for &(ci, coef) in &per_var[vi] {
                let _ = writeln!(out, "    x{vi:07}  c{ci:07}  {}", fmt_num(coef));
            }
        }
        out.push_str("RHS\n");
        for (ci, con) in self.constraints.iter().enumerate() {
            if con.rhs != 0.0 {
                let _ = writeln!(out, "    RHS  c{ci:07}  {}", fmt_num(con.rhs));
            }
        }
        out.push_str("BOUNDS\n");
        for (vi, var) in self.variables.iter().enumerate() {
            if var.lower == var.upper {
                let _ = writeln!(out, " FX BND  x{vi:07}  {}", fmt_num(var.lower));
                continue;
            }
            if var.lower != 0.0 {
                let _ = writeln!(out, " LO BND  x{vi:07}  {}", fmt_num(var.lower));
            }
            if var.upper.is_finite() {
                let _ = writeln!(out, " UP BND  x{vi:07}  {}", fmt_num(var.upper));
            }
        }
        out.push_str("ENDATA\n");
        out
    }

    /// Name-map table `variable_mps_name,entity_name` plus the same for rows.
    pub fn name_map_csv(&self) -> String {
        let mut out = String::from("kind,mps_name,name\n");
        for (vi, var) in self.variables.iter().enumerate() {
            let _ = writeln!(out, "variable,x{vi:07},{}", var.name);
        }
        for (ci, con) in self.constraints.iter().enumerate() {
            let _ = writeln!(out, "constraint,c{ci:07},{}", con.name);
        }
        out
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}
