//! LP backend contract, the bundled simplex backend, and an independent
//! solution verifier that recomputes every row and bound without touching
//! the backend's numerical core.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::lp::{LinearProgram, Sense};

/// Constraint feasibility, relative to `max(1, |rhs|)`.
pub const FEASIBILITY_REL_TOL: f64 = 1e-6;
/// Variable bound feasibility, absolute.
pub const BOUND_ABS_TOL: f64 = 1e-7;
/// Objective agreement between backend and recomputation, relative.
pub const OBJECTIVE_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    /// Not every backend reports iteration counts.
    pub iterations: Option<u64>,
    pub wall_time: Duration,
}

/// Status-tagged result of one solve call.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub message: Option<String>,
    pub objective: Option<f64>,
    /// Values aligned with the LP's variable order.
    pub values: Option<Vec<f64>>,
    /// Dual values per constraint, when the backend provides them.
    pub duals: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, lp: &LinearProgram, name: &str) -> Option<f64> {
        let idx = lp.variable_index(name)?;
        self.values.as_ref().map(|v| v[idx])
    }

    fn failed(status: SolveStatus, message: impl Into<String>, wall_time: Duration) -> Self {
        Self {
            status,
            message: Some(message.into()),
            objective: None,
            values: None,
            duals: None,
            stats: SolveStats {
                iterations: None,
                wall_time,
            },
        }
    }
}

/// Options forwarded to the backend; backends apply what they support.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Seconds; checked post-hoc by the bundled backend (it cannot interrupt).
    pub time_limit: Option<f64>,
    pub iteration_limit: Option<u64>,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: None,
            iteration_limit: None,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
        }
    }
}

/// Synchronous, single-call backend contract. Calls are reentrant for
/// distinct LP instances; backend failures surface as status `Limit` with a
/// message, never as a silent wrong answer.
pub trait LpBackend {
    fn name(&self) -> &str;
    fn solve(&self, lp: &LinearProgram, options: &SolveOptions) -> Solution;
}

/// Bundled reference backend: a pure-Rust simplex (microlp). Deterministic
/// given identical input. Does not report duals or iteration counts.
#[derive(Debug, Default, Clone, Copy)]
pub struct SimplexBackend;

impl LpBackend for SimplexBackend {
    fn name(&self) -> &str {
        "simplex"
    }

    fn solve(&self, lp: &LinearProgram, options: &SolveOptions) -> Solution {
        let start = Instant::now();

        // Rows without any term cannot go to the backend; decide them here.
        for con in &lp.constraints {
            if con.terms.is_empty() {
                let ok = match con.sense {
                    Sense::Le => 0.0 <= con.rhs,
                    Sense::Eq => con.rhs == 0.0,
                    Sense::Ge => 0.0 >= con.rhs,
                };
                if !ok {
                    return Solution::failed(
                        SolveStatus::Infeasible,
                        format!("constraint '{}' has no variables and is violated", con.name),
                        start.elapsed(),
                    );
                }
            }
        }

        let mut problem = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
        let vars: Vec<microlp::Variable> = lp
            .variables
            .iter()
            .map(|v| problem.add_var(v.objective, (v.lower, v.upper)))
            .collect();
        for con in &lp.constraints {
            if con.terms.is_empty() {
                continue;
            }
            let expr: Vec<(microlp::Variable, f64)> =
                con.terms.iter().map(|&(v, c)| (vars[v], c)).collect();
            let op = match con.sense {
                Sense::Le => microlp::ComparisonOp::Le,
                Sense::Eq => microlp::ComparisonOp::Eq,
                Sense::Ge => microlp::ComparisonOp::Ge,
            };
            problem.add_constraint(expr.as_slice(), op, con.rhs);
        }

        match problem.solve() {
            Ok(solved) => {
                let values: Vec<f64> = vars.iter().map(|&v| solved[v]).collect();
                let wall_time = start.elapsed();
                let status = match options.time_limit {
                    Some(limit) if wall_time.as_secs_f64() > limit => SolveStatus::Limit,
                    _ => SolveStatus::Optimal,
                };
                let message = (status == SolveStatus::Limit)
                    .then(|| "time limit exceeded after optimal basis was found".to_string());
                Solution {
                    status,
                    message,
                    objective: Some(solved.objective()),
                    values: Some(values),
                    duals: None,
                    stats: SolveStats {
                        iterations: None,
                        wall_time,
                    },
                }
            }
            Err(microlp::Error::Infeasible) => {
                Solution::failed(SolveStatus::Infeasible, "infeasible", start.elapsed())
            }
            Err(microlp::Error::Unbounded) => {
                Solution::failed(SolveStatus::Unbounded, "unbounded", start.elapsed())
            }
            Err(err) => Solution::failed(
                SolveStatus::Limit,
                format!("backend failure: {err}"),
                start.elapsed(),
            ),
        }
    }
}

/// Solves with the bundled backend.
pub fn solve(lp: &LinearProgram, options: &SolveOptions) -> Solution {
    SimplexBackend.solve(lp, options)
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("solution carries no variable values")]
    MissingValues,
    #[error("solution has {got} values but the LP has {want} variables")]
    LengthMismatch { got: usize, want: usize },
}

/// Worst violation within one constraint family (name prefix up to `|`).
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct FamilyCheck {
    pub constraints: usize,
    pub max_abs_violation: f64,
    pub max_rel_violation: f64,
    pub worst_constraint: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub families: BTreeMap<String, FamilyCheck>,
    pub max_rel_violation: f64,
    pub worst_constraint: Option<String>,
    pub max_bound_violation: f64,
    pub worst_bound: Option<String>,
    pub recomputed_objective: f64,
    pub reported_objective: Option<f64>,
    pub objective_rel_error: f64,
    /// Lagrangian lower bound from duals, when present and finite.
    pub dual_bound: Option<f64>,
    pub dual_gap_ok: Option<bool>,
    pub pass: bool,
}

/// Recomputes every constraint row and bound from scratch. Shares no code
/// with the backend's numerical core.
pub fn verify_solution(
    lp: &LinearProgram,
    solution: &Solution,
) -> Result<VerifyReport, VerifyError> {
    let values = solution.values.as_ref().ok_or(VerifyError::MissingValues)?;
    if values.len() != lp.num_variables() {
        return Err(VerifyError::LengthMismatch {
            got: values.len(),
            want: lp.num_variables(),
        });
    }

    let mut families: BTreeMap<String, FamilyCheck> = BTreeMap::new();
    let mut max_rel = 0.0_f64;
    let mut worst: Option<String> = None;
    for con in &lp.constraints {
        let lhs: f64 = con.terms.iter().map(|&(v, c)| values[v] * c).sum();
        let abs = match con.sense {
            Sense::Le => (lhs - con.rhs).max(0.0),
            Sense::Ge => (con.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - con.rhs).abs(),
        };
        let rel = abs / con.rhs.abs().max(1.0);
        let family = con.name.split('|').next().unwrap_or("").to_string();
        let entry = families.entry(family).or_default();
        entry.constraints += 1;
        if abs > entry.max_abs_violation {
            entry.max_abs_violation = abs;
        }
        if rel > entry.max_rel_violation {
            entry.max_rel_violation = rel;
            entry.worst_constraint = Some(con.name.clone());
        }
        if rel > max_rel {
            max_rel = rel;
            worst = Some(con.name.clone());
        }
    }

    let mut max_bound = 0.0_f64;
    let mut worst_bound = None;
    for (var, &x) in lp.variables.iter().zip(values.iter()) {
        let below = (var.lower - x).max(0.0);
        let above = if var.upper.is_finite() {
            (x - var.upper).max(0.0)
        } else {
            0.0
        };
        let v = below.max(above);
        if v > max_bound {
            max_bound = v;
            worst_bound = Some(var.name.clone());
        }
    }

    let recomputed = lp.objective_value(values);
    let objective_rel_error = match solution.objective {
        Some(reported) => (reported - recomputed).abs() / recomputed.abs().max(1.0),
        None => 0.0,
    };

    let dual_bound = solution
        .duals
        .as_ref()
        .and_then(|duals| lagrangian_bound(lp, duals));
    let dual_gap_ok =
        dual_bound.map(|bound| bound <= recomputed + OBJECTIVE_REL_TOL * recomputed.abs().max(1.0));

    let pass = max_rel <= FEASIBILITY_REL_TOL
        && max_bound <= BOUND_ABS_TOL
        && objective_rel_error <= OBJECTIVE_REL_TOL
        && dual_gap_ok.unwrap_or(true);

    Ok(VerifyReport {
        families,
        max_rel_violation: max_rel,
        worst_constraint: worst,
        max_bound_violation: max_bound,
        worst_bound,
        recomputed_objective: recomputed,
        reported_objective: solution.objective,
        objective_rel_error,
        dual_bound,
        dual_gap_ok,
        pass,
    })
}

/// Lagrangian dual value for given multipliers: a valid lower bound when
/// multipliers respect the senses (>= rows nonnegative, <= rows
/// nonpositive). Returns `None` when the bound is -infinity or signs are
/// inconsistent.
pub fn lagrangian_bound(lp: &LinearProgram, duals: &[f64]) -> Option<f64> {
    if duals.len() != lp.num_constraints() {
        return None;
    }
    for (con, &y) in lp.constraints.iter().zip(duals) {
        let sign_ok = match con.sense {
            Sense::Ge => y >= -1e-12,
            Sense::Le => y <= 1e-12,
            Sense::Eq => true,
        };
        if !sign_ok {
            return None;
        }
    }
    let mut reduced: Vec<f64> = lp.variables.iter().map(|v| v.objective).collect();
    let mut bound = 0.0_f64;
    for (con, &y) in lp.constraints.iter().zip(duals) {
        bound += y * con.rhs;
        for &(v, c) in &con.terms {
            reduced[v] -= y * c;
        }
    }
    for (var, &r) in lp.variables.iter().zip(&reduced) {
        // min over [lower, upper] of r * x
        let contribution = if r >= 0.0 {
            if var.lower.is_finite() {
                r * var.lower
            } else {
                return None;
            }
        } else if var.upper.is_finite() {
            r * var.upper
        } else {
            return None;
        };
        bound += contribution;
    }
    Some(bound)
}
