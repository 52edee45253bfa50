use std::collections::BTreeMap;

use serde::Serialize;

use super::family;
use crate::milp::{check_solution, MilpError, MilpProblem, ResidualReport};

/// Residuals of a point against the UC problem, grouped by constraint family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulationReport {
    pub tolerance: f64,
    /// `F01`..`F18` with the family label, e.g. `F01 nodal_balance`.
    pub families: BTreeMap<String, f64>,
    pub max_integrality_violation: f64,
    pub objective: f64,
    pub worst_row: Option<String>,
    pub worst_column: Option<String>,
    pub passed: bool,
}

impl FormulationReport {
    pub fn max_violation(&self) -> f64 {
        self.families
            .values()
            .copied()
            .fold(self.max_integrality_violation, f64::max)
    }

    pub fn family(&self, f: u8) -> f64 {
        self.families[&family_key(f)]
    }
}

pub fn family_key(f: u8) -> String {
    format!("F{f:02} {}", family::label(f))
}

/// Evaluates `x` against every family; families with no rows report 0.
pub fn check_uc_solution(p: &MilpProblem, x: &[f64], tol: f64) -> Result<FormulationReport, MilpError> {
    let rep: ResidualReport = check_solution(p, x)?;
    let families = (1..=18)
        .map(|f| (family_key(f), rep.family_max.get(&f).copied().unwrap_or(0.0)))
        .collect();
    Ok(FormulationReport {
        tolerance: tol,
        families,
        max_integrality_violation: rep.max_integrality_violation,
        objective: rep.objective,
        worst_row: rep.worst_row.clone(),
        worst_column: rep.worst_column.clone(),
        passed: rep.passes(tol),
    })
}
