use std::collections::BTreeMap;

use serde::Serialize;

use super::MilpError;

/// One linear constraint `lower <= coefs . x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// Constraint family tag used for diagnostics (0 when untagged).
    pub family: u8,
    pub coefs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
    Range,
    Free,
}

impl Row {
    pub fn sense(&self) -> Sense {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) if self.lower == self.upper => Sense::Eq,
            (true, true) => Sense::Range,
            (false, true) => Sense::Le,
            (true, false) => Sense::Ge,
            (false, false) => Sense::Free,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        (self.lower - a).max(a - self.upper).max(0.0)
    }
}

/// A minimization problem with sparse rows, column bounds and binary or
/// integer marks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProblem {
    pub name: String,
    pub cost: Vec<f64>,
    pub obj_offset: f64,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub col_names: Vec<String>,
    /// Family charged with bound violations of each column.
    pub col_family: Vec<u8>,
    pub rows: Vec<Row>,
}

impl MilpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        MilpProblem {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coefs.len()).sum()
    }

    pub fn add_col(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64, integer: bool, family: u8) -> usize {
        self.cost.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.integer.push(integer);
        self.col_names.push(name.into());
        self.col_family.push(family);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, family: u8, coefs: Vec<(usize, f64)>, lower: f64, upper: f64) -> usize {
        self.rows.push(Row {
            name: name.into(),
            family,
            coefs,
            lower,
            upper,
        });
        self.rows.len() - 1
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.obj_offset + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn integer_columns(&self) -> Vec<usize> {
        (0..self.num_cols()).filter(|&j| self.integer[j]).collect()
    }

    /// Structural checks: consistent lengths, finite data, column indices in
    /// range, `lower <= upper` everywhere.
    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.num_cols();
        for (what, len) in [
            ("col_lower", self.col_lower.len()),
            ("col_upper", self.col_upper.len()),
            ("integer", self.integer.len()),
            ("col_names", self.col_names.len()),
            ("col_family", self.col_family.len()),
        ] {
            if len != n {
                return Err(MilpError::Malformed(format!("{what} has {len} entries for {n} columns")));
            }
        }
        for j in 0..n {
            if !self.cost[j].is_finite() {
                return Err(MilpError::Malformed(format!("column {}: non-finite cost", self.col_names[j])));
            }
            if self.col_lower[j] > self.col_upper[j] || self.col_lower[j] == f64::INFINITY || self.col_upper[j] == f64::NEG_INFINITY {
                return Err(MilpError::InfeasibleBounds {
                    name: self.col_names[j].clone(),
                    lower: self.col_lower[j],
                    upper: self.col_upper[j],
                });
            }
        }
        for r in &self.rows {
            if r.lower > r.upper {
                return Err(MilpError::InfeasibleBounds {
                    name: r.name.clone(),
                    lower: r.lower,
                    upper: r.upper,
                });
            }
            for &(j, a) in &r.coefs {
                if j >= n || !a.is_finite() {
                    return Err(MilpError::Malformed(format!("row {}: bad entry ({j}, {a})", r.name)));
                }
            }
        }
        Ok(())
    }
}

/// Residuals of a candidate point against a problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Largest violation per family tag (rows and column bounds).
    pub family_max: BTreeMap<u8, f64>,
    pub max_row_violation: f64,
    pub worst_row: Option<String>,
    pub max_bound_violation: f64,
    pub worst_column: Option<String>,
    pub max_integrality_violation: f64,
    pub objective: f64,
}

impl ResidualReport {
    pub fn max_violation(&self) -> f64 {
        self.max_row_violation
            .max(self.max_bound_violation)
            .max(self.max_integrality_violation)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Violation of every row at `x`, in row order.
pub fn row_residuals(p: &MilpProblem, x: &[f64]) -> Vec<f64> {
    p.rows.iter().map(|r| r.violation(x)).collect()
}

/// Evaluates `x` against every row, bound and integrality mark of `p`.
///
/// Violations are absolute, in the units of the row or column.
pub fn check_solution(p: &MilpProblem, x: &[f64]) -> Result<ResidualReport, MilpError> {
    if x.len() != p.num_cols() {
        return Err(MilpError::Dimension {
            expected: p.num_cols(),
            got: x.len(),
        });
    }
    let mut family_max: BTreeMap<u8, f64> = BTreeMap::new();
    let mut worst_row = (0.0, None);
    for r in &p.rows {
        let v = r.violation(x);
        let e = family_max.entry(r.family).or_insert(0.0);
        *e = e.max(v);
        if v > worst_row.0 {
            worst_row = (v, Some(r.name.clone()));
        }
    }
    let mut worst_col = (0.0, None);
    let mut int_max: f64 = 0.0;
    for j in 0..p.num_cols() {
        let v = (p.col_lower[j] - x[j]).max(x[j] - p.col_upper[j]).max(0.0);
        let e = family_max.entry(p.col_family[j]).or_insert(0.0);
        *e = e.max(v);
        if v > worst_col.0 {
            worst_col = (v, Some(p.col_names[j].clone()));
        }
        if p.integer[j] {
            int_max = int_max.max((x[j] - x[j].round()).abs());
        }
    }
    Ok(ResidualReport {
        family_max,
        max_row_violation: worst_row.0,
        worst_row: worst_row.1,
        max_bound_violation: worst_col.0,
        worst_column: worst_col.1,
        max_integrality_violation: int_max,
        objective: p.objective(x),
    })
}
