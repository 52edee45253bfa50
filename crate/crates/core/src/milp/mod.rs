//! Sparse MILP problems and their solution: a revised simplex LP kernel,
//! LP-based branch-and-bound, exhaustive enumeration for tiny instances,
//! MPS interchange and an external-solver bridge.

mod bnb;
mod brute;
mod clock;
mod external;
mod lu;
mod mps;
mod problem;
mod simplex;

pub use bnb::solve_milp;
pub use brute::brute_force_uc;
pub use external::{solve_external, ExternalSolver};
pub use mps::{read_mps, read_solution, write_mps, write_solution};
pub use problem::{check_solution, row_residuals, MilpProblem, ResidualReport, Row, Sense};
pub use simplex::Basis;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use simplex::{LpModel, Outcome, Simplex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("{name}: lower bound {lower} exceeds upper bound {upper}")]
    InfeasibleBounds { name: String, lower: f64, upper: f64 },
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{count} integer columns exceed the enumeration limit {limit}")]
    TooManyBinaries { count: usize, limit: usize },
    #[error("column {0} is integer but not binary")]
    NotBinary(String),
    #[error("external solver not configured: {0}")]
    Config(String),
    #[error("external solver failed: {0}")]
    Process(String),
    #[error("cannot parse {what}: {message}")]
    Parse { what: &'static str, message: String },
    #[error("external solution rejected: max violation {max_violation:e} (worst row {worst_row:?}, worst column {worst_column:?})")]
    Rejected {
        max_violation: f64,
        worst_row: Option<String>,
        worst_column: Option<String>,
    },
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branching {
    /// Integer column whose value is closest to one half; lowest index on ties.
    MostFractional,
    /// Largest product of estimated down and up objective gains, learned from
    /// earlier branchings; unseen columns use the running mean.
    Pseudocost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeSelection {
    /// Depth first until the first incumbent; afterwards best bound, each
    /// pick followed by a dive into its preferred child.
    BestBoundPlunge,
    BestBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions {
    pub mip_gap: f64,
    pub int_tol: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub node_limit: Option<usize>,
    #[serde(with = "opt_secs")]
    pub time_limit: Option<Duration>,
    pub branching: Branching,
    pub node_selection: NodeSelection,
    /// Iterations allowed per LP solve; `None` picks a size-based default.
    pub iteration_limit: Option<usize>,
    pub external_solver: Option<ExternalSolver>,
}

mod opt_secs {
    use std::time::Duration;

    pub fn serialize<S: serde::Serializer>(v: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mip_gap: 1e-4,
            int_tol: 1e-6,
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            node_limit: None,
            time_limit: None,
            branching: Branching::Pseudocost,
            node_selection: NodeSelection::BestBoundPlunge,
            iteration_limit: None,
            external_solver: None,
        }
    }
}

impl SolverOptions {
    pub fn check(&self) -> Result<(), MilpError> {
        for (name, v) in [
            ("int_tol", self.int_tol),
            ("primal_tol", self.primal_tol),
            ("dual_tol", self.dual_tol),
        ] {
            if !(v > 0.0) {
                return Err(MilpError::Malformed(format!("{name} must be positive")));
            }
        }
        if !(self.mip_gap >= 0.0) {
            return Err(MilpError::Malformed("mip_gap must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl From<Outcome> for LpStatus {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => LpStatus::IterationLimit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per row (`d = c - A^T y`).
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub dual_objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    /// A validated point without a proof of optimality.
    Feasible,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Global lower bound after each processed node.
    pub bound_trace: Vec<f64>,
    pub seconds: f64,
}

impl MilpSolution {
    pub fn has_solution(&self) -> bool {
        self.x.is_some()
    }
}

pub(crate) fn relative_gap(objective: f64, bound: f64) -> f64 {
    if !objective.is_finite() {
        return f64::INFINITY;
    }
    ((objective - bound) / objective.abs().max(1.0)).max(0.0)
}

fn default_iteration_limit(p: &MilpProblem) -> usize {
    50 * (p.num_cols() + p.num_rows()) + 10_000
}

/// Solves the LP relaxation of `p` (integrality marks are ignored).
pub fn solve_lp(p: &MilpProblem, opts: &SolverOptions) -> Result<LpSolution, MilpError> {
    p.validate()?;
    opts.check()?;
    let model = LpModel::new(p);
    let (l, u) = model.scaled_bounds(&p.col_lower, &p.col_upper);
    let mut s = Simplex::new(&model, l, u, model.slack_basis());
    s.iteration_limit = opts.iteration_limit.unwrap_or_else(|| default_iteration_limit(p));
    let out = s.solve();
    Ok(lp_solution(p, &mut s, out))
}

fn lp_solution(p: &MilpProblem, s: &mut Simplex<'_>, out: Outcome) -> LpSolution {
    let status = LpStatus::from(out);
    let x = s.column_values();
    let (duals, reduced_costs) = s.dual_values();
    let objective = if status == LpStatus::Optimal {
        p.objective(&x)
    } else {
        f64::NAN
    };
    let dual_objective = if status == LpStatus::Optimal {
        s.dual_objective() + p.obj_offset
    } else {
        f64::NAN
    };
    LpSolution {
        status,
        x,
        objective,
        duals,
        reduced_costs,
        dual_objective,
        iterations: s.iterations,
    }
}
