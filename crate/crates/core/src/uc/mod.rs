//! The unit-commitment MILP: variable indexing, piecewise-linear cost
//! epigraphs, assembly of every constraint family and residual checks.

mod assemble;
mod check;
mod index;
mod pwl;

pub use assemble::{assemble, ramp_cost_curve, AssembleOptions, RampCostLevel};
pub use check::{check_uc_solution, FormulationReport};
pub use index::{EntityClass, VarKind, VarRef, VariableIndex};
pub use pwl::{build_pwl_epigraph, PwlCurve};

use thiserror::Error;

use crate::grid::{CaseError, GridError};

/// Constraint family tags carried by rows and column bounds.
pub mod family {
    pub const BALANCE: u8 = 1;
    pub const ENERGY: u8 = 2;
    pub const SPLIT: u8 = 3;
    pub const LINE: u8 = 4;
    pub const RAMP: u8 = 5;
    pub const CAPACITY: u8 = 6;
    pub const SEQUENCE: u8 = 7;
    pub const STARTSTOP: u8 = 8;
    pub const MINUPDOWN: u8 = 9;
    pub const RAMPVAR: u8 = 10;
    pub const EPIGRAPH: u8 = 11;
    pub const STORAGE_DYNAMICS: u8 = 12;
    pub const STORAGE_CHARGE: u8 = 13;
    pub const STORAGE_DISCHARGE: u8 = 14;
    pub const NU_RATE: u8 = 15;
    pub const GAMMA_RATE: u8 = 16;
    pub const ENERGY_BOUNDS: u8 = 17;
    pub const DOMAIN: u8 = 18;

    pub fn label(f: u8) -> &'static str {
        match f {
            BALANCE => "nodal_balance",
            ENERGY => "energy_adequacy",
            SPLIT => "coal_split",
            LINE => "line_limit",
            RAMP => "ramp_limit",
            CAPACITY => "capacity",
            SEQUENCE => "sequencing",
            STARTSTOP => "start_stop",
            MINUPDOWN => "min_up_down",
            RAMPVAR => "ramp_envelope",
            EPIGRAPH => "cost_epigraph",
            STORAGE_DYNAMICS => "storage_dynamics",
            STORAGE_CHARGE => "charge_headroom",
            STORAGE_DISCHARGE => "discharge_headroom",
            NU_RATE => "discharge_rate",
            GAMMA_RATE => "charge_rate",
            ENERGY_BOUNDS => "energy_bounds",
            DOMAIN => "domain",
            _ => "untagged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UcError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bad cost curve: {0}")]
    Curve(String),
    #[error("bad ramp cost level: {0}")]
    Level(String),
    #[error("{name}: lower bound {lower} exceeds upper bound {upper}")]
    Bounds { name: String, lower: f64, upper: f64 },
}
