//! Case data, DC network matrices and the coal-plant split.

mod case;
mod io;
mod matrices;
mod split;

pub use case::{
    offer_cost, Bus, CaseData, CoalPlantSpec, GenKind, GeneratorSpec, Line, Network, OfferBlock,
    Scenario, StorageSpec, Violation,
};
pub use io::{case_to_json, load_case, parse_case, read_profile_csv};
pub use matrices::{build_branch_susceptance, build_bus_susceptance, line_flows, Matrix};
pub use split::split_coal_plant;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("network is not connected")]
    Disconnected,
    #[error("coal plant {id}: eol {eol} outside ({g_min}, {g_max})")]
    EolOutOfRange {
        id: String,
        eol: f64,
        g_min: f64,
        g_max: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("cannot read case: {0}")]
    Io(String),
    #[error("malformed case: {0}")]
    Parse(String),
    #[error("invalid case: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// JSON text of the bundled modified IEEE 30-bus study case.
pub const IEEE30_MOD_CASE: &str = include_str!("../../cases/ieee30_mod.case");

/// The bundled modified IEEE 30-bus study case.
pub fn ieee30_mod() -> CaseData {
    parse_case(IEEE30_MOD_CASE).expect("bundled case is valid")
}
