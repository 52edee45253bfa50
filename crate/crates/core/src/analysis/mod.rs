//! Post-processing of solved schedules: extraction, CO₂ accounting,
//! deep-cycling metrics, cross-run comparison and CSV output.

mod compare;
mod emissions;
mod metrics;
mod schedule;
mod tables;

pub use compare::{compare_scenarios, non_coal_l1_change, Comparison, ComparisonRow, ScenarioRun, TrendFlag};
pub use emissions::{emission_accounting, AccountingOptions, EmissionReport, PlantEmissions, DEFAULT_TRANSITION_HOURS};
pub use metrics::{deep_cycle_metrics, unit_i_ramps, CycleMetrics, PlantCycling, RampSource};
pub use schedule::{extract_schedule, DispatchSchedule, LineInfo, Series};
pub use tables::{
    write_coal_units, write_commitment, write_comparison, write_comparison_csv, write_cycling, write_dispatch,
    write_emissions, write_flows, write_run_tables, write_storage, RUN_FILES,
};

use thiserror::Error;

use crate::emission::EmissionError;
use crate::grid::GridError;
use crate::milp::MilpStatus;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("solver returned no usable point (status {0:?})")]
    NoSolution(MilpStatus),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot compare runs: {0}")]
    Comparison(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Emission(#[from] EmissionError),
    #[error("write failed: {0}")]
    Io(String),
}
