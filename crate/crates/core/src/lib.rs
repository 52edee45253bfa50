//! Unit commitment with deep-cycling costs and dynamic CO₂ emission of coal
//! plants: case data, emission models, MILP assembly, an LP/MILP solver and
//! schedule post-processing.

pub mod analysis;
pub mod emission;
pub mod grid;
pub mod milp;
pub mod uc;
