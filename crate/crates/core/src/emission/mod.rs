//! Static and dynamic CO₂ emission models of a coal unit, their fitting
//! from hourly samples, and the step-function ramp blocks used by the UC
//! formulation.

mod blocks;
mod fit;
mod io;
mod model;
mod synth;

pub use blocks::{build_emission_blocks, EmissionBlock};
pub use fit::{fit_dynamic, fit_samples, fit_static, DynamicFit, FitReport, StaticFit};
pub use io::{read_samples_csv, write_samples_csv};
pub use model::{
    dynamic_hourly_emission, ramp_fraction, ramp_power_sum, secant_power, static_hourly_emission, transition_profile,
    transition_static_emission, Segment, TransitionProfile,
};
pub use synth::generate_synthetic_samples;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parameters of the static model `f0 + f1 g^N1` (tCO₂ per hour).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticEmissionParams {
    pub f0: f64,
    pub f1: f64,
    pub n1: f64,
}

impl StaticEmissionParams {
    /// Fitted values for the reference coal plant.
    pub const REFERENCE: StaticEmissionParams = StaticEmissionParams {
        f0: 11.53,
        f1: 0.86,
        n1: 1.02,
    };

    pub fn check(&self) -> Result<(), EmissionError> {
        if !(self.f1 > 0.0) {
            return Err(EmissionError::NonPositive("f1"));
        }
        if !(self.n1 > 0.0) {
            return Err(EmissionError::NonPositive("n1"));
        }
        Ok(())
    }
}

/// Parameters of the ramp term `b τ |Δg|^N2`; `tau` is the transition time
/// in hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicEmissionParams {
    pub b: f64,
    pub tau: f64,
    pub n2: f64,
}

impl DynamicEmissionParams {
    /// Fitted values for the reference coal plant.
    pub const REFERENCE: DynamicEmissionParams = DynamicEmissionParams {
        b: 6.12,
        tau: 0.34,
        n2: 0.20,
    };

    pub fn check(&self) -> Result<(), EmissionError> {
        if !(self.b >= 0.0) {
            return Err(EmissionError::NonPositive("b"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(EmissionError::TauOutOfRange(self.tau));
        }
        if !(self.n2 > 0.0) {
            return Err(EmissionError::NonPositive("n2"));
        }
        Ok(())
    }
}

/// One hourly observation: outputs at t-1, t, t+1 and the CO₂ emitted in t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionSample {
    pub g_prev: f64,
    pub g: f64,
    pub g_next: f64,
    pub emission: f64,
}

impl EmissionSample {
    /// True when the unit held its output across the three hours.
    pub fn is_static(&self) -> bool {
        self.g_prev == self.g && self.g == self.g_next
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmissionError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("negative or non-finite output {0} MW")]
    NegativeOutput(f64),
    #[error("transition time {0} h outside (0, 1)")]
    TauOutOfRange(f64),
    #[error("breakpoints must start at 0 and increase strictly")]
    NonMonotoneBreakpoints,
    #[error("need at least {needed} {kind} samples, got {got}")]
    InsufficientSamples {
        kind: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("all static samples share the same output; exponent is unidentifiable")]
    Degenerate,
    #[error("fit did not converge (residual norm {residual})")]
    NoConvergence { residual: f64 },
    #[error("sample file: {0}")]
    Csv(String),
}
