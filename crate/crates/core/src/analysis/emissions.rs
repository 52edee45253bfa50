use serde::{Deserialize, Serialize};

use super::{AnalysisError, DispatchSchedule};
use crate::emission::{
    ramp_power_sum, static_hourly_emission, transition_static_emission, DynamicEmissionParams, StaticEmissionParams,
};

/// Transition time assumed when none is given, hours (10 minutes).
pub const DEFAULT_TRANSITION_HOURS: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccountingOptions {
    /// Overrides each plant's transition time when set.
    pub tau: Option<f64>,
    /// $/tCO₂.
    pub carbon_price: f64,
}

impl Default for AccountingOptions {
    fn default() -> Self {
        AccountingOptions {
            tau: Some(DEFAULT_TRANSITION_HOURS),
            carbon_price: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantEmissions {
    pub id: String,
    pub tau: f64,
    /// `[k][t]` tCO₂ over the slice.
    pub static_t: Vec<Vec<f64>>,
    /// `[k][t]` change of the static term caused by following the
    /// transition trajectory instead of holding `g`, tCO₂.
    pub transition_t: Vec<Vec<f64>>,
    /// `[k][t]` ramp-induced term `b τ (|Δg_in|^N2 + |Δg_out|^N2)`, tCO₂.
    pub dynamic_t: Vec<Vec<f64>>,
    pub static_total: f64,
    pub transition_total: f64,
    pub dynamic_total: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmissionReport {
    pub plants: Vec<PlantEmissions>,
    pub static_total: f64,
    pub transition_total: f64,
    pub dynamic_total: f64,
    pub total: f64,
    pub carbon_price: f64,
    pub carbon_cost: f64,
}

/// Per-slice CO₂ of every coal plant from the exact closed form, split into
/// the static term at `g`, the transition correction and the ramp term.
///
/// An uncommitted plant emits nothing. The output before the horizon is the
/// initial output and the output after it repeats the last slice. Totals
/// are probability-weighted over scenarios.
pub fn emission_accounting(
    sched: &DispatchSchedule,
    params: &[(StaticEmissionParams, DynamicEmissionParams)],
    opts: &AccountingOptions,
) -> Result<EmissionReport, AnalysisError> {
    if params.len() != sched.coal_plants.len() {
        return Err(AnalysisError::Dimension(format!(
            "{} parameter sets for {} coal plants",
            params.len(),
            sched.coal_plants.len()
        )));
    }
    let nt = sched.horizon;
    let mut plants = Vec::new();
    for (c, (ps, pd)) in params.iter().enumerate() {
        let gen = sched.coal_positions[c];
        let pd = DynamicEmissionParams {
            tau: opts.tau.unwrap_or(pd.tau),
            ..*pd
        };
        let mut static_t = Vec::new();
        let mut transition_t = Vec::new();
        let mut dynamic_t = Vec::new();
        let (mut st, mut tt, mut dt) = (0.0, 0.0, 0.0);
        for k in 0..sched.scenarios.len() {
            let out = |t: usize| -> f64 {
                if sched.commitment[k][t][gen] {
                    sched.dispatch[k][t][gen].max(0.0)
                } else {
                    0.0
                }
            };
            let mut s_row = Vec::with_capacity(nt);
            let mut x_row = Vec::with_capacity(nt);
            let mut d_row = Vec::with_capacity(nt);
            for t in 0..nt {
                if !sched.commitment[k][t][gen] {
                    s_row.push(0.0);
                    x_row.push(0.0);
                    d_row.push(0.0);
                    continue;
                }
                let g = out(t);
                let prev = if t == 0 { sched.initial_output[gen].max(0.0) } else { out(t - 1) };
                let next = if t + 1 == nt { g } else { out(t + 1) };
                let hours = sched.slice_hours[t];
                let base = static_hourly_emission(ps, g)?;
                let along = transition_static_emission(ps, prev, g, next, pd.tau);
                s_row.push(hours * base);
                x_row.push(hours * (along - base));
                d_row.push(hours * pd.b * pd.tau * ramp_power_sum(prev, g, next, pd.n2));
            }
            let w = sched.probabilities[k];
            st += w * s_row.iter().sum::<f64>();
            tt += w * x_row.iter().sum::<f64>();
            dt += w * d_row.iter().sum::<f64>();
            static_t.push(s_row);
            transition_t.push(x_row);
            dynamic_t.push(d_row);
        }
        plants.push(PlantEmissions {
            id: sched.coal_plants[c].clone(),
            tau: pd.tau,
            static_t,
            transition_t,
            dynamic_t,
            static_total: st,
            transition_total: tt,
            dynamic_total: dt,
            total: st + tt + dt,
        });
    }
    let static_total: f64 = plants.iter().map(|p| p.static_total).sum();
    let transition_total: f64 = plants.iter().map(|p| p.transition_total).sum();
    let dynamic_total: f64 = plants.iter().map(|p| p.dynamic_total).sum();
    let total = static_total + transition_total + dynamic_total;
    Ok(EmissionReport {
        plants,
        static_total,
        transition_total,
        dynamic_total,
        total,
        carbon_price: opts.carbon_price,
        carbon_cost: total * opts.carbon_price,
    })
}
