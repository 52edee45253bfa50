use serde::Serialize;

use super::DispatchSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RampSource {
    /// The α/β solution columns were complementary and used as is.
    Solution,
    /// Rebuilt from Unit I output changes.
    Recomputed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantCycling {
    pub id: String,
    pub alpha_sum: f64,
    pub beta_sum: f64,
    /// Slices with the plant committed and Unit I below its ceiling.
    pub deep_cycle_slices: usize,
    /// Largest change in plant output between consecutive slices, MW.
    pub max_swing: f64,
    pub source: RampSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleMetrics {
    pub plants: Vec<PlantCycling>,
}

impl CycleMetrics {
    /// `Σ (α + β)` over every plant.
    pub fn ramp_total(&self) -> f64 {
        self.plants.iter().map(|p| p.alpha_sum + p.beta_sum).sum()
    }

    pub fn deep_cycle_slices(&self) -> usize {
        self.plants.iter().map(|p| p.deep_cycle_slices).sum()
    }
}

const TOL: f64 = 1e-6;

/// Unit I ramp-up and ramp-down per slice: `(max(Δ, 0), max(−Δ, 0))`.
pub fn unit_i_ramps(sched: &DispatchSchedule, plant: usize, k: usize) -> Vec<(f64, f64)> {
    let mut prev = sched.initial_unit_i[plant];
    (0..sched.horizon)
        .map(|t| {
            let g = sched.unit_i[k][t][plant];
            let d = g - prev;
            prev = g;
            (d.max(0.0), (-d).max(0.0))
        })
        .collect()
}

/// Deep-cycling metrics summed over slices and scenarios.
///
/// α/β come from the solution when they are complementary and match the
/// Unit I changes (always the case once ramping is priced); otherwise they
/// are recomputed from the Unit I dispatch.
pub fn deep_cycle_metrics(sched: &DispatchSchedule) -> CycleMetrics {
    let plants = (0..sched.coal_plants.len())
        .map(|c| {
            let gen = sched.coal_positions[c];
            let mut consistent = true;
            let mut recomputed = (0.0, 0.0);
            let mut from_solution = (0.0, 0.0);
            let mut deep = 0;
            let mut swing: f64 = 0.0;
            for k in 0..sched.scenarios.len() {
                for (t, (up, down)) in unit_i_ramps(sched, c, k).into_iter().enumerate() {
                    let (a, b) = (sched.alpha[k][t][c], sched.beta[k][t][c]);
                    if (a - up).abs() > TOL || (b - down).abs() > TOL {
                        consistent = false;
                    }
                    recomputed.0 += up;
                    recomputed.1 += down;
                    from_solution.0 += a;
                    from_solution.1 += b;
                    if sched.commitment[k][t][gen] && sched.unit_i[k][t][c] < sched.eol[c] - TOL {
                        deep += 1;
                    }
                    let prev = if t == 0 { sched.initial_output[gen] } else { sched.dispatch[k][t - 1][gen] };
                    swing = swing.max((sched.dispatch[k][t][gen] - prev).abs());
                }
            }
            let (source, (alpha_sum, beta_sum)) = if consistent {
                (RampSource::Solution, from_solution)
            } else {
                (RampSource::Recomputed, recomputed)
            };
            PlantCycling {
                id: sched.coal_plants[c].clone(),
                alpha_sum,
                beta_sum,
                deep_cycle_slices: deep,
                max_swing: swing,
                source,
            }
        })
        .collect();
    CycleMetrics { plants }
}
