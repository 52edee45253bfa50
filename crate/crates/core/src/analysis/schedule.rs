use serde::Serialize;

use super::AnalysisError;
use crate::grid::{build_branch_susceptance, line_flows, split_coal_plant, CaseData};
use crate::milp::MilpSolution;
use crate::uc::{VarKind, VariableIndex};

/// Values indexed `[k][t][entity]`.
pub type Series<T> = Vec<Vec<Vec<T>>>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineInfo {
    pub from: u32,
    pub to: u32,
    pub capacity: f64,
}

/// The solved operating schedule in physical units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSchedule {
    pub case_name: String,
    pub horizon: usize,
    pub scenarios: Vec<String>,
    pub probabilities: Vec<f64>,
    pub slice_hours: Vec<f64>,
    pub objective: f64,
    pub gap: f64,
    pub generators: Vec<String>,
    pub peakers: Vec<bool>,
    pub wind: Vec<bool>,
    pub coal_plants: Vec<String>,
    /// Generator position of each coal plant.
    pub coal_positions: Vec<usize>,
    /// Unit I ceiling (the economic operation level) per coal plant.
    pub eol: Vec<f64>,
    pub storages: Vec<String>,
    pub energy_ratings: Vec<f64>,
    pub buses: Vec<u32>,
    pub lines: Vec<LineInfo>,
    pub initial_output: Vec<f64>,
    pub initial_unit_i: Vec<f64>,
    pub load: Vec<Vec<f64>>,

    pub dispatch: Series<f64>,
    /// Wind units count as committed throughout.
    pub commitment: Series<bool>,
    pub startup: Series<bool>,
    pub shutdown: Series<bool>,
    pub unit_i: Series<f64>,
    pub unit_ii: Series<f64>,
    pub commit_i: Series<bool>,
    pub commit_ii: Series<bool>,
    pub alpha: Series<f64>,
    pub beta: Series<f64>,
    pub charge: Series<f64>,
    pub discharge: Series<f64>,
    pub energy: Series<f64>,
    pub angles: Series<f64>,
    /// MW, positive from `from` to `to`.
    pub flows: Series<f64>,
}

impl DispatchSchedule {
    /// Energy produced by generator `gen` in scenario `k`, MWh.
    pub fn generator_energy(&self, gen: usize, k: usize) -> f64 {
        (0..self.horizon).map(|t| self.dispatch[k][t][gen] * self.slice_hours[t]).sum()
    }

    /// Probability-weighted energy of generator `gen`, MWh.
    pub fn expected_energy(&self, gen: usize) -> f64 {
        (0..self.scenarios.len()).map(|k| self.probabilities[k] * self.generator_energy(gen, k)).sum()
    }

    /// Largest violation of the schedule invariants: plant split, line
    /// limits and storage energy bounds.
    pub fn invariant_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.scenarios.len() {
            for t in 0..self.horizon {
                for (c, &g) in self.coal_positions.iter().enumerate() {
                    worst = worst.max((self.dispatch[k][t][g] - self.unit_i[k][t][c] - self.unit_ii[k][t][c]).abs());
                }
                for (l, line) in self.lines.iter().enumerate() {
                    worst = worst.max(self.flows[k][t][l].abs() - line.capacity);
                }
                for (s, &xi) in self.energy_ratings.iter().enumerate() {
                    let d = self.energy[k][t][s];
                    worst = worst.max(-d).max(d - xi);
                }
            }
        }
        worst
    }

    /// `Σ_t λ_t (generation + discharge − charge − load)` per scenario.
    pub fn energy_imbalance(&self, k: usize) -> f64 {
        (0..self.horizon)
            .map(|t| {
                let gen: f64 = self.dispatch[k][t].iter().sum();
                let dis: f64 = self.discharge[k][t].iter().sum();
                let ch: f64 = self.charge[k][t].iter().sum();
                self.slice_hours[t] * (gen + dis - ch - self.load[k][t])
            })
            .sum()
    }
}

/// Reads the solution columns back into a schedule. Line flows are
/// recomputed from the bus angles.
pub fn extract_schedule(sol: &MilpSolution, idx: &VariableIndex, case: &CaseData) -> Result<DispatchSchedule, AnalysisError> {
    let x = sol.x.as_ref().ok_or(AnalysisError::NoSolution(sol.status))?;
    if x.len() != idx.num_columns() || idx.num_columns() != VariableIndex::new(case).num_columns() {
        return Err(AnalysisError::Dimension(format!(
            "solution has {} columns, index {}",
            x.len(),
            idx.num_columns()
        )));
    }
    let branch = build_branch_susceptance(&case.network)?;
    let mut initial_unit_i = Vec::new();
    for plant in &case.coal_plants {
        initial_unit_i.push(split_coal_plant(plant)?.0.initial_output);
    }
    let (nk, nt) = (idx.scenarios, idx.horizon);
    let value = |kind: VarKind, e: usize, t: usize, k: usize| x[idx.col(kind, e, t, k)];
    let on = |kind: VarKind, e: usize, t: usize, k: usize| value(kind, e, t, k) > 0.5;
    let series = |kind: VarKind, n: usize| -> Series<f64> {
        (0..nk).map(|k| (0..nt).map(|t| (0..n).map(|e| value(kind, e, t, k)).collect()).collect()).collect()
    };
    let flags = |kind: VarKind, n: usize| -> Series<bool> {
        (0..nk).map(|k| (0..nt).map(|t| (0..n).map(|e| on(kind, e, t, k)).collect()).collect()).collect()
    };
    let ngen = case.generators.len();
    let per_gen = |kind: VarKind, wind_value: bool| -> Series<bool> {
        (0..nk)
            .map(|k| {
                (0..nt)
                    .map(|t| {
                        (0..ngen)
                            .map(|g| match idx.thermal_pos(g) {
                                Some(e) => on(kind, e, t, k),
                                None => wind_value,
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let nb = case.network.buses.len();
    let ncoal = case.coal_plants.len();
    let ns = case.storages.len();
    let angles = series(VarKind::Theta, nb);
    let flows = angles
        .iter()
        .map(|by_t| {
            by_t.iter()
                .map(|theta| line_flows(&branch, theta).into_iter().map(|f| f * case.base_mva).collect())
                .collect()
        })
        .collect();
    Ok(DispatchSchedule {
        case_name: case.name.clone(),
        horizon: nt,
        scenarios: case.scenarios.iter().map(|s| s.name.clone()).collect(),
        probabilities: case.scenarios.iter().map(|s| s.probability).collect(),
        slice_hours: case.slice_hours.clone(),
        objective: sol.objective,
        gap: sol.gap,
        generators: case.generators.iter().map(|g| g.id.clone()).collect(),
        peakers: case.generators.iter().map(|g| g.is_peaker()).collect(),
        wind: case.generators.iter().map(|g| g.is_wind()).collect(),
        coal_plants: case.coal_plants.iter().map(|c| c.base.id.clone()).collect(),
        coal_positions: case.coal_generator_positions(),
        eol: case.coal_plants.iter().map(|c| c.eol).collect(),
        storages: case.storages.iter().map(|s| s.id.clone()).collect(),
        energy_ratings: case.storages.iter().map(|s| s.energy_rating).collect(),
        buses: case.network.buses.iter().map(|b| b.id).collect(),
        lines: case
            .network
            .lines
            .iter()
            .map(|l| LineInfo {
                from: l.from,
                to: l.to,
                capacity: l.capacity,
            })
            .collect(),
        initial_output: case.generators.iter().map(|g| g.initial_output).collect(),
        initial_unit_i,
        load: (0..nk).map(|k| (0..nt).map(|t| (0..nb).map(|n| case.load_at(t, n, k)).sum()).collect()).collect(),
        dispatch: series(VarKind::Dispatch, ngen),
        commitment: per_gen(VarKind::Commit, true),
        startup: per_gen(VarKind::Startup, false),
        shutdown: per_gen(VarKind::Shutdown, false),
        unit_i: series(VarKind::UnitI, ncoal),
        unit_ii: series(VarKind::UnitII, ncoal),
        commit_i: flags(VarKind::CommitI, ncoal),
        commit_ii: flags(VarKind::CommitII, ncoal),
        alpha: series(VarKind::Alpha, ncoal),
        beta: series(VarKind::Beta, ncoal),
        charge: series(VarKind::Charge, ns),
        discharge: series(VarKind::Discharge, ns),
        energy: series(VarKind::Energy, ns),
        angles,
        flows,
    })
}
