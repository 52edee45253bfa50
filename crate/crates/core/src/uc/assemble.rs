use serde::{Deserialize, Serialize};

use super::family::*;
use super::index::{VarKind, VariableIndex};
use super::pwl::{build_pwl_epigraph, PwlCurve};
use super::UcError;
use crate::emission::EmissionBlock;
use crate::grid::{build_branch_susceptance, build_bus_susceptance, split_coal_plant, CaseData, CaseError};
use crate::milp::MilpProblem;

const INF: f64 = f64::INFINITY;

/// Marginal cost of Unit I ramping, $/MW up (`ru`) and down (`rd`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampCostLevel {
    pub label: String,
    pub ru: f64,
    pub rd: f64,
}

impl RampCostLevel {
    pub fn new(label: impl Into<String>, ru: f64, rd: f64) -> Self {
        RampCostLevel {
            label: label.into(),
            ru,
            rd,
        }
    }

    /// zeros, low, high and very_high.
    pub fn defaults() -> Vec<RampCostLevel> {
        vec![
            RampCostLevel::new("zeros", 0.0, 0.0),
            RampCostLevel::new("low", 15.0, 8.0),
            RampCostLevel::new("high", 150.0, 80.0),
            RampCostLevel::new("very_high", 450.0, 240.0),
        ]
    }

    pub fn by_label(label: &str) -> Option<RampCostLevel> {
        RampCostLevel::defaults().into_iter().find(|l| l.label == label)
    }

    pub fn check(&self) -> Result<(), UcError> {
        if !(self.ru >= 0.0 && self.rd >= 0.0 && self.ru.is_finite() && self.rd.is_finite()) {
            return Err(UcError::Level(format!("{}: ru and rd must be finite and >= 0", self.label)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssembleOptions {
    /// Emit the horizon energy-adequacy row per scenario.
    pub include_energy_adequacy: bool,
    /// $/tCO₂ charged on the dynamic emission blocks.
    pub carbon_price: f64,
    /// Damage cost as a multiple of the carbon component.
    pub damage_mult: f64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            include_energy_adequacy: false,
            carbon_price: 0.0,
            damage_mult: 0.0,
        }
    }
}

/// Ramp cost curve of one direction: `r` $/MW plus the priced emission
/// blocks, if any.
pub fn ramp_cost_curve(r: f64, blocks: &[EmissionBlock], opts: &AssembleOptions) -> PwlCurve {
    let per_t = opts.carbon_price * (1.0 + opts.damage_mult);
    if blocks.is_empty() || per_t == 0.0 {
        return PwlCurve::linear(r);
    }
    PwlCurve {
        breaks: blocks.iter().map(|b| b.lo).collect(),
        slopes: blocks.iter().map(|b| r + per_t * b.rate).collect(),
    }
}

/// Builds the unit-commitment MILP of `case`.
///
/// `blocks[c]` holds the emission blocks of coal plant `c`; pass an empty
/// slice to use the linear `ru`/`rd` costs only.
pub fn assemble(
    case: &CaseData,
    blocks: &[Vec<EmissionBlock>],
    level: &RampCostLevel,
    opts: &AssembleOptions,
) -> Result<(MilpProblem, VariableIndex), UcError> {
    let violations = case.validate();
    if !violations.is_empty() {
        return Err(UcError::Case(CaseError::Invalid(violations)));
    }
    level.check()?;
    if !blocks.is_empty() && blocks.len() != case.coal_plants.len() {
        return Err(UcError::Dimension(format!(
            "{} emission block lists for {} coal plants",
            blocks.len(),
            case.coal_plants.len()
        )));
    }
    if !(opts.carbon_price >= 0.0 && opts.damage_mult >= 0.0) {
        return Err(UcError::Level("carbon price and damage multiplier must be >= 0".into()));
    }

    let idx = VariableIndex::new(case);
    let (nt, nk) = (case.horizon, case.scenarios.len());
    let mut p = MilpProblem::new(format!("{}_{}", case.name, level.label));
    columns(case, &idx, &mut p)?;

    let bus_b = build_bus_susceptance(&case.network)?;
    let branch_b = build_branch_susceptance(&case.network)?;
    let bus_of = case.network.bus_index();
    let base = case.base_mva;
    let splits = case
        .coal_plants
        .iter()
        .map(split_coal_plant)
        .collect::<Result<Vec<_>, _>>()?;

    let mut alpha_curves = Vec::new();
    let mut beta_curves = Vec::new();
    for c in 0..case.coal_plants.len() {
        let b: &[EmissionBlock] = blocks.get(c).map_or(&[], |v| v.as_slice());
        alpha_curves.push(ramp_cost_curve(level.ru, b, opts));
        beta_curves.push(ramp_cost_curve(level.rd, b, opts));
    }

    for k in 0..nk {
        let pr = case.scenarios[k].probability;
        for t in 0..nt {
            let tag = |s: &str| format!("{s}_t{}_k{k}", t + 1);
            let lambda = case.slice_hours[t];

            // nodal balance
            for (n, bus) in case.network.buses.iter().enumerate() {
                let mut coefs = Vec::new();
                for (gi, g) in case.generators.iter().enumerate() {
                    if bus_of[&g.bus] == n {
                        coefs.push((idx.g(gi, t, k), 1.0));
                    }
                }
                for (si, s) in case.storages.iter().enumerate() {
                    if bus_of[&s.bus] == n {
                        coefs.push((idx.col(VarKind::Discharge, si, t, k), 1.0));
                        coefs.push((idx.col(VarKind::Charge, si, t, k), -1.0));
                    }
                }
                for (m, &b) in bus_b[n].iter().enumerate() {
                    if b != 0.0 {
                        coefs.push((idx.theta(m, t, k), -base * b));
                    }
                }
                let d = case.load_at(t, n, k);
                p.add_row(tag(&format!("bal_b{}", bus.id)), BALANCE, coefs, d, d);
            }

            // line limits
            for (l, line) in case.network.lines.iter().enumerate() {
                let coefs = branch_b[l]
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b != 0.0)
                    .map(|(m, &b)| (idx.theta(m, t, k), base * b))
                    .collect();
                p.add_row(
                    tag(&format!("line_{}_{}_{}", l + 1, line.from, line.to)),
                    LINE,
                    coefs,
                    -line.capacity,
                    line.capacity,
                );
            }

            // thermal units
            for (e, &gi) in idx.thermal.iter().enumerate() {
                let g = &case.generators[gi];
                let id = &g.id;
                let gc = idx.g(gi, t, k);
                let u = idx.col(VarKind::Commit, e, t, k);
                let s = idx.col(VarKind::Startup, e, t, k);
                let h = idx.col(VarKind::Shutdown, e, t, k);
                let y = idx.col(VarKind::Cost, e, t, k);

                // ramp
                if t == 0 {
                    p.add_row(
                        tag(&format!("ramp_{id}")),
                        RAMP,
                        vec![(gc, 1.0)],
                        g.initial_output - g.ramp_limit,
                        g.initial_output + g.ramp_limit,
                    );
                } else {
                    p.add_row(
                        tag(&format!("ramp_{id}")),
                        RAMP,
                        vec![(gc, 1.0), (idx.g(gi, t - 1, k), -1.0)],
                        -g.ramp_limit,
                        g.ramp_limit,
                    );
                }

                // capacity
                p.add_row(tag(&format!("cap_hi_{id}")), CAPACITY, vec![(gc, 1.0), (u, -g.g_max)], -INF, 0.0);
                p.add_row(tag(&format!("cap_lo_{id}")), CAPACITY, vec![(gc, 1.0), (u, -g.g_min)], 0.0, INF);

                // start / stop
                let u0 = if g.initial_commitment { 1.0 } else { 0.0 };
                if t == 0 {
                    p.add_row(tag(&format!("start_{id}")), STARTSTOP, vec![(u, 1.0), (s, -1.0)], -INF, u0);
                    p.add_row(tag(&format!("stop_{id}")), STARTSTOP, vec![(u, -1.0), (h, -1.0)], -INF, -u0);
                } else {
                    let up = idx.col(VarKind::Commit, e, t - 1, k);
                    p.add_row(
                        tag(&format!("start_{id}")),
                        STARTSTOP,
                        vec![(u, 1.0), (up, -1.0), (s, -1.0)],
                        -INF,
                        0.0,
                    );
                    p.add_row(
                        tag(&format!("stop_{id}")),
                        STARTSTOP,
                        vec![(up, 1.0), (u, -1.0), (h, -1.0)],
                        -INF,
                        0.0,
                    );
                }

                // minimum up / down
                let up_window = (g.min_uptime as usize).min(t + 1);
                let mut coefs: Vec<(usize, f64)> = (t + 1 - up_window..=t)
                    .map(|j| (idx.col(VarKind::Startup, e, j, k), 1.0))
                    .collect();
                coefs.push((u, -1.0));
                p.add_row(tag(&format!("minup_{id}")), MINUPDOWN, coefs, -INF, 0.0);
                let down_window = (g.min_downtime as usize).min(t + 1);
                let mut coefs: Vec<(usize, f64)> = (t + 1 - down_window..=t)
                    .map(|j| (idx.col(VarKind::Shutdown, e, j, k), 1.0))
                    .collect();
                coefs.push((u, 1.0));
                p.add_row(tag(&format!("mindown_{id}")), MINUPDOWN, coefs, -INF, 1.0);
                let held = g.hours_in_initial_state as usize;
                if g.initial_commitment && t + held < g.min_uptime as usize {
                    p.add_row(tag(&format!("init_on_{id}")), MINUPDOWN, vec![(u, 1.0)], 1.0, INF);
                }
                if !g.initial_commitment && t + held < g.min_downtime as usize {
                    p.add_row(tag(&format!("init_off_{id}")), MINUPDOWN, vec![(u, 1.0)], -INF, 0.0);
                }

                // offer cost
                build_pwl_epigraph(
                    &mut p,
                    &PwlCurve::from_offer(&g.offer_blocks),
                    gc,
                    y,
                    EPIGRAPH,
                    &tag(&format!("offer_{id}")),
                )?;
                p.cost[y] = pr * lambda;
                p.cost[u] = pr * lambda * g.no_load_cost;
                p.cost[s] = pr * g.startup_cost;
                p.cost[h] = pr * g.shutdown_cost;
            }

            // coal plants
            for (c, plant) in case.coal_plants.iter().enumerate() {
                let gi = idx.coal[c];
                let id = &plant.base.id;
                let (unit_i, _) = &splits[c];
                let u = idx.u(gi, t, k).expect("coal plants are thermal");
                let g1 = idx.col(VarKind::UnitI, c, t, k);
                let g2 = idx.col(VarKind::UnitII, c, t, k);
                let u1 = idx.col(VarKind::CommitI, c, t, k);
                let u2 = idx.col(VarKind::CommitII, c, t, k);
                let a = idx.col(VarKind::Alpha, c, t, k);
                let b = idx.col(VarKind::Beta, c, t, k);
                let ya = idx.col(VarKind::AlphaCost, c, t, k);
                let yb = idx.col(VarKind::BetaCost, c, t, k);
                let upper_ii = plant.base.g_max - plant.eol;

                p.add_row(
                    tag(&format!("split_{id}")),
                    SPLIT,
                    vec![(idx.g(gi, t, k), 1.0), (g1, -1.0), (g2, -1.0)],
                    0.0,
                    0.0,
                );
                p.add_row(tag(&format!("cap_hi_{id}I")), CAPACITY, vec![(g1, 1.0), (u1, -plant.eol)], -INF, 0.0);
                p.add_row(
                    tag(&format!("cap_lo_{id}I")),
                    CAPACITY,
                    vec![(g1, 1.0), (u1, -unit_i.g_min)],
                    0.0,
                    INF,
                );
                p.add_row(tag(&format!("cap_hi_{id}II")), CAPACITY, vec![(g2, 1.0), (u2, -upper_ii)], -INF, 0.0);
                p.add_row(tag(&format!("commit_{id}I")), CAPACITY, vec![(u1, 1.0), (u, -1.0)], 0.0, 0.0);
                p.add_row(tag(&format!("seq_{id}")), SEQUENCE, vec![(u2, plant.eol), (g1, -1.0)], -INF, 0.0);

                if t == 0 {
                    let g1_0 = unit_i.initial_output;
                    p.add_row(tag(&format!("alpha_{id}")), RAMPVAR, vec![(g1, 1.0), (a, -1.0)], -INF, g1_0);
                    p.add_row(tag(&format!("beta_{id}")), RAMPVAR, vec![(g1, -1.0), (b, -1.0)], -INF, -g1_0);
                } else {
                    let g1p = idx.col(VarKind::UnitI, c, t - 1, k);
                    p.add_row(
                        tag(&format!("alpha_{id}")),
                        RAMPVAR,
                        vec![(g1, 1.0), (g1p, -1.0), (a, -1.0)],
                        -INF,
                        0.0,
                    );
                    p.add_row(
                        tag(&format!("beta_{id}")),
                        RAMPVAR,
                        vec![(g1, -1.0), (g1p, 1.0), (b, -1.0)],
                        -INF,
                        0.0,
                    );
                }
                build_pwl_epigraph(&mut p, &alpha_curves[c], a, ya, EPIGRAPH, &tag(&format!("ya_{id}")))?;
                build_pwl_epigraph(&mut p, &beta_curves[c], b, yb, EPIGRAPH, &tag(&format!("yb_{id}")))?;
                p.cost[ya] = pr;
                p.cost[yb] = pr;
            }

            // storage
            for (si, st) in case.storages.iter().enumerate() {
                let id = &st.id;
                let gamma = idx.col(VarKind::Charge, si, t, k);
                let nu = idx.col(VarKind::Discharge, si, t, k);
                let delta = idx.col(VarKind::Energy, si, t, k);
                let (ec, ed) = (st.charge_efficiency, st.discharge_efficiency);
                let mut dyn_coefs = vec![(delta, 1.0), (gamma, -lambda * ec), (nu, lambda / ed)];
                let mut head_c = vec![(gamma, lambda * ec)];
                let mut head_d = vec![(nu, lambda / ed)];
                let (rhs_dyn, rhs_c, rhs_d) = if t == 0 {
                    (st.initial_energy, st.energy_rating - st.initial_energy, st.initial_energy)
                } else {
                    let prev = idx.col(VarKind::Energy, si, t - 1, k);
                    dyn_coefs.push((prev, -1.0));
                    head_c.push((prev, 1.0));
                    head_d.push((prev, -1.0));
                    (0.0, st.energy_rating, 0.0)
                };
                p.add_row(tag(&format!("soc_{id}")), STORAGE_DYNAMICS, dyn_coefs, rhs_dyn, rhs_dyn);
                p.add_row(tag(&format!("headroom_c_{id}")), STORAGE_CHARGE, head_c, -INF, rhs_c);
                p.add_row(tag(&format!("headroom_d_{id}")), STORAGE_DISCHARGE, head_d, -INF, rhs_d);
            }
        }

        if opts.include_energy_adequacy {
            let mut coefs = Vec::new();
            let mut total = 0.0;
            for t in 0..nt {
                for gi in 0..case.generators.len() {
                    coefs.push((idx.g(gi, t, k), 1.0));
                }
                total += (0..case.network.num_buses()).map(|n| case.load_at(t, n, k)).sum::<f64>();
            }
            p.add_row(format!("energy_k{k}"), ENERGY, coefs, total, total);
        }
    }
    Ok((p, idx))
}

/// Adds every column with its bounds, integrality and bound family.
fn columns(case: &CaseData, idx: &VariableIndex, p: &mut MilpProblem) -> Result<(), UcError> {
    let reference = case.network.reference_index();
    for col in 0..idx.num_columns() {
        let v = idx.decode(col).expect("column in range");
        let (lo, hi) = match v.kind {
            VarKind::Theta if Some(v.entity) == reference => (0.0, 0.0),
            VarKind::Theta => (-INF, INF),
            VarKind::Dispatch => {
                let g = &case.generators[v.entity];
                if g.is_wind() {
                    let w = case.wind_available(v.entity, v.t, v.k);
                    (if case.allow_curtailment { 0.0 } else { w }, w)
                } else {
                    (0.0, g.g_max)
                }
            }
            VarKind::UnitI => (0.0, case.coal_plants[v.entity].eol),
            VarKind::UnitII => {
                let c = &case.coal_plants[v.entity];
                (0.0, c.base.g_max - c.eol)
            }
            kind if kind.is_binary() => (0.0, 1.0),
            VarKind::Cost => {
                let g = &case.generators[idx.thermal[v.entity]];
                let negative = g.offer_blocks.first().is_some_and(|b| b.price < 0.0);
                (if negative { -INF } else { 0.0 }, INF)
            }
            VarKind::Charge | VarKind::Discharge => (0.0, case.storages[v.entity].power_rating),
            VarKind::Energy => (0.0, case.storages[v.entity].energy_rating),
            _ => (0.0, INF),
        };
        let family = match v.kind {
            VarKind::Discharge => NU_RATE,
            VarKind::Charge => GAMMA_RATE,
            VarKind::Energy => ENERGY_BOUNDS,
            _ => DOMAIN,
        };
        if lo > hi {
            return Err(UcError::Bounds {
                name: idx.name(col),
                lower: lo,
                upper: hi,
            });
        }
        p.add_col(idx.name(col), lo, hi, 0.0, v.kind.is_binary(), family);
    }
    Ok(())
}
