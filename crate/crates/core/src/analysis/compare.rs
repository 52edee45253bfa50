use std::fmt::Write as _;

use serde::Serialize;

use super::{AnalysisError, CycleMetrics, DispatchSchedule, EmissionReport};

/// One solved run entering a comparison.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioRun<'a> {
    pub label: &'a str,
    /// Ramp cost used to order runs for trend checks (e.g. `ru + rd`).
    pub ramp_cost: f64,
    pub schedule: &'a DispatchSchedule,
    pub emissions: &'a EmissionReport,
    pub metrics: &'a CycleMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub ramp_cost: f64,
    pub objective: f64,
    pub gap: f64,
    pub emission_total: f64,
    pub emission_dynamic: f64,
    pub ramp_total: f64,
    pub deep_cycle_slices: usize,
    pub peaker_energy: f64,
    pub non_coal_energy: f64,
    /// L1 change of non-coal dispatch against the cheapest-ramp run, as a
    /// fraction of that run's non-coal energy.
    pub non_coal_change: f64,
    /// Expected energy per generator, MWh.
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendFlag {
    pub from: String,
    pub to: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub generators: Vec<String>,
    /// Sorted by label.
    pub rows: Vec<ComparisonRow>,
    pub flags: Vec<TrendFlag>,
}

const TREND_TOL: f64 = 1e-6;

/// `Σ_k p_k Σ_t λ_t Σ_{non-coal} |g_a − g_b|`.
pub fn non_coal_l1_change(a: &DispatchSchedule, b: &DispatchSchedule) -> f64 {
    let mut total = 0.0;
    for k in 0..a.scenarios.len() {
        for t in 0..a.horizon {
            for g in non_coal(a) {
                total += a.probabilities[k] * a.slice_hours[t] * (a.dispatch[k][t][g] - b.dispatch[k][t][g]).abs();
            }
        }
    }
    total
}

fn non_coal(s: &DispatchSchedule) -> impl Iterator<Item = usize> + '_ {
    (0..s.generators.len()).filter(move |g| !s.coal_positions.contains(g))
}

/// Aligns runs of one case. Trend flags mark any increase of `Σ(α+β)`
/// between runs of increasing ramp cost.
pub fn compare_scenarios(runs: &[ScenarioRun<'_>]) -> Result<Comparison, AnalysisError> {
    let first = runs.first().ok_or_else(|| AnalysisError::Comparison("no runs".into()))?.schedule;
    for r in runs {
        let s = r.schedule;
        if s.horizon != first.horizon || s.generators != first.generators || s.scenarios.len() != first.scenarios.len() {
            return Err(AnalysisError::Comparison(format!(
                "run {} does not match the case of run {}",
                r.label, runs[0].label
            )));
        }
    }
    let mut by_cost: Vec<&ScenarioRun> = runs.iter().collect();
    by_cost.sort_by(|a, b| a.ramp_cost.total_cmp(&b.ramp_cost).then(a.label.cmp(b.label)));
    let reference = by_cost[0].schedule;

    let mut rows: Vec<ComparisonRow> = runs
        .iter()
        .map(|r| {
            let s = r.schedule;
            let energy: Vec<f64> = (0..s.generators.len()).map(|g| s.expected_energy(g)).collect();
            let non_coal_energy: f64 = non_coal(s).map(|g| energy[g]).sum();
            let ref_energy: f64 = non_coal(reference).map(|g| reference.expected_energy(g)).sum();
            ComparisonRow {
                label: r.label.to_string(),
                ramp_cost: r.ramp_cost,
                objective: s.objective,
                gap: s.gap,
                emission_total: r.emissions.total,
                emission_dynamic: r.emissions.dynamic_total,
                ramp_total: r.metrics.ramp_total(),
                deep_cycle_slices: r.metrics.deep_cycle_slices(),
                peaker_energy: (0..energy.len()).filter(|&g| s.peakers[g]).map(|g| energy[g]).sum(),
                non_coal_energy,
                non_coal_change: non_coal_l1_change(reference, s) / ref_energy.max(f64::MIN_POSITIVE),
                energy,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.label.cmp(&b.label));

    let flags = by_cost
        .windows(2)
        .filter_map(|w| {
            let (lo, hi) = (w[0].metrics.ramp_total(), w[1].metrics.ramp_total());
            (w[1].ramp_cost > w[0].ramp_cost && hi > lo + TREND_TOL).then(|| TrendFlag {
                from: w[0].label.to_string(),
                to: w[1].label.to_string(),
                message: format!("ramping rose from {lo:.3} to {hi:.3} MW as ramp cost increased"),
            })
        })
        .collect();

    Ok(Comparison {
        generators: first.generators.clone(),
        rows,
        flags,
    })
}

fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

impl Comparison {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut header = vec![
            "label".to_string(),
            "objective".into(),
            "gap".into(),
            "co2_t".into(),
            "co2_dyn_t".into(),
            "ramp_mw".into(),
            "deep".into(),
            "peaker_mwh".into(),
            "noncoal_chg".into(),
        ];
        header.extend(self.generators.iter().map(|g| format!("{g}_mwh")));
        let mut table = vec![header];
        for r in &self.rows {
            let mut line = vec![
                r.label.clone(),
                fixed(r.objective, 2),
                format!("{:.1e}", r.gap),
                fixed(r.emission_total, 2),
                fixed(r.emission_dynamic, 3),
                fixed(r.ramp_total, 2),
                r.deep_cycle_slices.to_string(),
                fixed(r.peaker_energy, 2),
                fixed(r.non_coal_change, 4),
            ];
            line.extend(r.energy.iter().map(|&e| fixed(e, 2)));
            table.push(line);
        }
        let widths: Vec<usize> = (0..table[0].len()).map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &table {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| if c == 0 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        for f in &self.flags {
            let _ = writeln!(out, "trend: {} -> {}: {}", f.from, f.to, f.message);
        }
        out
    }
}
