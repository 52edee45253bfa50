use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{AnalysisError, Comparison, CycleMetrics, DispatchSchedule, EmissionReport};

pub const RUN_FILES: [&str; 7] = [
    "dispatch.csv",
    "commitment.csv",
    "coal_units.csv",
    "storage.csv",
    "emissions.csv",
    "flows.csv",
    "cycling.csv",
];

type CsvResult = Result<(), AnalysisError>;

fn writer(path: &Path) -> Result<csv::Writer<File>, AnalysisError> {
    csv::Writer::from_path(path).map_err(|e| AnalysisError::Io(format!("{}: {e}", path.display())))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn flag(v: bool) -> String {
    u8::from(v).to_string()
}

fn slice_prefix(s: &DispatchSchedule, k: usize, t: usize) -> Vec<String> {
    vec![s.scenarios[k].clone(), (t + 1).to_string()]
}

/// Writes the per-run CSV set into `dir` and returns the paths written.
pub fn write_run_tables(dir: &Path, s: &DispatchSchedule, e: &EmissionReport, m: &CycleMetrics) -> Result<Vec<PathBuf>, AnalysisError> {
    std::fs::create_dir_all(dir).map_err(|err| AnalysisError::Io(format!("{}: {err}", dir.display())))?;
    let paths: Vec<PathBuf> = RUN_FILES.iter().map(|f| dir.join(f)).collect();
    write_dispatch(writer(&paths[0])?, s)?;
    write_commitment(writer(&paths[1])?, s)?;
    write_coal_units(writer(&paths[2])?, s)?;
    write_storage(writer(&paths[3])?, s)?;
    write_emissions(writer(&paths[4])?, s, e)?;
    write_flows(writer(&paths[5])?, s)?;
    write_cycling(writer(&paths[6])?, m)?;
    Ok(paths)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> CsvResult {
    w.flush().map_err(|e| AnalysisError::Io(e.to_string()))
}

fn record<W: Write>(w: &mut csv::Writer<W>, row: Vec<String>) -> CsvResult {
    w.write_record(row).map_err(|e| AnalysisError::Io(e.to_string()))
}

pub fn write_dispatch<W: Write>(mut w: csv::Writer<W>, s: &DispatchSchedule) -> CsvResult {
    let mut head = vec!["scenario".to_string(), "slice".into()];
    head.extend(s.generators.iter().cloned());
    head.push("load".into());
    record(&mut w, head)?;
    for k in 0..s.scenarios.len() {
        for t in 0..s.horizon {
            let mut row = slice_prefix(s, k, t);
            row.extend(s.dispatch[k][t].iter().map(|&v| num(v)));
            row.push(num(s.load[k][t]));
            record(&mut w, row)?;
        }
    }
    finish(w)
}

pub fn write_commitment<W: Write>(mut w: csv::Writer<W>, s: &DispatchSchedule) -> CsvResult {
    record(&mut w, ["scenario", "slice", "generator", "on", "startup", "shutdown"].map(String::from).to_vec())?;
    for k in 0..s.scenarios.len() {
        for t in 0..s.horizon {
            for (g, id) in s.generators.iter().enumerate() {
                let mut row = slice_prefix(s, k, t);
                row.extend([id.clone(), flag(s.commitment[k][t][g]), flag(s.startup[k][t][g]), flag(s.shutdown[k][t][g])]);
                record(&mut w, row)?;
            }
        }
    }
    finish(w)
}

pub fn write_coal_units<W: Write>(mut w: csv::Writer<W>, s: &DispatchSchedule) -> CsvResult {
    record(
        &mut w,
        ["scenario", "slice", "plant", "output", "unit_i", "unit_ii", "on_i", "on_ii", "alpha", "beta"]
            .map(String::from)
            .to_vec(),
    )?;
    for k in 0..s.scenarios.len() {
        for t in 0..s.horizon {
            for (c, id) in s.coal_plants.iter().enumerate() {
                let mut row = slice_prefix(s, k, t);
                row.extend([
                    id.clone(),
                    num(s.dispatch[k][t][s.coal_positions[c]]),
                    num(s.unit_i[k][t][c]),
                    num(s.unit_ii[k][t][c]),
                    flag(s.commit_i[k][t][c]),
                    flag(s.commit_ii[k][t][c]),
                    num(s.alpha[k][t][c]),
                    num(s.beta[k][t][c]),
                ]);
                record(&mut w, row)?;
            }
        }
    }
    finish(w)
}

pub fn write_storage<W: Write>(mut w: csv::Writer<W>, s: &DispatchSchedule) -> CsvResult {
    record(&mut w, ["scenario", "slice", "storage", "charge", "discharge", "energy"].map(String::from).to_vec())?;
    for k in 0..s.scenarios.len() {
        for t in 0..s.horizon {
            for (i, id) in s.storages.iter().enumerate() {
                let mut row = slice_prefix(s, k, t);
                row.extend([id.clone(), num(s.charge[k][t][i]), num(s.discharge[k][t][i]), num(s.energy[k][t][i])]);
                record(&mut w, row)?;
            }
        }
    }
    finish(w)
}

pub fn write_emissions<W: Write>(mut w: csv::Writer<W>, s: &DispatchSchedule, e: &EmissionReport) -> CsvResult {
    record(&mut w, ["scenario", "slice", "plant", "output", "static_t", "transition_t", "dynamic_t", "total_t"].map(String::from).to_vec())?;
    for k in 0..s.scenarios.len() {
        for t in 0..s.horizon {
            for (c, p) in e.plants.iter().enumerate() {
                let (st, tr, dy) = (p.static_t[k][t], p.transition_t[k][t], p.dynamic_t[k][t]);
                let mut row = slice_prefix(s, k, t);
                row.extend([
                    p.id.clone(),
                    num(s.dispatch[k][t][s.coal_positions[c]]),
                    num(st),
                    num(tr),
                    num(dy),
                    num(st + tr + dy),
                ]);
                record(&mut w, row)?;
            }
        }
    }
    finish(w)
}

pub fn write_flows<W: Write>(mut w: csv::Writer<W>, s: &DispatchSchedule) -> CsvResult {
    record(&mut w, ["scenario", "slice", "line", "from", "to", "flow", "capacity"].map(String::from).to_vec())?;
    for k in 0..s.scenarios.len() {
        for t in 0..s.horizon {
            for (l, line) in s.lines.iter().enumerate() {
                let mut row = slice_prefix(s, k, t);
                row.extend([
                    (l + 1).to_string(),
                    line.from.to_string(),
                    line.to.to_string(),
                    num(s.flows[k][t][l]),
                    num(line.capacity),
                ]);
                record(&mut w, row)?;
            }
        }
    }
    finish(w)
}

pub fn write_cycling<W: Write>(mut w: csv::Writer<W>, m: &CycleMetrics) -> CsvResult {
    record(
        &mut w,
        ["plant", "alpha_sum", "beta_sum", "deep_cycle_slices", "max_swing", "source"].map(String::from).to_vec(),
    )?;
    for p in &m.plants {
        let source = match p.source {
            super::RampSource::Solution => "solution",
            super::RampSource::Recomputed => "recomputed",
        };
        record(
            &mut w,
            vec![
                p.id.clone(),
                num(p.alpha_sum),
                num(p.beta_sum),
                p.deep_cycle_slices.to_string(),
                num(p.max_swing),
                source.into(),
            ],
        )?;
    }
    finish(w)
}

pub fn write_comparison_csv<W: Write>(mut w: csv::Writer<W>, c: &Comparison) -> CsvResult {
    let mut head: Vec<String> = [
        "label",
        "ramp_cost",
        "objective",
        "gap",
        "emission_total",
        "emission_dynamic",
        "ramp_total",
        "deep_cycle_slices",
        "peaker_energy",
        "non_coal_energy",
        "non_coal_change",
    ]
    .map(String::from)
    .to_vec();
    head.extend(c.generators.iter().map(|g| format!("energy_{g}")));
    record(&mut w, head)?;
    for r in &c.rows {
        let mut row = vec![
            r.label.clone(),
            num(r.ramp_cost),
            num(r.objective),
            num(r.gap),
            num(r.emission_total),
            num(r.emission_dynamic),
            num(r.ramp_total),
            r.deep_cycle_slices.to_string(),
            num(r.peaker_energy),
            num(r.non_coal_energy),
            num(r.non_coal_change),
        ];
        row.extend(r.energy.iter().map(|&e| num(e)));
        record(&mut w, row)?;
    }
    finish(w)
}

/// Writes `comparison.csv` and `comparison.txt` into `dir`.
pub fn write_comparison(dir: &Path, c: &Comparison) -> Result<Vec<PathBuf>, AnalysisError> {
    let csv_path = dir.join("comparison.csv");
    let txt_path = dir.join("comparison.txt");
    write_comparison_csv(writer(&csv_path)?, c)?;
    std::fs::write(&txt_path, c.to_text()).map_err(|e| AnalysisError::Io(format!("{}: {e}", txt_path.display())))?;
    Ok(vec![csv_path, txt_path])
}
