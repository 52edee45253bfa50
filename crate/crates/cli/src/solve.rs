use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use deepcycle::analysis::{
    compare_scenarios, deep_cycle_metrics, emission_accounting, extract_schedule, write_comparison, write_run_tables,
    AccountingOptions, CycleMetrics, DispatchSchedule, EmissionReport, ScenarioRun,
};
use deepcycle::emission::{build_emission_blocks, DynamicEmissionParams, EmissionBlock, StaticEmissionParams};
use deepcycle::grid::CaseData;
use deepcycle::milp::{solve_external, solve_milp, write_solution, MilpSolution, MilpStatus, SolverOptions};
use deepcycle::uc::{assemble, check_uc_solution, AssembleOptions, RampCostLevel};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    ensure_writable, load_case_input, parse_levels, resolve_out, resolve_tau, wind_label, FileConfig, SolverArgs,
    WindMode, BUNDLED,
};
use crate::manifest::{relative, InputHash, Manifest};

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SolveArgs {
    /// Case JSON file, or `bundled` for the built-in 30-bus case.
    #[arg(long)]
    pub case: Option<String>,
    /// Output root directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated ramp-cost levels: zeros, low, high, very_high or
    /// label:ru:rd.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<String>,
    #[arg(long, value_enum)]
    pub wind: Option<WindMode>,
    /// $/tCO2 on the dynamic emission of Unit I ramps.
    #[arg(long)]
    pub carbon_price: Option<f64>,
    /// Damage cost as a multiple of the carbon cost.
    #[arg(long)]
    pub damage_mult: Option<f64>,
    /// Recorded in the manifest; the solver itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Runs solved in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Transition time in hours used for emission accounting and blocks.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Static emission parameters `f0,f1,n1` for every coal plant.
    #[arg(long, value_parser = parse_static)]
    pub static_params: Option<StaticEmissionParams>,
    /// Dynamic emission parameters `b,tau,n2` for every coal plant.
    #[arg(long, value_parser = parse_dynamic)]
    pub dynamic_params: Option<DynamicEmissionParams>,
    /// Add the horizon energy-adequacy row.
    #[arg(long)]
    pub energy_adequacy: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected three comma-separated numbers".to_string())
}

fn parse_static(s: &str) -> Result<StaticEmissionParams, String> {
    let [f0, f1, n1] = triple(s)?;
    let p = StaticEmissionParams { f0, f1, n1 };
    p.check().map_err(|e| e.to_string())?;
    Ok(p)
}

fn parse_dynamic(s: &str) -> Result<DynamicEmissionParams, String> {
    let [b, tau, n2] = triple(s)?;
    let p = DynamicEmissionParams { b, tau, n2 };
    p.check().map_err(|e| e.to_string())?;
    Ok(p)
}

/// Fully resolved settings of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SolvePlan {
    pub case: String,
    pub out: PathBuf,
    pub levels: Vec<RampCostLevel>,
    pub wind: Vec<bool>,
    pub assemble: AssembleOptions,
    pub solver: SolverOptions,
    pub tau: f64,
    pub seed: u64,
    pub jobs: usize,
    pub static_params: Option<StaticEmissionParams>,
    pub dynamic_params: Option<DynamicEmissionParams>,
}

impl SolvePlan {
    pub fn resolve(args: &SolveArgs, file: &FileConfig) -> Result<SolvePlan> {
        let levels = if !args.levels.is_empty() {
            parse_levels(&args.levels)?
        } else if let Some(l) = &file.levels {
            parse_levels(l)?
        } else {
            RampCostLevel::defaults()
        };
        let carbon_price = args.carbon_price.or(file.carbon_price).unwrap_or(0.0);
        let damage_mult = args.damage_mult.or(file.damage_mult).unwrap_or(0.0);
        if !(carbon_price >= 0.0 && carbon_price.is_finite()) {
            bail!("carbon price must be finite and >= 0");
        }
        if !(damage_mult >= 0.0 && damage_mult.is_finite()) {
            bail!("damage multiplier must be finite and >= 0");
        }
        let tau = resolve_tau(args.tau, file);
        if !(tau > 0.0 && tau <= 1.0) {
            bail!("tau must be in (0, 1] hours");
        }
        let jobs = args
            .jobs
            .or(file.jobs)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1);
        Ok(SolvePlan {
            case: args.case.clone().or_else(|| file.case.clone()).unwrap_or_else(|| BUNDLED.into()),
            out: resolve_out(args.out.clone(), file),
            levels,
            wind: args.wind.or(file.wind).unwrap_or(WindMode::Both).settings(),
            assemble: AssembleOptions {
                include_energy_adequacy: args.energy_adequacy,
                carbon_price,
                damage_mult,
            },
            solver: args.solver.resolve(file)?,
            tau,
            seed: args.seed.or(file.seed).unwrap_or(0),
            jobs,
            static_params: args.static_params.or(file.static_params),
            dynamic_params: args.dynamic_params.or(file.dynamic_params),
        })
    }
}

/// Emission parameters per coal plant after overrides.
pub fn plant_params(case: &CaseData, plan: &SolvePlan) -> Vec<(StaticEmissionParams, DynamicEmissionParams)> {
    case.coal_plants
        .iter()
        .map(|c| {
            (
                plan.static_params.unwrap_or(c.static_params),
                plan.dynamic_params.unwrap_or(c.dynamic_params),
            )
        })
        .collect()
}

pub fn emission_blocks_for(case: &CaseData, plan: &SolvePlan) -> Result<Vec<Vec<EmissionBlock>>> {
    if plan.assemble.carbon_price == 0.0 {
        return Ok(Vec::new());
    }
    case.coal_plants
        .iter()
        .zip(plant_params(case, plan))
        .map(|(c, (_, pd))| {
            let pd = DynamicEmissionParams { tau: plan.tau, ..pd };
            build_emission_blocks(&pd, &c.breakpoints()).with_context(|| format!("emission blocks of {}", c.base.id))
        })
        .collect()
}

pub struct RunOutcome {
    pub wind: bool,
    pub level: RampCostLevel,
    pub dir: PathBuf,
    pub solution: Option<MilpSolution>,
    pub max_violation: Option<f64>,
    pub error: Option<String>,
    pub ok: bool,
    pub analysis: Option<(DispatchSchedule, EmissionReport, CycleMetrics)>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    fn status_text(&self) -> String {
        match (&self.error, &self.solution) {
            (Some(_), _) => "error".into(),
            (None, Some(s)) => serde_json::to_value(s.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            (None, None) => "error".into(),
        }
    }

    /// Deterministic part of the run record.
    pub fn summary(&self) -> serde_json::Value {
        let s = self.solution.as_ref();
        let finite = |v: Option<f64>| v.filter(|x| x.is_finite());
        let (emissions, ramp_total, deep) = match &self.analysis {
            Some((_, e, m)) => (
                Some(json!({
                    "static_t": e.static_total,
                    "transition_t": e.transition_total,
                    "dynamic_t": e.dynamic_total,
                    "total_t": e.total,
                    "carbon_cost": e.carbon_cost,
                })),
                Some(m.ramp_total()),
                Some(m.deep_cycle_slices()),
            ),
            None => (None, None, None),
        };
        json!({
            "wind": wind_label(self.wind),
            "label": self.level.label,
            "ru": self.level.ru,
            "rd": self.level.rd,
            "status": self.status_text(),
            "ok": self.ok,
            "error": self.error,
            "objective": finite(s.map(|s| s.objective)),
            "bound": finite(s.map(|s| s.bound)),
            "gap": finite(s.map(|s| s.gap)),
            "nodes": s.map(|s| s.nodes),
            "lp_iterations": s.map(|s| s.lp_iterations),
            "max_violation": self.max_violation,
            "emissions": emissions,
            "ramp_total_mw": ramp_total,
            "deep_cycle_slices": deep,
        })
    }
}

fn solve_one(case: &CaseData, plan: &SolvePlan, wind: bool, level: &RampCostLevel, dir: &Path) -> RunOutcome {
    let mut out = RunOutcome {
        wind,
        level: level.clone(),
        dir: dir.to_path_buf(),
        solution: None,
        max_violation: None,
        error: None,
        ok: false,
        analysis: None,
        files: Vec::new(),
    };
    if let Err(e) = run_steps(case, plan, wind, level, dir, &mut out) {
        out.error = Some(format!("{e:#}"));
        out.ok = false;
    }
    out
}

fn run_steps(case: &CaseData, plan: &SolvePlan, wind: bool, level: &RampCostLevel, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let case = if wind { case.clone() } else { case.without_wind() };
    let blocks = emission_blocks_for(&case, plan)?;
    let (p, idx) = assemble(&case, &blocks, level, &plan.assemble)?;
    let sol = if plan.solver.external_solver.is_some() {
        solve_external(&p, &plan.solver)?
    } else {
        solve_milp(&p, &plan.solver)?
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let sol_path = dir.join("solution.sol");
    std::fs::write(&sol_path, write_solution(&p, &sol)).with_context(|| format!("writing {}", sol_path.display()))?;
    out.files.push(sol_path);
    let Some(x) = sol.x.as_ref() else {
        out.solution = Some(sol);
        return Ok(());
    };
    let report = check_uc_solution(&p, x, 1e-6)?;
    out.max_violation = Some(report.max_violation());
    let within_gap = sol.gap <= plan.solver.mip_gap + 1e-12;
    out.ok = report.passed
        && match sol.status {
            MilpStatus::Optimal => true,
            MilpStatus::Feasible | MilpStatus::TimeLimit | MilpStatus::NodeLimit => within_gap,
            MilpStatus::Infeasible | MilpStatus::Unbounded => false,
        };
    let sched = extract_schedule(&sol, &idx, &case)?;
    let acc = AccountingOptions {
        tau: Some(plan.tau),
        carbon_price: plan.assemble.carbon_price,
    };
    let emissions = emission_accounting(&sched, &plant_params(&case, plan), &acc)?;
    let metrics = deep_cycle_metrics(&sched);
    out.files.extend(write_run_tables(dir, &sched, &emissions, &metrics)?);
    out.solution = Some(sol);
    out.analysis = Some((sched, emissions, metrics));
    Ok(())
}

/// Runs the sweep and writes all outputs. Returns `true` when every run
/// reached an acceptable solution.
pub fn run(args: &SolveArgs, file: &FileConfig, config_text: Option<(&Path, &str)>) -> Result<bool> {
    let plan = SolvePlan::resolve(args, file)?;
    let input = load_case_input(&plan.case)?;
    ensure_writable(&plan.out)?;
    let started = Instant::now();

    let specs: Vec<(bool, RampCostLevel)> = plan
        .wind
        .iter()
        .flat_map(|&w| plan.levels.iter().map(move |l| (w, l.clone())))
        .collect();
    let slots: Mutex<Vec<Option<(RunOutcome, f64)>>> = Mutex::new((0..specs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..plan.jobs.min(specs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((wind, level)) = specs.get(i) else { break };
                let dir = plan.out.join(wind_label(*wind)).join(&level.label);
                let t0 = Instant::now();
                let outcome = solve_one(&input.case, &plan, *wind, level, &dir);
                let secs = t0.elapsed().as_secs_f64();
                eprintln!("{}", progress_line(&outcome, secs));
                slots.lock().expect("no worker panicked")[i] = Some((outcome, secs));
            });
        }
    });
    let outcomes: Vec<(RunOutcome, f64)> = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|o| o.expect("every run was processed"))
        .collect();

    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut runs_json = Vec::new();
    for (o, _) in &outcomes {
        let summary = o.summary();
        let path = o.dir.join("summary.json");
        std::fs::create_dir_all(&o.dir)?;
        std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
        outputs.extend(o.files.iter().cloned());
        outputs.push(path);
        runs_json.push(summary);
    }

    let mut table = String::new();
    let mut all_ok = outcomes.iter().all(|(o, _)| o.ok);
    for &wind in &plan.wind {
        let done: Vec<&RunOutcome> = outcomes.iter().map(|(o, _)| o).filter(|o| o.wind == wind && o.ok).collect();
        if done.is_empty() {
            continue;
        }
        let runs: Vec<ScenarioRun<'_>> = done
            .iter()
            .map(|o| {
                let (s, e, m) = o.analysis.as_ref().expect("ok runs carry analysis");
                ScenarioRun {
                    label: &o.level.label,
                    ramp_cost: o.level.ru + o.level.rd,
                    schedule: s,
                    emissions: e,
                    metrics: m,
                }
            })
            .collect();
        let dir = plan.out.join(wind_label(wind));
        match compare_scenarios(&runs) {
            Ok(c) => {
                outputs.extend(write_comparison(&dir, &c)?);
                table.push_str(&format!("== {} ==\n{}\n", wind_label(wind), c.to_text()));
            }
            Err(e) => {
                eprintln!("comparison for {} failed: {e}", wind_label(wind));
                all_ok = false;
            }
        }
    }
    print!("{table}");

    let mut inputs = vec![InputHash::new("case", &input.source, input.text.as_bytes())];
    if let Some((path, text)) = config_text {
        inputs.push(InputHash::new("config", &path.to_string_lossy(), text.as_bytes()));
    }
    let mut manifest = Manifest::new("solve", inputs, serde_json::to_value(&plan)?);
    manifest.results = json!({ "all_ok": all_ok, "runs": runs_json });
    outputs.sort();
    manifest.outputs = outputs.iter().map(|p| relative(&plan.out, p)).collect();
    manifest.timing = json!({
        "total_seconds": started.elapsed().as_secs_f64(),
        "runs": outcomes.iter().map(|(o, secs)| json!({
            "wind": wind_label(o.wind),
            "label": o.level.label,
            "wall_seconds": secs,
            "solver_seconds": o.solution.as_ref().map(|s| s.seconds),
        })).collect::<Vec<_>>(),
    });
    manifest.write(&plan.out.join("manifest.json"))?;
    Ok(all_ok)
}

fn progress_line(o: &RunOutcome, secs: f64) -> String {
    let name = format!("{}/{}", wind_label(o.wind), o.level.label);
    if let Some(e) = &o.error {
        return format!("[{name}] FAILED: {e}");
    }
    let s = o.solution.as_ref().expect("runs without error carry a solution");
    format!(
        "[{name}] {} objective {:.3} gap {:.2e} nodes {} ({secs:.1} s){}",
        o.status_text(),
        s.objective,
        s.gap,
        s.nodes,
        if o.ok { "" } else { " FAILED" }
    )
}
