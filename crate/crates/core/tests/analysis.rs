mod common;

use common::{coal_only_case, tiny_case};
use deepcycle::analysis::{
    compare_scenarios, deep_cycle_metrics, emission_accounting, extract_schedule, write_run_tables, AccountingOptions,
    AnalysisError, DispatchSchedule, RampSource, ScenarioRun, RUN_FILES,
};
use deepcycle::emission::{dynamic_hourly_emission, DynamicEmissionParams, StaticEmissionParams};
use deepcycle::grid::{build_bus_susceptance, CaseData};
use deepcycle::milp::{solve_milp, MilpSolution, MilpStatus, SolverOptions};
use deepcycle::uc::{assemble, AssembleOptions, RampCostLevel};

const PARAMS: (StaticEmissionParams, DynamicEmissionParams) = (StaticEmissionParams::REFERENCE, DynamicEmissionParams::REFERENCE);

fn solve(case: &CaseData, level: &RampCostLevel) -> DispatchSchedule {
    let (p, idx) = assemble(case, &[], level, &AssembleOptions::default()).unwrap();
    let s = solve_milp(&p, &SolverOptions::default()).unwrap();
    extract_schedule(&s, &idx, case).unwrap()
}

fn zeros() -> RampCostLevel {
    RampCostLevel::new("zeros", 0.0, 0.0)
}

#[test]
fn unit_split_below_ceiling() {
    let s = solve(&coal_only_case(&[25.0]), &zeros());
    assert!((s.dispatch[0][0][0] - 25.0).abs() < 1e-9);
    assert!((s.unit_i[0][0][0] - 25.0).abs() < 1e-9);
    assert!(s.unit_ii[0][0][0].abs() < 1e-9);
    assert!(s.commitment[0][0][0]);
    assert!(!s.commit_ii[0][0][0]);
}

#[test]
fn no_solution_is_an_error() {
    let case = coal_only_case(&[25.0]);
    let (_, idx) = assemble(&case, &[], &zeros(), &AssembleOptions::default()).unwrap();
    let sol = MilpSolution {
        status: MilpStatus::Infeasible,
        x: None,
        objective: f64::INFINITY,
        bound: f64::INFINITY,
        gap: f64::INFINITY,
        nodes: 0,
        lp_iterations: 0,
        bound_trace: vec![],
        seconds: 0.0,
    };
    assert_eq!(extract_schedule(&sol, &idx, &case), Err(AnalysisError::NoSolution(MilpStatus::Infeasible)));
}

#[test]
fn flows_close_nodal_balance() {
    for seed in 0..10 {
        let case = tiny_case(seed);
        let s = solve(&case, &zeros());
        let bus_b = build_bus_susceptance(&case.network).unwrap();
        let index = case.network.bus_index();
        assert!(s.invariant_violation() <= 1e-6);
        for t in 0..case.horizon {
            for n in 0..case.network.buses.len() {
                let injection: f64 = case
                    .generators
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| index[&g.bus] == n)
                    .map(|(i, _)| s.dispatch[0][t][i])
                    .sum::<f64>()
                    - case.load_at(t, n, 0);
                // net outflow from the line flows
                let mut outflow = 0.0;
                for (l, line) in case.network.lines.iter().enumerate() {
                    if index[&line.from] == n {
                        outflow += s.flows[0][t][l];
                    }
                    if index[&line.to] == n {
                        outflow -= s.flows[0][t][l];
                    }
                }
                assert!((injection - outflow).abs() <= 1e-6, "seed {seed} t {t} bus {n}");
                let from_matrix: f64 = (0..bus_b.len()).map(|m| bus_b[n][m] * s.angles[0][t][m]).sum::<f64>() * case.base_mva;
                assert!((from_matrix - outflow).abs() <= 1e-6);
            }
            assert!(s.energy_imbalance(0).abs() <= 1e-6 * case.horizon as f64);
        }
    }
}

#[test]
fn flat_schedule_has_no_dynamic_emission() {
    let s = solve(&coal_only_case(&[40.0; 6]), &zeros());
    let r = emission_accounting(&s, &[PARAMS], &AccountingOptions::default()).unwrap();
    assert!(r.plants[0].dynamic_t[0].iter().all(|&v| v == 0.0));
    assert_eq!(r.dynamic_total, 0.0);
    let hourly: f64 = r.plants[0].static_t[0].iter().sum();
    assert!((r.total - hourly).abs() <= 1e-9);
}

#[test]
fn single_swing_touches_three_hours() {
    let mut s = solve(&coal_only_case(&[40.0; 8]), &zeros());
    s.dispatch[0][4][0] = 50.0;
    let r = emission_accounting(&s, &[PARAMS], &AccountingOptions::default()).unwrap();
    let d = &r.plants[0].dynamic_t[0];
    for (t, &v) in d.iter().enumerate() {
        if (3..=5).contains(&t) {
            assert!(v > 0.0, "hour {} increment {v}", t + 1);
        } else {
            assert_eq!(v, 0.0, "hour {}", t + 1);
        }
    }
    let p = &r.plants[0];
    let sum: f64 = p.static_t[0].iter().chain(&p.transition_t[0]).chain(d.iter()).sum();
    assert!((sum - r.total).abs() <= 1e-9);
    // the three parts add up to the closed form hour by hour
    let g = |t: usize| s.dispatch[0][t][0];
    let pd = DynamicEmissionParams { tau: 1.0 / 6.0, ..PARAMS.1 };
    for t in 1..7 {
        let exact = dynamic_hourly_emission(&PARAMS.0, &pd, g(t - 1), g(t), g(t + 1)).unwrap();
        assert!((p.static_t[0][t] + p.transition_t[0][t] + p.dynamic_t[0][t] - exact).abs() < 1e-9);
    }
}

#[test]
fn swing_direction_is_symmetric() {
    let base = solve(&coal_only_case(&[40.0; 3]), &zeros());
    let mut up = base.clone();
    let mut down = base.clone();
    up.dispatch[0][2][0] = 50.0;
    down.dispatch[0][2][0] = 30.0;
    let opts = AccountingOptions::default();
    let a = emission_accounting(&up, &[PARAMS], &opts).unwrap();
    let b = emission_accounting(&down, &[PARAMS], &opts).unwrap();
    // the hour before the swing sees the same ramp magnitude either way
    assert!((a.plants[0].dynamic_t[0][1] - b.plants[0].dynamic_t[0][1]).abs() < 1e-6);
}

#[test]
fn accounting_rejects_wrong_parameter_count() {
    let s = solve(&coal_only_case(&[40.0]), &zeros());
    assert!(matches!(
        emission_accounting(&s, &[], &AccountingOptions::default()),
        Err(AnalysisError::Dimension(_))
    ));
}

#[test]
fn ramps_from_unit_i_deltas() {
    let mut s = solve(&coal_only_case(&[20.0, 20.0, 20.0, 20.0]), &zeros());
    // Unit I: 20 -> 30 -> 30 -> 25
    for (t, v) in [20.0, 30.0, 30.0, 25.0].into_iter().enumerate() {
        s.unit_i[0][t][0] = v;
        s.dispatch[0][t][0] = v;
        s.alpha[0][t][0] = 7.0;
        s.beta[0][t][0] = 7.0;
    }
    s.initial_unit_i[0] = 20.0;
    let m = deep_cycle_metrics(&s);
    assert_eq!(m.plants[0].source, RampSource::Recomputed);
    assert_eq!(m.plants[0].alpha_sum, 10.0);
    assert_eq!(m.plants[0].beta_sum, 5.0);
    assert_eq!(m.plants[0].deep_cycle_slices, 2);
    assert_eq!(m.plants[0].max_swing, 10.0);
}

#[test]
fn priced_ramps_use_solution_columns() {
    let load = [20.0, 28.0, 35.0, 28.0, 22.0];
    let s = solve(&coal_only_case(&load), &RampCostLevel::new("high", 150.0, 80.0));
    let m = deep_cycle_metrics(&s);
    assert_eq!(m.plants[0].source, RampSource::Solution);
    assert!((m.plants[0].alpha_sum - 10.0).abs() < 1e-6);
    assert!((m.plants[0].beta_sum - 8.0).abs() < 1e-6);
}

#[test]
fn flat_unit_has_zero_metrics() {
    let s = solve(&coal_only_case(&[30.0; 4]), &zeros());
    let m = deep_cycle_metrics(&s);
    assert_eq!(m.ramp_total(), 0.0);
    assert_eq!(m.plants[0].max_swing, 0.0);
    assert_eq!(m.plants[0].deep_cycle_slices, 0);
}

#[test]
fn comparison_rows_and_trends() {
    let load = [20.0, 28.0, 35.0, 28.0, 22.0];
    let case = coal_only_case(&load);
    let levels = RampCostLevel::defaults();
    let scheds: Vec<DispatchSchedule> = levels.iter().map(|l| solve(&case, l)).collect();
    let reports: Vec<_> = scheds
        .iter()
        .map(|s| emission_accounting(s, &[PARAMS], &AccountingOptions::default()).unwrap())
        .collect();
    let metrics: Vec<_> = scheds.iter().map(deep_cycle_metrics).collect();
    let runs: Vec<ScenarioRun> = (0..4)
        .map(|i| ScenarioRun {
            label: &levels[i].label,
            ramp_cost: levels[i].ru + levels[i].rd,
            schedule: &scheds[i],
            emissions: &reports[i],
            metrics: &metrics[i],
        })
        .collect();
    let c = compare_scenarios(&runs).unwrap();
    let labels: Vec<&str> = c.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, ["high", "low", "very_high", "zeros"]);
    assert!(c.flags.is_empty());
    let mut reversed = runs.clone();
    reversed.reverse();
    assert_eq!(compare_scenarios(&reversed).unwrap(), c);

    let twin = [ScenarioRun { label: "a", ..runs[0] }, ScenarioRun { label: "b", ..runs[0] }];
    let c2 = compare_scenarios(&twin).unwrap();
    let strip = |r: &deepcycle::analysis::ComparisonRow| deepcycle::analysis::ComparisonRow { label: String::new(), ..r.clone() };
    assert_eq!(strip(&c2.rows[0]), strip(&c2.rows[1]));
    assert!(c.to_text().lines().count() >= 5);
}

#[test]
fn comparison_flags_rising_ramping() {
    let flat = solve(&coal_only_case(&[30.0; 3]), &zeros());
    let mut moving = flat.clone();
    moving.unit_i[0][1][0] = 20.0;
    moving.dispatch[0][1][0] = 20.0;
    let e = emission_accounting(&flat, &[PARAMS], &AccountingOptions::default()).unwrap();
    let (mf, mm) = (deep_cycle_metrics(&flat), deep_cycle_metrics(&moving));
    let runs = [
        ScenarioRun { label: "cheap", ramp_cost: 0.0, schedule: &flat, emissions: &e, metrics: &mf },
        ScenarioRun { label: "dear", ramp_cost: 10.0, schedule: &moving, emissions: &e, metrics: &mm },
    ];
    let c = compare_scenarios(&runs).unwrap();
    assert_eq!(c.flags.len(), 1);
    assert_eq!((c.flags[0].from.as_str(), c.flags[0].to.as_str()), ("cheap", "dear"));
}

#[test]
fn comparison_rejects_mismatched_horizons() {
    let a = solve(&coal_only_case(&[30.0; 3]), &zeros());
    let b = solve(&coal_only_case(&[30.0; 4]), &zeros());
    let ea = emission_accounting(&a, &[PARAMS], &AccountingOptions::default()).unwrap();
    let eb = emission_accounting(&b, &[PARAMS], &AccountingOptions::default()).unwrap();
    let (ma, mb) = (deep_cycle_metrics(&a), deep_cycle_metrics(&b));
    let runs = [
        ScenarioRun { label: "a", ramp_cost: 0.0, schedule: &a, emissions: &ea, metrics: &ma },
        ScenarioRun { label: "b", ramp_cost: 1.0, schedule: &b, emissions: &eb, metrics: &mb },
    ];
    assert!(matches!(compare_scenarios(&runs), Err(AnalysisError::Comparison(_))));
}

#[test]
fn run_tables_are_written() {
    let s = solve(&tiny_case(1), &zeros());
    let e = emission_accounting(&s, &[PARAMS], &AccountingOptions::default()).unwrap();
    let m = deep_cycle_metrics(&s);
    let dir = tempfile::tempdir().unwrap();
    let paths = write_run_tables(dir.path(), &s, &e, &m).unwrap();
    assert_eq!(paths.len(), RUN_FILES.len());
    let dispatch = std::fs::read_to_string(dir.path().join("dispatch.csv")).unwrap();
    assert_eq!(dispatch.lines().count(), 1 + s.horizon);
    assert!(dispatch.starts_with("scenario,slice,C1,"));
    let flows = std::fs::read_to_string(dir.path().join("flows.csv")).unwrap();
    assert_eq!(flows.lines().count(), 1 + s.horizon * s.lines.len());
}
