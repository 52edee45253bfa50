//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use deepcycle::analysis::{deep_cycle_metrics, extract_schedule, non_coal_l1_change, CycleMetrics, DispatchSchedule};
use deepcycle::emission::{
    build_emission_blocks, dynamic_hourly_emission, fit_samples, fit_static, generate_synthetic_samples,
    static_hourly_emission, DynamicEmissionParams, EmissionSample, StaticEmissionParams,
};
use deepcycle::grid::ieee30_mod;
use deepcycle::milp::{
    brute_force_uc, solve_external, solve_milp, ExternalSolver, MilpProblem, MilpSolution, MilpStatus, SolverOptions,
};
use deepcycle::uc::{assemble, check_uc_solution, family, AssembleOptions, FormulationReport, RampCostLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct BundledRun {
    wind: bool,
    level: RampCostLevel,
    problem: MilpProblem,
    solution: MilpSolution,
    report: FormulationReport,
    schedule: DispatchSchedule,
    metrics: CycleMetrics,
    elapsed: Duration,
}

impl BundledRun {
    fn name(&self) -> String {
        format!("{}/{}", if self.wind { "wind" } else { "no-wind" }, self.level.label)
    }
}

fn bundled_runs() -> Vec<BundledRun> {
    let case = ieee30_mod();
    let mut runs = Vec::new();
    for wind in [true, false] {
        let case = if wind { case.clone() } else { case.without_wind() };
        for level in RampCostLevel::defaults() {
            let start = Instant::now();
            let (problem, idx) = assemble(&case, &[], &level, &AssembleOptions::default()).unwrap();
            let solution = solve_milp(&problem, &SolverOptions::default()).unwrap();
            let elapsed = start.elapsed();
            let x = solution.x.as_ref().expect("bundled case is feasible");
            let report = check_uc_solution(&problem, x, 1e-6).unwrap();
            let schedule = extract_schedule(&solution, &idx, &case).unwrap();
            let metrics = deep_cycle_metrics(&schedule);
            eprintln!(
                "  solved {}/{}: {:?} objective {:.3} in {:.1} s",
                if wind { "wind" } else { "no-wind" },
                level.label,
                solution.status,
                solution.objective,
                elapsed.as_secs_f64()
            );
            runs.push(BundledRun {
                wind,
                level,
                problem,
                solution,
                report,
                schedule,
                metrics,
                elapsed,
            });
        }
    }
    runs
}

fn c1_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..25 {
        let case = common::tiny_case(seed);
        let level = &RampCostLevel::defaults()[(seed % 4) as usize];
        let (p, _) = assemble(&case, &[], level, &AssembleOptions::default()).unwrap();
        if case.generators.len() > 3 || case.horizon > 4 || p.integer_columns().len() > 20 {
            return outcome(false, format!("seed {seed} exceeds the instance size limits"));
        }
        let opts = SolverOptions {
            mip_gap: 0.0,
            ..SolverOptions::default()
        };
        let a = solve_milp(&p, &opts).unwrap();
        let b = brute_force_uc(&p, 20).unwrap();
        if a.status != MilpStatus::Optimal || b.status != MilpStatus::Optimal {
            return outcome(false, format!("seed {seed}: {:?} vs {:?}", a.status, b.status));
        }
        worst = worst.max((a.objective - b.objective).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-6 && secs <= 60.0, format!("25 instances, max |diff| {worst:.1e}, {secs:.1} s"))
}

fn c2_integrity(runs: &[BundledRun]) -> Outcome {
    let worst = runs.iter().map(|r| r.report.max_violation()).fold(0.0, f64::max);
    let families = runs.iter().all(|r| r.report.families.len() == 18);
    let passed = runs.iter().all(|r| r.report.passed);
    outcome(
        worst <= 1e-6 && families && passed,
        format!("{} solutions, 18 families each, max residual {worst:.1e}", runs.len()),
    )
}

/// Composite 5-point Gauss-Legendre rule on `[a, b]`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = a + h * (i as f64 + 0.5);
            X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Hourly emission integrated over the ramp-in, plateau and ramp-out
/// trajectory, with the instantaneous rate `f(x) + 2 b |Δ|^N2` while a
/// transition is under way.
fn quadrature_emission(ps: &StaticEmissionParams, pd: &DynamicEmissionParams, gp: f64, g: f64, gn: f64) -> f64 {
    let half = 0.5 * pd.tau;
    let rate = |x: f64| ps.f0 + ps.f1 * x.max(0.0).powf(ps.n1);
    let dyn_rate = |d: f64| if d == 0.0 { 0.0 } else { 2.0 * pd.b * d.abs().powf(pd.n2) };
    let m_in = 0.5 * (gp + g);
    let m_out = 0.5 * (g + gn);
    let ramp_in = gauss_legendre(|t| rate(m_in + (g - m_in) * t / half) + dyn_rate(g - gp), 0.0, half, 400);
    let plateau = (1.0 - pd.tau) * rate(g);
    let ramp_out = gauss_legendre(|t| rate(g + (m_out - g) * t / half) + dyn_rate(gn - g), 0.0, half, 400);
    ramp_in + plateau + ramp_out
}

fn random_params(rng: &mut ChaCha8Rng) -> (StaticEmissionParams, DynamicEmissionParams) {
    (
        StaticEmissionParams {
            f0: rng.random_range(0.0..30.0),
            f1: rng.random_range(0.3..1.5),
            n1: rng.random_range(0.8..1.3),
        },
        DynamicEmissionParams {
            b: rng.random_range(0.5..12.0),
            tau: rng.random_range(0.05..0.9),
            n2: rng.random_range(0.1..1.8),
        },
    )
}

fn c3_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let (ps, pd) = random_params(&mut rng);
        let [gp, g, gn] = [(); 3].map(|_| rng.random_range(0.0..600.0));
        let closed = dynamic_hourly_emission(&ps, &pd, gp, g, gn).unwrap();
        let quad = quadrature_emission(&ps, &pd, gp, g, gn);
        worst = worst.max((closed - quad).abs() / quad.abs());
    }
    let mut reduction: f64 = 0.0;
    for _ in 0..500 {
        let (ps, pd) = random_params(&mut rng);
        let g = rng.random_range(0.0..600.0);
        let a = dynamic_hourly_emission(&ps, &pd, g, g, g).unwrap();
        let b = static_hourly_emission(&ps, g).unwrap();
        reduction = reduction.max((a - b).abs() / (f64::EPSILON * b.abs()));
    }
    outcome(
        worst <= 1e-7 && reduction <= 4.0,
        format!("500 triples, max rel err {worst:.1e}; static reduction within {reduction:.0} ulp"),
    )
}

fn c4_area() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (_, pd) = random_params(&mut rng);
        let n = rng.random_range(1..=8);
        let mut cuts: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..400.0)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let breaks: Vec<f64> = std::iter::once(0.0).chain(cuts).collect();
        let blocks = build_emission_blocks(&pd, &breaks).unwrap();
        let area: f64 = blocks.iter().map(|b| b.rate * b.width()).sum();
        let top = *breaks.last().unwrap();
        let p = pd.n2 + 1.0;
        let exact = pd.b * pd.tau * top.powf(p) / p;
        worst = worst.max((area - exact).abs() / exact);
    }
    outcome(worst <= 1e-9, format!("100 breakpoint sets, max rel err {worst:.1e}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c5_fit() -> Outcome {
    let ps = StaticEmissionParams::REFERENCE;
    let pd = DynamicEmissionParams::REFERENCE;

    let grid: Vec<EmissionSample> = (0..=10)
        .map(|i| {
            let g = 100.0 + 50.0 * i as f64;
            EmissionSample {
                g_prev: g,
                g,
                g_next: g,
                emission: static_hourly_emission(&ps, g).unwrap(),
            }
        })
        .collect();
    let st = fit_static(&grid).unwrap().params;
    let static_err = rel(st.f0, ps.f0).max(rel(st.f1, ps.f1)).max(rel(st.n1, ps.n1));

    let clean = generate_synthetic_samples(&ps, &pd, 600.0, 600, 0.0, 5);
    let report = fit_samples(&clean, 300.0, 600.0).unwrap();
    let Some(d) = report.dynamic_fit else {
        return outcome(false, "noiseless dynamic fit failed");
    };
    let dyn_err = rel(d.params.b, pd.b).max(rel(d.params.tau, pd.tau)).max(rel(d.params.n2, pd.n2));

    const TRIALS: u64 = 200;
    const SAMPLES: usize = 8000;
    let truth = [ps.f0, ps.f1, ps.n1, pd.b, pd.tau, pd.n2];
    let mut covered = [0u32; 6];
    for seed in 0..TRIALS {
        let noisy = generate_synthetic_samples(&ps, &pd, 600.0, SAMPLES, 0.05, 1000 + seed);
        let r = fit_samples(&noisy, 300.0, 600.0).unwrap();
        let s = &r.static_fit;
        let mut est = vec![(s.params.f0, s.std_errors.f0), (s.params.f1, s.std_errors.f1), (s.params.n1, s.std_errors.n1)];
        if let Some(d) = &r.dynamic_fit {
            est.extend([(d.params.b, d.std_errors.b), (d.params.tau, d.std_errors.tau), (d.params.n2, d.std_errors.n2)]);
        }
        for (i, (v, se)) in est.into_iter().enumerate() {
            if (v - truth[i]).abs() <= 3.0 * se {
                covered[i] += 1;
            }
        }
    }
    let coverage: Vec<f64> = covered.iter().map(|&c| c as f64 / TRIALS as f64).collect();
    let min_cov = coverage.iter().copied().fold(1.0, f64::min);
    outcome(
        static_err <= 1e-4 && dyn_err <= 1e-3 && min_cov >= 0.95,
        format!(
            "noiseless rel err static {static_err:.1e}, dynamic {dyn_err:.1e}; 3-SE coverage f0/f1/N1/b/tau/N2 = {} ({TRIALS} trials of {SAMPLES})",
            coverage.iter().map(|c| format!("{:.0}%", 100.0 * c)).collect::<Vec<_>>().join("/")
        ),
    )
}

fn c6_complementarity(runs: &[BundledRun]) -> Outcome {
    let mut worst_min: f64 = 0.0;
    let mut worst_delta: f64 = 0.0;
    let mut checked = 0;
    for r in runs.iter().filter(|r| r.level.ru > 0.0 || r.level.rd > 0.0) {
        let s = &r.schedule;
        for k in 0..s.scenarios.len() {
            for c in 0..s.coal_plants.len() {
                let mut prev = s.initial_unit_i[c];
                for t in 0..s.horizon {
                    let (a, b) = (s.alpha[k][t][c], s.beta[k][t][c]);
                    let g = s.unit_i[k][t][c];
                    worst_min = worst_min.max(a.min(b));
                    worst_delta = worst_delta.max((a - b - (g - prev)).abs());
                    prev = g;
                    checked += 1;
                }
            }
        }
    }
    outcome(
        worst_min <= 1e-6 && worst_delta <= 1e-6,
        format!("{checked} Unit I slices, max min(a,b) {worst_min:.1e}, max |a-b-dg| {worst_delta:.1e}"),
    )
}

fn ramp_series(runs: &[BundledRun], wind: bool) -> Vec<f64> {
    runs.iter().filter(|r| r.wind == wind).map(|r| r.metrics.ramp_total()).collect()
}

fn c7_wind_trend(runs: &[BundledRun]) -> Outcome {
    let ramps = ramp_series(runs, true);
    let monotone = ramps.windows(2).all(|w| w[1] <= w[0] + 1e-6);
    let strict = ramps[3] < ramps[0] - 1e-6;
    outcome(
        monotone && strict,
        format!(
            "wind case sum(a+b) zeros->very_high = {}",
            ramps.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c8_no_wind_trend(runs: &[BundledRun]) -> Outcome {
    let no_wind: Vec<&BundledRun> = runs.iter().filter(|r| !r.wind).collect();
    let (zeros, top) = (&no_wind[0].schedule, &no_wind[3].schedule);
    let non_coal: f64 = (0..zeros.generators.len())
        .filter(|g| !zeros.coal_positions.contains(g))
        .map(|g| zeros.expected_energy(g))
        .sum();
    let change = non_coal_l1_change(zeros, top) / non_coal;
    let g6 = zeros.generators.iter().position(|g| g == "G6").expect("bundled case has G6");
    let g6_energy = zeros.expected_energy(g6);
    let wind_top = &runs.iter().filter(|r| r.wind).nth(3).unwrap().schedule;
    outcome(
        change <= 0.10 && g6_energy.abs() <= 1e-6,
        format!(
            "non-coal L1 change zeros->very_high {:.2}% of {non_coal:.0} MWh; G6 at zeros {g6_energy:.2} MWh (wind very_high: {:.2} MWh)",
            100.0 * change,
            wind_top.expected_energy(g6)
        ),
    )
}

fn c9_sequencing(runs: &[BundledRun]) -> Outcome {
    let mut worst_gap: f64 = 0.0;
    let mut order_ok = true;
    let mut on_ii = 0;
    for r in runs {
        let s = &r.schedule;
        for k in 0..s.scenarios.len() {
            for t in 0..s.horizon {
                for c in 0..s.coal_plants.len() {
                    if s.commit_ii[k][t][c] {
                        on_ii += 1;
                        worst_gap = worst_gap.max(s.eol[c] - s.unit_i[k][t][c]);
                        order_ok &= s.commit_i[k][t][c];
                    }
                }
            }
        }
    }
    outcome(
        worst_gap <= 1e-6 && order_ok,
        format!("{on_ii} slices with Unit II on, max ceiling shortfall {worst_gap:.1e}, u_II <= u_I everywhere: {order_ok}"),
    )
}

fn highs_available() -> bool {
    Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success())
}

fn c10_performance(runs: &[BundledRun]) -> Outcome {
    let opts = SolverOptions::default();
    let slowest = runs.iter().map(|r| r.elapsed).max().unwrap();
    let fast = slowest <= Duration::from_secs(600);
    let solved = runs.iter().all(|r| r.solution.status == MilpStatus::Optimal && r.solution.gap <= opts.mip_gap);

    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py");
    let (label, command, subset): (&str, String, Vec<&BundledRun>) = if highs_available() {
        ("HiGHS", format!("python3 {} {{mps}} {{sol}}", script.display()), runs.iter().collect())
    } else {
        let shim = format!("{} solve-mps {{mps}} {{sol}}", env!("CARGO_BIN_EXE_deepcycle"));
        ("solve-mps shim", shim, runs.iter().filter(|r| !r.wind && r.level.label == "zeros").collect())
    };
    let ext_opts = SolverOptions {
        external_solver: Some(ExternalSolver::new(command)),
        ..SolverOptions::default()
    };
    let mut worst: f64 = 0.0;
    for r in &subset {
        match solve_external(&r.problem, &ext_opts) {
            Ok(s) if s.has_solution() => {
                let a = r.solution.objective;
                worst = worst.max((a - s.objective).abs() / a.abs().max(1.0));
            }
            Ok(s) => return outcome(false, format!("{}: external status {:?}", r.name(), s.status)),
            Err(e) => return outcome(false, format!("{}: external solver failed: {e}", r.name())),
        }
    }
    outcome(
        fast && solved && worst <= opts.mip_gap,
        format!(
            "slowest level {:.1} s, all optimal at gap <= {:.0e}; {label} agrees on {} runs within {worst:.1e}",
            slowest.as_secs_f64(),
            opts.mip_gap,
            subset.len()
        ),
    )
}

fn c11_storage() -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut worst_overlap: f64 = 0.0;
    let mut used = true;
    for (ce, de) in [(0.9, 0.9), (0.8, 0.95), (0.95, 0.99)] {
        let case = common::storage_case(ce, de);
        let (p, idx) = assemble(&case, &[], &RampCostLevel::by_label("zeros").unwrap(), &AssembleOptions::default()).unwrap();
        let sol = solve_milp(&p, &SolverOptions::default()).unwrap();
        let x = sol.x.as_ref().expect("storage case is feasible");
        let rep = check_uc_solution(&p, x, 1e-6).unwrap();
        for f in family::STORAGE_DYNAMICS..=family::ENERGY_BOUNDS {
            worst_res = worst_res.max(rep.family(f));
        }
        let s = extract_schedule(&sol, &idx, &case).unwrap();
        let (mut charged, mut discharged) = (false, false);
        for t in 0..s.horizon {
            let (c, d) = (s.charge[0][t][0], s.discharge[0][t][0]);
            worst_overlap = worst_overlap.max(c.min(d));
            charged |= c > 1e-6;
            discharged |= d > 1e-6;
        }
        used &= charged && discharged;
    }
    outcome(
        worst_res <= 1e-6 && worst_overlap <= 1e-6 && used,
        format!("3 efficiency pairs, storage residual {worst_res:.1e}, max overlap {worst_overlap:.1e}, device cycled: {used}"),
    )
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "oracle equivalence", c1_oracle()),
        (3, "closed form vs quadrature", c3_closed_form()),
        (4, "block area conservation", c4_area()),
        (5, "fit recovery", c5_fit()),
        (11, "storage constraints", c11_storage()),
    ];
    let runs = bundled_runs();
    results.extend([
        (2, "formulation integrity", c2_integrity(&runs)),
        (6, "ramp complementarity", c6_complementarity(&runs)),
        (7, "wind-case ramp trend", c7_wind_trend(&runs)),
        (8, "no-wind dispatch stability", c8_no_wind_trend(&runs)),
        (9, "unit sequencing", c9_sequencing(&runs)),
        (10, "performance and external solver", c10_performance(&runs)),
    ]);
    results.sort_by_key(|r| r.0);
    println!();
    for (n, name, o) in &results {
        println!("[{}] {n:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed in {:.0} s", results.len() - failed, started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
