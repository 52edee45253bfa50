//! LP and MILP solver checks against independent references: a dense
//! two-phase tableau simplex and exhaustive enumeration.

use deepcycle::milp::{brute_force_uc, check_solution, solve_lp, solve_milp, LpStatus, MilpProblem, MilpStatus, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: f64 = f64::INFINITY;

#[derive(Clone, Copy, PartialEq)]
enum Cmp {
    Le,
    Ge,
    Eq,
}

/// Dense two-phase tableau simplex with Bland's rule for
/// `min c x  s.t. rows, x >= 0`. Returns `None` when infeasible.
fn tableau_simplex(c: &[f64], rows: &[(Vec<f64>, Cmp, f64)]) -> Option<f64> {
    let n = c.len();
    let m = rows.len();
    // columns: x (n), slack/surplus (one per inequality), artificial (one per row that needs it)
    let mut norm: Vec<(Vec<f64>, Cmp, f64)> = rows
        .iter()
        .map(|(a, s, b)| {
            if *b < 0.0 {
                let flipped = match s {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (a.iter().map(|v| -v).collect(), flipped, -b)
            } else {
                (a.clone(), *s, *b)
            }
        })
        .collect();
    let n_slack = norm.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = norm.iter().filter(|r| r.1 != Cmp::Le).count();
    let width = n + n_slack + n_art + 1;
    let mut t = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    let (mut si, mut ai) = (n, n + n_slack);
    for (i, (a, s, b)) in norm.iter_mut().enumerate() {
        t[i][..n].copy_from_slice(a);
        t[i][width - 1] = *b;
        match s {
            Cmp::Le => {
                t[i][si] = 1.0;
                basis[i] = si;
                si += 1;
            }
            Cmp::Ge => {
                t[i][si] = -1.0;
                si += 1;
                t[i][ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
            Cmp::Eq => {
                t[i][ai] = 1.0;
                basis[i] = ai;
                ai += 1;
            }
        }
    }
    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| {
        loop {
            // reduced costs
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for i in 0..m {
                    d -= cost[basis[i]] * t[i][j];
                }
                if d < -1e-10 {
                    enter = Some(j);
                    break;
                }
            }
            let Some(q) = enter else { return true };
            let mut leave = None;
            let mut best = INF;
            for i in 0..m {
                if t[i][q] > 1e-10 {
                    let r = t[i][width - 1] / t[i][q];
                    if r < best - 1e-12 || (r <= best + 1e-12 && leave.is_some_and(|l: usize| basis[i] < basis[l])) {
                        best = r;
                        leave = Some(i);
                    }
                }
            }
            let Some(p) = leave else { return false };
            let piv = t[p][q];
            for v in t[p].iter_mut() {
                *v /= piv;
            }
            for i in 0..m {
                if i != p && t[i][q] != 0.0 {
                    let f = t[i][q];
                    for k in 0..width {
                        t[i][k] -= f * t[p][k];
                    }
                }
            }
            basis[p] = q;
        }
    };
    let mut c1 = vec![0.0; width - 1];
    for v in c1.iter_mut().skip(n + n_slack) {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &c1, width - 1);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n + n_slack).map(|i| t[i][width - 1]).sum();
    if infeas > 1e-8 {
        return None;
    }
    // drive degenerate artificials out where possible
    for i in 0..m {
        if basis[i] >= n + n_slack {
            if let Some(q) = (0..n + n_slack).find(|&j| t[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                let piv = t[i][q];
                for v in t[i].iter_mut() {
                    *v /= piv;
                }
                for r in 0..m {
                    if r != i && t[r][q] != 0.0 {
                        let f = t[r][q];
                        for k in 0..width {
                            t[r][k] -= f * t[i][k];
                        }
                    }
                }
                basis[i] = q;
            }
        }
    }
    let mut c2 = vec![0.0; width - 1];
    c2[..n].copy_from_slice(c);
    assert!(run(&mut t, &mut basis, &c2, n + n_slack), "oracle LP unbounded");
    Some((0..m).map(|i| c2[basis[i]] * t[i][width - 1]).sum())
}

struct RandomLp {
    c: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Vec<f64>, Cmp, f64)>,
}

fn random_lp(seed: u64) -> RandomLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=20);
    let m = rng.random_range(1..=15);
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
    let upper: Vec<f64> = x0.iter().map(|v| v + rng.random_range(0.5..5.0)).collect();
    let c = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    let rows = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let act: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
            match rng.random_range(0..3) {
                0 => (a, Cmp::Le, act + rng.random_range(0.0..3.0)),
                1 => (a, Cmp::Ge, act - rng.random_range(0.0..3.0)),
                _ => (a, Cmp::Eq, act),
            }
        })
        .collect();
    RandomLp { c, upper, rows }
}

fn to_problem(lp: &RandomLp) -> MilpProblem {
    let mut p = MilpProblem::new("random");
    for (j, (&c, &u)) in lp.c.iter().zip(&lp.upper).enumerate() {
        p.add_col(format!("x{j}"), 0.0, u, c, false, 0);
    }
    for (i, (a, s, b)) in lp.rows.iter().enumerate() {
        let coefs = a.iter().enumerate().map(|(j, &v)| (j, v)).collect();
        let (lo, hi) = match s {
            Cmp::Le => (-INF, *b),
            Cmp::Ge => (*b, INF),
            Cmp::Eq => (*b, *b),
        };
        p.add_row(format!("r{i}"), 1, coefs, lo, hi);
    }
    p
}

#[test]
fn random_dense_lps_match_tableau_oracle() {
    for seed in 0..50 {
        let lp = random_lp(seed);
        let mut rows = lp.rows.clone();
        for (j, &u) in lp.upper.iter().enumerate() {
            let mut a = vec![0.0; lp.c.len()];
            a[j] = 1.0;
            rows.push((a, Cmp::Le, u));
        }
        let expected = tableau_simplex(&lp.c, &rows).expect("constructed feasible");
        let p = to_problem(&lp);
        let sol = solve_lp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
        assert!(
            (sol.objective - expected).abs() <= 1e-7 * expected.abs().max(1.0),
            "seed {seed}: {} vs {expected}",
            sol.objective
        );
        assert!(
            (sol.dual_objective - sol.objective).abs() <= 1e-7 * expected.abs().max(1.0),
            "seed {seed}: duality {} vs {}",
            sol.dual_objective,
            sol.objective
        );
        assert!(check_solution(&p, &sol.x).unwrap().passes(1e-7), "seed {seed}");
    }
}

#[test]
fn infeasible_lps_are_detected() {
    for seed in 0..20 {
        let lp = random_lp(1000 + seed);
        let mut p = to_problem(&lp);
        // x0 >= u0 + 1 contradicts the column bound
        let u0 = p.col_upper[0];
        p.add_row("cut", 1, vec![(0, 1.0)], u0 + 1.0, INF);
        assert_eq!(solve_lp(&p, &SolverOptions::default()).unwrap().status, LpStatus::Infeasible);
    }
}

fn random_milp(seed: u64) -> MilpProblem {
    let lp = random_lp(seed);
    let mut p = to_problem(&lp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    let n = p.num_cols();
    // binaries gate continuous columns: x_j <= u_j * z_j
    let k = rng.random_range(1..=n.min(8));
    for j in 0..k {
        let z = p.add_col(format!("z{j}"), 0.0, 1.0, rng.random_range(0.0..20.0), true, 0);
        let u = p.col_upper[j];
        p.add_row(format!("gate{j}"), 6, vec![(j, 1.0), (z, -u)], -INF, 0.0);
    }
    p
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let opts = SolverOptions {
        mip_gap: 0.0,
        ..SolverOptions::default()
    };
    let mut checked = 0;
    for seed in 0..60 {
        let p = random_milp(seed);
        let brute = brute_force_uc(&p, 20).unwrap();
        let bnb = solve_milp(&p, &opts).unwrap();
        match brute.status {
            MilpStatus::Infeasible => assert_eq!(bnb.status, MilpStatus::Infeasible, "seed {seed}"),
            _ => {
                checked += 1;
                assert_eq!(bnb.status, MilpStatus::Optimal, "seed {seed}");
                assert!(
                    (bnb.objective - brute.objective).abs() <= 1e-6 * brute.objective.abs().max(1.0),
                    "seed {seed}: {} vs {}",
                    bnb.objective,
                    brute.objective
                );
                let x = bnb.x.as_ref().unwrap();
                let rep = check_solution(&p, x).unwrap();
                assert!(rep.passes(1e-6), "seed {seed}: {rep:?}");
                assert!(bnb.bound_trace.windows(2).all(|w| w[1] >= w[0]), "seed {seed}");
            }
        }
    }
    assert!(checked > 20);
}

#[test]
fn branch_and_bound_is_reproducible() {
    let p = random_milp(7);
    let a = solve_milp(&p, &SolverOptions::default()).unwrap();
    let b = solve_milp(&p, &SolverOptions::default()).unwrap();
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.x, b.x);
}

#[test]
fn fixed_binaries_reduce_to_lp() {
    let mut p = random_milp(3);
    for j in p.integer_columns() {
        p.col_lower[j] = 1.0;
    }
    let lp = solve_lp(&p, &SolverOptions::default()).unwrap();
    let mip = solve_milp(&p, &SolverOptions::default()).unwrap();
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!((lp.objective - mip.objective).abs() < 1e-7);
    let none = brute_force_uc(&to_problem(&random_lp(3)), 20).unwrap();
    let direct = solve_lp(&to_problem(&random_lp(3)), &SolverOptions::default()).unwrap();
    assert!((none.objective - direct.objective).abs() < 1e-9);
}

#[test]
fn enumeration_refuses_large_instances() {
    let mut p = MilpProblem::new("big");
    for j in 0..21 {
        p.add_col(format!("b{j}"), 0.0, 1.0, 1.0, true, 0);
    }
    assert!(brute_force_uc(&p, 20).is_err());
}

#[test]
fn enumeration_reports_infeasibility() {
    let mut p = MilpProblem::new("inf");
    let b = p.add_col("b", 0.0, 1.0, 1.0, true, 0);
    p.add_row("half", 1, vec![(b, 2.0)], 1.0, 1.0);
    assert_eq!(brute_force_uc(&p, 20).unwrap().status, MilpStatus::Infeasible);
    assert_eq!(solve_milp(&p, &SolverOptions::default()).unwrap().status, MilpStatus::Infeasible);
}
