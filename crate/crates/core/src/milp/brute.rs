use super::clock::Stopwatch;

use super::simplex::{LpModel, Outcome, Simplex};
use super::{default_iteration_limit, MilpError, MilpProblem, MilpSolution, MilpStatus};

/// Exact optimum by enumerating every assignment of the binary columns and
/// solving the remaining LP for each. Intended as a test oracle.
///
/// Assignments violating a row that involves binaries only are discarded
/// without an LP solve.
pub fn brute_force_uc(p: &MilpProblem, max_binaries: usize) -> Result<MilpSolution, MilpError> {
    p.validate()?;
    let start = Stopwatch::start();
    let bins = p.integer_columns();
    if bins.len() > max_binaries {
        return Err(MilpError::TooManyBinaries {
            count: bins.len(),
            limit: max_binaries,
        });
    }
    for &j in &bins {
        if p.col_lower[j] < 0.0 || p.col_upper[j] > 1.0 {
            return Err(MilpError::NotBinary(p.col_names[j].clone()));
        }
    }
    // rows over binaries only are checked on the assignment itself
    let binary_rows: Vec<usize> = (0..p.num_rows())
        .filter(|&i| p.rows[i].coefs.iter().all(|&(j, _)| p.integer[j]))
        .collect();
    let model = LpModel::new(p);
    let (l0, u0) = model.scaled_bounds(&p.col_lower, &p.col_upper);
    let mut lp = Simplex::new(&model, l0, u0, model.slack_basis());
    lp.iteration_limit = default_iteration_limit(p);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut count = 0;
    for mask in 0u64..(1u64 << bins.len()) {
        let mut lo = p.col_lower.clone();
        let mut hi = p.col_upper.clone();
        let mut skip = false;
        for (k, &j) in bins.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            if v < p.col_lower[j] || v > p.col_upper[j] {
                skip = true;
                break;
            }
            lo[j] = v;
            hi[j] = v;
        }
        if skip || binary_rows.iter().any(|&i| p.rows[i].violation(&lo) > 1e-9) {
            continue;
        }
        count += 1;
        let (l, u) = model.scaled_bounds(&lo, &hi);
        let basis = lp.basis();
        lp.reset(&l, &u, basis);
        match lp.solve() {
            Outcome::Optimal => {}
            Outcome::Infeasible => continue,
            Outcome::Unbounded => return Err(MilpError::Malformed("LP restriction is unbounded".into())),
            Outcome::IterationLimit => return Err(MilpError::Malformed("LP iteration limit".into())),
        }
        let mut x = lp.column_values();
        for &j in &bins {
            x[j] = x[j].round();
        }
        let obj = p.objective(&x);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((obj, x)) => MilpSolution {
            status: MilpStatus::Optimal,
            x: Some(x),
            objective: obj,
            bound: obj,
            gap: 0.0,
            nodes: count,
            lp_iterations: lp.iterations,
            bound_trace: vec![obj],
            seconds,
        },
        None => MilpSolution {
            status: MilpStatus::Infeasible,
            x: None,
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            gap: f64::INFINITY,
            nodes: count,
            lp_iterations: lp.iterations,
            bound_trace: Vec::new(),
            seconds,
        },
    })
}
