use std::rc::Rc;
use super::clock::Stopwatch;

use super::simplex::{Basis, LpModel, Outcome, Simplex};
use super::{default_iteration_limit, Branching, relative_gap, MilpError, MilpProblem, MilpSolution, MilpStatus, NodeSelection, SolverOptions};

struct Node {
    id: usize,
    depth: usize,
    /// LP bound of the parent
    bound: f64,
    /// (column, lower, upper) overrides along the path from the root
    fixings: Rc<Vec<(usize, f64, f64)>>,
    basis: Rc<Basis>,
    /// Branching step that created the node: column, up branch, distance moved.
    branched: Option<(usize, bool, f64)>,
}

/// Per-column average objective gain per unit change, down and up.
#[derive(Default)]
struct Pseudocosts {
    sum: [Vec<f64>; 2],
    count: [Vec<u32>; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Pseudocosts {
            sum: [vec![0.0; n], vec![0.0; n]],
            count: [vec![0; n], vec![0; n]],
        }
    }

    fn record(&mut self, col: usize, up: bool, dist: f64, gain: f64) {
        if dist > 0.0 && gain.is_finite() {
            let d = up as usize;
            self.sum[d][col] += gain.max(0.0) / dist;
            self.count[d][col] += 1;
        }
    }

    fn estimate(&self, col: usize, up: bool, mean: f64) -> f64 {
        let d = up as usize;
        match self.count[d][col] {
            0 => mean,
            n => self.sum[d][col] / n as f64,
        }
    }

    fn mean(&self, up: bool) -> f64 {
        let d = up as usize;
        let n: u32 = self.count[d].iter().sum();
        if n == 0 {
            1.0
        } else {
            self.sum[d].iter().sum::<f64>() / n as f64
        }
    }
}

struct Search<'a> {
    p: &'a MilpProblem,
    model: &'a LpModel,
    opts: &'a SolverOptions,
    int_cols: Vec<usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    pseudo: Pseudocosts,
}

enum NodeResult {
    Pruned,
    Integral,
    Branch {
        lp_obj: f64,
        col: usize,
        value: f64,
        basis: Basis,
    },
}

impl<'a> Search<'a> {
    /// Branching column by the configured rule; lowest index on ties.
    fn select(&self, x: &[f64]) -> Option<(f64, usize)> {
        let (mean_down, mean_up) = (self.pseudo.mean(false), self.pseudo.mean(true));
        let mut pick: Option<(f64, usize)> = None;
        for &j in &self.int_cols {
            let f = x[j] - x[j].floor();
            if f.min(1.0 - f) <= self.opts.int_tol {
                continue;
            }
            let score = match self.opts.branching {
                Branching::MostFractional => f.min(1.0 - f),
                Branching::Pseudocost => {
                    let down = self.pseudo.estimate(j, false, mean_down) * f;
                    let up = self.pseudo.estimate(j, true, mean_up) * (1.0 - f);
                    down.max(1e-6) * up.max(1e-6)
                }
            };
            if pick.is_none_or(|(best, _)| score > best) {
                pick = Some((score, j));
            }
        }
        pick
    }

    fn bounds_for(&self, fixings: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.p.col_lower.clone();
        let mut hi = self.p.col_upper.clone();
        for &(j, l, u) in fixings {
            lo[j] = l;
            hi[j] = u;
        }
        self.model.scaled_bounds(&lo, &hi)
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - 1e-9 * obj.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn evaluate(&mut self, lp: &mut Simplex<'_>, node: &Node) -> Result<NodeResult, MilpError> {
        let (l, u) = self.bounds_for(&node.fixings);
        lp.reset(&l, &u, (*node.basis).clone());
        match lp.solve() {
            Outcome::Optimal => {}
            Outcome::Infeasible => return Ok(NodeResult::Pruned),
            Outcome::Unbounded => return Err(MilpError::Malformed("LP relaxation is unbounded".into())),
            Outcome::IterationLimit => {
                return Err(MilpError::Malformed(format!("LP iteration limit at node {}", node.id)))
            }
        }
        let x = lp.column_values();
        let lp_obj = self.p.objective(&x);
        if let Some((col, up, dist)) = node.branched {
            self.pseudo.record(col, up, dist, lp_obj - node.bound);
        }
        if lp_obj >= self.cutoff() {
            return Ok(NodeResult::Pruned);
        }
        let pick = self.select(&x);
        let basis = lp.basis();
        match pick {
            Some((_, col)) => Ok(NodeResult::Branch {
                lp_obj,
                col,
                value: x[col],
                basis,
            }),
            None => {
                // polish: fix integers at their rounded values and re-solve
                let mut fix: Vec<(usize, f64, f64)> = node.fixings.to_vec();
                for &j in &self.int_cols {
                    let r = x[j].round();
                    fix.push((j, r, r));
                }
                let (l, u) = self.bounds_for(&fix);
                lp.reset(&l, &u, basis);
                if lp.solve() == Outcome::Optimal {
                    let mut xs = lp.column_values();
                    for &j in &self.int_cols {
                        xs[j] = xs[j].round();
                    }
                    let obj = self.p.objective(&xs);
                    if obj < self.cutoff() {
                        self.incumbent = Some((obj, xs));
                    }
                }
                Ok(NodeResult::Integral)
            }
        }
    }
}

/// LP-based branch-and-bound on the integer columns of `p`.
///
/// Node order is deterministic: depth first until an incumbent exists, then
/// best bound (lowest id on ties) with a dive from every picked node.
/// Children start from the parent's optimal basis and factorization.
pub fn solve_milp(p: &MilpProblem, opts: &SolverOptions) -> Result<MilpSolution, MilpError> {
    p.validate()?;
    opts.check()?;
    let start = Stopwatch::start();
    let model = LpModel::new(p);
    let (l, u) = model.scaled_bounds(&p.col_lower, &p.col_upper);
    let mut lp = Simplex::new(&model, l, u, model.slack_basis());
    lp.iteration_limit = opts.iteration_limit.unwrap_or_else(|| default_iteration_limit(p));
    let mut search = Search {
        p,
        model: &model,
        opts,
        int_cols: p.integer_columns(),
        incumbent: None,
        pseudo: Pseudocosts::new(p.num_cols()),
    };

    let mut open: Vec<Node> = vec![Node {
        id: 0,
        depth: 0,
        bound: f64::NEG_INFINITY,
        fixings: Rc::new(Vec::new()),
        basis: Rc::new(model.slack_basis()),
        branched: None,
    }];
    let mut next_id = 1;
    let mut nodes = 0;
    let mut trace = Vec::new();
    let mut dive: Option<Node> = None;
    let mut status = MilpStatus::Optimal;
    let mut last_bound = f64::NEG_INFINITY;

    loop {
        let global_bound = |open: &[Node], dive: &Option<Node>, inc: &Option<(f64, Vec<f64>)>| {
            let mut b = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
            if let Some(d) = dive {
                b = b.min(d.bound);
            }
            if let Some((obj, _)) = inc {
                b = b.min(*obj);
            }
            b
        };
        if dive.is_none() && open.is_empty() {
            break;
        }
        if let Some((obj, _)) = &search.incumbent {
            let b = global_bound(&open, &dive, &search.incumbent);
            if relative_gap(*obj, b) <= opts.mip_gap {
                last_bound = b;
                break;
            }
        }
        if opts.node_limit.is_some_and(|lim| nodes >= lim) {
            status = MilpStatus::NodeLimit;
            break;
        }
        if opts.time_limit.is_some_and(|lim| start.elapsed() >= lim) {
            status = MilpStatus::TimeLimit;
            break;
        }
        let node = match dive.take() {
            Some(n) => n,
            None if opts.node_selection == NodeSelection::BestBoundPlunge && search.incumbent.is_none() => {
                // backtrack depth first: deepest node, newest on ties
                let k = (0..open.len())
                    .max_by(|&a, &b| open[a].depth.cmp(&open[b].depth).then(open[a].id.cmp(&open[b].id)))
                    .expect("open is not empty");
                open.swap_remove(k)
            }
            None => {
                let k = (0..open.len())
                    .min_by(|&a, &b| open[a].bound.total_cmp(&open[b].bound).then(open[a].id.cmp(&open[b].id)))
                    .expect("open is not empty");
                open.swap_remove(k)
            }
        };
        if node.bound >= search.cutoff() {
            continue;
        }
        nodes += 1;
        match search.evaluate(&mut lp, &node)? {
            NodeResult::Pruned | NodeResult::Integral => {}
            NodeResult::Branch {
                lp_obj,
                col,
                value,
                basis,
            } => {
                let basis = Rc::new(basis);
                let down = (col, fixed_lower(&node, col, p), value.floor());
                let up = (col, value.ceil(), fixed_upper(&node, col, p));
                let child = |bounds: (usize, f64, f64), id: usize, up: bool| {
                    let mut f = node.fixings.to_vec();
                    f.retain(|e| e.0 != col);
                    f.push(bounds);
                    Node {
                        id,
                        depth: node.depth + 1,
                        bound: lp_obj,
                        fixings: Rc::new(f),
                        basis: Rc::clone(&basis),
                        branched: Some((col, up, if up { value.ceil() - value } else { value - value.floor() })),
                    }
                };
                let down_node = child(down, next_id, false);
                let up_node = child(up, next_id + 1, true);
                next_id += 2;
                let prefer_up = value - value.floor() >= 0.5;
                let plunge = opts.node_selection == NodeSelection::BestBoundPlunge;
                let (first, second) = if prefer_up { (up_node, down_node) } else { (down_node, up_node) };
                if plunge {
                    dive = Some(first);
                    open.push(second);
                } else {
                    open.push(first);
                    open.push(second);
                }
            }
        }
        let b = global_bound(&open, &dive, &search.incumbent);
        last_bound = b.max(last_bound);
        trace.push(last_bound);
    }

    let seconds = start.elapsed().as_secs_f64();
    let remaining = open
        .iter()
        .map(|n| n.bound)
        .chain(dive.iter().map(|n| n.bound))
        .fold(f64::INFINITY, f64::min);
    let (objective, x) = match search.incumbent {
        Some((obj, x)) => (obj, Some(x)),
        None => (f64::INFINITY, None),
    };
    let bound = match (status, &x) {
        (MilpStatus::Optimal, None) => {
            status = MilpStatus::Infeasible;
            f64::INFINITY
        }
        (MilpStatus::Optimal, Some(_)) => {
            if remaining.is_finite() {
                last_bound
            } else {
                objective
            }
        }
        _ => remaining.min(objective),
    };
    Ok(MilpSolution {
        status,
        gap: relative_gap(objective, bound),
        x,
        objective,
        bound,
        nodes,
        lp_iterations: lp.iterations,
        bound_trace: trace,
        seconds,
    })
}

fn fixed_lower(node: &Node, col: usize, p: &MilpProblem) -> f64 {
    node.fixings
        .iter()
        .rev()
        .find(|e| e.0 == col)
        .map_or(p.col_lower[col], |e| e.1)
}

fn fixed_upper(node: &Node, col: usize, p: &MilpProblem) -> f64 {
    node.fixings
        .iter()
        .rev()
        .find(|e| e.0 == col)
        .map_or(p.col_upper[col], |e| e.2)
}
