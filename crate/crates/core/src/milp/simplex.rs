//! Bounded-variable revised simplex (dual and primal) on the scaled problem
//! `A x - s = 0`, `l <= x <= u`, `rl <= s <= ru`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lu::Factor;
use super::problem::MilpProblem;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
/// Updates tolerated before a solve phase starts from a fresh factorization.
const REFRESH_AFTER: usize = 30;
const STALL_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// A simplex basis: the basic variable of each position and the status of
/// every structural and logical variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub(crate) head: Vec<usize>,
    pub(crate) status: Vec<VarStatus>,
    /// Dual steepest-edge weights by position (empty means all ones).
    pub(crate) weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Scaled problem data shared by every solve of one problem.
#[derive(Debug, Clone)]
pub(crate) struct LpModel {
    pub m: usize,
    pub n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    cost: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    pub col_scale: Vec<f64>,
    pub row_scale: Vec<f64>,
}

fn pow2_round(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round() as i32)
}

impl LpModel {
    pub fn new(p: &MilpProblem) -> Self {
        let m = p.num_rows();
        let n = p.num_cols();
        // merge duplicate entries
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(p.num_nonzeros());
        for (i, r) in p.rows.iter().enumerate() {
            let mut coefs = r.coefs.clone();
            coefs.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < coefs.len() {
                let j = coefs[k].0;
                let mut v = 0.0;
                while k < coefs.len() && coefs[k].0 == j {
                    v += coefs[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }

        // geometric scaling, rounded to powers of two
        let mut rs = vec![1.0; m];
        let mut cs = vec![1.0; n];
        for _ in 0..6 {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for &(i, j, v) in &triplets {
                let a = (v * cs[j]).abs();
                rmin[i] = rmin[i].min(a);
                rmax[i] = rmax[i].max(a);
            }
            for i in 0..m {
                if rmax[i] > 0.0 {
                    rs[i] = 1.0 / (rmin[i] * rmax[i]).sqrt();
                }
            }
            let mut cmin = vec![f64::INFINITY; n];
            let mut cmax = vec![0.0f64; n];
            for &(i, j, v) in &triplets {
                let a = (v * rs[i]).abs();
                cmin[j] = cmin[j].min(a);
                cmax[j] = cmax[j].max(a);
            }
            for j in 0..n {
                if cmax[j] > 0.0 {
                    cs[j] = 1.0 / (cmin[j] * cmax[j]).sqrt();
                }
            }
        }
        for v in rs.iter_mut() {
            *v = pow2_round(*v);
        }
        for v in cs.iter_mut() {
            *v = pow2_round(*v);
        }

        let mut col_count = vec![0usize; n];
        let mut row_count = vec![0usize; m];
        for &(i, j, _) in &triplets {
            col_count[j] += 1;
            row_count[i] += 1;
        }
        let prefix = |counts: &[usize]| {
            let mut s = vec![0usize; counts.len() + 1];
            for k in 0..counts.len() {
                s[k + 1] = s[k] + counts[k];
            }
            s
        };
        let col_start = prefix(&col_count);
        let row_start = prefix(&row_count);
        let nnz = triplets.len();
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut row_col = vec![0; nnz];
        let mut row_val = vec![0.0; nnz];
        let mut cfill = col_start.clone();
        let mut rfill = row_start.clone();
        for &(i, j, v) in &triplets {
            let a = v * rs[i] * cs[j];
            col_row[cfill[j]] = i;
            col_val[cfill[j]] = a;
            cfill[j] += 1;
            row_col[rfill[i]] = j;
            row_val[rfill[i]] = a;
            rfill[i] += 1;
        }
        let cost = (0..n).map(|j| p.cost[j] * cs[j]).collect();
        let row_lower = (0..m).map(|i| p.rows[i].lower * rs[i]).collect();
        let row_upper = (0..m).map(|i| p.rows[i].upper * rs[i]).collect();
        LpModel {
            m,
            n,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            cost,
            row_lower,
            row_upper,
            col_scale: cs,
            row_scale: rs,
        }
    }

    /// Scaled bounds of all `n + m` variables for the given column bounds.
    pub fn scaled_bounds(&self, lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut l = Vec::with_capacity(self.n + self.m);
        let mut u = Vec::with_capacity(self.n + self.m);
        for j in 0..self.n {
            l.push(lower[j] / self.col_scale[j]);
            u.push(upper[j] / self.col_scale[j]);
        }
        l.extend_from_slice(&self.row_lower);
        u.extend_from_slice(&self.row_upper);
        (l, u)
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (range, logical) = if j < self.n {
            (self.col_start[j]..self.col_start[j + 1], None)
        } else {
            (0..0, Some(j - self.n))
        };
        range
            .map(move |k| (self.col_row[k], self.col_val[k]))
            .chain(logical.map(|i| (i, -1.0)))
    }

    pub fn slack_basis(&self) -> Basis {
        let mut status = vec![VarStatus::Lower; self.n + self.m];
        for s in status.iter_mut().skip(self.n) {
            *s = VarStatus::Basic;
        }
        Basis {
            head: (self.n..self.n + self.m).collect(),
            status,
            weights: Vec::new(),
        }
    }
}

pub(crate) struct Simplex<'a> {
    model: &'a LpModel,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    cost: Vec<f64>,
    perturbed: bool,
    pub x: Vec<f64>,
    d: Vec<f64>,
    head: Vec<usize>,
    status: Vec<VarStatus>,
    pos: Vec<usize>,
    factor: Factor,
    /// The factorization matches `head`.
    factored: bool,
    weights: Vec<f64>,
    pub iterations: usize,
    pub iteration_limit: usize,
    limit_at: usize,
    work: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'a> Simplex<'a> {
    pub fn new(model: &'a LpModel, lower: Vec<f64>, upper: Vec<f64>, basis: Basis) -> Self {
        let nm = model.n + model.m;
        let mut cost = model.cost.clone();
        cost.resize(nm, 0.0);
        let mut s = Simplex {
            model,
            lower,
            upper,
            cost,
            perturbed: false,
            x: vec![0.0; nm],
            d: vec![0.0; nm],
            head: Vec::new(),
            status: Vec::new(),
            pos: vec![usize::MAX; nm],
            factor: Factor::default(),
            factored: false,
            weights: vec![1.0; model.m],
            iterations: 0,
            iteration_limit: 50 * nm + 10_000,
            limit_at: 0,
            work: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(0x51_3e_c5),
        };
        s.set_basis(basis);
        s
    }

    /// Replaces the variable bounds (scaled, all `n + m` variables) and the
    /// starting basis.
    pub fn reset(&mut self, lower: &[f64], upper: &[f64], basis: Basis) {
        self.lower.copy_from_slice(lower);
        self.upper.copy_from_slice(upper);
        self.unperturb();
        self.set_basis(basis);
    }

    pub fn basis(&self) -> Basis {
        Basis {
            head: self.head.clone(),
            status: self.status.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Installs a basis; nonbasic statuses are repaired to match the
    /// current bounds.
    pub fn set_basis(&mut self, basis: Basis) {
        if basis.head != self.head {
            self.factored = false;
        }
        self.head = basis.head;
        self.status = basis.status;
        self.pos.iter_mut().for_each(|p| *p = usize::MAX);
        for (k, &j) in self.head.iter().enumerate() {
            self.pos[j] = k;
            self.status[j] = VarStatus::Basic;
        }
        for j in 0..self.status.len() {
            if self.status[j] != VarStatus::Basic {
                self.status[j] = self.fit_status(j, self.status[j]);
            }
        }
        if basis.weights.len() == self.model.m {
            self.weights = basis.weights;
        } else {
            self.weights.clear();
            self.weights.resize(self.model.m, 1.0);
        }
    }

    fn fit_status(&self, j: usize, want: VarStatus) -> VarStatus {
        let (l, u) = (self.lower[j], self.upper[j]);
        match want {
            VarStatus::Upper if u.is_finite() => VarStatus::Upper,
            VarStatus::Lower if l.is_finite() => VarStatus::Lower,
            _ if l.is_finite() => VarStatus::Lower,
            _ if u.is_finite() => VarStatus::Upper,
            _ => VarStatus::Zero,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::Lower => self.lower[j],
            VarStatus::Upper => self.upper[j],
            _ => 0.0,
        }
    }

    fn refactor(&mut self) {
        let m = self.model.m;
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self.head.iter().map(|&j| self.model.column(j).collect()).collect();
            match Factor::factorize(m, &cols) {
                Ok(f) => {
                    self.factor = f;
                    self.factored = true;
                    return;
                }
                Err(sing) => {
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.head[p];
                        let logical = self.model.n + r;
                        self.pos[old] = usize::MAX;
                        self.status[old] = self.fit_status(old, VarStatus::Lower);
                        self.head[p] = logical;
                        self.pos[logical] = p;
                        self.status[logical] = VarStatus::Basic;
                        self.weights[p] = 1.0;
                    }
                }
            }
        }
    }

    fn compute_primal(&mut self) {
        let m = self.model.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.status.len() {
            if self.status[j] != VarStatus::Basic {
                let v = self.nonbasic_value(j);
                self.x[j] = v;
                if v != 0.0 {
                    for (i, a) in self.model.column(j) {
                        rhs[i] -= a * v;
                    }
                }
            }
        }
        self.factor.ftran(&mut rhs, &mut self.work);
        for (k, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[k];
        }
    }

    fn duals(&mut self) -> Vec<f64> {
        let mut y: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.factor.btran(&mut y, &mut self.work);
        y
    }

    fn compute_dual(&mut self) {
        let y = self.duals();
        let n = self.model.n;
        for j in 0..n + self.model.m {
            if self.status[j] == VarStatus::Basic {
                self.d[j] = 0.0;
            } else if j < n {
                let mut v = self.cost[j];
                for k in self.model.col_start[j]..self.model.col_start[j + 1] {
                    v -= self.model.col_val[k] * y[self.model.col_row[k]];
                }
                self.d[j] = v;
            } else {
                self.d[j] = self.cost[j] + y[j - n];
            }
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    /// Moves boxed nonbasic variables to the bound their reduced cost
    /// prefers. Returns the number of remaining dual infeasibilities.
    fn make_dual_feasible(&mut self) -> usize {
        let mut flipped = false;
        let mut bad = 0;
        for j in 0..self.status.len() {
            let d = self.d[j];
            match self.status[j] {
                VarStatus::Basic => {}
                _ if self.is_fixed(j) => {}
                VarStatus::Lower if d < -DUAL_TOL => {
                    if self.upper[j].is_finite() {
                        self.status[j] = VarStatus::Upper;
                        flipped = true;
                    } else {
                        bad += 1;
                    }
                }
                VarStatus::Upper if d > DUAL_TOL => {
                    if self.lower[j].is_finite() {
                        self.status[j] = VarStatus::Lower;
                        flipped = true;
                    } else {
                        bad += 1;
                    }
                }
                VarStatus::Zero if d.abs() > DUAL_TOL => bad += 1,
                _ => {}
            }
        }
        if flipped {
            self.compute_primal();
        }
        bad
    }

    fn perturb(&mut self) {
        if self.perturbed {
            return;
        }
        self.perturbed = true;
        for j in 0..self.model.n {
            if self.is_fixed(j) {
                continue;
            }
            let delta = 1e-7 * (1.0 + self.cost[j].abs()) * self.rng.random_range(0.5..1.0);
            match self.status[j] {
                VarStatus::Lower => self.cost[j] += delta,
                VarStatus::Upper => self.cost[j] -= delta,
                _ => {}
            }
        }
    }

    fn unperturb(&mut self) {
        if self.perturbed {
            self.perturbed = false;
            self.cost[..self.model.n].copy_from_slice(&self.model.cost);
            for c in self.cost[self.model.n..].iter_mut() {
                *c = 0.0;
            }
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lower[j] - PRIMAL_TOL {
            self.lower[j] - v
        } else if v > self.upper[j] + PRIMAL_TOL {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    /// Row `p` of `B^-1 [A -I]`, dense over all variables, plus `rho`.
    fn pivot_row(&mut self, p: usize, alpha: &mut Vec<f64>) -> Vec<f64> {
        let m = self.model.m;
        let n = self.model.n;
        let mut rho = vec![0.0; m];
        rho[p] = 1.0;
        self.factor.btran(&mut rho, &mut self.work);
        alpha.clear();
        alpha.resize(n + m, 0.0);
        for (i, &r) in rho.iter().enumerate() {
            if r != 0.0 {
                for k in self.model.row_start[i]..self.model.row_start[i + 1] {
                    alpha[self.model.row_col[k]] += r * self.model.row_val[k];
                }
                alpha[n + i] = -r;
            }
        }
        rho
    }

    fn ftran_column(&mut self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.model.m];
        for (i, v) in self.model.column(j) {
            a[i] += v;
        }
        self.factor.ftran(&mut a, &mut self.work);
        a
    }

    fn replace(&mut self, p: usize, q: usize, alpha_q: &[f64], leave_status: VarStatus) {
        let leaving = self.head[p];
        self.factor.update(p, alpha_q);
        self.head[p] = q;
        self.pos[q] = p;
        self.pos[leaving] = usize::MAX;
        self.status[q] = VarStatus::Basic;
        self.status[leaving] = leave_status;
        self.d[q] = 0.0;
    }

    fn maybe_refactor(&mut self) -> bool {
        if self.factor.num_updates() >= REFACTOR_EVERY {
            self.refactor();
            self.compute_primal();
            self.compute_dual();
            return true;
        }
        false
    }

    /// Dual simplex from a dual feasible basis.
    fn dual(&mut self) -> Result<Outcome, ()> {
        let n = self.model.n;
        let m = self.model.m;
        let mut alpha_row = Vec::new();
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.limit_at {
                return Ok(Outcome::IterationLimit);
            }
            if self.maybe_refactor() && self.make_dual_feasible() > 0 {
                return Err(());
            }
            let bland = degenerate_run > STALL_LIMIT;
            // leaving row
            let mut best = (0.0, usize::MAX);
            for p in 0..m {
                let inf = self.infeasibility(self.head[p]);
                if inf > 0.0 {
                    if bland {
                        if best.1 == usize::MAX || self.head[p] < self.head[best.1] {
                            best = (inf, p);
                        }
                    } else {
                        let score = inf * inf / self.weights[p];
                        if score > best.0 {
                            best = (score, p);
                        }
                    }
                }
            }
            if best.1 == usize::MAX {
                return Ok(Outcome::Optimal);
            }
            let p = best.1;
            let leaving = self.head[p];
            let xp = self.x[leaving];
            let below = xp < self.lower[leaving];
            let target = if below { self.lower[leaving] } else { self.upper[leaving] };
            let sign = if below { -1.0 } else { 1.0 };
            let rho = self.pivot_row(p, &mut alpha_row);

            // candidate breakpoints
            let mut cands: Vec<(f64, usize)> = Vec::new();
            for j in 0..n + m {
                let st = self.status[j];
                if st == VarStatus::Basic || self.is_fixed(j) {
                    continue;
                }
                let a = sign * alpha_row[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let t = match st {
                    VarStatus::Lower if a > 0.0 => self.d[j].max(0.0) / a,
                    VarStatus::Upper if a < 0.0 => self.d[j].min(0.0) / a,
                    VarStatus::Zero => self.d[j].abs() / a.abs(),
                    _ => continue,
                };
                cands.push((t, j));
            }
            if cands.is_empty() {
                return Ok(Outcome::Infeasible);
            }
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            // bound flipping pass
            let mut slope = (xp - target).abs();
            let mut start = 0;
            let mut flips = Vec::new();
            while start < cands.len() {
                let j = cands[start].1;
                let range = self.upper[j] - self.lower[j];
                let drop = alpha_row[j].abs() * range;
                if self.status[j] != VarStatus::Zero && drop.is_finite() && slope - drop > 0.0 {
                    slope -= drop;
                    flips.push(j);
                    start += 1;
                } else {
                    break;
                }
            }
            if start == cands.len() {
                return Ok(Outcome::Infeasible);
            }
            // Harris pass among the remaining breakpoints
            let relaxed = |j: usize, t: f64| -> f64 {
                let a = (sign * alpha_row[j]).abs();
                t + DUAL_TOL / a
            };
            let mut bound = f64::INFINITY;
            for &(t, j) in &cands[start..] {
                if t > bound {
                    break;
                }
                bound = bound.min(relaxed(j, t));
            }
            let mut q = usize::MAX;
            let mut qa = 0.0;
            for &(t, j) in &cands[start..] {
                if t > bound {
                    break;
                }
                let a = alpha_row[j].abs();
                if bland {
                    if q == usize::MAX || j < q {
                        q = j;
                        qa = a;
                    }
                } else if a > qa {
                    q = j;
                    qa = a;
                }
            }
            let alpha_q = self.ftran_column(q);
            let apq = alpha_q[p];
            if (apq - alpha_row[q]).abs() > 1e-8 * (1.0 + apq.abs()) || apq.abs() <= PIVOT_TOL {
                if self.factor.num_updates() == 0 {
                    return Err(());
                }
                self.refactor();
                self.compute_primal();
                self.compute_dual();
                if self.make_dual_feasible() > 0 {
                    return Err(());
                }
                continue;
            }
            self.iterations += 1;

            // bound flips
            if !flips.is_empty() {
                let mut col = vec![0.0; m];
                for &j in &flips {
                    let (from, to) = match self.status[j] {
                        VarStatus::Lower => (self.lower[j], self.upper[j]),
                        _ => (self.upper[j], self.lower[j]),
                    };
                    self.status[j] = if self.status[j] == VarStatus::Lower {
                        VarStatus::Upper
                    } else {
                        VarStatus::Lower
                    };
                    self.x[j] = to;
                    for (i, a) in self.model.column(j) {
                        col[i] += a * (to - from);
                    }
                }
                self.factor.ftran(&mut col, &mut self.work);
                for (k, &j) in self.head.iter().enumerate() {
                    self.x[j] -= col[k];
                }
            }

            // dual steepest-edge reference vector
            let mut tau = rho.clone();
            self.factor.ftran(&mut tau, &mut self.work);
            let wp = rho.iter().map(|v| v * v).sum::<f64>();

            // primal step
            let theta_p = (self.x[leaving] - target) / apq;
            for (k, &j) in self.head.iter().enumerate() {
                self.x[j] -= theta_p * alpha_q[k];
            }
            self.x[q] += theta_p;
            self.x[leaving] = target;

            // dual step
            let theta_d = self.d[q] / apq;
            if theta_d.abs() < 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for j in 0..n + m {
                if self.status[j] != VarStatus::Basic && alpha_row[j] != 0.0 {
                    self.d[j] -= theta_d * alpha_row[j];
                }
            }
            self.d[leaving] = -theta_d;

            // weights
            for k in 0..m {
                if k == p {
                    continue;
                }
                let ratio = alpha_q[k] / apq;
                if ratio != 0.0 {
                    let w = self.weights[k] - 2.0 * ratio * tau[k] + ratio * ratio * wp;
                    self.weights[k] = w.max(1e-4);
                }
            }
            self.weights[p] = (wp / (apq * apq)).max(1e-4);

            let leave_status = if below { VarStatus::Lower } else { VarStatus::Upper };
            self.replace(p, q, &alpha_q, leave_status);
        }
    }

    /// Primal simplex: minimizes the sum of infeasibilities, then the cost.
    fn primal(&mut self) -> Outcome {
        let n = self.model.n;
        let m = self.model.m;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.limit_at {
                return Outcome::IterationLimit;
            }
            if self.factor.num_updates() >= REFACTOR_EVERY {
                self.refactor();
                self.compute_primal();
            }
            let phase1 = self.head.iter().any(|&j| self.infeasibility(j) > 0.0);
            let y = if phase1 {
                let mut c1: Vec<f64> = self
                    .head
                    .iter()
                    .map(|&j| {
                        if self.x[j] < self.lower[j] - PRIMAL_TOL {
                            -1.0
                        } else if self.x[j] > self.upper[j] + PRIMAL_TOL {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                self.factor.btran(&mut c1, &mut self.work);
                c1
            } else {
                self.duals()
            };
            let bland = degenerate_run > STALL_LIMIT;
            let mut q = usize::MAX;
            let mut best = 0.0;
            let mut q_dir = 0.0;
            for j in 0..n + m {
                if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                    continue;
                }
                let c = if phase1 { 0.0 } else { self.cost[j] };
                let dj = if j < n {
                    let mut v = c;
                    for k in self.model.col_start[j]..self.model.col_start[j + 1] {
                        v -= self.model.col_val[k] * y[self.model.col_row[k]];
                    }
                    v
                } else {
                    c + y[j - n]
                };
                self.d[j] = dj;
                let can_up = matches!(self.status[j], VarStatus::Lower | VarStatus::Zero);
                let can_down = matches!(self.status[j], VarStatus::Upper | VarStatus::Zero);
                let dir = if dj < -DUAL_TOL && can_up {
                    1.0
                } else if dj > DUAL_TOL && can_down {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    if q == usize::MAX {
                        q = j;
                        q_dir = dir;
                    }
                } else if dj.abs() > best {
                    best = dj.abs();
                    q = j;
                    q_dir = dir;
                }
            }
            if q == usize::MAX {
                return if phase1 { Outcome::Infeasible } else { Outcome::Optimal };
            }
            let alpha_q = self.ftran_column(q);

            // Harris ratio test
            let mut tmax = f64::INFINITY;
            let mut blocks: Vec<(usize, f64, f64)> = Vec::new(); // (pos, exact t, |alpha|)
            for (k, &j) in self.head.iter().enumerate() {
                let a = alpha_q[k];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -q_dir * a;
                let (xl, xu, v) = (self.lower[j], self.upper[j], self.x[j]);
                let gap = if v < xl - PRIMAL_TOL {
                    if rate > 0.0 {
                        xl - v
                    } else {
                        continue;
                    }
                } else if v > xu + PRIMAL_TOL {
                    if rate < 0.0 {
                        v - xu
                    } else {
                        continue;
                    }
                } else if rate > 0.0 && xu.is_finite() {
                    xu - v
                } else if rate < 0.0 && xl.is_finite() {
                    v - xl
                } else {
                    continue;
                };
                let t = gap.max(0.0) / rate.abs();
                tmax = tmax.min((gap + PRIMAL_TOL) / rate.abs());
                blocks.push((k, t, a.abs()));
            }
            let mut leave = usize::MAX;
            let mut theta = f64::INFINITY;
            let mut la = 0.0;
            for &(k, t, a) in &blocks {
                if t <= tmax {
                    let better = if bland {
                        leave == usize::MAX || self.head[k] < self.head[leave]
                    } else {
                        a > la
                    };
                    if better {
                        leave = k;
                        la = a;
                        theta = t;
                    }
                }
            }
            let range = self.upper[q] - self.lower[q];
            self.iterations += 1;
            if range.is_finite() && range <= theta {
                // entering variable reaches its opposite bound
                for (k, &j) in self.head.iter().enumerate() {
                    self.x[j] -= q_dir * range * alpha_q[k];
                }
                self.status[q] = if q_dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                self.x[q] = self.nonbasic_value(q);
                degenerate_run = 0;
                continue;
            }
            if leave == usize::MAX {
                return if phase1 { Outcome::Infeasible } else { Outcome::Unbounded };
            }
            if theta < 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let lj = self.head[leave];
            let rate = -q_dir * alpha_q[leave];
            let to_upper = if self.x[lj] < self.lower[lj] - PRIMAL_TOL {
                false
            } else if self.x[lj] > self.upper[lj] + PRIMAL_TOL {
                true
            } else {
                rate > 0.0
            };
            for (k, &j) in self.head.iter().enumerate() {
                self.x[j] -= q_dir * theta * alpha_q[k];
            }
            self.x[q] += q_dir * theta;
            let st = if to_upper { VarStatus::Upper } else { VarStatus::Lower };
            self.x[lj] = if to_upper { self.upper[lj] } else { self.lower[lj] };
            self.replace(leave, q, &alpha_q, st);
        }
    }

    /// Solves from the installed basis.
    pub fn solve(&mut self) -> Outcome {
        self.limit_at = self.iterations + self.iteration_limit;
        if !self.factored || self.factor.num_updates() > REFRESH_AFTER {
            self.refactor();
        }
        self.compute_primal();
        self.compute_dual();
        for _round in 0..4 {
            if self.make_dual_feasible() == 0 {
                self.perturb();
                self.compute_dual();
                if self.make_dual_feasible() == 0 {
                    match self.dual() {
                        Ok(Outcome::Infeasible) => {
                            self.unperturb();
                            return Outcome::Infeasible;
                        }
                        Ok(Outcome::IterationLimit) => {
                            self.unperturb();
                            return Outcome::IterationLimit;
                        }
                        _ => {}
                    }
                }
            }
            self.unperturb();
            if self.factor.num_updates() > REFRESH_AFTER {
                self.refactor();
            }
            self.compute_primal();
            let out = self.primal();
            if out != Outcome::Optimal {
                return out;
            }
            if self.factor.num_updates() > REFRESH_AFTER {
                self.refactor();
            }
            self.compute_primal();
            self.compute_dual();
            let primal_ok = self.head.iter().all(|&j| self.infeasibility(j) == 0.0);
            if primal_ok && self.dual_infeasibility() <= 1e-7 {
                return Outcome::Optimal;
            }
        }
        Outcome::IterationLimit
    }

    fn dual_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.status.len() {
            if self.is_fixed(j) {
                continue;
            }
            let d = self.d[j];
            let v = match self.status[j] {
                VarStatus::Lower => -d,
                VarStatus::Upper => d,
                VarStatus::Zero => d.abs(),
                VarStatus::Basic => 0.0,
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Unscaled column values.
    pub fn column_values(&self) -> Vec<f64> {
        (0..self.model.n).map(|j| self.x[j] * self.model.col_scale[j]).collect()
    }

    /// Unscaled row duals and column reduced costs.
    pub fn dual_values(&mut self) -> (Vec<f64>, Vec<f64>) {
        let y = self.duals();
        let rows = y.iter().zip(&self.model.row_scale).map(|(v, s)| v * s).collect();
        let cols = (0..self.model.n).map(|j| self.d[j] / self.model.col_scale[j]).collect();
        (rows, cols)
    }

    /// Objective of the dual in the scaled space; equals the primal
    /// objective at an optimal basis.
    pub fn dual_objective(&self) -> f64 {
        let mut v = 0.0;
        for j in 0..self.status.len() {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let d = self.d[j];
            if d == 0.0 {
                continue;
            }
            let b = match self.status[j] {
                VarStatus::Lower => self.lower[j],
                VarStatus::Upper => self.upper[j],
                _ => 0.0,
            };
            v += d * b;
        }
        v
    }
}
