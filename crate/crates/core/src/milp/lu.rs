//! Sparse LU factorization of a simplex basis with a product-form update file.
//!
//! Columns of the factored matrix are basis positions, rows are constraint
//! rows. Pivots are chosen by a Markowitz search with threshold partial
//! pivoting.

const PIVOT_THRESHOLD: f64 = 0.01;
const ABS_PIVOT_TOL: f64 = 1e-11;
const SEARCH_COLUMNS: usize = 4;

/// Positions and rows left without a pivot when the matrix is singular.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
struct Eta {
    pos: usize,
    pivot: f64,
    /// (position, value) off the pivot
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Factor {
    m: usize,
    /// L multipliers per pivot: rows eliminated with the pivot row
    l_pivot_row: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    /// U rows in pivot order
    u_row: Vec<usize>,
    u_col: Vec<usize>,
    u_diag: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    /// U by column (basis position): rows of earlier pivots and values
    uc_start: Vec<usize>,
    uc_row: Vec<usize>,
    uc_val: Vec<f64>,
    etas: Vec<Eta>,
}

impl Factor {
    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Factorizes the `m x m` matrix whose column `k` is `columns[k]`,
    /// given as `(row, value)` pairs.
    pub fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Factor, Singular> {
        debug_assert_eq!(columns.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v != 0.0 {
                    rows[r].push((c, v));
                    col_rows[c].push(r);
                }
            }
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m + 2];
        for (c, rs) in col_rows.iter().enumerate() {
            buckets[rs.len().min(m + 1)].push(c);
        }
        let mut f = Factor {
            m,
            ..Default::default()
        };
        f.l_start.push(0);
        f.u_start.push(0);
        let mut where_in_row = vec![usize::MAX; m];
        let mut pivots = 0;
        let mut singular_cols = Vec::new();

        while pivots + singular_cols.len() < m {
            // Markowitz search over the sparsest columns
            let mut best: Option<(usize, usize, usize)> = None; // (cost, row, col)
            let mut examined = 0;
            'search: for count in 0..buckets.len() {
                let mut i = 0;
                while i < buckets[count].len() {
                    let c = buckets[count][i];
                    if col_done[c] || col_rows[c].len() != count {
                        buckets[count].swap_remove(i);
                        continue;
                    }
                    i += 1;
                    if count == 0 {
                        continue;
                    }
                    let cmax = col_rows[c]
                        .iter()
                        .map(|&r| entry(&rows[r], c).abs())
                        .fold(0.0, f64::max);
                    if cmax < ABS_PIVOT_TOL {
                        continue;
                    }
                    for &r in &col_rows[c] {
                        let v = entry(&rows[r], c).abs();
                        if v >= PIVOT_THRESHOLD * cmax && v >= ABS_PIVOT_TOL {
                            let cost = (rows[r].len() - 1) * (count - 1);
                            if best.is_none_or(|b| cost < b.0) {
                                best = Some((cost, r, c));
                            }
                        }
                    }
                    examined += 1;
                    if best.is_some_and(|b| b.0 == 0) || (best.is_some() && examined >= SEARCH_COLUMNS) {
                        break 'search;
                    }
                }
            }
            let Some((_, pr, pc)) = best else {
                // every remaining column is numerically empty
                for c in 0..m {
                    if !col_done[c] {
                        col_done[c] = true;
                        singular_cols.push(c);
                    }
                }
                break;
            };

            let prow = std::mem::take(&mut rows[pr]);
            let pval = entry(&prow, pc);
            row_done[pr] = true;
            col_done[pc] = true;
            for &(j, _) in &prow {
                if j != pc {
                    let list = &mut col_rows[j];
                    if let Some(k) = list.iter().position(|&r| r == pr) {
                        list.swap_remove(k);
                    }
                }
            }
            let others: Vec<usize> = col_rows[pc].iter().copied().filter(|&r| r != pr).collect();
            col_rows[pc].clear();
            f.l_pivot_row.push(pr);
            for i in others {
                let row_i = &mut rows[i];
                let k = row_i.iter().position(|e| e.0 == pc).expect("pattern consistent");
                let l = row_i[k].1 / pval;
                row_i.swap_remove(k);
                f.l_idx.push(i);
                f.l_val.push(l);
                for (k, e) in row_i.iter().enumerate() {
                    where_in_row[e.0] = k;
                }
                for &(j, v) in &prow {
                    if j == pc {
                        continue;
                    }
                    let k = where_in_row[j];
                    if k != usize::MAX {
                        row_i[k].1 -= l * v;
                    } else {
                        row_i.push((j, -l * v));
                        col_rows[j].push(i);
                    }
                }
                for e in row_i.iter() {
                    where_in_row[e.0] = usize::MAX;
                }
            }
            f.l_start.push(f.l_idx.len());
            for &(j, _) in &prow {
                if j != pc {
                    let n = col_rows[j].len();
                    buckets[n.min(m + 1)].push(j);
                }
            }
            f.u_row.push(pr);
            f.u_col.push(pc);
            f.u_diag.push(pval);
            for &(j, v) in &prow {
                if j != pc {
                    f.u_idx.push(j);
                    f.u_val.push(v);
                }
            }
            f.u_start.push(f.u_idx.len());
            pivots += 1;
        }

        if !singular_cols.is_empty() {
            let rows_left: Vec<usize> = (0..m).filter(|&r| !row_done[r]).collect();
            return Err(Singular {
                positions: singular_cols,
                rows: rows_left,
            });
        }
        f.index_columns();
        Ok(f)
    }

    fn index_columns(&mut self) {
        let mut count = vec![0usize; self.m + 1];
        for &j in &self.u_idx {
            count[j + 1] += 1;
        }
        for c in 0..self.m {
            count[c + 1] += count[c];
        }
        self.uc_start = count.clone();
        self.uc_row = vec![0; self.u_idx.len()];
        self.uc_val = vec![0.0; self.u_idx.len()];
        for k in 0..self.u_row.len() {
            for e in self.u_start[k]..self.u_start[k + 1] {
                let j = self.u_idx[e];
                self.uc_row[count[j]] = self.u_row[k];
                self.uc_val[count[j]] = self.u_val[e];
                count[j] += 1;
            }
        }
    }

    /// Solves `B x = b` in place; `b` is indexed by row on entry and by
    /// basis position on exit.
    pub fn ftran(&self, b: &mut [f64], work: &mut Vec<f64>) {
        let m = self.m;
        for k in 0..self.l_pivot_row.len() {
            let br = b[self.l_pivot_row[k]];
            if br != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    b[self.l_idx[e]] -= self.l_val[e] * br;
                }
            }
        }
        work.clear();
        work.resize(m, 0.0);
        for k in (0..self.u_row.len()).rev() {
            let v = b[self.u_row[k]];
            if v == 0.0 {
                continue;
            }
            let c = self.u_col[k];
            let x = v / self.u_diag[k];
            work[c] = x;
            for e in self.uc_start[c]..self.uc_start[c + 1] {
                b[self.uc_row[e]] -= self.uc_val[e] * x;
            }
        }
        b.copy_from_slice(work);
        for eta in &self.etas {
            let xp = b[eta.pos];
            if xp != 0.0 {
                let xp = xp / eta.pivot;
                b[eta.pos] = xp;
                for &(i, a) in &eta.entries {
                    b[i] -= a * xp;
                }
            }
        }
    }

    /// Solves `B^T y = c` in place; `c` is indexed by basis position on entry
    /// and by row on exit.
    pub fn btran(&self, c: &mut [f64], work: &mut Vec<f64>) {
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for &(i, a) in &eta.entries {
                v -= a * c[i];
            }
            c[eta.pos] = v / eta.pivot;
        }
        work.clear();
        work.resize(self.m, 0.0);
        for k in 0..self.u_row.len() {
            let z = c[self.u_col[k]] / self.u_diag[k];
            work[self.u_row[k]] = z;
            if z != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_idx[e]] -= self.u_val[e] * z;
                }
            }
        }
        for k in (0..self.l_pivot_row.len()).rev() {
            let mut v = work[self.l_pivot_row[k]];
            for e in self.l_start[k]..self.l_start[k + 1] {
                v -= self.l_val[e] * work[self.l_idx[e]];
            }
            work[self.l_pivot_row[k]] = v;
        }
        c.copy_from_slice(work);
    }

    /// Records the replacement of basis position `pos` by a column whose
    /// FTRAN image is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}

fn entry(row: &[(usize, f64)], col: usize) -> f64 {
    row.iter().find(|e| e.0 == col).map_or(0.0, |e| e.1)
}
