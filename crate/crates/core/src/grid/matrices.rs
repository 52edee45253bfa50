//! DC network matrices.
//!
//! Both matrices are returned in per-unit susceptance; multiply by the case
//! MVA base to obtain MW per radian.

use super::{GridError, Network};

/// Dense row-major matrix.
pub type Matrix = Vec<Vec<f64>>;

/// N×N bus susceptance matrix. Each line (i, j, b) adds `b` to both
/// diagonals and subtracts `b` from both off-diagonals.
pub fn build_bus_susceptance(net: &Network) -> Result<Matrix, GridError> {
    if !net.is_connected() {
        return Err(GridError::Disconnected);
    }
    let index = net.bus_index();
    let n = net.num_buses();
    let mut b = vec![vec![0.0; n]; n];
    for line in &net.lines {
        let i = index[&line.from];
        let j = index[&line.to];
        b[i][i] += line.susceptance;
        b[j][j] += line.susceptance;
        b[i][j] -= line.susceptance;
        b[j][i] -= line.susceptance;
    }
    Ok(b)
}

/// L×N branch susceptance matrix: row ℓ holds `+b` at the from-bus and `-b`
/// at the to-bus, so `B_br θ` gives line flows (from → to positive).
pub fn build_branch_susceptance(net: &Network) -> Result<Matrix, GridError> {
    if !net.is_connected() {
        return Err(GridError::Disconnected);
    }
    let index = net.bus_index();
    let n = net.num_buses();
    Ok(net
        .lines
        .iter()
        .map(|line| {
            let mut row = vec![0.0; n];
            row[index[&line.from]] += line.susceptance;
            row[index[&line.to]] -= line.susceptance;
            row
        })
        .collect())
}

/// Line flows `B_br θ` in the units of the supplied matrix.
pub fn line_flows(branch: &Matrix, theta: &[f64]) -> Vec<f64> {
    branch
        .iter()
        .map(|row| row.iter().zip(theta).map(|(b, t)| b * t).sum())
        .collect()
}
