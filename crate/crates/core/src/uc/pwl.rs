use serde::Serialize;

use super::UcError;
use crate::grid::OfferBlock;
use crate::milp::MilpProblem;

/// Convex piecewise-linear cost starting at zero: segment `i` has slope
/// `slopes[i]` on `[breaks[i], breaks[i+1]]`; the last slope extends to
/// infinity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PwlCurve {
    pub breaks: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl PwlCurve {
    pub fn linear(slope: f64) -> Self {
        PwlCurve {
            breaks: vec![0.0],
            slopes: vec![slope],
        }
    }

    /// Cost curve of a block offer: block `i` sells `quantity` MW at `price`.
    pub fn from_offer(blocks: &[OfferBlock]) -> Self {
        let mut breaks = vec![0.0];
        let mut slopes = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            slopes.push(b.price);
            if i + 1 < blocks.len() {
                breaks.push(breaks[i] + b.quantity);
            }
        }
        PwlCurve { breaks, slopes }
    }

    /// Segment `i` as `y >= slope x + intercept`.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.slopes.len());
        let mut value = 0.0;
        for (i, &s) in self.slopes.iter().enumerate() {
            if i > 0 {
                value += self.slopes[i - 1] * (self.breaks[i] - self.breaks[i - 1]);
            }
            out.push((s, value - s * self.breaks[i]));
        }
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        self.segments().iter().map(|&(s, c)| s * x + c).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check(&self) -> Result<(), UcError> {
        if self.slopes.is_empty() || self.breaks.len() != self.slopes.len() || self.breaks[0] != 0.0 {
            return Err(UcError::Curve("curve needs one break per slope, starting at 0".into()));
        }
        if self.breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(UcError::Curve("breaks must increase".into()));
        }
        if self.slopes.iter().any(|s| !s.is_finite()) {
            return Err(UcError::Curve("non-finite slope".into()));
        }
        if self.slopes.windows(2).any(|w| w[1] < w[0]) {
            return Err(UcError::Curve(format!("non-convex curve: slopes {:?}", self.slopes)));
        }
        Ok(())
    }
}

/// Adds one row `y - slope x >= intercept` per segment of `curve`.
pub fn build_pwl_epigraph(
    p: &mut MilpProblem,
    curve: &PwlCurve,
    x_col: usize,
    y_col: usize,
    family: u8,
    name: &str,
) -> Result<Vec<usize>, UcError> {
    curve.check()?;
    Ok(curve
        .segments()
        .into_iter()
        .enumerate()
        .map(|(i, (slope, intercept))| {
            let coefs = if slope == 0.0 {
                vec![(y_col, 1.0)]
            } else {
                vec![(y_col, 1.0), (x_col, -slope)]
            };
            p.add_row(format!("{name}_seg{}", i + 1), family, coefs, intercept, f64::INFINITY)
        })
        .collect())
}
