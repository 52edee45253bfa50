use serde::{Deserialize, Serialize};

use super::model::secant_power;
use super::{DynamicEmissionParams, EmissionError};

/// A ramp-magnitude interval `[lo, hi]` (MW) carrying one representative
/// dynamic emission value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionBlock {
    pub lo: f64,
    pub hi: f64,
    pub rate: f64,
}

impl EmissionBlock {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Step-function approximation of `b τ Δ^N2` over the given breakpoints.
///
/// Each block's rate is the mean of the curve over the block, so the area
/// under the step function equals the area under the curve.
pub fn build_emission_blocks(
    pd: &DynamicEmissionParams,
    breakpoints: &[f64],
) -> Result<Vec<EmissionBlock>, EmissionError> {
    if breakpoints.len() < 2
        || breakpoints[0] != 0.0
        || breakpoints.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(EmissionError::NonMonotoneBreakpoints);
    }
    let p = pd.n2 + 1.0;
    let scale = pd.b * pd.tau / p;
    let blocks: Vec<EmissionBlock> = breakpoints
        .windows(2)
        .map(|w| EmissionBlock {
            lo: w[0],
            hi: w[1],
            rate: scale * secant_power(w[0], w[1], p),
        })
        .collect();
    debug_assert!(
        blocks.windows(2).all(|w| w[1].rate >= w[0].rate),
        "block rates of a convex curve are non-decreasing"
    );
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_example() {
        let blocks = build_emission_blocks(&DynamicEmissionParams::REFERENCE, &[0.0, 10.0]).unwrap();
        let expected = 6.12 * 0.34 / 1.2 * 10f64.powf(1.2) / 10.0;
        assert!((blocks[0].rate - expected).abs() < 1e-12);
        assert!((blocks[0].rate - 2.748).abs() < 5e-4);
    }

    #[test]
    fn zero_width_limit() {
        let pd = DynamicEmissionParams::REFERENCE;
        let lo = 7.0;
        let blocks = build_emission_blocks(&pd, &[0.0, lo, lo * (1.0 + 1e-9)]).unwrap();
        let limit = pd.b * pd.tau * lo.powf(pd.n2);
        assert!((blocks[1].rate - limit).abs() < 1e-8 * limit);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        let pd = DynamicEmissionParams::REFERENCE;
        for bp in [&[0.0, 2.0, 1.0][..], &[1.0, 2.0], &[0.0], &[0.0, 0.0, 1.0]] {
            assert_eq!(build_emission_blocks(&pd, bp), Err(EmissionError::NonMonotoneBreakpoints));
        }
    }
}
