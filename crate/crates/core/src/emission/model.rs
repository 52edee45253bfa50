//! Static and dynamic hourly CO₂ emission of a coal unit.

use super::{DynamicEmissionParams, EmissionError, StaticEmissionParams};

/// Normalised ramp rate `|g_to - g_from| / (tau * g_max)`.
pub fn ramp_fraction(g_from: f64, g_to: f64, g_max: f64, tau: f64) -> Result<f64, EmissionError> {
    if !(g_max > 0.0) {
        return Err(EmissionError::NonPositive("g_max"));
    }
    if !(tau > 0.0) {
        return Err(EmissionError::NonPositive("tau"));
    }
    Ok((g_to - g_from).abs() / (tau * g_max))
}

/// Hourly emission of a unit held at `g` MW: `f0 + f1 g^N1`.
pub fn static_hourly_emission(p: &StaticEmissionParams, g: f64) -> Result<f64, EmissionError> {
    if g < 0.0 || !g.is_finite() {
        return Err(EmissionError::NegativeOutput(g));
    }
    Ok(p.f0 + p.f1 * g.powf(p.n1))
}

/// Mean value of `p x^(p-1)` over `[a, b]`, i.e. `(b^p - a^p) / (b - a)`,
/// evaluated without cancellation for nearby endpoints. Requires `a, b >= 0`.
pub fn secant_power(a: f64, b: f64, p: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let h = hi - lo;
    let scale = hi.max(1.0);
    if h <= 1e-9 * scale {
        return p * (0.5 * (lo + hi)).powf(p - 1.0);
    }
    if lo <= 0.0 {
        return hi.powf(p) / hi;
    }
    lo.powf(p) * (p * (h / lo).ln_1p()).exp_m1() / h
}

/// Output trajectory within one hour: a ramp in from the midpoint with the
/// previous hour, a plateau at `g`, and a ramp out to the midpoint with the
/// next hour. Each transition takes `tau` hours, split evenly across the
/// hour boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProfile {
    pub tau: f64,
    pub g_prev: f64,
    pub g: f64,
    pub g_next: f64,
}

/// An affine piece of a [`TransitionProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub from: f64,
    pub to: f64,
}

impl Segment {
    pub fn value_at(&self, t: f64) -> f64 {
        if self.end == self.start {
            return self.to;
        }
        self.from + (self.to - self.from) * (t - self.start) / (self.end - self.start)
    }
}

impl TransitionProfile {
    pub fn segments(&self) -> [Segment; 3] {
        let half = 0.5 * self.tau;
        [
            Segment {
                start: 0.0,
                end: half,
                from: 0.5 * (self.g_prev + self.g),
                to: self.g,
            },
            Segment {
                start: half,
                end: 1.0 - half,
                from: self.g,
                to: self.g,
            },
            Segment {
                start: 1.0 - half,
                end: 1.0,
                from: self.g,
                to: 0.5 * (self.g + self.g_next),
            },
        ]
    }

    /// Output (MW) at time `t ∈ [0, 1]` within the hour.
    pub fn output_at(&self, t: f64) -> f64 {
        let segs = self.segments();
        let seg = segs.iter().find(|s| t <= s.end).unwrap_or(&segs[2]);
        seg.value_at(t)
    }

    /// Instantaneous emission rate (tCO₂/h) at time `t`: the static rate at
    /// the current output plus `2 b |Δg|^N2` while a transition is under way.
    pub fn emission_rate(&self, ps: &StaticEmissionParams, pd: &DynamicEmissionParams, t: f64) -> f64 {
        let x = self.output_at(t);
        let half = 0.5 * self.tau;
        let ramp = if t < half {
            (self.g - self.g_prev).abs()
        } else if t > 1.0 - half {
            (self.g_next - self.g).abs()
        } else {
            0.0
        };
        let dynamic = if ramp > 0.0 { 2.0 * pd.b * ramp.powf(pd.n2) } else { 0.0 };
        ps.f0 + ps.f1 * x.powf(ps.n1) + dynamic
    }
}

/// Builds the three-segment trajectory of an hour.
pub fn transition_profile(g_prev: f64, g: f64, g_next: f64, tau: f64) -> Result<TransitionProfile, EmissionError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(EmissionError::TauOutOfRange(tau));
    }
    Ok(TransitionProfile { tau, g_prev, g, g_next })
}

/// Coefficient `C` with `F₀ = f0 + f1 g^N1 + τ C`: the change in static
/// emission caused by spending the transition halves away from `g`.
pub(crate) fn transition_coefficient(ps: &StaticEmissionParams, g_prev: f64, g: f64, g_next: f64) -> f64 {
    let p = ps.n1 + 1.0;
    let flat = p * g.powf(ps.n1);
    let side = |other: f64| {
        if other == g {
            0.0
        } else {
            secant_power(g, 0.5 * (g + other), p) - flat
        }
    };
    0.5 * ps.f1 / p * (side(g_next) + side(g_prev))
}

/// Static part of the hourly emission along the transition profile.
pub fn transition_static_emission(ps: &StaticEmissionParams, g_prev: f64, g: f64, g_next: f64, tau: f64) -> f64 {
    ps.f0 + ps.f1 * g.powf(ps.n1) + tau * transition_coefficient(ps, g_prev, g, g_next)
}

/// Hourly emission (tCO₂) including the ramp-induced term
/// `b τ (|g - g_prev|^N2 + |g_next - g|^N2)`.
///
/// With `g_prev == g == g_next` this equals [`static_hourly_emission`].
pub fn dynamic_hourly_emission(
    ps: &StaticEmissionParams,
    pd: &DynamicEmissionParams,
    g_prev: f64,
    g: f64,
    g_next: f64,
) -> Result<f64, EmissionError> {
    for v in [g_prev, g, g_next] {
        if v < 0.0 || !v.is_finite() {
            return Err(EmissionError::NegativeOutput(v));
        }
    }
    let base = transition_static_emission(ps, g_prev, g, g_next, pd.tau);
    Ok(base + pd.b * pd.tau * ramp_power_sum(g_prev, g, g_next, pd.n2))
}

/// `|g - g_prev|^n + |g_next - g|^n`, with zero swings contributing zero.
pub fn ramp_power_sum(g_prev: f64, g: f64, g_next: f64, n: f64) -> f64 {
    let term = |d: f64| if d == 0.0 { 0.0 } else { d.abs().powf(n) };
    term(g - g_prev) + term(g_next - g)
}
