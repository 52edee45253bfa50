use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::model::dynamic_hourly_emission;
use super::{DynamicEmissionParams, EmissionSample, StaticEmissionParams};

/// Share of samples drawn as flat three-hour runs.
const STATIC_SHARE: f64 = 0.3;
/// Ramp-rate envelope of a coal unit, as a fraction of `g_max` per minute.
const RAMP_RATE: (f64, f64) = (0.015, 0.05);
const MIN_LOADING: f64 = 0.15;

/// Draws `count` hourly samples from the dynamic model with additive Gaussian
/// noise whose standard deviation is `noise_sigma` times the mean noiseless
/// emission. Outputs stay within `[0, g_max]`; swings respect a coal-like
/// ramp envelope over the transition time. Noisy emissions are clamped at 0.
pub fn generate_synthetic_samples(
    ps: &StaticEmissionParams,
    pd: &DynamicEmissionParams,
    g_max: f64,
    count: usize,
    noise_sigma: f64,
    seed: u64,
) -> Vec<EmissionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<EmissionSample> = (0..count)
        .map(|_| {
            let g = rng.random_range(MIN_LOADING * g_max..=g_max);
            if rng.random_bool(STATIC_SHARE) {
                return EmissionSample { g_prev: g, g, g_next: g, emission: 0.0 };
            }
            let swing = |rng: &mut ChaCha8Rng| {
                if rng.random_bool(0.2) {
                    return 0.0;
                }
                let rate = rng.random_range(RAMP_RATE.0..=RAMP_RATE.1);
                let max = rate * 60.0 * pd.tau * g_max;
                let d = rng.random_range(0.0..=1.0) * max;
                if rng.random_bool(0.5) { d } else { -d }
            };
            let mut d1 = swing(&mut rng);
            let d2 = swing(&mut rng);
            if d1 == 0.0 && d2 == 0.0 {
                d1 = 0.01 * g_max;
            }
            EmissionSample {
                g_prev: (g - d1).clamp(0.0, g_max),
                g,
                g_next: (g + d2).clamp(0.0, g_max),
                emission: 0.0,
            }
        })
        .collect();
    for s in &mut samples {
        s.emission = dynamic_hourly_emission(ps, pd, s.g_prev, s.g, s.g_next).expect("outputs are in range");
    }
    if noise_sigma > 0.0 && !samples.is_empty() {
        let mean = samples.iter().map(|s| s.emission).sum::<f64>() / samples.len() as f64;
        let noise = Normal::new(0.0, noise_sigma * mean).expect("finite noise scale");
        for s in &mut samples {
            s.emission = (s.emission + noise.sample(&mut rng)).max(0.0);
        }
    }
    samples
}
