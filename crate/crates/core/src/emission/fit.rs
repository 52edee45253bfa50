//! Regression of the static and dynamic emission models.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::transition_coefficient;
use super::{DynamicEmissionParams, EmissionError, EmissionSample, StaticEmissionParams};

/// Result of [`fit_static`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticFit {
    pub params: StaticEmissionParams,
    /// One standard error per parameter.
    pub std_errors: StaticEmissionParams,
    pub residual_norm: f64,
    pub samples: usize,
}

/// Result of [`fit_dynamic`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicFit {
    pub params: DynamicEmissionParams,
    pub std_errors: DynamicEmissionParams,
    pub residual_norm: f64,
    pub samples: usize,
    /// Parameters the data carry no information about.
    pub unidentified: Vec<String>,
    pub starts: usize,
    pub iterations: usize,
}

/// Structured fit output written by the command-line front end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub static_fit: StaticFit,
    pub dynamic_fit: Option<DynamicFit>,
    pub dynamic_error: Option<String>,
    pub threshold_mw: f64,
    pub g_max_mw: f64,
    /// threshold / g_max
    pub kappa: f64,
    pub static_samples: usize,
    pub ramping_samples_below_threshold: usize,
    pub notes: Vec<String>,
}

impl FitReport {
    pub const RAMP_TERM_NOTE: &'static str = "ramp term: an instantaneous rate of 2 b |dg|^N2 held for each tau/2 transition half integrates to b tau |dg|^N2 per hour boundary";
}

const N1_RANGE: (f64, f64) = (0.05, 4.0);
const N1_GRID: usize = 80;

fn profile_static(n1: f64, gs: &[f64], es: &[f64]) -> (f64, f64, f64) {
    let n = gs.len() as f64;
    let xs: Vec<f64> = gs.iter().map(|g| g.powf(n1)).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let em = es.iter().sum::<f64>() / n;
    let (mut sxx, mut sxe) = (0.0, 0.0);
    for (x, e) in xs.iter().zip(es) {
        sxx += (x - xm) * (x - xm);
        sxe += (x - xm) * (e - em);
    }
    let f1 = sxe / sxx;
    let f0 = em - f1 * xm;
    let sse = xs
        .iter()
        .zip(es)
        .map(|(x, e)| (e - f0 - f1 * x).powi(2))
        .sum();
    (f0, f1, sse)
}

fn static_sse(p: &StaticEmissionParams, gs: &[f64], es: &[f64]) -> f64 {
    gs.iter()
        .zip(es)
        .map(|(g, e)| (e - p.f0 - p.f1 * g.powf(p.n1)).powi(2))
        .sum()
}

fn static_normal_matrix(p: &StaticEmissionParams, gs: &[f64], es: &[f64]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut a = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&g, &e) in gs.iter().zip(es) {
        let x = g.powf(p.n1);
        let dn = if g > 0.0 { p.f1 * x * g.ln() } else { 0.0 };
        let j = Vector3::new(1.0, x, dn);
        a += j * j.transpose();
        rhs += j * (e - p.f0 - p.f1 * x);
    }
    (a, rhs)
}

/// Fits `f0 + f1 g^N1` to the static samples (those whose output did not
/// change across the three hours).
///
/// The exponent is found by golden-section search on the profiled sum of
/// squares (the inner problem in `f0, f1` is linear), then polished with
/// Gauss-Newton steps on all three parameters.
pub fn fit_static(samples: &[EmissionSample]) -> Result<StaticFit, EmissionError> {
    let stat: Vec<&EmissionSample> = samples.iter().filter(|s| s.is_static()).collect();
    if stat.len() < 3 {
        return Err(EmissionError::InsufficientSamples {
            kind: "static",
            needed: 3,
            got: stat.len(),
        });
    }
    let gs: Vec<f64> = stat.iter().map(|s| s.g).collect();
    let es: Vec<f64> = stat.iter().map(|s| s.emission).collect();
    if gs.iter().all(|g| *g == gs[0]) {
        return Err(EmissionError::Degenerate);
    }

    // coarse scan, then golden section inside the best bracket
    let (lo, hi) = N1_RANGE;
    let step = (hi - lo) / (N1_GRID - 1) as f64;
    let grid: Vec<f64> = (0..N1_GRID).map(|i| lo + step * i as f64).collect();
    let best = grid
        .iter()
        .enumerate()
        .map(|(i, &n1)| (i, profile_static(n1, &gs, &es).2))
        .filter(|(_, sse)| sse.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(N1_GRID - 1)];
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = profile_static(c, &gs, &es).2;
    let mut fd = profile_static(d, &gs, &es).2;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = profile_static(c, &gs, &es).2;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = profile_static(d, &gs, &es).2;
        }
    }
    let n1 = 0.5 * (a + b);
    let (f0, f1, _) = profile_static(n1, &gs, &es);
    let mut params = StaticEmissionParams { f0, f1, n1 };
    let mut sse = static_sse(&params, &gs, &es);

    for _ in 0..30 {
        let (a, rhs) = static_normal_matrix(&params, &gs, &es);
        let Some(delta) = a.lu().solve(&rhs) else { break };
        let trial = StaticEmissionParams {
            f0: params.f0 + delta[0],
            f1: params.f1 + delta[1],
            n1: params.n1 + delta[2],
        };
        let trial_sse = static_sse(&trial, &gs, &es);
        if !(trial_sse < sse) {
            break;
        }
        params = trial;
        sse = trial_sse;
    }

    let dof = gs.len().saturating_sub(3).max(1) as f64;
    let (a, _) = static_normal_matrix(&params, &gs, &es);
    let cov = a.try_inverse().unwrap_or_else(|| Matrix3::from_element(f64::NAN)) * (sse / dof);
    Ok(StaticFit {
        params,
        std_errors: StaticEmissionParams {
            f0: cov[(0, 0)].max(0.0).sqrt(),
            f1: cov[(1, 1)].max(0.0).sqrt(),
            n1: cov[(2, 2)].max(0.0).sqrt(),
        },
        residual_norm: sse.sqrt(),
        samples: gs.len(),
    })
}

struct RampData {
    /// static emission at the held output
    base: Vec<f64>,
    /// transition coefficient C
    coef: Vec<f64>,
    /// |Δg| on each side
    swings: Vec<(f64, f64)>,
    observed: Vec<f64>,
}

const B_BOUNDS: (f64, f64) = (0.0, 1e4);
const TAU_BOUNDS: (f64, f64) = (1e-6, 1.0 - 1e-6);
const N2_BOUNDS: (f64, f64) = (1e-3, 5.0);
const STARTS: usize = 8;
const START_SEED: u64 = 0x5eed_2024;

impl RampData {
    fn len(&self) -> usize {
        self.observed.len()
    }

    fn ramp_sum(&self, i: usize, n2: f64) -> f64 {
        let (d1, d2) = self.swings[i];
        let term = |d: f64| if d > 0.0 { d.powf(n2) } else { 0.0 };
        term(d1) + term(d2)
    }

    fn residuals(&self, th: &Vector3<f64>) -> Vec<f64> {
        let (b, tau, n2) = (th[0], th[1], th[2]);
        (0..self.len())
            .map(|i| self.base[i] + tau * self.coef[i] + b * tau * self.ramp_sum(i, n2) - self.observed[i])
            .collect()
    }

    fn sse(&self, th: &Vector3<f64>) -> f64 {
        self.residuals(th).iter().map(|r| r * r).sum()
    }

    fn normal_equations(&self, th: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>, f64) {
        let (b, tau, n2) = (th[0], th[1], th[2]);
        let r = self.residuals(th);
        let mut a = Matrix3::zeros();
        let mut g = Vector3::zeros();
        for i in 0..self.len() {
            let d = self.ramp_sum(i, n2);
            let (d1, d2) = self.swings[i];
            let dlog: f64 = [d1, d2]
                .iter()
                .filter(|v| **v > 0.0)
                .map(|v| v.powf(n2) * v.ln())
                .sum();
            let j = Vector3::new(tau * d, self.coef[i] + b * d, b * tau * dlog);
            a += j * j.transpose();
            g += j * r[i];
        }
        (a, g, r.iter().map(|v| v * v).sum())
    }

    /// Least-squares `b` for fixed `tau, n2`.
    fn best_b(&self, tau: f64, n2: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..self.len() {
            let x = tau * self.ramp_sum(i, n2);
            num += x * (self.observed[i] - self.base[i] - tau * self.coef[i]);
            den += x * x;
        }
        if den > 0.0 {
            (num / den).clamp(B_BOUNDS.0, B_BOUNDS.1)
        } else {
            0.0
        }
    }
}

fn project(th: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(
        th[0].clamp(B_BOUNDS.0, B_BOUNDS.1),
        th[1].clamp(TAU_BOUNDS.0, TAU_BOUNDS.1),
        th[2].clamp(N2_BOUNDS.0, N2_BOUNDS.1),
    )
}

/// Gradient with components removed where they push against an active bound.
fn projected_gradient(th: &Vector3<f64>, g: &Vector3<f64>) -> Vector3<f64> {
    let bounds = [B_BOUNDS, TAU_BOUNDS, N2_BOUNDS];
    Vector3::from_fn(|i, _| {
        let (lo, hi) = bounds[i];
        if (th[i] <= lo && g[i] > 0.0) || (th[i] >= hi && g[i] < 0.0) {
            0.0
        } else {
            g[i]
        }
    })
}

/// Levenberg-Marquardt with a projected step onto the parameter box.
/// Returns the final point, its sum of squares and the iteration count.
fn levenberg_marquardt(data: &RampData, start: Vector3<f64>) -> (Vector3<f64>, f64, usize, bool) {
    let mut th = project(start);
    let (mut a, mut g, mut sse) = data.normal_equations(&th);
    let mut mu = 1e-3 * (0..3).map(|i| a[(i, i)]).fold(0.0, f64::max).max(1e-12);
    let mut nu = 2.0;
    let mut converged = false;
    let mut iters = 0;
    while iters < 5000 {
        iters += 1;
        if projected_gradient(&th, &g).amax() <= 1e-12 * (1.0 + sse) {
            converged = true;
            break;
        }
        let mut damped = a;
        for i in 0..3 {
            damped[(i, i)] += mu * a[(i, i)].max(1e-12);
        }
        let Some(delta) = damped.lu().solve(&(-g)) else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let trial = project(th + delta);
        let step = trial - th;
        if step.norm() <= 1e-15 * (th.norm() + 1e-15) {
            converged = true;
            break;
        }
        // reduction of 0.5 * sse predicted by the local quadratic model
        let predicted = -(g.dot(&step) + 0.5 * step.dot(&(a * step)));
        let trial_sse = data.sse(&trial);
        let actual = 0.5 * (sse - trial_sse);
        if predicted > 0.0 && actual > 0.0 {
            let rho = actual / predicted;
            th = trial;
            let small = (sse - trial_sse) <= 1e-13 * sse;
            (a, g, sse) = data.normal_equations(&th);
            mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if small {
                converged = true;
                break;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if mu > 1e30 {
                converged = true;
                break;
            }
        }
    }
    (th, sse, iters, converged)
}

/// Fits `(b, τ, N2)` of the dynamic model with the static parameters held
/// fixed, using ramping samples whose held output is below `threshold` MW.
///
/// Eight seeded starting points are refined with a bounded
/// Levenberg-Marquardt iteration and the best final point is kept. When no
/// ramping sample qualifies, `b` is reported as zero and `tau`, `n2` are
/// listed as unidentified.
pub fn fit_dynamic(
    samples: &[EmissionSample],
    ps: &StaticEmissionParams,
    threshold: f64,
) -> Result<DynamicFit, EmissionError> {
    let ramping: Vec<&EmissionSample> = samples
        .iter()
        .filter(|s| !s.is_static() && s.g < threshold)
        .collect();
    let unidentified = |samples| DynamicFit {
        params: DynamicEmissionParams {
            b: 0.0,
            tau: DynamicEmissionParams::REFERENCE.tau,
            n2: DynamicEmissionParams::REFERENCE.n2,
        },
        std_errors: DynamicEmissionParams {
            b: f64::NAN,
            tau: f64::NAN,
            n2: f64::NAN,
        },
        residual_norm: 0.0,
        samples,
        unidentified: vec!["tau".into(), "n2".into()],
        starts: 0,
        iterations: 0,
    };
    if ramping.is_empty() {
        return Ok(unidentified(0));
    }
    if ramping.len() < 10 {
        return Err(EmissionError::InsufficientSamples {
            kind: "ramping",
            needed: 10,
            got: ramping.len(),
        });
    }
    let data = RampData {
        base: ramping.iter().map(|s| ps.f0 + ps.f1 * s.g.powf(ps.n1)).collect(),
        coef: ramping
            .iter()
            .map(|s| transition_coefficient(ps, s.g_prev, s.g, s.g_next))
            .collect(),
        swings: ramping
            .iter()
            .map(|s| ((s.g - s.g_prev).abs(), (s.g_next - s.g).abs()))
            .collect(),
        observed: ramping.iter().map(|s| s.emission).collect(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut best: Option<(Vector3<f64>, f64)> = None;
    let mut total_iters = 0;
    let mut any_converged = false;
    for _ in 0..STARTS {
        let tau = rng.random_range(0.05..0.95);
        let n2 = rng.random_range(0.05..1.5);
        let start = Vector3::new(data.best_b(tau, n2), tau, n2);
        let (th, sse, iters, ok) = levenberg_marquardt(&data, start);
        total_iters += iters;
        any_converged |= ok;
        if best.as_ref().is_none_or(|(_, s)| sse < *s) {
            best = Some((th, sse));
        }
    }
    let (th, sse) = best.expect("at least one start");
    if !any_converged || !sse.is_finite() {
        return Err(EmissionError::NoConvergence { residual: sse.sqrt() });
    }

    let (a, _, _) = data.normal_equations(&th);
    let dof = data.len().saturating_sub(3).max(1) as f64;
    let cov = a.try_inverse().unwrap_or_else(|| Matrix3::from_element(f64::NAN)) * (sse / dof);
    let mut unident = Vec::new();
    if th[0] == 0.0 {
        unident.extend(["tau".to_string(), "n2".to_string()]);
    }
    Ok(DynamicFit {
        params: DynamicEmissionParams {
            b: th[0],
            tau: th[1],
            n2: th[2],
        },
        std_errors: DynamicEmissionParams {
            b: cov[(0, 0)].max(0.0).sqrt(),
            tau: cov[(1, 1)].max(0.0).sqrt(),
            n2: cov[(2, 2)].max(0.0).sqrt(),
        },
        residual_norm: sse.sqrt(),
        samples: data.len(),
        unidentified: unident,
        starts: STARTS,
        iterations: total_iters,
    })
}

/// Static fit on the flat samples and dynamic fit on the ramping samples
/// below `threshold`, packaged for reporting. A failed dynamic fit is
/// recorded in the report rather than returned as an error.
pub fn fit_samples(samples: &[EmissionSample], threshold: f64, g_max: f64) -> Result<FitReport, EmissionError> {
    if !(g_max > 0.0) {
        return Err(EmissionError::NonPositive("g_max"));
    }
    let static_fit = fit_static(samples)?;
    let ramping = samples.iter().filter(|s| !s.is_static() && s.g < threshold).count();
    let (dynamic_fit, dynamic_error) = match fit_dynamic(samples, &static_fit.params, threshold) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut notes = vec![FitReport::RAMP_TERM_NOTE.to_string()];
    if let Some(f) = &dynamic_fit {
        if !f.unidentified.is_empty() {
            notes.push(format!("dynamic term unidentified: {}", f.unidentified.join(", ")));
        }
    }
    Ok(FitReport {
        static_samples: static_fit.samples,
        static_fit,
        dynamic_fit,
        dynamic_error,
        threshold_mw: threshold,
        g_max_mw: g_max,
        kappa: threshold / g_max,
        ramping_samples_below_threshold: ramping,
        notes,
    })
}
