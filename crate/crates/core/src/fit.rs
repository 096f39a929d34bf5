//! Least-squares fitting of single and double exponential decays.
//!
//! The traces produced by the master equation are noise-free, so a damped
//! Gauss-Newton iteration seeded from a log-linear regression converges in a
//! handful of steps. Rates are reported as inverse times (1/T).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least 10 samples, got {0}")]
    TooFewSamples(usize),
    #[error("time grid must be strictly increasing")]
    BadTimeGrid,
    #[error("fit did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    SingleExponential,
    DoubleExponential,
}

/// Fitted decay constants; y(t) ~ sum_k amplitudes[k] exp(-rates[k] t).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    pub amplitudes: Vec<f64>,
    /// Inverse times 1/T, non-negative.
    pub rates: Vec<f64>,
    pub residual_rms: f64,
}

impl DecayFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.rates)
            .map(|(a, r)| a * (-r * t).exp())
            .sum()
    }

    /// Longest fitted lifetime 1/rate among rates that are meaningfully
    /// nonzero.
    pub fn dominant_time(&self) -> Option<f64> {
        self.rates
            .iter()
            .copied()
            .filter(|r| *r > 0.0)
            .map(|r| 1.0 / r)
            .fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.max(t))))
    }
}

fn validate(t: &[f64], y: &[f64]) -> Result<(), FitError> {
    if t.len() < 10 || t.len() != y.len() {
        return Err(FitError::TooFewSamples(t.len()));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::BadTimeGrid);
    }
    Ok(())
}

/// Log-linear seed for the decay rate, ignoring non-positive samples.
fn log_linear_seed(t: &[f64], y: &[f64]) -> (f64, f64) {
    let floor = y.iter().cloned().fold(0.0, f64::max) * 1e-9;
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > floor)
        .map(|(&ti, &v)| (ti, v.ln()))
        .collect();
    if pts.len() < 2 {
        return (y.first().copied().unwrap_or(1.0).max(1e-300), 0.0);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (pts[0].1.exp(), 0.0);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept.exp(), (-slope).max(0.0))
}

/// Damped Gauss-Newton over (amplitudes, rates) jointly.
fn gauss_newton(
    t: &[f64],
    y: &[f64],
    mut params: Vec<f64>, // [a1, r1, a2, r2, ...]
) -> Result<(Vec<f64>, f64), FitError> {
    let n = t.len();
    let k = params.len() / 2;
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let residual = |p: &[f64]| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            let model: f64 = (0..k)
                .map(|j| p[2 * j] * (-p[2 * j + 1] * t[i]).exp())
                .sum();
            model - y[i]
        })
    };
    let mut lambda = 1e-12;
    let mut r = residual(&params);
    let mut cost = r.norm_squared();
    for _ in 0..200 {
        let jac = DMatrix::from_fn(n, 2 * k, |i, col| {
            let j = col / 2;
            let e = (-params[2 * j + 1] * t[i]).exp();
            if col % 2 == 0 {
                e
            } else {
                -params[2 * j] * t[i] * e
            }
        });
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut step_ok = false;
        for _ in 0..40 {
            let damped =
                &jtj + DMatrix::identity(2 * k, 2 * k) * (lambda * jtj.trace().max(1e-300));
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p - s).collect();
            let r_trial = residual(&trial);
            let cost_trial = r_trial.norm_squared();
            if cost_trial.is_finite() && cost_trial <= cost {
                let improved = cost - cost_trial;
                params = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda * 0.25).max(1e-15);
                step_ok = true;
                if improved < 1e-30 * scale * scale {
                    break;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !step_ok {
            break;
        }
        if cost.sqrt() < 1e-14 * scale * (n as f64).sqrt() {
            break;
        }
    }
    if !cost.is_finite() {
        return Err(FitError::NonConvergence {
            residual: f64::INFINITY,
        });
    }
    Ok((params, (cost / n as f64).sqrt()))
}

/// Fits c exp(-t/T) (plus a second exponential when the model asks for it).
pub fn fit_decay(t: &[f64], y: &[f64], model: DecayModel) -> Result<DecayFit, FitError> {
    validate(t, y)?;
    let (c0, r0) = log_linear_seed(t, y);
    match model {
        DecayModel::SingleExponential => {
            let (p, residual_rms) = gauss_newton(t, y, vec![c0, r0])?;
            Ok(DecayFit {
                model,
                amplitudes: vec![p[0]],
                rates: vec![clamp_rate(p[1], t)],
                residual_rms,
            })
        }
        DecayModel::DoubleExponential => {
            // seed the two rates on either side of the single-exponential one
            let r_seed = if r0 > 0.0 {
                r0
            } else {
                1.0 / t[t.len() - 1].max(1e-300)
            };
            let seed = vec![0.5 * c0, 3.0 * r_seed, 0.5 * c0, 0.3 * r_seed];
            let (p, residual_rms) = gauss_newton(t, y, seed)?;
            let (mut fast, mut slow) = ((p[0], p[1]), (p[2], p[3]));
            if fast.1 < slow.1 {
                std::mem::swap(&mut fast, &mut slow);
            }
            Ok(DecayFit {
                model,
                amplitudes: vec![fast.0, slow.0],
                rates: vec![clamp_rate(fast.1, t), clamp_rate(slow.1, t)],
                residual_rms,
            })
        }
    }
}

/// Tiny negative rates from round-off are clamped to zero; a decisively
/// growing exponential is not a decay.
fn clamp_rate(rate: f64, t: &[f64]) -> f64 {
    let span = t[t.len() - 1] - t[0];
    if rate < 0.0 && rate.abs() * span < 1e-6 {
        0.0
    } else {
        rate
    }
}
