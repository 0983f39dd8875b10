//! iRprop− ascent on the log marginal likelihood.

use super::kernel::KernelParams;
use super::model::GpModel;
use crate::error::Result;

/// Hyperparameter re-optimization budget per call.
pub const DEFAULT_ITERATIONS: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct RpropConfig {
    pub initial_step: f64,
    pub increase: f64,
    pub decrease: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Box on every log-hyperparameter.
    pub log_bounds: (f64, f64),
}

impl Default for RpropConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            increase: 1.2,
            decrease: 0.5,
            min_step: 1e-6,
            max_step: 1.0,
            log_bounds: ((1e-4f64).ln(), (1e4f64).ln()),
        }
    }
}

/// Returns the best kernel seen and the best-so-far LML after each iteration.
///
/// Fewer than two observations leave the kernel unchanged. Steps that land on
/// a non-finite likelihood or a failed factorization are rejected and every
/// step size shrinks.
pub fn optimize(
    model: &GpModel,
    iterations: usize,
    cfg: &RpropConfig,
) -> Result<(KernelParams, Vec<f64>)> {
    let start = model.kernel().clone();
    if model.data().len() < 2 || iterations == 0 {
        return Ok((start, Vec::new()));
    }
    let noise = start.noise_sigma();
    let n = start.log_params().len();
    let mut theta = start.log_params();
    let (f0, g0) = model.lml_and_gradient_at(&start)?;
    let mut grad: Vec<f64> = g0[..n].to_vec();
    let mut best = (f0, theta.clone());
    let mut prev = vec![0.0; n];
    let mut steps = vec![cfg.initial_step; n];
    let mut trace = Vec::with_capacity(iterations);
    let (lo, hi) = cfg.log_bounds;

    for _ in 0..iterations {
        let mut cand = theta.clone();
        for j in 0..n {
            let s = grad[j] * prev[j];
            if s > 0.0 {
                steps[j] = (steps[j] * cfg.increase).min(cfg.max_step);
            } else if s < 0.0 {
                steps[j] = (steps[j] * cfg.decrease).max(cfg.min_step);
                grad[j] = 0.0;
            }
            let dir = if grad[j] > 0.0 {
                1.0
            } else if grad[j] < 0.0 {
                -1.0
            } else {
                0.0
            };
            cand[j] = (theta[j] + dir * steps[j]).clamp(lo, hi);
        }
        let eval =
            KernelParams::from_log_params(&cand, noise).and_then(|k| model.lml_and_gradient_at(&k));
        match eval {
            Ok((f, g)) if f.is_finite() && g[..n].iter().all(|v| v.is_finite()) => {
                theta = cand;
                prev = grad;
                grad = g[..n].to_vec();
                if f > best.0 {
                    best = (f, theta.clone());
                }
            }
            _ => {
                steps
                    .iter_mut()
                    .for_each(|s| *s = (*s * cfg.decrease).max(cfg.min_step));
                prev = vec![0.0; n];
            }
        }
        trace.push(best.0);
    }
    Ok((KernelParams::from_log_params(&best.1, noise)?, trace))
}
