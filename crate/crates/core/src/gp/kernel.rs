//! Squared-exponential kernel with one length scale per input dimension.

use crate::error::{Error, Result};

/// Observation noise used when none is configured.
pub const DEFAULT_NOISE_SIGMA: f64 = 1e-5;

/// Kernel amplitude, per-dimension length scales and observation noise.
///
/// Amplitude and length scales are held as logarithms so every value the
/// optimizer can reach is a valid positive parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    log_signal: f64,
    log_lengths: Vec<f64>,
    noise_sigma: f64,
}

impl KernelParams {
    pub fn new(signal_sigma: f64, length_scales: Vec<f64>, noise_sigma: f64) -> Result<Self> {
        if !(signal_sigma.is_finite() && signal_sigma > 0.0) {
            return Err(Error::usage(format!(
                "signal_sigma must be positive and finite, got {signal_sigma}"
            )));
        }
        if length_scales.is_empty() {
            return Err(Error::usage("at least one length scale is required"));
        }
        if let Some(l) = length_scales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::usage(format!(
                "length scales must be positive and finite, got {l}"
            )));
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(Error::usage(format!(
                "noise_sigma must be non-negative and finite, got {noise_sigma}"
            )));
        }
        Ok(Self {
            log_signal: signal_sigma.ln(),
            log_lengths: length_scales.iter().map(|l| l.ln()).collect(),
            noise_sigma,
        })
    }

    /// σ = 1, every l_i = 1, σ_n = 1e-5.
    pub fn unit(dim: usize) -> Self {
        Self {
            log_signal: 0.0,
            log_lengths: vec![0.0; dim.max(1)],
            noise_sigma: DEFAULT_NOISE_SIGMA,
        }
    }

    pub fn with_noise(mut self, noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(Error::usage(format!(
                "noise_sigma must be non-negative and finite, got {noise_sigma}"
            )));
        }
        self.noise_sigma = noise_sigma;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.log_lengths.len()
    }

    pub fn signal_sigma(&self) -> f64 {
        self.log_signal.exp()
    }

    pub fn signal_variance(&self) -> f64 {
        (2.0 * self.log_signal).exp()
    }

    pub fn length_scales(&self) -> Vec<f64> {
        self.log_lengths.iter().map(|l| l.exp()).collect()
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// Optimizable coordinates: `[log σ, log l_1, ..., log l_D]`.
    pub fn log_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.log_lengths.len());
        v.push(self.log_signal);
        v.extend_from_slice(&self.log_lengths);
        v
    }

    pub fn from_log_params(log_params: &[f64], noise_sigma: f64) -> Result<Self> {
        if log_params.len() < 2 {
            return Err(Error::usage(
                "log parameter vector needs a signal term and at least one length scale",
            ));
        }
        if log_params.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("log parameters must be finite"));
        }
        Ok(Self {
            log_signal: log_params[0],
            log_lengths: log_params[1..].to_vec(),
            noise_sigma,
        })
    }

    /// σ² exp(−½ Σ ((x_i − y_i)/l_i)²).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(Error::usage(format!(
                "kernel expects {}-dimensional inputs, got {} and {}",
                self.dim(),
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.signal_variance() * (-0.5 * self.scaled_sq_dist(x, y)).exp()
    }

    pub(crate) fn scaled_sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.log_lengths)
            .map(|((a, b), ll)| {
                let d = (a - b) / ll.exp();
                d * d
            })
            .sum()
    }
}

/// Convenience wrapper matching the free-function form.
pub fn kernel_eval(params: &KernelParams, x: &[f64], y: &[f64]) -> Result<f64> {
    params.eval(x, y)
}

/// Kernel matrix over `points` with σ_n² added on the diagonal.
pub fn gram_matrix(params: &KernelParams, points: &[Vec<f64>]) -> Result<nalgebra::DMatrix<f64>> {
    if points.is_empty() {
        return Err(Error::usage("gram matrix needs at least one point"));
    }
    if let Some(p) = points.iter().find(|p| p.len() != params.dim()) {
        return Err(Error::usage(format!(
            "kernel expects {}-dimensional inputs, got {}",
            params.dim(),
            p.len()
        )));
    }
    Ok(gram_unchecked(params, points))
}

pub(crate) fn gram_unchecked(params: &KernelParams, points: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let t = points.len();
    let noise = params.noise_sigma() * params.noise_sigma();
    let mut k = nalgebra::DMatrix::zeros(t, t);
    for i in 0..t {
        k[(i, i)] = params.signal_variance() + noise;
        for j in 0..i {
            let v = params.eval_unchecked(&points[i], &points[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_distance_gives_signal_variance() {
        let p = KernelParams::unit(5);
        let x = [0.3, -1.0, 2.0, 0.0, 4.0];
        assert_eq!(p.eval(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn unit_offset_along_one_axis() {
        let p = KernelParams::unit(3);
        let v = p.eval(&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(v, (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(v, 0.60653, epsilon = 1e-5);
    }

    #[test]
    fn anisotropic_substitution() {
        let p = KernelParams::new(2.0, vec![0.5, 2.0], 0.0).unwrap();
        let v = p.eval(&[0.5, 2.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(v, 4.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(v, 1.47152, epsilon = 1e-5);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let p = KernelParams::unit(2);
        assert!(matches!(p.eval(&[0.0], &[0.0, 1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(KernelParams::new(0.0, vec![1.0], 0.0).is_err());
        assert!(KernelParams::new(1.0, vec![-1.0], 0.0).is_err());
        assert!(KernelParams::new(1.0, vec![1.0], -1e-3).is_err());
        assert!(KernelParams::new(1.0, vec![], 0.0).is_err());
    }

    #[test]
    fn single_point_gram() {
        let p = KernelParams::new(1.5, vec![1.0], 0.1).unwrap();
        let k = gram_matrix(&p, &[vec![0.2]]).unwrap();
        assert_eq!(k.shape(), (1, 1));
        assert_relative_eq!(k[(0, 0)], 2.25 + 0.01, max_relative = 1e-14);
    }

    #[test]
    fn duplicate_points_stay_positive_definite() {
        let p = KernelParams::new(1.0, vec![1.0, 1.0], 0.01).unwrap();
        let pts = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let k = gram_matrix(&p, &pts).unwrap();
        assert_relative_eq!(k[(0, 1)], 1.0, max_relative = 1e-15);
        assert_relative_eq!(k[(0, 0)], 1.0 + 1e-4, max_relative = 1e-15);
        assert!(k.cholesky().is_some());
    }

    #[test]
    fn log_params_round_trip() {
        let p = KernelParams::new(0.7, vec![0.2, 3.0], 1e-5).unwrap();
        let q = KernelParams::from_log_params(&p.log_params(), p.noise_sigma()).unwrap();
        assert_eq!(p, q);
    }
}
