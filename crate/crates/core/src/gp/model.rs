use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::kernel::{gram_unchecked, KernelParams};
use super::rprop::{self, RpropConfig};
use crate::error::{Error, Result};
use crate::priors::PriorMean;

/// First diagonal jitter tried when the kernel matrix is not numerically
/// positive definite, relative to σ².
pub const JITTER_START: f64 = 1e-10;
/// Largest relative jitter before giving up.
pub const JITTER_MAX: f64 = 1e-4;

/// Observed inputs and their objective values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservationSet {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl ObservationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(points: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::usage(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let mut out = Self::new();
        for (p, v) in points.into_iter().zip(values) {
            out.push(p, v)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, point: Vec<f64>, value: f64) -> Result<()> {
        if !value.is_finite() || point.iter().any(|c| !c.is_finite()) {
            return Err(Error::usage("observations must be finite"));
        }
        if let Some(first) = self.points.first() {
            if first.len() != point.len() {
                return Err(Error::usage(format!(
                    "observation has dimension {}, expected {}",
                    point.len(),
                    first.len()
                )));
            }
        }
        self.points.push(point);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest observed value, `None` when empty.
    pub fn best(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Clone, Debug)]
struct Factorization {
    chol: Cholesky<f64, Dyn>,
    /// K⁻¹ (F − P) over the current data.
    alpha: DVector<f64>,
    residual: DVector<f64>,
    jitter: f64,
}

/// One GP: prior mean, kernel, the shared observation history and its factorization.
#[derive(Clone, Debug)]
pub struct GpModel {
    kernel: KernelParams,
    prior: Arc<PriorMean>,
    data: ObservationSet,
    prior_at_data: Vec<f64>,
    cache: Option<Factorization>,
}

impl GpModel {
    pub fn new(kernel: KernelParams, prior: Arc<PriorMean>) -> Result<Self> {
        if let Some(d) = prior.input_dim() {
            if d != kernel.dim() {
                return Err(Error::usage(format!(
                    "prior is defined on {d} dimensions, kernel on {}",
                    kernel.dim()
                )));
            }
        }
        Ok(Self {
            kernel,
            prior,
            data: ObservationSet::new(),
            prior_at_data: Vec::new(),
            cache: None,
        })
    }

    pub fn fit(kernel: KernelParams, prior: Arc<PriorMean>, data: ObservationSet) -> Result<Self> {
        let mut m = Self::new(kernel, prior)?;
        if let Some(p) = data.points().first() {
            m.check_dim(p)?;
        }
        m.prior_at_data = data
            .points()
            .iter()
            .map(|p| m.prior.eval(p))
            .collect::<Result<_>>()?;
        m.data = data;
        m.refresh()?;
        Ok(m)
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn prior(&self) -> &Arc<PriorMean> {
        &self.prior
    }

    pub fn data(&self) -> &ObservationSet {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Diagonal jitter added during the last factorization (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.cache.as_ref().map_or(0.0, |c| c.jitter)
    }

    pub fn set_kernel(&mut self, kernel: KernelParams) -> Result<()> {
        if kernel.dim() != self.kernel.dim() {
            return Err(Error::usage("kernel dimension cannot change"));
        }
        self.kernel = kernel;
        self.refresh()
    }

    /// Appends one observation and rebuilds the factorization.
    pub fn update(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        self.check_dim(&x)?;
        let p = self.prior.eval(&x)?;
        self.data.push(x, y)?;
        self.prior_at_data.push(p);
        self.refresh()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::usage(format!(
                "point has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn refresh(&mut self) -> Result<()> {
        self.cache = if self.data.is_empty() {
            None
        } else {
            Some(factorize(&self.kernel, &self.data, &self.prior_at_data)?)
        };
        Ok(())
    }

    /// Posterior mean and variance at `x`; the variance is clamped at zero.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_dim(x)?;
        let (mean, var) = self.predict_raw(x)?;
        Ok(Prediction {
            mean,
            variance: var.max(0.0),
        })
    }

    /// Mean and variance before clamping the variance.
    pub fn predict_raw(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        let prior = self.prior.eval(x)?;
        let kxx = self.kernel.signal_variance();
        let Some(cache) = &self.cache else {
            return Ok((prior, kxx));
        };
        let k = DVector::from_iterator(
            self.data.len(),
            self.data
                .points()
                .iter()
                .map(|p| self.kernel.eval_unchecked(x, p)),
        );
        let mean = prior + k.dot(&cache.alpha);
        let v = cache
            .chol
            .l_dirty()
            .solve_lower_triangular(&k)
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        Ok((mean, kxx - v.norm_squared()))
    }

    /// log p(F | X, P): density of the observed values under this model; 0 with no data.
    pub fn log_marginal_likelihood(&self) -> Result<f64> {
        Ok(match &self.cache {
            None => 0.0,
            Some(c) => lml_of(c),
        })
    }

    /// Gradient of the log marginal likelihood with respect to
    /// `[log σ, log l_1, ..., log l_D, log σ_n]`.
    pub fn lml_gradient(&self) -> Result<Vec<f64>> {
        match &self.cache {
            None => Ok(vec![0.0; self.dim() + 2]),
            Some(c) => Ok(lml_gradient_of(&self.kernel, &self.data, c)),
        }
    }

    /// LML and its gradient for alternative kernel parameters over the same data.
    pub(crate) fn lml_and_gradient_at(&self, kernel: &KernelParams) -> Result<(f64, Vec<f64>)> {
        if self.data.is_empty() {
            return Ok((0.0, vec![0.0; self.dim() + 2]));
        }
        let c = factorize(kernel, &self.data, &self.prior_at_data)?;
        Ok((lml_of(&c), lml_gradient_of(kernel, &self.data, &c)))
    }

    /// Maximizes the log marginal likelihood over σ and the length scales with
    /// RPROP, starting from the current kernel. Noise stays fixed. The model
    /// adopts and returns the best parameters seen.
    pub fn optimize_hyperparams(&mut self, iterations: usize) -> Result<KernelParams> {
        self.optimize_hyperparams_with(iterations, &RpropConfig::default())
    }

    pub fn optimize_hyperparams_with(
        &mut self,
        iterations: usize,
        cfg: &RpropConfig,
    ) -> Result<KernelParams> {
        let (best, _) = rprop::optimize(self, iterations, cfg)?;
        if best != self.kernel {
            self.set_kernel(best)?;
        }
        Ok(self.kernel.clone())
    }
}

fn factorize(
    kernel: &KernelParams,
    data: &ObservationSet,
    prior_at_data: &[f64],
) -> Result<Factorization> {
    let k = gram_unchecked(kernel, data.points());
    let residual = DVector::from_iterator(
        data.len(),
        data.values().iter().zip(prior_at_data).map(|(f, p)| f - p),
    );
    let s2 = kernel.signal_variance();
    let mut jitter = 0.0;
    let chol = loop {
        let mut kj = k.clone();
        if jitter > 0.0 {
            for i in 0..kj.nrows() {
                kj[(i, i)] += jitter;
            }
        }
        if let Some(c) = Cholesky::new(kj) {
            break c;
        }
        jitter = if jitter == 0.0 {
            JITTER_START * s2
        } else {
            jitter * 10.0
        };
        if jitter > JITTER_MAX * s2 * (1.0 + 1e-9) {
            return Err(Error::Numerical(format!(
                "kernel matrix not positive definite after jitter {:e} (t={}, sigma={}, lengths={:?}, noise={})",
                JITTER_MAX * s2,
                data.len(),
                kernel.signal_sigma(),
                kernel.length_scales(),
                kernel.noise_sigma()
            )));
        }
    };
    let alpha = chol.solve(&residual);
    Ok(Factorization {
        chol,
        alpha,
        residual,
        jitter,
    })
}

fn lml_of(c: &Factorization) -> f64 {
    let t = c.residual.len() as f64;
    let log_det_half: f64 = c.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    -0.5 * c.residual.dot(&c.alpha) - log_det_half - 0.5 * t * (2.0 * PI).ln()
}

fn lml_gradient_of(kernel: &KernelParams, data: &ObservationSet, c: &Factorization) -> Vec<f64> {
    let t = data.len();
    let d = kernel.dim();
    let k_inv: DMatrix<f64> = c.chol.inverse();
    let lengths = kernel.length_scales();
    let s2 = kernel.signal_variance();
    let mut grad = vec![0.0; d + 2];
    let pts = data.points();
    for a in 0..t {
        for b in 0..t {
            let s = c.alpha[a] * c.alpha[b] - k_inv[(a, b)];
            let kse = if a == b {
                s2
            } else {
                kernel.eval_unchecked(&pts[a], &pts[b])
            };
            grad[0] += s * 2.0 * kse;
            if a != b {
                for i in 0..d {
                    let z = (pts[a][i] - pts[b][i]) / lengths[i];
                    grad[1 + i] += s * kse * z * z;
                }
            }
        }
        let sa = c.alpha[a] * c.alpha[a] - k_inv[(a, a)];
        grad[d + 1] += sa * 2.0 * kernel.noise_sigma() * kernel.noise_sigma();
    }
    grad.iter_mut().for_each(|g| *g *= 0.5);
    grad
}
