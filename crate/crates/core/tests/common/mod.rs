//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's GP or statistics code: kernels are
//! re-derived, linear algebra goes through dense LU solves, and rank-test
//! p-values come from enumerating every labeling. The `reductions` submodule
//! is the exception: it drives library primitives directly.

#![allow(dead_code)]

pub mod reductions;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn se_kernel(signal: f64, lengths: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let q: f64 = x
        .iter()
        .zip(y)
        .zip(lengths)
        .map(|((a, b), l)| ((a - b) / l).powi(2))
        .sum();
    signal * signal * (-0.5 * q).exp()
}

/// GP problem described with plain numbers.
#[derive(Clone, Debug)]
pub struct DenseGp {
    pub signal: f64,
    pub lengths: Vec<f64>,
    pub noise: f64,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    /// Prior mean at each observed point.
    pub prior_at_data: Vec<f64>,
}

impl DenseGp {
    fn gram(&self) -> DMatrix<f64> {
        let t = self.xs.len();
        DMatrix::from_fn(t, t, |i, j| {
            se_kernel(self.signal, &self.lengths, &self.xs[i], &self.xs[j])
                + if i == j { self.noise * self.noise } else { 0.0 }
        })
    }

    /// `K⁻¹ b` by partial-pivot LU plus one step of iterative refinement.
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let k = self.gram();
        let lu = k.clone().lu();
        let mut x = lu.solve(b).expect("oracle gram matrix must be invertible");
        let r = b - &k * &x;
        x += lu.solve(&r).expect("oracle gram matrix must be invertible");
        x
    }

    fn residual(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.ys.len(),
            self.ys.iter().zip(&self.prior_at_data).map(|(y, p)| y - p),
        )
    }

    /// Posterior mean and variance at `x`, given the prior mean there.
    pub fn predict(&self, x: &[f64], prior_at_x: f64) -> (f64, f64) {
        let k = DVector::from_iterator(
            self.xs.len(),
            self.xs
                .iter()
                .map(|xi| se_kernel(self.signal, &self.lengths, x, xi)),
        );
        let mean = prior_at_x + k.dot(&self.solve(&self.residual()));
        let var = self.signal * self.signal - k.dot(&self.solve(&k));
        (mean, var)
    }

    /// Multivariate normal log density of the residuals.
    pub fn log_likelihood(&self) -> f64 {
        let t = self.xs.len() as f64;
        let r = self.residual();
        let quad = r.dot(&self.solve(&r));
        let det = self.gram().lu().determinant();
        -0.5 * quad - 0.5 * det.ln() - 0.5 * t * (2.0 * std::f64::consts::PI).ln()
    }

    /// Log likelihood with log-hyperparameters `[log σ, log l.., log σ_n]`.
    pub fn log_likelihood_at(&self, theta: &[f64]) -> f64 {
        let d = self.lengths.len();
        let g = DenseGp {
            signal: theta[0].exp(),
            lengths: theta[1..=d].iter().map(|v| v.exp()).collect(),
            noise: theta[d + 1].exp(),
            ..self.clone()
        };
        g.log_likelihood()
    }

    pub fn log_params(&self) -> Vec<f64> {
        let mut v = vec![self.signal.ln()];
        v.extend(self.lengths.iter().map(|l| l.ln()));
        v.push(self.noise.ln());
        v
    }
}

pub fn uniform_point(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// EI written out directly from its definition in terms of Φ and φ.
pub fn ei_reference(mean: f64, sd: f64, best: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    let z = (mean - best) / sd;
    (mean - best) * std_normal_cdf(z) + sd * std_normal_pdf(z)
}

/// Mann-Whitney U of `a` against `b`: pairs with a > b, ties counting half.
pub fn u_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Exact p-value by enumerating every way to split the pooled ranks into
/// groups of sizes `n1` and `n2`. `alternative` is "two-sided", "greater" or "less".
pub fn enumeration_p(a: &[f64], b: &[f64], alternative: &str) -> f64 {
    let n1 = a.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let observed = u_by_pairs(a, b);
    let (mut ge, mut le, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let (ga, gb): (Vec<f64>, Vec<f64>) = {
            let mut ga = Vec::new();
            let mut gb = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    ga.push(*v);
                } else {
                    gb.push(*v);
                }
            }
            (ga, gb)
        };
        let u = u_by_pairs(&ga, &gb);
        total += 1;
        if u >= observed {
            ge += 1;
        }
        if u <= observed {
            le += 1;
        }
    }
    let pg = ge as f64 / total as f64;
    let pl = le as f64 / total as f64;
    match alternative {
        "greater" => pg,
        "less" => pl,
        _ => (2.0 * pg.min(pl)).min(1.0),
    }
}

/// Complex-exponential forward kinematics: Σ_k L·e^{i Σ_{j≤k} θ_j}.
pub fn arm_endpoint(angles: &[f64], link: f64) -> [f64; 2] {
    let mut phase = num_complex_unit(0.0);
    let mut tip = (0.0, 0.0);
    for a in angles {
        phase = mul(phase, num_complex_unit(*a));
        tip.0 += link * phase.0;
        tip.1 += link * phase.1;
    }
    [tip.0, tip.1]
}

fn num_complex_unit(a: f64) -> (f64, f64) {
    (a.cos(), a.sin())
}

fn mul(p: (f64, f64), q: (f64, f64)) -> (f64, f64) {
    (p.0 * q.0 - p.1 * q.1, p.0 * q.1 + p.1 * q.0)
}
