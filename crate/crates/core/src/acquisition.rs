//! Expected improvement, per-prior EI weighted by model likelihood (EIP),
//! and the most-likely-EI choice across models.
//!
//! Products of EI and likelihood underflow after a few dozen observations,
//! so everything here is compared as `log EI + log likelihood`.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use rand::Rng;
use rayon::prelude::*;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::{GpModel, ObservationSet};

/// Below this standardized improvement the closed form cancels badly and a
/// continued fraction for the normal tail is used instead.
const TAIL_Z: f64 = -1.0;
const TAIL_TERMS: usize = 300;

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// ln(z Φ(z) + φ(z)).
fn log_h(z: f64) -> f64 {
    if z >= TAIL_Z {
        return (z * std_normal_cdf(z) + std_normal_pdf(z)).ln();
    }
    // Φ(−x)/φ(x) = 1/(x + a) with a = 1/(x + 2/(x + 3/(x + ...))), so
    // zΦ(z) + φ(z) = φ(x)·a/(x + a) without cancellation.
    let x = -z;
    let mut t = x;
    for k in (1..TAIL_TERMS).rev() {
        t = x + (k + 1) as f64 / t;
    }
    let a = 1.0 / t;
    -0.5 * x * x - 0.5 * (2.0 * PI).ln() + a.ln() - (x + a).ln()
}

/// Closed-form EI of a Gaussian prediction over the incumbent `best`.
pub fn ei_closed_form(mean: f64, std_dev: f64, best: f64) -> f64 {
    if std_dev <= 0.0 {
        return 0.0;
    }
    let z = (mean - best) / std_dev;
    (mean - best) * std_normal_cdf(z) + std_dev * std_normal_pdf(z)
}

/// `ln EI`, finite whenever `std_dev > 0`; `-inf` for a zero deviation.
pub fn log_ei_closed_form(mean: f64, std_dev: f64, best: f64) -> f64 {
    if std_dev <= 0.0 {
        return f64::NEG_INFINITY;
    }
    std_dev.ln() + log_h((mean - best) / std_dev)
}

pub fn expected_improvement(model: &GpModel, x: &[f64], best: f64) -> Result<f64> {
    let p = model.predict(x)?;
    Ok(ei_closed_form(p.mean, p.std_dev(), best))
}

pub fn log_expected_improvement(model: &GpModel, x: &[f64], best: f64) -> Result<f64> {
    let p = model.predict(x)?;
    Ok(log_ei_closed_form(p.mean, p.std_dev(), best))
}

/// Random-restart pattern search used on continuous boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerOptimizer {
    pub samples: usize,
    pub refine_top: usize,
    /// Initial pattern step as a fraction of each box width.
    pub step_fraction: f64,
    pub refine_steps: usize,
}

impl Default for InnerOptimizer {
    fn default() -> Self {
        Self {
            samples: 1000,
            refine_top: 10,
            step_fraction: 0.05,
            refine_steps: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EiMaximum {
    pub point: Vec<f64>,
    pub ei: f64,
    pub log_ei: f64,
    /// Position in the candidate list for finite domains.
    pub candidate: Option<usize>,
}

pub fn maximize_ei<R: Rng + ?Sized>(
    model: &GpModel,
    domain: &Domain,
    best: f64,
    rng: &mut R,
) -> Result<EiMaximum> {
    maximize_ei_with(model, domain, best, &InnerOptimizer::default(), rng)
}

pub fn maximize_ei_with<R: Rng + ?Sized>(
    model: &GpModel,
    domain: &Domain,
    best: f64,
    inner: &InnerOptimizer,
    rng: &mut R,
) -> Result<EiMaximum> {
    if domain.dim() != model.dim() {
        return Err(Error::usage(format!(
            "domain has dimension {}, model {}",
            domain.dim(),
            model.dim()
        )));
    }
    let score = |x: &[f64]| log_expected_improvement(model, x, best);
    let (point, log_ei, candidate) = match domain {
        Domain::FiniteCandidates(cands) => {
            if cands.is_empty() {
                return Err(Error::usage("candidate set is empty"));
            }
            let mut best_i = 0;
            let mut best_v = f64::NEG_INFINITY;
            for (i, c) in cands.iter().enumerate() {
                let v = score(c)?;
                if v > best_v {
                    best_v = v;
                    best_i = i;
                }
            }
            (cands[best_i].clone(), best_v, Some(best_i))
        }
        Domain::ContinuousBox { lo, hi } => {
            let n = inner.samples.max(1);
            let mut pool = Vec::with_capacity(n);
            for _ in 0..n {
                let x: Vec<f64> = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| rng.random_range(*a..=*b))
                    .collect();
                let v = score(&x)?;
                pool.push((x, v));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| pool[b].1.total_cmp(&pool[a].1).then(a.cmp(&b)));
            let mut best: Option<(Vec<f64>, f64)> = None;
            for &i in order.iter().take(inner.refine_top.max(1)) {
                let (x, v) = pattern_search(&pool[i].0, pool[i].1, lo, hi, inner, &score)?;
                if best.as_ref().is_none_or(|b| v > b.1) {
                    best = Some((x, v));
                }
            }
            let (x, v) = best.expect("at least one start");
            (x, v, None)
        }
    };
    Ok(EiMaximum {
        point,
        ei: log_ei.exp(),
        log_ei,
        candidate,
    })
}

fn pattern_search(
    start: &[f64],
    start_v: f64,
    lo: &[f64],
    hi: &[f64],
    inner: &InnerOptimizer,
    score: &impl Fn(&[f64]) -> Result<f64>,
) -> Result<(Vec<f64>, f64)> {
    let mut x = start.to_vec();
    let mut v = start_v;
    let mut steps: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| inner.step_fraction * (b - a))
        .collect();
    for _ in 0..inner.refine_steps {
        let mut moved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] = (x[d] + dir * steps[d]).clamp(lo[d], hi[d]);
                if y[d] == x[d] {
                    continue;
                }
                let w = score(&y)?;
                if w > v {
                    x = y;
                    v = w;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    Ok((x, v))
}

/// Incumbent plus the shared observation history.
#[derive(Clone, Debug, PartialEq)]
pub struct AcquisitionContext {
    pub best_observed: f64,
    pub observations: ObservationSet,
}

impl AcquisitionContext {
    pub fn new(observations: ObservationSet) -> Result<Self> {
        let best_observed = observations.best().ok_or_else(|| {
            Error::usage("no observations: supply the incumbent with `with_incumbent`")
        })?;
        Ok(Self {
            best_observed,
            observations,
        })
    }

    /// Explicit incumbent, needed before the first observation.
    pub fn with_incumbent(observations: ObservationSet, best_observed: f64) -> Self {
        Self {
            best_observed,
            observations,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelScore {
    pub prior_index: usize,
    pub argmax_point: Vec<f64>,
    pub ei_value: f64,
    pub log_ei: f64,
    pub log_likelihood: f64,
    /// `log_ei + log_likelihood`; `-inf` when EI is exactly zero.
    pub log_eip: f64,
}

/// Likelihood once, EI maximization once, combined in log space.
pub fn eip_score<R: Rng + ?Sized>(
    model: &GpModel,
    prior_index: usize,
    domain: &Domain,
    ctx: &AcquisitionContext,
    inner: &InnerOptimizer,
    rng: &mut R,
) -> Result<ModelScore> {
    if model.data().len() != ctx.observations.len() {
        return Err(Error::usage(format!(
            "model holds {} observations, context {}",
            model.data().len(),
            ctx.observations.len()
        )));
    }
    let log_likelihood = model.log_marginal_likelihood()?;
    let m = maximize_ei_with(model, domain, ctx.best_observed, inner, rng)?;
    let log_eip = if m.log_ei == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        m.log_ei + log_likelihood
    };
    Ok(ModelScore {
        prior_index,
        argmax_point: m.point,
        ei_value: m.ei,
        log_ei: m.log_ei,
        log_likelihood,
        log_eip,
    })
}

/// Scores every model; each gets its own generator so scoring order and
/// parallelism never change the result.
pub fn score_models<R, F>(
    models: &[GpModel],
    domain: &Domain,
    ctx: &AcquisitionContext,
    inner: &InnerOptimizer,
    rng_for: F,
) -> Result<Vec<ModelScore>>
where
    R: Rng,
    F: Fn(usize) -> R + Sync,
{
    models
        .par_iter()
        .enumerate()
        .map(|(i, m)| eip_score(m, i, domain, ctx, inner, &mut rng_for(i)))
        .collect()
}

/// Index with the largest `log_eip`, lowest index on ties. When every EI is
/// zero the choice falls back to the largest likelihood; the flag reports it.
pub fn select_by_eip(scores: &[ModelScore]) -> Result<(usize, bool)> {
    if scores.is_empty() {
        return Err(Error::usage("no model scores to select from"));
    }
    let argmax = |key: &dyn Fn(&ModelScore) -> f64| {
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if key(s) > key(&scores[best]) {
                best = i;
            }
        }
        best
    };
    let i = argmax(&|s| s.log_eip);
    if scores[i].log_eip == f64::NEG_INFINITY {
        Ok((argmax(&|s| s.log_likelihood), true))
    } else {
        Ok((i, false))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MleiSelection {
    pub point: Vec<f64>,
    pub prior_index: usize,
    pub scores: Vec<ModelScore>,
    pub degenerate: bool,
}

pub fn mlei_select<R, F>(
    models: &[GpModel],
    domain: &Domain,
    ctx: &AcquisitionContext,
    inner: &InnerOptimizer,
    rng_for: F,
) -> Result<MleiSelection>
where
    R: Rng,
    F: Fn(usize) -> R + Sync,
{
    if models.is_empty() {
        return Err(Error::usage("MLEI needs at least one model"));
    }
    let scores = score_models(models, domain, ctx, inner, rng_for)?;
    let (prior_index, degenerate) = select_by_eip(&scores)?;
    Ok(MleiSelection {
        point: scores[prior_index].argmax_point.clone(),
        prior_index,
        scores,
        degenerate,
    })
}
