//! The multi-prior BO loop.
//!
//! Every model sees every observation. Selection policies only replace the
//! step that picks which model's EI maximizer to evaluate; scoring,
//! hyperparameter fitting and random streams are identical across policies.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::acquisition::{score_models, select_by_eip, AcquisitionContext, InnerOptimizer};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::{GpModel, KernelParams, ObservationSet, RpropConfig};
use crate::priors::PriorMean;
use crate::rng::{Stream, Streams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectorPolicy {
    /// Largest EI × likelihood across models.
    Mlei,
    /// Always the given model: plain EI with that prior.
    FixedPrior(usize),
    /// Uniformly random model, redrawn every iteration.
    RandomPrior,
}

impl SelectorPolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "mlei" => Ok(Self::Mlei),
            "random" => Ok(Self::RandomPrior),
            other => match other.strip_prefix("fixed:") {
                Some(i) => i
                    .parse()
                    .map(Self::FixedPrior)
                    .map_err(|_| Error::usage(format!("bad prior index in selector {other:?}"))),
                None => Err(Error::usage(format!(
                    "unknown selector {other:?} (expected mlei, random or fixed:<index>)"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoRunConfig {
    pub domain: Domain,
    pub priors: Vec<Arc<PriorMean>>,
    pub selector: SelectorPolicy,
    pub init_trials: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub kernel_init: KernelParams,
    pub hyperopt_iters: usize,
    pub inner: InnerOptimizer,
    pub rprop: RpropConfig,
    /// Besides the warm start from the current optimum, also run RPROP from
    /// `kernel_init` and keep whichever ends with the higher likelihood. This
    /// lets a model leave a degenerate optimum (for example a length scale
    /// pinned at its bound) once new data makes it obsolete.
    pub hyperopt_restart: bool,
}

impl BoRunConfig {
    /// Three random trials, twenty episodes, unit kernel, 300 RPROP iterations.
    pub fn new(domain: Domain, priors: Vec<PriorMean>, selector: SelectorPolicy) -> Self {
        let dim = domain.dim();
        Self {
            domain,
            priors: priors.into_iter().map(Arc::new).collect(),
            selector,
            init_trials: 3,
            max_iterations: 20,
            seed: 0,
            kernel_init: KernelParams::unit(dim),
            hyperopt_iters: crate::gp::rprop::DEFAULT_ITERATIONS,
            inner: InnerOptimizer::default(),
            rprop: RpropConfig::default(),
            hyperopt_restart: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.priors.is_empty() {
            return Err(Error::usage("at least one prior is required"));
        }
        if self.init_trials == 0 {
            return Err(Error::usage("init_trials must be at least 1"));
        }
        if self.max_iterations < self.init_trials {
            return Err(Error::usage(format!(
                "max_iterations ({}) must be >= init_trials ({})",
                self.max_iterations, self.init_trials
            )));
        }
        if let SelectorPolicy::FixedPrior(i) = self.selector {
            if i >= self.priors.len() {
                return Err(Error::usage(format!(
                    "fixed prior index {i} out of range for {} priors",
                    self.priors.len()
                )));
            }
        }
        if self.kernel_init.dim() != self.domain.dim() {
            return Err(Error::usage(format!(
                "kernel has {} length scales, domain {} dimensions",
                self.kernel_init.dim(),
                self.domain.dim()
            )));
        }
        if let Domain::FiniteCandidates(c) = &self.domain {
            if self.init_trials > c.len() {
                return Err(Error::usage(format!(
                    "{} initial trials requested from {} candidates",
                    self.init_trials,
                    c.len()
                )));
            }
        }
        Ok(())
    }
}

fn refit_hyperparams(model: &mut GpModel, config: &BoRunConfig) -> Result<()> {
    model.optimize_hyperparams_with(config.hyperopt_iters, &config.rprop)?;
    if config.hyperopt_restart && *model.kernel() != config.kernel_init {
        let mut fresh = model.clone();
        fresh.set_kernel(config.kernel_init.clone())?;
        fresh.optimize_hyperparams_with(config.hyperopt_iters, &config.rprop)?;
        if fresh.log_marginal_likelihood()? > model.log_marginal_likelihood()? {
            *model = fresh;
        }
    }
    Ok(())
}

/// One objective evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub episode: usize,
    /// `None` for initial random trials.
    pub selected_prior: Option<usize>,
    pub point: Vec<f64>,
    pub reward: f64,
    pub best_so_far: f64,
    /// Per-model log likelihood of the observations preceding this episode,
    /// after that iteration's hyperparameter fit.
    pub per_prior_log_likelihood: Vec<f64>,
    /// Per-model `log EI + log likelihood` at each model's EI maximizer; empty
    /// for initial trials.
    pub per_prior_log_eip: Vec<f64>,
    /// Every model had zero EI and the choice fell back to likelihood.
    pub degenerate: bool,
}

/// Uniform samples: per-coordinate on a box, without replacement on a finite set.
pub fn initial_design<R: Rng + ?Sized>(
    domain: &Domain,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::usage("initial design needs n >= 1"));
    }
    match domain {
        Domain::ContinuousBox { lo, hi } => Ok((0..n)
            .map(|_| {
                lo.iter()
                    .zip(hi)
                    .map(|(a, b)| rng.random_range(*a..=*b))
                    .collect()
            })
            .collect()),
        Domain::FiniteCandidates(c) => {
            if n > c.len() {
                return Err(Error::usage(format!(
                    "cannot draw {n} distinct candidates from {}",
                    c.len()
                )));
            }
            Ok(index::sample(rng, c.len(), n)
                .into_iter()
                .map(|i| c[i].clone())
                .collect())
        }
    }
}

/// Records plus the final fitted models.
#[derive(Clone, Debug)]
pub struct BoOutcome {
    pub records: Vec<EpisodeRecord>,
    pub models: Vec<GpModel>,
}

impl BoOutcome {
    pub fn best(&self) -> Option<&EpisodeRecord> {
        self.records
            .iter()
            .reduce(|a, b| if b.reward > a.reward { b } else { a })
    }
}

pub fn run_bo(
    config: &BoRunConfig,
    objective: impl FnMut(&[f64]) -> f64,
) -> Result<Vec<EpisodeRecord>> {
    Ok(run_bo_detailed(config, objective)?.records)
}

pub fn run_bo_detailed(
    config: &BoRunConfig,
    mut objective: impl FnMut(&[f64]) -> f64,
) -> Result<BoOutcome> {
    config.validate()?;
    let streams = Streams::new(config.seed);
    let init = initial_design(
        &config.domain,
        config.init_trials,
        &mut streams.rng(Stream::InitialDesign),
    )?;
    let mut selector_rng = streams.rng(Stream::Selector);
    let mut models = config
        .priors
        .iter()
        .map(|p| GpModel::new(config.kernel_init.clone(), Arc::clone(p)))
        .collect::<Result<Vec<_>>>()?;
    let mut obs = ObservationSet::new();
    let mut records = Vec::with_capacity(config.max_iterations);
    let mut best_so_far = f64::NEG_INFINITY;

    for it in 0..config.max_iterations {
        if config.hyperopt_iters > 0 && obs.len() >= 2 {
            models
                .par_iter_mut()
                .try_for_each(|m| refit_hyperparams(m, config))?;
        }

        let (point, selected, lls, log_eips, degenerate) = if it < config.init_trials {
            let lls = models
                .iter()
                .map(GpModel::log_marginal_likelihood)
                .collect::<Result<Vec<_>>>()?;
            (init[it].clone(), None, lls, Vec::new(), false)
        } else {
            let ctx = AcquisitionContext::new(obs.clone())?;
            let scores = score_models(&models, &config.domain, &ctx, &config.inner, |i| {
                streams.rng_at(Stream::InnerOptimizer, &[it as u64, i as u64])
            })?;
            let (idx, degenerate) = match config.selector {
                SelectorPolicy::Mlei => select_by_eip(&scores)?,
                SelectorPolicy::FixedPrior(i) => (i, false),
                SelectorPolicy::RandomPrior => (selector_rng.random_range(0..models.len()), false),
            };
            log::debug!(
                "episode {}: prior {} (log_eip {:.4}, degenerate {}), signal {:.4}, lengths {:.3?}",
                it + 1,
                idx,
                scores[idx].log_eip,
                degenerate,
                models[idx].kernel().signal_sigma(),
                models[idx].kernel().length_scales()
            );
            (
                scores[idx].argmax_point.clone(),
                Some(idx),
                scores.iter().map(|s| s.log_likelihood).collect(),
                scores.iter().map(|s| s.log_eip).collect(),
                degenerate,
            )
        };

        let reward = objective(&point);
        if !reward.is_finite() {
            return Err(Error::NonFiniteObjective {
                episode: it + 1,
                point,
                value: reward,
            });
        }
        best_so_far = best_so_far.max(reward);
        obs.push(point.clone(), reward)?;
        for m in models.iter_mut() {
            m.update(point.clone(), reward)?;
        }
        records.push(EpisodeRecord {
            episode: it + 1,
            selected_prior: selected,
            point,
            reward,
            best_so_far,
            per_prior_log_likelihood: lls,
            per_prior_log_eip: log_eips,
            degenerate,
        });
    }
    Ok(BoOutcome { records, models })
}
