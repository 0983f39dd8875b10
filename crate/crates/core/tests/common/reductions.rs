//! Reference drivers built from the library's GP and acquisition primitives,
//! used to check that the selector layers reduce to what they should.

use std::sync::Arc;

use mlei::acquisition::{maximize_ei_with, mlei_select, AcquisitionContext, InnerOptimizer};
use mlei::bo::{initial_design, BoRunConfig};
use mlei::domain::Domain;
use mlei::gp::{GpModel, KernelParams, ObservationSet};
use mlei::priors::PriorMean;
use mlei::rng::{Stream, Streams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ei_reference, uniform_point, DenseGp};

/// Plain EI on the first prior of `cfg`, consuming the same named random
/// streams as the library loop.
pub fn plain_ei_points(cfg: &BoRunConfig, f: impl Fn(&[f64]) -> f64) -> Vec<Vec<f64>> {
    let streams = Streams::new(cfg.seed);
    let init = initial_design(
        &cfg.domain,
        cfg.init_trials,
        &mut streams.rng(Stream::InitialDesign),
    )
    .unwrap();
    let mut model = GpModel::new(cfg.kernel_init.clone(), Arc::clone(&cfg.priors[0])).unwrap();
    let mut points = Vec::new();
    for it in 0..cfg.max_iterations {
        if cfg.hyperopt_iters > 0 && model.data().len() >= 2 {
            model
                .optimize_hyperparams_with(cfg.hyperopt_iters, &cfg.rprop)
                .unwrap();
            if cfg.hyperopt_restart && model.kernel() != &cfg.kernel_init {
                let mut fresh = model.clone();
                fresh.set_kernel(cfg.kernel_init.clone()).unwrap();
                fresh
                    .optimize_hyperparams_with(cfg.hyperopt_iters, &cfg.rprop)
                    .unwrap();
                if fresh.log_marginal_likelihood().unwrap()
                    > model.log_marginal_likelihood().unwrap()
                {
                    model = fresh;
                }
            }
        }
        let x = if it < cfg.init_trials {
            init[it].clone()
        } else {
            let best = model.data().best().unwrap();
            let mut rng = streams.rng_at(Stream::InnerOptimizer, &[it as u64, 0]);
            maximize_ei_with(&model, &cfg.domain, best, &cfg.inner, &mut rng)
                .unwrap()
                .point
        };
        let y = f(&x);
        model.update(x.clone(), y).unwrap();
        points.push(x);
    }
    points
}

/// Outcome of one three-prior selection on a finite 11×11 grid:
/// `(library prior, library point, oracle prior, oracle point)`.
pub type SelectionPair = (usize, Vec<f64>, usize, Vec<f64>);

/// Runs MLEI selection for three models sharing one kernel, and the dense
/// brute-force argmax of EI × likelihood over the same grid.
pub fn three_prior_selection(seed: u64) -> SelectionPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel = KernelParams::new(
        rng.random_range(0.5..1.5),
        vec![rng.random_range(0.3..1.0); 2],
        0.05,
    )
    .unwrap();
    let xs: Vec<Vec<f64>> = (0..3)
        .map(|_| uniform_point(&mut rng, 2, -1.0, 1.0))
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| -(x[0] - 0.3).powi(2) - x[1].powi(2))
        .collect();
    let priors = [
        PriorMean::Zero,
        PriorMean::Constant(rng.random_range(-1.0..0.5)),
        PriorMean::Constant(rng.random_range(-1.0..0.5)),
    ];
    let grid: Vec<Vec<f64>> = (0..11)
        .flat_map(|i| (0..11).map(move |j| vec![-1.0 + 0.2 * i as f64, -1.0 + 0.2 * j as f64]))
        .collect();
    let domain = Domain::finite(grid.clone()).unwrap();
    let obs = ObservationSet::from_parts(xs.clone(), ys.clone()).unwrap();
    let models: Vec<GpModel> = priors
        .iter()
        .map(|p| GpModel::fit(kernel.clone(), Arc::new(p.clone()), obs.clone()).unwrap())
        .collect();
    let ctx = AcquisitionContext::new(obs).unwrap();
    let sel = mlei_select(&models, &domain, &ctx, &InnerOptimizer::default(), |_| {
        ChaCha8Rng::seed_from_u64(0)
    })
    .unwrap();

    let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut oracle = (f64::NEG_INFINITY, 0usize, 0usize);
    for (pi, p) in priors.iter().enumerate() {
        let dense = DenseGp {
            signal: kernel.signal_sigma(),
            lengths: kernel.length_scales(),
            noise: kernel.noise_sigma(),
            xs: xs.clone(),
            ys: ys.clone(),
            prior_at_data: xs.iter().map(|x| p.eval(x).unwrap()).collect(),
        };
        let lik = dense.log_likelihood().exp();
        for (ci, c) in grid.iter().enumerate() {
            let (m, v) = dense.predict(c, p.eval(c).unwrap());
            let eip = ei_reference(m, v.max(0.0).sqrt(), best) * lik;
            if eip > oracle.0 {
                oracle = (eip, pi, ci);
            }
        }
    }
    (sel.prior_index, sel.point, oracle.1, grid[oracle.2].clone())
}
