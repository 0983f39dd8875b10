//! One MLEI decision: three GPs share data but start from different prior
//! means, and the selector weighs each model's best EI by its likelihood.

use std::sync::Arc;

use mlei::acquisition::{mlei_select, AcquisitionContext, InnerOptimizer};
use mlei::domain::Domain;
use mlei::gp::{GpModel, KernelParams, ObservationSet};
use mlei::priors::PriorMean;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mlei::Result<()> {
    let f = |x: f64| -(x - 0.6).powi(2);
    let xs = vec![vec![-0.8], vec![0.1], vec![0.9]];
    let ys: Vec<f64> = xs.iter().map(|x| f(x[0])).collect();
    let obs = ObservationSet::from_parts(xs, ys)?;

    let priors = [
        PriorMean::Zero,
        PriorMean::Constant(-0.5),
        PriorMean::Constant(-5.0),
    ];
    let models = priors
        .iter()
        .map(|p| {
            GpModel::fit(
                KernelParams::new(0.5, vec![0.4], 1e-3)?,
                Arc::new(p.clone()),
                obs.clone(),
            )
        })
        .collect::<mlei::Result<Vec<_>>>()?;

    let domain = Domain::continuous(vec![-1.0], vec![1.0])?;
    let ctx = AcquisitionContext::new(obs)?;
    let sel = mlei_select(&models, &domain, &ctx, &InnerOptimizer::default(), |i| {
        ChaCha8Rng::seed_from_u64(i as u64)
    })?;

    for s in &sel.scores {
        println!(
            "prior {} {:<16} argmax {:>7.4}  log EI {:>9.4}  log lik {:>9.4}  sum {:>9.4}",
            s.prior_index,
            format!("{:?}", priors[s.prior_index]),
            s.argmax_point[0],
            s.log_ei,
            s.log_likelihood,
            s.log_eip
        );
    }
    println!(
        "selected prior {} -> evaluate x = {:.4}",
        sel.prior_index, sel.point[0]
    );
    Ok(())
}
