//! Fit a GP to noisy samples of a 1-D function, tune hyperparameters with
//! iRprop−, and print the posterior on a grid.

use std::sync::Arc;

use mlei::gp::{GpModel, KernelParams, ObservationSet};
use mlei::priors::PriorMean;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mlei::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let truth = |x: f64| (3.0 * x).sin() + 0.5 * x;
    let xs: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.random_range(-2.0..2.0)]).collect();
    let ys = xs
        .iter()
        .map(|x| truth(x[0]) + rng.random_range(-0.05..0.05))
        .collect();
    let data = ObservationSet::from_parts(xs, ys)?;

    let mut model = GpModel::fit(
        KernelParams::new(1.0, vec![1.0], 0.05)?,
        Arc::new(PriorMean::Zero),
        data,
    )?;
    println!(
        "log likelihood before tuning: {:.4}",
        model.log_marginal_likelihood()?
    );
    let k = model.optimize_hyperparams(300)?;
    println!(
        "after tuning: {:.4} (signal {:.3}, length {:.3}, noise {:.3})",
        model.log_marginal_likelihood()?,
        k.signal_sigma(),
        k.length_scales()[0],
        k.noise_sigma()
    );

    println!("{:>6} {:>9} {:>9} {:>9}", "x", "truth", "mean", "sd");
    for i in 0..=16 {
        let x = -2.0 + 0.25 * i as f64;
        let p = model.predict(&[x])?;
        println!(
            "{x:>6.2} {:>9.4} {:>9.4} {:>9.4}",
            truth(x),
            p.mean,
            p.std_dev()
        );
    }
    Ok(())
}
