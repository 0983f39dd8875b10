use mlei::bo::{run_bo_detailed, BoRunConfig, SelectorPolicy};
use mlei::domain::Domain;
use mlei::gp::KernelParams;
use mlei::priors::PriorMean;

/// Branin, negated so that larger is better; maximum −0.397887.
fn branin(x: &[f64]) -> f64 {
    let (a, b, c) = (
        1.0,
        5.1 / (4.0 * std::f64::consts::PI.powi(2)),
        5.0 / std::f64::consts::PI,
    );
    let (r, s, t) = (6.0, 10.0, 1.0 / (8.0 * std::f64::consts::PI));
    -(a * (x[1] - b * x[0].powi(2) + c * x[0] - r).powi(2) + s * (1.0 - t) * x[0].cos() + s)
}

fn main() -> mlei::Result<()> {
    let domain = Domain::continuous(vec![-5.0, 0.0], vec![10.0, 15.0])?;
    // A pessimistic constant, zero, and a rough constant guess of the mean level.
    let priors = vec![
        PriorMean::Constant(-100.0),
        PriorMean::Zero,
        PriorMean::Constant(-30.0),
    ];
    let mut cfg = BoRunConfig::new(domain, priors, SelectorPolicy::Mlei);
    cfg.max_iterations = 25;
    cfg.kernel_init = KernelParams::new(10.0, vec![3.0, 3.0], 1e-3)?;
    cfg.seed = 11;

    let out = run_bo_detailed(&cfg, branin)?;
    for r in &out.records {
        println!(
            "ep {:>2}  prior {:>4}  f = {:>9.4}  best {:>9.4}",
            r.episode,
            r.selected_prior.map_or("init".into(), |i| i.to_string()),
            r.reward,
            r.best_so_far
        );
    }
    let best = out.best().expect("ran at least one episode");
    println!(
        "best point {:.4?} value {:.5} (optimum -0.39789)",
        best.point, best.reward
    );
    Ok(())
}
