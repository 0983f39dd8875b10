//! Reaching with a 5-joint planar arm: plain EI against MLEI choosing among
//! ten target priors. A short run; the `bench-arm` subcommand runs the full one.

use mlei::benchmarks::{run_arm_experiment, ArmExperimentOptions, ArmVariant};
use mlei::stats::{mann_whitney_u, significance_stars, summarize, values_at, Alternative, Metric};

fn main() -> mlei::Result<()> {
    let opts = ArmExperimentOptions {
        replicates: 8,
        episodes: 12,
        hyperopt_iters: 100,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for v in [ArmVariant::EiNull, ArmVariant::Mlei] {
        rows.extend(run_arm_experiment(v, &opts)?);
    }

    println!("median best distance to target");
    for s in summarize(&rows, Metric::BestDistance)? {
        if s.episode % 3 == 0 {
            println!(
                "  {:<8} ep {:>2}: {:.3} [{:.3}, {:.3}]",
                s.variant, s.episode, s.median, s.q1, s.q3
            );
        }
    }
    let a = values_at(&rows, "mlei", 12, Metric::BestDistance)?;
    let b = values_at(&rows, "ei_null", 12, Metric::BestDistance)?;
    let t = mann_whitney_u(&a, &b, Alternative::TwoSided)?;
    println!(
        "episode 12: U = {}, p = {:.4} {}",
        t.u_statistic,
        t.p_value,
        significance_stars(t.p_value)
    );
    Ok(())
}
