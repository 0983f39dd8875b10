//! Build an end-effector repertoire for a damaged arm with MAP-Elites and
//! write it as a MAP file.

use mlei::benchmarks::{arm_repertoire_eval, generate_condition_map, repertoire_config, Condition};
use mlei::map_elites::map_elites_run_with_checkpoints;

fn main() -> mlei::Result<()> {
    let cond = Condition::parse("lock:2")?;
    let mut cfg = repertoire_config(5);
    cfg.budget = 50_000;

    map_elites_run_with_checkpoints(&cfg, arm_repertoire_eval(&cond.arm), 10_000, |n, map| {
        println!(
            "{n:>6} evaluations: {:>3} cells, coverage {:.3}",
            map.len(),
            map.coverage()
        );
    })?;

    // Same seed, same map.
    let map = generate_condition_map(&cond.arm, &cfg)?;
    let path = std::env::temp_dir().join("lock2.map");
    map.save(&path)?;
    println!("wrote {}", path.display());
    if let Some((idx, e)) = map.iter().max_by(|a, b| a.1.reward.total_cmp(&b.1.reward)) {
        println!(
            "least contorted elite in cell {idx:?}: reward {:.3}, reaches {:.3?}",
            e.reward, e.descriptor
        );
    }
    Ok(())
}
