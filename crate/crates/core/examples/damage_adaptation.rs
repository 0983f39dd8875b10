//! Damage recovery: repertoires for four arm conditions serve as priors, the
//! arm actually has joint 3 locked, and MLEI picks which repertoire to trust.

use mlei::benchmarks::{
    default_conditions, generate_condition_map, repertoire_config, run_map_adaptation_experiment,
    AdaptationOptions, MapAdaptationTask,
};
use mlei::bo::SelectorPolicy;

fn main() -> mlei::Result<()> {
    let conditions = default_conditions();
    let mut maps = Vec::new();
    for (i, c) in conditions.iter().enumerate() {
        let mut cfg = repertoire_config(i as u64);
        cfg.budget = 30_000;
        maps.push(generate_condition_map(&c.arm, &cfg)?);
        println!("{:<7} repertoire: {} cells", c.name, maps[i].len());
    }

    let truth = 1;
    let task = MapAdaptationTask::new(
        maps.clone(),
        conditions[truth].arm.clone(),
        maps[truth].clone(),
        [-1.5, 2.5],
    )?;
    let opts = AdaptationOptions {
        replicates: 5,
        episodes: 10,
        ..Default::default()
    };
    let runs = run_map_adaptation_experiment(&task, SelectorPolicy::Mlei, &opts)?;
    for run in &runs {
        let picks: Vec<String> = run
            .records
            .iter()
            .map(|r| {
                r.selected_prior
                    .map_or("-".into(), |i| conditions[i].name.clone())
            })
            .collect();
        let last = run.records.last().expect("episodes > 0");
        println!(
            "replicate {}: best distance {:.3}, picks {}",
            run.replicate,
            -last.best_so_far,
            picks.join(" ")
        );
    }
    Ok(())
}
