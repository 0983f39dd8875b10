use mlei::benchmarks::{arm_repertoire_eval, repertoire_config, ArmConfig, Condition};
use mlei::map_elites::{map_elites_run, map_elites_run_with_checkpoints, MapElitesConfig};
use mlei::priors::{BehaviorMap, GridSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arm_config(seed: u64, budget: usize) -> MapElitesConfig {
    let mut c = repertoire_config(seed);
    c.budget = budget;
    c
}

#[test]
fn elites_only_improve_and_coverage_only_grows() {
    let arm = ArmConfig::default();
    let mut snapshots: Vec<BehaviorMap> = Vec::new();
    map_elites_run_with_checkpoints(
        &arm_config(3, 20_000),
        arm_repertoire_eval(&arm),
        1000,
        |_, m| snapshots.push(m.clone()),
    )
    .unwrap();
    assert_eq!(snapshots.len(), 20);
    for w in snapshots.windows(2) {
        assert!(w[1].len() >= w[0].len());
        for (idx, old) in w[0].iter() {
            let new = w[1].get(idx).expect("occupied cells stay occupied");
            assert!(new.reward >= old.reward);
        }
    }
}

#[test]
fn same_seed_same_map() {
    let arm = ArmConfig::default();
    let a = map_elites_run(&arm_config(7, 5000), arm_repertoire_eval(&arm)).unwrap();
    let b = map_elites_run(&arm_config(7, 5000), arm_repertoire_eval(&arm)).unwrap();
    assert_eq!(a, b);
    let c = map_elites_run(&arm_config(8, 5000), arm_repertoire_eval(&arm)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn stored_elites_sit_in_their_cells() {
    let damaged = Condition::parse("lock:1").unwrap().arm;
    let map = map_elites_run(&arm_config(0, 10_000), arm_repertoire_eval(&damaged)).unwrap();
    let grid = map.grid().clone();
    for (idx, e) in map.iter() {
        assert_eq!(&grid.cell_of(&e.descriptor).unwrap(), idx);
        let c = grid.centroid(idx);
        for d in 0..2 {
            assert!((c[d] - e.descriptor[d]).abs() <= 0.5 * grid.cell_width(d) + 1e-12);
        }
        // The stored reward is what re-evaluating the elite gives.
        let (desc, reward) = arm_repertoire_eval(&damaged)(&e.params);
        assert_eq!(desc, e.descriptor);
        assert_eq!(reward, e.reward);
    }
}

#[test]
fn invalid_evaluations_are_dropped() {
    let mut c = MapElitesConfig::new(
        GridSpec::uniform(1, 0.0, 1.0, 4).unwrap(),
        vec![0.0],
        vec![2.0],
    );
    c.init_count = 50;
    c.budget = 500;
    // Descriptors above 1 fall off the grid; negative rewards on the left half are NaN.
    let map = map_elites_run(&c, |p| {
        (vec![p[0]], if p[0] < 0.5 { f64::NAN } else { -p[0] })
    })
    .unwrap();
    assert!(map
        .iter()
        .all(|(_, e)| e.descriptor[0] >= 0.5 && e.descriptor[0] <= 1.0));
    assert!(map.len() <= 2);
}

#[test]
fn bad_configs_are_usage_errors() {
    let mut c = arm_config(0, 10);
    c.init_count = 20;
    assert!(map_elites_run(&c, |_| (vec![0.0, 0.0], 0.0))
        .unwrap_err()
        .is_usage());
    let mut c = arm_config(0, 100);
    c.mutation_sigma = 0.0;
    assert!(map_elites_run(&c, |_| (vec![0.0, 0.0], 0.0))
        .unwrap_err()
        .is_usage());
}

fn random_map(seed: u64) -> BehaviorMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = GridSpec::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![5, 5]).unwrap();
    let mut map = BehaviorMap::new(grid, 3);
    for _ in 0..40 {
        let d = vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)];
        let p = (0..3).map(|_| rng.random_range(-1e3..1e3)).collect();
        map.insert(d, p, rng.random_range(-10.0..10.0)).unwrap();
    }
    map
}

#[test]
fn map_files_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let map = random_map(seed);
        let path = dir.path().join(format!("m{seed}.map"));
        map.save(&path).unwrap();
        assert_eq!(BehaviorMap::load(&path).unwrap(), map);
        assert_eq!(BehaviorMap::parse(&map.to_map_string()).unwrap(), map);
    }
}

#[test]
fn malformed_map_files_are_rejected() {
    let text = random_map(1).to_map_string();
    // Dropping the params field of the first row.
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cut = lines[1].rfind('|').unwrap();
    lines[1].truncate(cut);
    let short_row = lines.join("\n");
    let garbled = text.replacen('.', "x", 3);
    let no_header = text.lines().skip(1).collect::<Vec<_>>().join("\n");
    for bad in [String::new(), short_row, garbled, no_header] {
        assert!(BehaviorMap::parse(&bad).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn insert_keeps_the_best(rewards in proptest::collection::vec(-100.0f64..100.0, 1..30)) {
        let grid = GridSpec::uniform(1, 0.0, 1.0, 1).unwrap();
        let mut map = BehaviorMap::new(grid, 1);
        for (i, r) in rewards.iter().enumerate() {
            map.insert(vec![0.5], vec![i as f64], *r).unwrap();
        }
        let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first_best = rewards.iter().position(|r| *r == best).unwrap();
        let e = map.get(&[0]).unwrap();
        prop_assert_eq!(e.reward, best);
        prop_assert_eq!(e.params[0], first_best as f64);
    }

    #[test]
    fn cells_contain_their_descriptors(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let grid = mlei::benchmarks::repertoire_grid();
        let idx = grid.cell_of(&[x, y]).unwrap();
        let bounds = grid.cell_bounds(&idx);
        prop_assert!(bounds[0].0 <= x && x <= bounds[0].1);
        prop_assert!(bounds[1].0 <= y && y <= bounds[1].1);
    }
}
