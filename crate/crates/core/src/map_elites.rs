//! Grid MAP-Elites: random initialization, then select an occupied cell,
//! mutate its elite, evaluate, insert.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::priors::{BehaviorMap, GridSpec, MapEntry};
use crate::rng::{Stream, Streams};

pub const DEFAULT_INIT_COUNT: usize = 500;
pub const DEFAULT_BUDGET: usize = 100_000;
/// Mutation standard deviation as a fraction of each parameter's range.
pub const DEFAULT_MUTATION_SIGMA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct MapElitesConfig {
    pub grid: GridSpec,
    pub init_count: usize,
    pub budget: usize,
    pub mutation_sigma: f64,
    pub param_lo: Vec<f64>,
    pub param_hi: Vec<f64>,
    pub seed: u64,
}

impl MapElitesConfig {
    pub fn new(grid: GridSpec, param_lo: Vec<f64>, param_hi: Vec<f64>) -> Self {
        Self {
            grid,
            init_count: DEFAULT_INIT_COUNT,
            budget: DEFAULT_BUDGET,
            mutation_sigma: DEFAULT_MUTATION_SIGMA,
            param_lo,
            param_hi,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.init_count == 0 || self.budget < self.init_count {
            return Err(Error::usage(format!(
                "need 1 <= init_count <= budget, got init_count={} budget={}",
                self.init_count, self.budget
            )));
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma > 0.0) {
            return Err(Error::usage("mutation_sigma must be positive"));
        }
        if self.param_lo.is_empty()
            || self.param_lo.len() != self.param_hi.len()
            || self
                .param_lo
                .iter()
                .zip(&self.param_hi)
                .any(|(a, b)| !(a < b))
        {
            return Err(Error::usage("parameter bounds need matching lo < hi"));
        }
        Ok(())
    }
}

pub fn descriptor_cell(grid: &GridSpec, descriptor: &[f64]) -> Result<Vec<usize>> {
    grid.cell_of(descriptor)
}

pub fn insert(
    map: &mut BehaviorMap,
    descriptor: Vec<f64>,
    params: Vec<f64>,
    reward: f64,
) -> Result<bool> {
    map.insert(descriptor, params, reward)
}

pub fn map_elites_run(
    config: &MapElitesConfig,
    eval_fn: impl FnMut(&[f64]) -> (Vec<f64>, f64),
) -> Result<BehaviorMap> {
    map_elites_run_with_checkpoints(config, eval_fn, 0, |_, _| {})
}

/// As [`map_elites_run`], calling `on_checkpoint(evaluations, map)` every
/// `every` evaluations (never when `every == 0`) and once at the end.
///
/// Candidates with non-finite output or a descriptor off the grid are
/// discarded but still count against the budget.
pub fn map_elites_run_with_checkpoints(
    config: &MapElitesConfig,
    mut eval_fn: impl FnMut(&[f64]) -> (Vec<f64>, f64),
    every: usize,
    mut on_checkpoint: impl FnMut(usize, &BehaviorMap),
) -> Result<BehaviorMap> {
    config.validate()?;
    let mut rng = Streams::new(config.seed).rng(Stream::MapElites);
    let pdim = config.param_lo.len();
    let mut map = BehaviorMap::new(config.grid.clone(), pdim);
    let mut occupied: Vec<Vec<usize>> = Vec::new();
    let noise: Vec<Normal<f64>> = config
        .param_lo
        .iter()
        .zip(&config.param_hi)
        .map(|(a, b)| Normal::new(0.0, config.mutation_sigma * (b - a)).expect("positive sigma"))
        .collect();

    for n in 0..config.budget {
        let params: Vec<f64> = if n < config.init_count || occupied.is_empty() {
            config
                .param_lo
                .iter()
                .zip(&config.param_hi)
                .map(|(a, b)| rng.random_range(*a..=*b))
                .collect()
        } else {
            let parent = &occupied[rng.random_range(0..occupied.len())];
            let elite = &map.get(parent).expect("occupied cell").params;
            elite
                .iter()
                .zip(&noise)
                .enumerate()
                .map(|(i, (v, d))| {
                    (v + d.sample(&mut rng)).clamp(config.param_lo[i], config.param_hi[i])
                })
                .collect()
        };
        let (descriptor, reward) = eval_fn(&params);
        if reward.is_finite() && descriptor.iter().all(|d| d.is_finite()) {
            if let Ok(index) = config.grid.cell_of(&descriptor) {
                let fresh = map.get(&index).is_none();
                if map.insert_at(
                    index.clone(),
                    MapEntry {
                        descriptor,
                        params,
                        reward,
                    },
                ) && fresh
                {
                    occupied.push(index);
                }
            }
        }
        if every > 0 && (n + 1) % every == 0 && n + 1 != config.budget {
            on_checkpoint(n + 1, &map);
        }
    }
    on_checkpoint(config.budget, &map);
    Ok(map)
}
