//! Damage adaptation with one behavior map per hypothesized arm condition.
//!
//! Each condition's map is illuminated by MAP-Elites on an arm with that
//! condition's locked joints, using the end-effector position as descriptor.
//! For a reaching task the prior of a map predicts, per cell, the reward of
//! landing on the stored descriptor. BO runs over the union of occupied
//! cells; trying a cell replays the true condition's own elite for that cell
//! on the true arm (or, if the true arm has no elite there, the elite of the
//! lowest-index prior map that does).

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::arm::ArmConfig;
use crate::bo::{run_bo, BoRunConfig, EpisodeRecord, SelectorPolicy};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::KernelParams;
use crate::map_elites::{map_elites_run, MapElitesConfig};
use crate::priors::{BehaviorMap, GridSpec, PriorMean};
use crate::results::{rows_from_records, ResultRow};
use crate::rng::{derive_seed, Stream};

/// End-effector grid: [−5, 5]², 20 × 20 cells.
pub fn repertoire_grid() -> GridSpec {
    GridSpec::uniform(2, -5.0, 5.0, 20).expect("static grid")
}

pub fn repertoire_config(seed: u64) -> MapElitesConfig {
    let mut c = MapElitesConfig::new(repertoire_grid(), vec![-PI; 5], vec![PI; 5]);
    c.seed = seed;
    c
}

/// Descriptor: end-effector position. Reward: −Σ|θ_i| over the joint angles
/// actually applied, favoring the least contorted posture per cell.
pub fn arm_repertoire_eval(arm: &ArmConfig) -> impl FnMut(&[f64]) -> (Vec<f64>, f64) + '_ {
    move |params| match arm.effective_angles(params) {
        Ok((eff, _)) => {
            let p = super::arm::planar_chain(&eff, arm.link_length);
            (p.to_vec(), -eff.iter().map(|a| a.abs()).sum::<f64>())
        }
        Err(_) => (vec![f64::NAN; 2], f64::NAN),
    }
}

pub fn generate_condition_map(arm: &ArmConfig, config: &MapElitesConfig) -> Result<BehaviorMap> {
    map_elites_run(config, arm_repertoire_eval(arm))
}

/// A named arm condition.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub name: String,
    pub arm: ArmConfig,
}

impl Condition {
    /// `intact` or `lock:<joint>[,<joint>...]`, locked joints held at 0 rad.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "intact" {
            return Ok(Self {
                name: s.into(),
                arm: ArmConfig::default(),
            });
        }
        let Some(list) = s.strip_prefix("lock:") else {
            return Err(Error::usage(format!(
                "unknown condition {s:?} (expected intact or lock:<joint>)"
            )));
        };
        let joints = list
            .split(',')
            .map(|j| {
                j.trim()
                    .parse::<usize>()
                    .map(|j| (j, 0.0))
                    .map_err(|_| Error::usage(format!("bad joint index {j:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: s.into(),
            arm: ArmConfig::default().with_locked_joints(joints)?,
        })
    }
}

/// Lock joint 2, lock joint 3, lock joint 4, intact.
pub fn default_conditions() -> Vec<Condition> {
    ["lock:2", "lock:3", "lock:4", "intact"]
        .iter()
        .map(|s| Condition::parse(s).expect("static condition"))
        .collect()
}

#[derive(Clone, Debug)]
pub struct MapAdaptationTask {
    priors: Vec<BehaviorMap>,
    true_arm: ArmConfig,
    true_map: BehaviorMap,
    target: [f64; 2],
    fill_value: f64,
}

impl MapAdaptationTask {
    /// `true_map` is the repertoire of the true condition; pass a clone of the
    /// matching prior map when the true condition is among the priors.
    pub fn new(
        priors: Vec<BehaviorMap>,
        true_arm: ArmConfig,
        true_map: BehaviorMap,
        target: [f64; 2],
    ) -> Result<Self> {
        if priors.is_empty() {
            return Err(Error::usage("map adaptation needs at least one prior map"));
        }
        if priors.iter().any(BehaviorMap::is_empty) || true_map.is_empty() {
            return Err(Error::usage("behavior maps must not be empty"));
        }
        let grid = priors[0].grid();
        if priors
            .iter()
            .chain(std::iter::once(&true_map))
            .any(|m| m.grid() != grid)
        {
            return Err(Error::usage("all maps must share the same grid"));
        }
        if grid.dim() != 2 {
            return Err(Error::usage(
                "arm maps need a 2-dimensional descriptor grid",
            ));
        }
        if priors
            .iter()
            .chain(std::iter::once(&true_map))
            .any(|m| m.param_dim() != true_arm.link_count)
        {
            return Err(Error::usage(format!(
                "map parameters must be {} joint angles",
                true_arm.link_count
            )));
        }
        let fill_value = -2.0 * true_arm.reach();
        Ok(Self {
            priors,
            true_arm: true_arm.with_target(target),
            true_map,
            target,
            fill_value,
        })
    }

    pub fn with_fill_value(mut self, fill_value: f64) -> Self {
        self.fill_value = fill_value;
        self
    }

    pub fn priors(&self) -> &[BehaviorMap] {
        &self.priors
    }

    pub fn target(&self) -> [f64; 2] {
        self.target
    }

    pub fn fill_value(&self) -> f64 {
        self.fill_value
    }

    pub fn grid(&self) -> &GridSpec {
        self.priors[0].grid()
    }

    /// Tabular priors whose cell rewards are `−‖descriptor − target‖`.
    pub fn prior_means(&self) -> Vec<PriorMean> {
        let t = self.target;
        self.priors
            .iter()
            .map(|m| {
                let rewards =
                    m.with_rewards(|e| -(e.descriptor[0] - t[0]).hypot(e.descriptor[1] - t[1]));
                PriorMean::tabular(rewards, self.fill_value)
            })
            .collect()
    }

    /// Union of occupied cells across the prior maps, in index order.
    pub fn candidate_cells(&self) -> Vec<Vec<usize>> {
        let set: BTreeSet<&Vec<usize>> =
            self.priors.iter().flat_map(|m| m.cell_indices()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::from_cells(self.grid(), &self.candidate_cells())
    }

    /// True reward of trying the cell containing `point`.
    pub fn execute(&self, point: &[f64]) -> Result<f64> {
        let cell = self.grid().cell_of(point)?;
        let entry = self
            .true_map
            .get(&cell)
            .or_else(|| self.priors.iter().find_map(|m| m.get(&cell)))
            .ok_or_else(|| Error::usage(format!("no map holds an elite for cell {cell:?}")))?;
        self.true_arm.reward(&entry.params)
    }
}

#[derive(Clone, Debug)]
pub struct AdaptationOptions {
    pub replicates: usize,
    pub episodes: usize,
    pub init_trials: usize,
    pub seed: u64,
    pub hyperopt_iters: usize,
    pub kernel_init: KernelParams,
}

impl Default for AdaptationOptions {
    fn default() -> Self {
        Self {
            replicates: 30,
            episodes: 20,
            init_trials: 3,
            seed: 0,
            hyperopt_iters: crate::gp::rprop::DEFAULT_ITERATIONS,
            kernel_init: KernelParams::unit(2),
        }
    }
}

/// Episode log of one replicate.
#[derive(Clone, Debug)]
pub struct AdaptationRun {
    pub replicate: usize,
    pub records: Vec<EpisodeRecord>,
}

/// Runs `replicates` independent BO runs on the task. Random trials and
/// inner-optimizer streams depend only on `(seed, replicate)`, so different
/// selectors see matched starts.
pub fn run_map_adaptation_experiment(
    task: &MapAdaptationTask,
    selector: SelectorPolicy,
    opts: &AdaptationOptions,
) -> Result<Vec<AdaptationRun>> {
    let domain = task.domain()?;
    let priors = task.prior_means();
    (0..opts.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut cfg = BoRunConfig::new(domain.clone(), priors.clone(), selector);
            cfg.init_trials = opts.init_trials;
            cfg.max_iterations = opts.episodes;
            cfg.seed = derive_seed(opts.seed, Stream::Replicate, &[rep as u64]);
            cfg.kernel_init = opts.kernel_init.clone();
            cfg.hyperopt_iters = opts.hyperopt_iters;
            let records = run_bo(&cfg, |x| task.execute(x).unwrap_or(f64::NAN))?;
            Ok(AdaptationRun {
                replicate: rep,
                records,
            })
        })
        .collect()
}

pub fn adaptation_rows(variant: &str, runs: &[AdaptationRun]) -> Vec<ResultRow> {
    runs.iter()
        .flat_map(|r| rows_from_records(variant, r.replicate, &r.records))
        .collect()
}
