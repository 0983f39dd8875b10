//! Planar reaching arm and the transfer-learning experiment over ten
//! target priors.

use std::f64::consts::PI;

use rand::Rng;

use crate::bo::{run_bo, BoRunConfig, SelectorPolicy};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::KernelParams;
use crate::priors::PriorMean;
use crate::results::{rows_from_records, ResultRow};
use crate::rng::{derive_seed, Stream, Streams};

pub const DEFAULT_LINK_COUNT: usize = 5;
pub const DEFAULT_LINK_LENGTH: f64 = 1.0;
pub const DEFAULT_TARGET: [f64; 2] = [3.0, 3.0];

/// Targets of priors 2–5: good, fair, not so good, bad.
pub const FIXED_PRIOR_TARGETS: [[f64; 2]; 4] = [[3.6, 3.3], [2.0, 2.0], [0.0, 0.0], [-3.0, -3.0]];

/// Mean of the pessimistic constant-prior baseline.
pub const PESSIMISTIC_CONSTANT: f64 = -7.0;

/// End effector of a chain with cumulative relative joint angles, base at
/// the origin, zero configuration stretched along +x.
pub fn planar_chain(angles: &[f64], link_length: f64) -> [f64; 2] {
    let mut heading = 0.0;
    let mut pos = [0.0, 0.0];
    for a in angles {
        heading += a;
        pos[0] += link_length * heading.cos();
        pos[1] += link_length * heading.sin();
    }
    pos
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArmConfig {
    pub link_count: usize,
    pub link_length: f64,
    pub joint_bounds: (f64, f64),
    pub target: [f64; 2],
    locked_joints: Vec<(usize, f64)>,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            link_count: DEFAULT_LINK_COUNT,
            link_length: DEFAULT_LINK_LENGTH,
            joint_bounds: (-PI, PI),
            target: DEFAULT_TARGET,
            locked_joints: Vec::new(),
        }
    }
}

/// Result of forward kinematics; `clamped` is set when a commanded angle was
/// outside the joint bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reach {
    pub position: [f64; 2],
    pub clamped: bool,
}

impl ArmConfig {
    pub fn with_target(mut self, target: [f64; 2]) -> Self {
        self.target = target;
        self
    }

    /// Joints held at fixed angles regardless of the command.
    pub fn with_locked_joints(mut self, locked: Vec<(usize, f64)>) -> Result<Self> {
        let mut seen = vec![false; self.link_count];
        for &(j, a) in &locked {
            if j >= self.link_count {
                return Err(Error::usage(format!(
                    "locked joint {j} >= link count {}",
                    self.link_count
                )));
            }
            if seen[j] {
                return Err(Error::usage(format!("joint {j} locked twice")));
            }
            if !a.is_finite() {
                return Err(Error::usage("locked angle must be finite"));
            }
            seen[j] = true;
        }
        self.locked_joints = locked;
        Ok(self)
    }

    pub fn locked_joints(&self) -> &[(usize, f64)] {
        &self.locked_joints
    }

    pub fn reach(&self) -> f64 {
        self.link_count as f64 * self.link_length
    }

    /// Commanded angles after clamping and after locks are applied.
    pub fn effective_angles(&self, angles: &[f64]) -> Result<(Vec<f64>, bool)> {
        if angles.len() != self.link_count {
            return Err(Error::usage(format!(
                "arm has {} joints, got {} angles",
                self.link_count,
                angles.len()
            )));
        }
        let (lo, hi) = self.joint_bounds;
        let mut clamped = false;
        let mut out: Vec<f64> = angles
            .iter()
            .map(|&a| {
                let c = a.clamp(lo, hi);
                clamped |= c != a;
                c
            })
            .collect();
        for &(j, a) in &self.locked_joints {
            out[j] = a;
        }
        Ok((out, clamped))
    }

    pub fn forward_kinematics(&self, angles: &[f64]) -> Result<Reach> {
        let (eff, clamped) = self.effective_angles(angles)?;
        Ok(Reach {
            position: planar_chain(&eff, self.link_length),
            clamped,
        })
    }

    /// Negative end-effector distance to the target.
    pub fn reward(&self, angles: &[f64]) -> Result<f64> {
        let p = self.forward_kinematics(angles)?.position;
        Ok(-(p[0] - self.target[0]).hypot(p[1] - self.target[1]))
    }

    pub fn joint_domain(&self) -> Domain {
        Domain::ContinuousBox {
            lo: vec![self.joint_bounds.0; self.link_count],
            hi: vec![self.joint_bounds.1; self.link_count],
        }
    }
}

pub fn forward_kinematics(config: &ArmConfig, angles: &[f64]) -> Result<Reach> {
    config.forward_kinematics(angles)
}

pub fn arm_reward(config: &ArmConfig, angles: &[f64]) -> Result<f64> {
    config.reward(angles)
}

/// The ten reaching priors: null, the four fixed targets, then five targets
/// drawn once from [−3, 3]² with `seed`.
pub fn build_arm_priors(seed: u64) -> Vec<PriorMean> {
    let mut rng = Streams::new(seed).rng(Stream::PriorTargets);
    let mut priors = vec![PriorMean::Zero];
    priors.extend(
        FIXED_PRIOR_TARGETS
            .iter()
            .map(|t| PriorMean::arm_target(*t)),
    );
    for _ in 0..5 {
        let t = [rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)];
        priors.push(PriorMean::arm_target(t));
    }
    priors
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArmVariant {
    EiNull,
    EiConstant,
    EiRandomPrior,
    Mlei,
}

impl ArmVariant {
    pub const ALL: [ArmVariant; 4] = [
        Self::EiNull,
        Self::EiConstant,
        Self::EiRandomPrior,
        Self::Mlei,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::EiNull => "ei_null",
            Self::EiConstant => "ei_const_-7",
            Self::EiRandomPrior => "ei_random_prior",
            Self::Mlei => "mlei",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s.trim())
            .ok_or_else(|| {
                Error::usage(format!(
                    "unknown arm variant {s:?} (expected one of ei_null, ei_const_-7, ei_random_prior, mlei)"
                ))
            })
    }

    /// Candidate priors and selection policy of the variant, given the shared arm prior set.
    pub fn priors_and_selector(self, arm_priors: &[PriorMean]) -> (Vec<PriorMean>, SelectorPolicy) {
        match self {
            Self::EiNull => (vec![PriorMean::Zero], SelectorPolicy::FixedPrior(0)),
            Self::EiConstant => (
                vec![PriorMean::Constant(PESSIMISTIC_CONSTANT)],
                SelectorPolicy::FixedPrior(0),
            ),
            Self::EiRandomPrior => (arm_priors.to_vec(), SelectorPolicy::RandomPrior),
            Self::Mlei => (arm_priors.to_vec(), SelectorPolicy::Mlei),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ArmExperimentOptions {
    pub replicates: usize,
    pub episodes: usize,
    pub init_trials: usize,
    pub seed: u64,
    pub hyperopt_iters: usize,
    pub kernel_init: KernelParams,
    pub arm: ArmConfig,
}

impl Default for ArmExperimentOptions {
    fn default() -> Self {
        Self {
            replicates: 30,
            episodes: 20,
            init_trials: 3,
            seed: 0,
            hyperopt_iters: crate::gp::rprop::DEFAULT_ITERATIONS,
            kernel_init: KernelParams::unit(DEFAULT_LINK_COUNT),
            arm: ArmConfig::default(),
        }
    }
}

/// Seed of one replicate. Independent of the variant, so every variant of a
/// replicate starts from the same random trials.
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    derive_seed(seed, Stream::Replicate, &[replicate as u64])
}

/// Runs one variant for every replicate. Prior targets are drawn once from
/// `opts.seed`. Replicates run in parallel on the current rayon pool; rows
/// come back in replicate order.
pub fn run_arm_experiment(
    variant: ArmVariant,
    opts: &ArmExperimentOptions,
) -> Result<Vec<ResultRow>> {
    use rayon::prelude::*;
    let arm_priors = build_arm_priors(opts.seed);
    let (priors, selector) = variant.priors_and_selector(&arm_priors);
    let per_rep: Vec<Vec<ResultRow>> = (0..opts.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut cfg = BoRunConfig::new(opts.arm.joint_domain(), priors.clone(), selector);
            cfg.init_trials = opts.init_trials;
            cfg.max_iterations = opts.episodes;
            cfg.seed = replicate_seed(opts.seed, rep);
            cfg.kernel_init = opts.kernel_init.clone();
            cfg.hyperopt_iters = opts.hyperopt_iters;
            let arm = opts.arm.clone();
            let records = run_bo(&cfg, |x| arm.reward(x).unwrap_or(f64::NAN))?;
            Ok(rows_from_records(variant.name(), rep, &records))
        })
        .collect::<Result<_>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}
