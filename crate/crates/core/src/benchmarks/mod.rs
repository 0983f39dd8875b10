//! Reaching-arm benchmarks: transfer across target priors, and damage
//! adaptation with behavior-map priors.

pub mod adaptation;
pub mod arm;

pub use adaptation::{
    adaptation_rows, arm_repertoire_eval, default_conditions, generate_condition_map,
    repertoire_config, repertoire_grid, run_map_adaptation_experiment, AdaptationOptions,
    AdaptationRun, Condition, MapAdaptationTask,
};
pub use arm::{
    arm_reward, build_arm_priors, forward_kinematics, planar_chain, replicate_seed,
    run_arm_experiment, ArmConfig, ArmExperimentOptions, ArmVariant, Reach, DEFAULT_TARGET,
};
