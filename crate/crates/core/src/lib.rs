//! Bayesian optimization with several candidate prior mean functions.
//!
//! One GP is kept per prior, all sharing the same observations. Each
//! iteration every model proposes its EI maximizer, and the proposal with
//! the largest `EI × marginal likelihood` is evaluated ("most likely
//! expected improvement", MLEI). Baselines replace only that choice: a fixed
//! prior (plain EI) or a prior redrawn at random each iteration.
//!
//! Modules:
//! - [`gp`]: squared-exponential GP around a prior mean, exact marginal
//!   likelihood and gradient, RPROP hyperparameter fitting.
//! - [`priors`]: zero, constant, reaching-arm and tabular (behavior map) priors;
//!   the `MAP v1` file format.
//! - [`acquisition`]: EI, per-model EI × likelihood scores, MLEI selection.
//! - [`bo`]: the optimization loop and its episode log.
//! - [`map_elites`]: grid MAP-Elites for building behavior maps.
//! - [`benchmarks`]: planar-arm transfer and damage-adaptation experiments.
//! - [`stats`]: Mann-Whitney U test and per-episode summaries.
//! - [`cli`]: the `mlei-bo` command line.
//!
//! ```
//! use mlei::{bo::{run_bo, BoRunConfig, SelectorPolicy}, domain::Domain, priors::PriorMean};
//!
//! let domain = Domain::continuous(vec![-2.0], vec![2.0]).unwrap();
//! let priors = vec![PriorMean::Zero, PriorMean::Constant(-1.0)];
//! let mut cfg = BoRunConfig::new(domain, priors, SelectorPolicy::Mlei);
//! cfg.max_iterations = 6;
//! cfg.hyperopt_iters = 30;
//! let records = run_bo(&cfg, |x| -(x[0] - 0.5).powi(2)).unwrap();
//! assert_eq!(records.len(), 6);
//! ```

pub mod acquisition;
pub mod benchmarks;
pub mod bo;
pub mod cli;
pub mod domain;
pub mod error;
pub mod gp;
mod io;
pub mod map_elites;
pub mod priors;
pub mod results;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
