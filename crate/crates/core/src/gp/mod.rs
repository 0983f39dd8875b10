//! Gaussian-process regression around an arbitrary prior mean.

mod kernel;
mod model;
pub mod rprop;

pub use kernel::{gram_matrix, kernel_eval, KernelParams, DEFAULT_NOISE_SIGMA};
pub use model::{GpModel, ObservationSet, Prediction, JITTER_MAX, JITTER_START};
pub use rprop::RpropConfig;
