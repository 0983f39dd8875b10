//! Candidate prior mean functions.

mod map;

use std::sync::Arc;

pub use map::{BehaviorMap, GridSpec, MapEntry, BOUNDS_TOLERANCE};

use crate::benchmarks::arm::planar_chain;
use crate::error::{Error, Result};

/// Mean function of a GP before any observation.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorMean {
    Zero,
    Constant(f64),
    /// `−‖FWD(x) − target‖` for an intact planar arm.
    ArmTarget {
        target: [f64; 2],
        link_count: usize,
        link_length: f64,
    },
    /// Stored reward of the cell containing the query, `fill_value` for empty cells.
    Tabular {
        map: Arc<BehaviorMap>,
        fill_value: f64,
    },
}

impl PriorMean {
    pub fn arm_target(target: [f64; 2]) -> Self {
        PriorMean::ArmTarget {
            target,
            link_count: crate::benchmarks::arm::DEFAULT_LINK_COUNT,
            link_length: crate::benchmarks::arm::DEFAULT_LINK_LENGTH,
        }
    }

    pub fn tabular(map: BehaviorMap, fill_value: f64) -> Self {
        PriorMean::Tabular {
            map: Arc::new(map),
            fill_value,
        }
    }

    /// Evaluates the prior at `x`. Tabular priors take a descriptor and bin it.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            PriorMean::Zero => Ok(0.0),
            PriorMean::Constant(c) => Ok(*c),
            PriorMean::ArmTarget {
                target,
                link_count,
                link_length,
            } => {
                if x.len() != *link_count {
                    return Err(Error::usage(format!(
                        "arm prior expects {link_count} joint angles, got {}",
                        x.len()
                    )));
                }
                let p = planar_chain(x, *link_length);
                Ok(-((p[0] - target[0]).hypot(p[1] - target[1])))
            }
            PriorMean::Tabular { map, fill_value } => {
                let idx = map.grid().cell_of(x)?;
                Ok(map.get(&idx).map_or(*fill_value, |e| e.reward))
            }
        }
    }

    /// Lookup by cell index. Zero and constant priors ignore the index; arm
    /// priors have no cells and reject the call.
    pub fn eval_cell(&self, index: &[usize]) -> Result<f64> {
        match self {
            PriorMean::Tabular { map, fill_value } => {
                if !map.grid().contains_index(index) {
                    return Err(Error::usage(format!(
                        "cell index {index:?} outside the map grid"
                    )));
                }
                Ok(map.get(index).map_or(*fill_value, |e| e.reward))
            }
            PriorMean::Zero => Ok(0.0),
            PriorMean::Constant(c) => Ok(*c),
            PriorMean::ArmTarget { .. } => {
                Err(Error::usage("arm-target priors are not indexed by cell"))
            }
        }
    }

    /// Input dimension the prior is defined on, if it constrains one.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            PriorMean::Zero | PriorMean::Constant(_) => None,
            PriorMean::ArmTarget { link_count, .. } => Some(*link_count),
            PriorMean::Tabular { map, .. } => Some(map.descriptor_dim()),
        }
    }
}

/// Free-function form of [`PriorMean::eval`].
pub fn prior_eval(prior: &PriorMean, x: &[f64]) -> Result<f64> {
    prior.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn null_and_constant_priors() {
        assert_eq!(PriorMean::Zero.eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let c = PriorMean::Constant(-7.0);
        assert_eq!(c.eval(&[0.0]).unwrap(), -7.0);
        assert_eq!(c.eval(&[9.0, -9.0]).unwrap(), -7.0);
    }

    #[test]
    fn arm_target_zero_at_reached_target() {
        let p = PriorMean::arm_target([5.0, 0.0]);
        assert_eq!(p.eval(&[0.0; 5]).unwrap(), 0.0);
        assert!(p.eval(&[0.0; 4]).is_err());
    }

    #[test]
    fn tabular_lookup_and_fill() {
        let grid = GridSpec::uniform(2, 0.0, 1.0, 2).unwrap();
        let mut m = BehaviorMap::new(grid, 0);
        m.insert(vec![0.2, 0.2], vec![], 3.0).unwrap();
        let p = PriorMean::tabular(m, -1.0);
        assert_eq!(p.eval(&[0.1, 0.4]).unwrap(), 3.0);
        assert_eq!(p.eval(&[0.9, 0.9]).unwrap(), -1.0);
        assert_eq!(p.eval_cell(&[0, 0]).unwrap(), 3.0);
        assert_eq!(p.eval_cell(&[1, 0]).unwrap(), -1.0);
        assert!(p.eval(&[1.5, 0.0]).is_err());
        assert!(p.eval_cell(&[2, 0]).is_err());
    }

    proptest! {
        #[test]
        fn empty_tabular_equals_constant(fill in -10.0f64..10.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let grid = GridSpec::uniform(2, 0.0, 1.0, 4).unwrap();
            let t = PriorMean::tabular(BehaviorMap::new(grid, 0), fill);
            prop_assert_eq!(t.eval(&[x, y]).unwrap(), PriorMean::Constant(fill).eval(&[x, y]).unwrap());
        }

        #[test]
        fn arm_prior_is_bounded(a in proptest::collection::vec(-3.2f64..3.2, 5),
                                tx in -6.0f64..6.0, ty in -6.0f64..6.0) {
            let p = PriorMean::arm_target([tx, ty]);
            let v = p.eval(&a).unwrap();
            prop_assert!(v <= 0.0);
            prop_assert!(v >= -(5.0 + tx.hypot(ty)) - 1e-12);
        }
    }
}
