use crate::error::{Error, Result};
use crate::priors::GridSpec;

/// Search space of a BO run.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Axis-aligned box, `lo < hi` on every axis.
    ContinuousBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Finite candidate set; map cells are represented by their centroids.
    FiniteCandidates(Vec<Vec<f64>>),
}

impl Domain {
    pub fn continuous(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::usage(
                "box bounds need matching, non-empty lo and hi",
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
        {
            return Err(Error::usage("box bounds need finite lo < hi on every axis"));
        }
        Ok(Domain::ContinuousBox { lo, hi })
    }

    pub fn finite(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::usage("candidate set is empty"));
        };
        let d = first.len();
        if d == 0
            || points
                .iter()
                .any(|p| p.len() != d || p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::usage(
                "candidates need a common non-zero dimension and finite coordinates",
            ));
        }
        Ok(Domain::FiniteCandidates(points))
    }

    /// Candidate set made of the centroids of the given grid cells.
    pub fn from_cells<'a>(
        grid: &GridSpec,
        cells: impl IntoIterator<Item = &'a Vec<usize>>,
    ) -> Result<Self> {
        Self::finite(cells.into_iter().map(|c| grid.centroid(c)).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::ContinuousBox { lo, .. } => lo.len(),
            Domain::FiniteCandidates(p) => p.first().map_or(0, Vec::len),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::ContinuousBox { lo, hi } => {
                x.len() == lo.len()
                    && x.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(v, (a, b))| v >= a && v <= b)
            }
            Domain::FiniteCandidates(p) => p.iter().any(|c| c.as_slice() == x),
        }
    }
}
