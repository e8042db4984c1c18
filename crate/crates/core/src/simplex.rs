//! Probability vectors over a finite model class. Both posteriors and priors
//! are represented this way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(weights) - 1` accepted at construction.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// A probability vector: nonnegative entries summing to 1 within
/// [`SIMPLEX_TOLERANCE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexDistribution {
    weights: Vec<f64>,
}

impl SimplexDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::SimplexViolation("empty weight vector".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::SimplexViolation(format!(
                    "weight[{i}] = {w} is negative or non-finite"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::SimplexViolation(format!(
                "weights sum to {sum}, expected 1 within {SIMPLEX_TOLERANCE:e}"
            )));
        }
        Ok(Self { weights })
    }

    /// Uniform distribution over `len` atoms.
    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::SimplexViolation("empty weight vector".into()));
        }
        Ok(Self {
            weights: vec![1.0 / len as f64; len],
        })
    }

    /// Point mass on atom `index`.
    pub fn point_mass(len: usize, index: usize) -> Result<Self> {
        if index >= len {
            return Err(Error::SimplexViolation(format!(
                "point mass index {index} out of range for {len} atoms"
            )));
        }
        let mut weights = vec![0.0; len];
        weights[index] = 1.0;
        Ok(Self { weights })
    }

    /// Normalize nonnegative (not necessarily summing to 1) masses.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::SimplexViolation(format!(
                "cannot normalize masses with sum {sum}"
            )));
        }
        let weights = raw.into_iter().map(|w| w / sum).collect::<Vec<_>>();
        Self::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted average of `values` under this distribution.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::SimplexViolation(format!(
                "expectation over {} values with {} weights",
                values.len(),
                self.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum())
    }

    /// Index of the largest weight; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

impl TryFrom<Vec<f64>> for SimplexDistribution {
    type Error = Error;
    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<SimplexDistribution> for Vec<f64> {
    fn from(d: SimplexDistribution) -> Vec<f64> {
        d.weights
    }
}

impl std::ops::Index<usize> for SimplexDistribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}
