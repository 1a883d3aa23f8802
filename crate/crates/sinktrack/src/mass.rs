use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`MassVector`].
pub const MASS_SUM_TOLERANCE: f64 = 1e-12;

/// A discrete probability distribution over `d` spots: non-negative weights
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector {
    weights: Vec<f64>,
}

impl MassVector {
    /// Validates and wraps a weight vector. Entries must be non-negative and
    /// finite, and sum to 1 within `MASS_SUM_TOLERANCE`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMass("empty weight vector".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidMass(format!("entry {i} is {w}")));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(Error::InvalidMass(format!(
                "entries sum to {sum}, expected 1 within {MASS_SUM_TOLERANCE:e}"
            )));
        }
        Ok(Self { weights })
    }

    /// The uniform distribution 1/d on `d` spots.
    pub fn uniform(d: usize) -> Self {
        assert!(d >= 1, "uniform mass vector needs d >= 1");
        Self {
            weights: vec![1.0 / d as f64; d],
        }
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
}

impl std::ops::Index<usize> for MassVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}
