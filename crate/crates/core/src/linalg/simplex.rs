use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|Σ w − 1|` accepted without renormalizing.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point of the probability simplex: a mixed strategy over `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector {
    weights: Vec<f64>,
}

impl SimplexVector {
    /// Accepts weights that already sum to 1 within [`SIMPLEX_TOL`]; stores them as given.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::within(weights, SIMPLEX_TOL)
    }

    /// Accepts weights summing to 1 within `tol` and renormalizes them.
    pub fn within(weights: Vec<f64>, tol: f64) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotSimplex { sum });
        }
        if (sum - 1.0).abs() <= SIMPLEX_TOL {
            Ok(Self { weights })
        } else {
            Ok(Self::scale_to_one(weights, sum))
        }
    }

    /// Normalizes any nonnegative, not-all-zero weight vector.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if sum <= 0.0 {
            return Err(Error::NotSimplex { sum });
        }
        Ok(Self::scale_to_one(weights, sum))
    }

    fn scale_to_one(mut weights: Vec<f64>, sum: f64) -> Self {
        for w in &mut weights {
            *w /= sum;
        }
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// The pure strategy `e^(i)`.
    pub fn pure(n: usize, i: usize) -> Self {
        assert!(i < n, "action {i} out of range for n = {n}");
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        Self { weights }
    }

    /// Embeds `inner` (indexed by `positions`) into dimension `n`, zero elsewhere.
    pub fn embed(n: usize, positions: &[usize], inner: &SimplexVector) -> Self {
        assert_eq!(positions.len(), inner.len());
        let mut weights = vec![0.0; n];
        for (&p, &w) in positions.iter().zip(inner.as_slice()) {
            weights[p] = w;
        }
        Self { weights }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    pub fn support_mask(&self) -> Vec<bool> {
        self.weights.iter().map(|&w| w > 0.0).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// First index with zero weight, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.weights.iter().position(|&w| w == 0.0)
    }

    pub fn dot(&self, other: &SimplexVector) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("strategy has no actions".into()));
    }
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput(format!(
            "weight {i} = {} is not a finite nonnegative number",
            weights[i]
        )));
    }
    Ok(weights.iter().sum())
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::within(weights, 1e-9)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(v: SimplexVector) -> Self {
        v.weights
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_off_simplex() {
        assert!(matches!(
            SimplexVector::new(vec![0.25, 0.25]),
            Err(Error::NotSimplex { .. })
        ));
        assert!(SimplexVector::new(vec![-0.5, 1.5]).is_err());
        assert!(SimplexVector::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn within_renormalizes() {
        let v = SimplexVector::within(vec![0.5, 0.5 + 1e-10], 1e-9).unwrap();
        assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_and_pure() {
        let e = SimplexVector::pure(3, 1);
        assert_eq!(e.support(), vec![1]);
        assert!(!e.has_full_support());
        assert_eq!(e.first_zero(), Some(0));
        assert!(SimplexVector::uniform(4).has_full_support());
        let emb = SimplexVector::embed(4, &[1, 3], &SimplexVector::uniform(2));
        assert_eq!(emb.as_slice(), &[0.0, 0.5, 0.0, 0.5]);
    }
}
