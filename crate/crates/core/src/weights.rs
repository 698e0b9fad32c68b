use alloc::vec::Vec;
use core::ops::Index;
use serde::Serialize;

use crate::error::{Error, Result};

/// Strictly positive weights summing to one (the open simplex).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::TooFewComponents { min: 1, found: 0 });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewComponents { min: 1, found: 0 });
        }
        Ok(WeightVector(alloc::vec![1.0 / n as f64; n]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl core::fmt::Display for WeightVector {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn accepts_simplex_interior() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![1.0 / 3.0; 3]).is_ok());
        assert!(WeightVector::new(vec![0.7, 0.2, 0.1]).is_ok());
        assert_eq!(WeightVector::uniform(4).unwrap().len(), 4);
    }

    #[test]
    fn rejects_boundary_and_unnormalized() {
        assert!(matches!(
            WeightVector::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            WeightVector::new(vec![0.5, 0.6]),
            Err(Error::WeightsNotNormalized { .. })
        ));
        assert!(WeightVector::new(vec![]).is_err());
        assert!(WeightVector::new(vec![f64::NAN, 1.0]).is_err());
    }
}
