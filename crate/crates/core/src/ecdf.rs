//! Empirical distribution functions over the extended reals and the DKW
//! band widths used by every statistical verdict.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Sorted sample; `+inf` values sort above every finite value.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        sample.sort_unstable_by(f64::total_cmp);
        Ok(Ecdf { sorted: sample })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of observations `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// `#{X_i <= x} / m`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    /// `k`-th order statistic, 1-based; `k` is clamped to `[1, m]`.
    pub fn order_stat(&self, k: usize) -> f64 {
        self.sorted[k.clamp(1, self.len()) - 1]
    }

    /// Empirical generalized inverse: the smallest observation with
    /// empirical CDF at least `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = math::ceil(p * self.len() as f64) as usize;
        self.order_stat(k)
    }

    /// Number of `+inf` observations.
    pub fn count_infinite(&self) -> usize {
        self.len() - self.sorted.partition_point(|&v| v < f64::INFINITY)
    }

    /// Finite empirical quantiles at levels `0.1, ..., 0.9`.
    pub fn deciles(&self) -> Vec<f64> {
        (1..10)
            .map(|k| self.quantile(k as f64 / 10.0))
            .filter(|x| x.is_finite())
            .collect()
    }
}

/// One-sided DKW half-width: `P(sup (F_m - F) > eps) <= delta`.
pub fn dkw_one_sided(m: usize, delta: f64) -> f64 {
    math::sqrt(math::ln(1.0 / delta) / (2.0 * m as f64))
}

/// Two-sided DKW half-width: `P(sup |F_m - F| > eps) <= delta`.
pub fn dkw_two_sided(m: usize, delta: f64) -> f64 {
    math::sqrt(math::ln(2.0 / delta) / (2.0 * m as f64))
}
