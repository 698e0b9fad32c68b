use alloc::vec::Vec;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Log,
    Linear,
}

/// Evaluation grid shared by every checker.
///
/// The default is 200 log-spaced points on `[1e-6, 1e6]`; the catalog
/// families live on very different scales so a linear grid would miss most
/// of the shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            min: 1e-6,
            max: 1e6,
            points: 200,
            scale: GridScale::Log,
        }
    }
}

impl Grid {
    pub fn log(min: f64, max: f64, points: usize) -> Result<Self> {
        Grid {
            min,
            max,
            points,
            scale: GridScale::Log,
        }
        .validated()
    }

    pub fn linear(min: f64, max: f64, points: usize) -> Result<Self> {
        Grid {
            min,
            max,
            points,
            scale: GridScale::Linear,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.points < 2 {
            return Err(Error::InvalidGrid("need at least two points"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(Error::InvalidGrid("bounds must be finite with min < max"));
        }
        if self.scale == GridScale::Log && self.min <= 0.0 {
            return Err(Error::InvalidGrid("log grid needs a positive minimum"));
        }
        Ok(self)
    }

    /// Grid values in increasing order; endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut out: Vec<f64> = match self.scale {
            GridScale::Log => {
                let (a, b) = (math::ln(self.min), math::ln(self.max));
                (0..n)
                    .map(|i| math::exp(a + (b - a) * i as f64 / last))
                    .collect()
            }
            GridScale::Linear => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / last)
                .collect(),
        };
        out[0] = self.min;
        out[n - 1] = self.max;
        out
    }
}
