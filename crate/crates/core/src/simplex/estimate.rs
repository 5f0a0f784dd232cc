use serde::Serialize;

use crate::error::{Error, Result};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub point_estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Estimate of a mismatch probability `P[g(U,p) != g(U,q)]`.
pub type MismatchEstimate = Estimate;

impl Estimate {
    /// Frequency of `hits` among `trials` Bernoulli draws, `sqrt(p(1-p)/n)` error.
    pub fn from_counts(hits: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::EmptySample);
        }
        let p = hits as f64 / trials as f64;
        Ok(Self {
            point_estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        })
    }

    /// Sample mean with the standard error of the mean. Values are summed in order.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            point_estimate: mean,
            std_error: (var / n).sqrt(),
            trials: values.len() as u64,
        })
    }

    /// `|estimate - target| <= k * std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.point_estimate - target).abs() <= k * self.std_error
    }
}
