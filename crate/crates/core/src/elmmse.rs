//! Ergodic LMMSE: the conditional error averaged over random signals, and
//! the deterministic-training error that lower-bounds it.
//!
//! `f(W; S)` is convex in the posterior precision, so averaging the precision
//! before inverting (which is what orthogonal training achieves) can only
//! lower the trace. The gap shrinks as the frame length grows and `S S^H / L`
//! concentrates around `I`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{conditional_mse, deterministic_lmmse, Precoder};
use crate::linalg::pairwise_sum;
use crate::model::{CorrelationMatrix, SignalBatch, SystemConfig};

/// Sample-average ELMMSE with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElmmseEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl ElmmseEstimate {
    /// Mean and standard error of the mean (`n - 1` denominator; zero for a
    /// single value or constant values).
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("cannot average an empty set"));
        }
        let mean = pairwise_sum(values) / n as f64;
        let std_error = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Ok(ElmmseEstimate {
            mean,
            std_error,
            count: n,
        })
    }
}

/// `f(W; S_n)` for every sample of the batch, in batch order.
pub fn per_sample_mse(
    w: &Precoder,
    batch: &SignalBatch,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
) -> Result<Vec<f64>> {
    batch
        .samples()
        .par_iter()
        .map(|s| conditional_mse(w, s, corr, config.noise_var, config.n_rx))
        .collect()
}

/// `(1/N) sum_n f(W; S_n)` with its standard error.
pub fn monte_carlo_elmmse(
    w: &Precoder,
    batch: &SignalBatch,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
) -> Result<ElmmseEstimate> {
    let values = per_sample_mse(w, batch, config, corr)?;
    let mut est = ElmmseEstimate::from_values(&values)?;
    // A constant integrand (W = 0, or identical samples) has zero spread;
    // clear the rounding residue.
    if values.iter().all(|&v| v == values[0]) {
        est.std_error = 0.0;
    }
    Ok(est)
}

/// Lower bound on the ELMMSE of `w`: its error under orthogonal training.
pub fn jensen_bound(w: &Precoder, config: &SystemConfig, corr: &CorrelationMatrix) -> Result<f64> {
    deterministic_lmmse(w, config, corr)
}
