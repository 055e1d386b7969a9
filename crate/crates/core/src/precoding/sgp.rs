//! Data-independent design: stochastic gradient projection over freshly
//! drawn Gaussian mini-batches.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::Precoder;
use crate::linalg::frob_sq;
use crate::model::{CorrelationMatrix, SignalBatch, SignalKind, SystemConfig};
use crate::precoding::{minibatch_gradient, project_to_ball, ConvergenceTrace, TraceRecord};
use crate::rng::child_seed;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgpConfig {
    /// Mini-batch size.
    pub batch_size: usize,
    /// `r_max`.
    pub max_iters: usize,
    /// Stop once the smoothed objective improves by less than this.
    pub tol: f64,
    /// `a` in the step schedule `a / (a + r)`.
    pub step_scale: f64,
    /// Length of the trailing window used to smooth per-batch objectives.
    pub window: usize,
}

impl Default for SgpConfig {
    fn default() -> Self {
        SgpConfig {
            batch_size: 10,
            max_iters: 2000,
            tol: 1e-5,
            step_scale: 10.0,
            window: 20,
        }
    }
}

impl SgpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_iters == 0 || self.window == 0 {
            return Err(Error::invalid(
                "SGP batch_size, max_iters and window must be positive",
            ));
        }
        if !(self.tol > 0.0) || !(self.step_scale > 0.0) {
            return Err(Error::invalid("SGP tol and step_scale must be positive"));
        }
        Ok(())
    }

    /// `eta^(r) = a / (a + r)`.
    pub fn step_size(&self, r: usize) -> f64 {
        self.step_scale / (self.step_scale + r as f64)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Stochastic gradient projection from `init`.
///
/// Iteration `r` draws a Gaussian mini-batch from child seed `r` of `seed`,
/// steps along the averaged gradient with `eta^(r)` and projects back onto
/// the power ball. The run ends when the mean objective of the last `window`
/// batches improves on the window before it by less than `tol`, or after
/// `max_iters` iterations.
pub fn sgp_optimize(
    config: &SystemConfig,
    corr: &CorrelationMatrix,
    init: &Precoder,
    cfg: &SgpConfig,
    seed: u64,
) -> Result<(Precoder, ConvergenceTrace)> {
    cfg.validate()?;
    if !init.is_feasible(config.power) {
        return Err(Error::invalid(
            "initial precoder is outside the power budget",
        ));
    }
    let start = Instant::now();
    let mut w = init.clone();
    let mut records = Vec::with_capacity(cfg.max_iters.min(4096) + 1);
    let mut batch_objectives = Vec::with_capacity(cfg.max_iters.min(4096));

    for r in 1..=cfg.max_iters {
        let batch = SignalBatch::sample(
            config,
            cfg.batch_size,
            SignalKind::Gaussian,
            child_seed(seed, r as u64),
        )?;
        let (objective, grad) =
            minibatch_gradient(&w, batch.samples(), corr, config.noise_var, config.n_rx)?;
        if r == 1 {
            records.push(TraceRecord {
                iteration: 0,
                objective,
                step_size: 0.0,
                descent_gap: frob_sq(&grad).sqrt(),
            });
        }
        let eta = cfg.step_size(r);
        w = project_to_ball(w.matrix() - grad.clone() * C64::new(eta, 0.0), config.power);
        batch_objectives.push(objective);
        records.push(TraceRecord {
            iteration: r,
            objective,
            step_size: eta,
            descent_gap: frob_sq(&grad).sqrt(),
        });

        let k = batch_objectives.len();
        if k >= 2 * cfg.window {
            let prev = mean(&batch_objectives[k - 2 * cfg.window..k - cfg.window]);
            let cur = mean(&batch_objectives[k - cfg.window..]);
            if prev - cur < cfg.tol {
                break;
            }
        }
    }

    Ok((
        w,
        ConvergenceTrace {
            records,
            wall_clock: start.elapsed().as_secs_f64(),
        },
    ))
}
