//! Gradient of the conditional error `f(W; S) = tr(A^{-1})`,
//! `A = R^{-1} + c W S S^H W^H`, `c = 1 / (sigma^2 N_r)`.
//!
//! Under the real inner product `<A, B> = Re tr(A^H B)` the gradient is
//! `-2 c A^{-2} W S S^H`: the usual expression with the factor 2 that comes
//! from `W` and `W^H` both varying.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::Precoder;
use crate::linalg::{hermitize, hpd_inverse, pairwise_sum, pairwise_sum_matrices};
use crate::model::CorrelationMatrix;
use crate::{CMatrix, C64};

/// `(f(W; S), grad f(W; S))`, sharing one factorization of `A`.
pub fn objective_and_gradient(
    w: &Precoder,
    s: &CMatrix,
    corr: &CorrelationMatrix,
    noise_var: f64,
    n_rx: usize,
) -> Result<(f64, CMatrix)> {
    let n = corr.dim();
    if w.dim() != n || s.nrows() != n {
        return Err(Error::invalid("dimension mismatch between W, S and R_H"));
    }
    let c = 1.0 / (noise_var * n_rx as f64);
    let ws = w.matrix() * s;
    let a = corr.inverse() + hermitize(&(&ws * ws.adjoint())) * C64::new(c, 0.0);
    let a_inv = hpd_inverse(&a)?;
    let objective = a_inv.trace().re;
    // A^{-2} W S S^H = A^{-1} (A^{-1} (W S)) S^H
    let grad = &a_inv * (&a_inv * ws) * s.adjoint() * C64::new(-2.0 * c, 0.0);
    Ok((objective, grad))
}

/// Gradient of `f(W; S)` with respect to `W`.
pub fn elmmse_gradient(
    w: &Precoder,
    s: &CMatrix,
    corr: &CorrelationMatrix,
    noise_var: f64,
    n_rx: usize,
) -> Result<CMatrix> {
    objective_and_gradient(w, s, corr, noise_var, n_rx).map(|(_, g)| g)
}

/// Mini-batch average of objective and gradient over `samples`.
pub fn minibatch_gradient(
    w: &Precoder,
    samples: &[CMatrix],
    corr: &CorrelationMatrix,
    noise_var: f64,
    n_rx: usize,
) -> Result<(f64, CMatrix)> {
    if samples.is_empty() {
        return Err(Error::invalid("mini-batch must be nonempty"));
    }
    let parts: Vec<(f64, CMatrix)> = samples
        .par_iter()
        .map(|s| objective_and_gradient(w, s, corr, noise_var, n_rx))
        .collect::<Result<_>>()?;
    let inv_n = 1.0 / samples.len() as f64;
    let objs: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let grads: Vec<CMatrix> = parts.into_iter().map(|p| p.1).collect();
    let grad = pairwise_sum_matrices(&grads).expect("nonempty") * C64::new(inv_n, 0.0);
    Ok((pairwise_sum(&objs) * inv_n, grad))
}
