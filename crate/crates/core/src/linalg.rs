//! Small dense linear-algebra helpers over complex matrices.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Residual tolerance for Hermitian positive-definite solves.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-6;

/// `(M + M^H) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Squared Frobenius norm.
pub fn frob_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real inner product `Re tr(A^H B)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Relative Frobenius distance `||a - b|| / ||b||` (absolute when `b = 0`).
pub fn rel_frob_err(a: &CMatrix, b: &CMatrix) -> f64 {
    let num = frob_sq(&(a - b)).sqrt();
    let den = frob_sq(b).sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn cholesky(a: &CMatrix, what: &str) -> Result<Cholesky<C64, nalgebra::Dyn>> {
    Cholesky::new(hermitize(a))
        .ok_or_else(|| Error::NumericalFailure(format!("{what} is not positive definite")))
}

/// Solves `A Z = B` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let z = cholesky(a, "system matrix")?.solve(b);
    let residual = frob_sq(&(a * &z - b)).sqrt();
    let scale = frob_sq(b).sqrt().max(f64::MIN_POSITIVE);
    if !(residual <= SOLVE_RESIDUAL_TOL * scale.max(1.0)) {
        return Err(Error::NumericalFailure(format!(
            "solve residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok(z)
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn hpd_inverse(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    hpd_solve(a, &CMatrix::identity(n, n)).map(|inv| hermitize(&inv))
}

/// Pairwise (cascade) sum with a fixed split tree, independent of threading.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Pairwise sum of equally sized matrices.
pub fn pairwise_sum_matrices(ms: &[CMatrix]) -> Option<CMatrix> {
    match ms.len() {
        0 => None,
        1 => Some(ms[0].clone()),
        n => {
            let (l, r) = ms.split_at(n / 2);
            Some(pairwise_sum_matrices(l)? + pairwise_sum_matrices(r)?)
        }
    }
}

/// Haar-distributed `n x n` unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` pushed into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = crate::rng::complex_normal_matrix(rng, n, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
