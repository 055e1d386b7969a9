//! System model: configuration, random correlation matrices, transmit
//! signals, target channels and the echo model `Y = H X + Z`.

use nalgebra::{DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, hermitize, rel_frob_err};
use crate::rng::{complex_normal_matrix, substream};
use crate::{CMatrix, C64};

/// Scalar parameters shared by every operation. Power and noise are linear
/// (mW).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub frame_len: usize,
    pub power: f64,
    pub noise_var: f64,
    pub master_seed: u64,
}

impl SystemConfig {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        frame_len: usize,
        power: f64,
        noise_var: f64,
        master_seed: u64,
    ) -> Result<Self> {
        let cfg = SystemConfig {
            n_tx,
            n_rx,
            frame_len,
            power,
            noise_var,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 || self.frame_len == 0 {
            return Err(Error::invalid("all dimensions must be at least 1"));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::invalid(format!(
                "power must be positive, got {}",
                self.power
            )));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(Error::invalid(format!(
                "noise_var must be positive, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    /// Transmit SNR `L P / sigma^2` (linear).
    pub fn transmit_snr(&self) -> f64 {
        self.frame_len as f64 * self.power / self.noise_var
    }

    /// `sigma^2 N_r`, the noise normalization that appears in every error formula.
    pub fn noise_scale(&self) -> f64 {
        self.noise_var * self.n_rx as f64
    }

    /// Copy with `power` chosen so that `L P / sigma^2` equals `snr_db`.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let snr = 10f64.powf(snr_db / 10.0);
        SystemConfig {
            power: snr * self.noise_var / self.frame_len as f64,
            ..self.clone()
        }
    }
}

/// Converts dBm to linear mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Channel correlation matrix `R_H = E[H^H H]` with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    matrix: CMatrix,
    eigvecs: CMatrix,
    eigvals: Vec<f64>,
    inverse: CMatrix,
    sqrt: CMatrix,
}

impl CorrelationMatrix {
    /// Builds `Q diag(eigvals) Q^H` from a unitary `Q` and positive eigenvalues.
    pub fn from_eig(eigvecs: CMatrix, eigvals: Vec<f64>) -> Result<Self> {
        let n = eigvals.len();
        if eigvecs.shape() != (n, n) {
            return Err(Error::invalid("eigenvector matrix must be n x n"));
        }
        if n == 0 {
            return Err(Error::invalid("correlation matrix must be at least 1 x 1"));
        }
        if let Some(bad) = eigvals.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::invalid(format!("eigenvalue {bad} is not positive")));
        }
        let unitary_err = rel_frob_err(&(eigvecs.adjoint() * &eigvecs), &CMatrix::identity(n, n));
        if unitary_err > 1e-8 {
            return Err(Error::invalid("eigenvector matrix is not unitary"));
        }
        // descending order
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigvals[b].total_cmp(&eigvals[a]));
        let eigvals: Vec<f64> = order.iter().map(|&i| eigvals[i]).collect();
        let eigvecs = CMatrix::from_fn(n, n, |i, j| eigvecs[(i, order[j])]);

        let spectral = |f: &dyn Fn(f64) -> f64| {
            let d = DVector::from_iterator(n, eigvals.iter().map(|&l| C64::new(f(l), 0.0)));
            hermitize(&(&eigvecs * CMatrix::from_diagonal(&d) * eigvecs.adjoint()))
        };
        let matrix = spectral(&|l| l);
        let inverse = spectral(&|l| 1.0 / l);
        let sqrt = spectral(&f64::sqrt);
        Ok(CorrelationMatrix {
            matrix,
            eigvecs,
            eigvals,
            inverse,
            sqrt,
        })
    }

    /// Decomposes a Hermitian positive-definite matrix.
    pub fn from_matrix(matrix: &CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("correlation matrix must be square"));
        }
        if rel_frob_err(matrix, &matrix.adjoint()) > 1e-10 {
            return Err(Error::invalid("correlation matrix is not Hermitian"));
        }
        let eig = SymmetricEigen::new(hermitize(matrix));
        Self::from_eig(eig.eigenvectors, eig.eigenvalues.iter().copied().collect())
    }

    /// Diagonal correlation `diag(eigvals)` with identity eigenvectors.
    pub fn diagonal(eigvals: &[f64]) -> Result<Self> {
        let n = eigvals.len();
        Self::from_eig(CMatrix::identity(n, n), eigvals.to_vec())
    }

    /// Eigenvalues i.i.d. uniform on `[eig_low, eig_high]`, Haar eigenvectors.
    pub fn random(n_tx: usize, eig_low: f64, eig_high: f64, seed: u64) -> Result<Self> {
        if !(eig_low > 0.0) {
            return Err(Error::invalid(format!(
                "eig_low must be positive, got {eig_low}"
            )));
        }
        if !(eig_high >= eig_low) || !eig_high.is_finite() {
            return Err(Error::invalid(format!(
                "eig_high ({eig_high}) must be finite and >= eig_low ({eig_low})"
            )));
        }
        if n_tx == 0 {
            return Err(Error::invalid("n_tx must be at least 1"));
        }
        let mut rng = substream(seed, 0);
        let eigvals: Vec<f64> = (0..n_tx)
            .map(|_| {
                if eig_high > eig_low {
                    rng.random_range(eig_low..=eig_high)
                } else {
                    eig_low
                }
            })
            .collect();
        let q = haar_unitary(&mut rng, n_tx);
        Self::from_eig(q, eigvals)
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Unitary `Q`, columns ordered by descending eigenvalue.
    pub fn eigvecs(&self) -> &CMatrix {
        &self.eigvecs
    }

    /// Eigenvalues, descending.
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    /// `R_H^{-1}`.
    pub fn inverse(&self) -> &CMatrix {
        &self.inverse
    }

    /// Hermitian square root `R_H^{1/2}`.
    pub fn sqrt(&self) -> &CMatrix {
        &self.sqrt
    }

    pub fn trace(&self) -> f64 {
        self.eigvals.iter().sum()
    }
}

/// Random correlation matrix with eigenvalues uniform on `[eig_low, eig_high]`.
pub fn gen_correlation(
    n_tx: usize,
    eig_low: f64,
    eig_high: f64,
    seed: u64,
) -> Result<CorrelationMatrix> {
    CorrelationMatrix::random(n_tx, eig_low, eig_high, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// i.i.d. CN(0, 1) entries: random data symbols.
    Gaussian,
    /// Scaled orthonormal rows with `(1/L) S S^H = I`: training signals.
    DeterministicOrthogonal,
}

/// A set of transmit signal realizations of one kind and one shape.
#[derive(Clone, Debug)]
pub struct SignalBatch {
    samples: Vec<CMatrix>,
    kind: SignalKind,
}

impl SignalBatch {
    /// Wraps existing samples after checking shape and, for orthogonal
    /// batches, `(1/L) S S^H = I`.
    pub fn new(samples: Vec<CMatrix>, kind: SignalKind) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid("signal batch must be nonempty"))?;
        let shape = first.shape();
        if samples.iter().any(|s| s.shape() != shape) {
            return Err(Error::invalid(
                "all samples in a batch must share one shape",
            ));
        }
        if kind == SignalKind::DeterministicOrthogonal {
            let (n_tx, len) = shape;
            if len < n_tx {
                return Err(Error::InfeasibleOrthogonality {
                    n_tx,
                    frame_len: len,
                });
            }
            let eye = CMatrix::identity(n_tx, n_tx);
            for s in &samples {
                let gram = s * s.adjoint() / C64::new(len as f64, 0.0);
                if rel_frob_err(&gram, &eye) > 1e-8 {
                    return Err(Error::invalid("sample violates (1/L) S S^H = I"));
                }
            }
        }
        Ok(SignalBatch { samples, kind })
    }

    /// Draws `count` samples of shape `n_tx x frame_len`. Sample `n` uses
    /// substream `n` of `seed`.
    pub fn sample(
        config: &SystemConfig,
        count: usize,
        kind: SignalKind,
        seed: u64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("signal count must be positive"));
        }
        let (n_tx, len) = (config.n_tx, config.frame_len);
        if kind == SignalKind::DeterministicOrthogonal && len < n_tx {
            return Err(Error::InfeasibleOrthogonality {
                n_tx,
                frame_len: len,
            });
        }
        let samples: Vec<CMatrix> = (0..count as u64)
            .into_par_iter()
            .map(|n| {
                let mut rng = substream(seed, n);
                match kind {
                    SignalKind::Gaussian => complex_normal_matrix(&mut rng, n_tx, len),
                    SignalKind::DeterministicOrthogonal => {
                        let u = haar_unitary(&mut rng, len);
                        u.rows(0, n_tx).into_owned() * C64::new((len as f64).sqrt(), 0.0)
                    }
                }
            })
            .collect();
        Ok(SignalBatch { samples, kind })
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    /// `(n_tx, frame_len)`.
    pub fn shape(&self) -> (usize, usize) {
        self.samples[0].shape()
    }
}

/// Draws `count` signals; see [`SignalBatch::sample`].
pub fn sample_signals(
    config: &SystemConfig,
    count: usize,
    kind: SignalKind,
    seed: u64,
) -> Result<SignalBatch> {
    SignalBatch::sample(config, count, kind, seed)
}

/// One realization of the target response and receiver noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingScene {
    /// `H_s`, `N_r x N_t`.
    pub channel: CMatrix,
    /// `Z_s`, `N_r x L`.
    pub noise: CMatrix,
}

impl SensingScene {
    /// `H = G R^{1/2} / sqrt(N_r)` with `G` i.i.d. CN(0, 1), so
    /// `E[H^H H] = R_H`; noise i.i.d. CN(0, noise_var). A zero `noise_var`
    /// gives `Z = 0`.
    pub fn sample(config: &SystemConfig, corr: &CorrelationMatrix, seed: u64) -> Result<Self> {
        if corr.dim() != config.n_tx {
            return Err(Error::invalid(format!(
                "correlation is {0}x{0} but n_tx = {1}",
                corr.dim(),
                config.n_tx
            )));
        }
        if !(config.noise_var >= 0.0) {
            return Err(Error::invalid("noise_var must be nonnegative"));
        }
        let mut rng = substream(seed, 0);
        let g = complex_normal_matrix(&mut rng, config.n_rx, config.n_tx);
        let channel = g * corr.sqrt() / C64::new((config.n_rx as f64).sqrt(), 0.0);
        let noise = if config.noise_var == 0.0 {
            CMatrix::zeros(config.n_rx, config.frame_len)
        } else {
            complex_normal_matrix(&mut rng, config.n_rx, config.frame_len)
                * C64::new(config.noise_var.sqrt(), 0.0)
        };
        Ok(SensingScene { channel, noise })
    }
}

pub fn sample_scene(
    config: &SystemConfig,
    corr: &CorrelationMatrix,
    seed: u64,
) -> Result<SensingScene> {
    SensingScene::sample(config, corr, seed)
}

/// Echo signal `Y = H X + Z`.
pub fn forward_model(scene: &SensingScene, x: &CMatrix) -> Result<CMatrix> {
    let (n_rx, n_tx) = scene.channel.shape();
    if x.nrows() != n_tx || scene.noise.shape() != (n_rx, x.ncols()) {
        return Err(Error::invalid(format!(
            "X is {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            n_tx,
            scene.noise.ncols()
        )));
    }
    Ok(&scene.channel * x + &scene.noise)
}
