//! LMMSE estimation of the target response and its error functionals.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{frob_sq, hermitize, hpd_inverse, hpd_solve, pairwise_sum};
use crate::model::{forward_model, CorrelationMatrix, SensingScene, SystemConfig};
use crate::{CMatrix, C64};

/// Slack allowed on `||W||_F^2 <= P`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Square precoding matrix `W`, `N_t x N_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Precoder {
    matrix: CMatrix,
}

impl Precoder {
    /// Accepts `matrix` if it is square and inside the power ball of radius
    /// `sqrt(power)`.
    pub fn new(matrix: CMatrix, power: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("precoder must be square"));
        }
        let p = frob_sq(&matrix);
        if !(p <= power + FEASIBILITY_TOL) {
            return Err(Error::invalid(format!(
                "precoder power {p} exceeds budget {power}"
            )));
        }
        Ok(Precoder { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Precoder { matrix }
    }

    pub fn zeros(n_tx: usize) -> Self {
        Precoder {
            matrix: CMatrix::zeros(n_tx, n_tx),
        }
    }

    /// `sqrt(P / N_t) I`: equal power on every antenna.
    pub fn uniform(n_tx: usize, power: f64) -> Self {
        let a = (power / n_tx as f64).sqrt();
        Precoder {
            matrix: CMatrix::identity(n_tx, n_tx) * C64::new(a, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `||W||_F^2`.
    pub fn power(&self) -> f64 {
        frob_sq(&self.matrix)
    }

    pub fn is_feasible(&self, power: f64) -> bool {
        self.power() <= power + FEASIBILITY_TOL
    }
}

/// Outcome of estimating one scene.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub estimate: CMatrix,
    /// `||H - H_hat||_F^2`.
    pub squared_error: f64,
    /// `f(W; S)` for the realized signal.
    pub theoretical_mse: f64,
}

fn check_dims(w: &Precoder, s: &CMatrix, corr: &CorrelationMatrix) -> Result<()> {
    let n = corr.dim();
    if w.dim() != n || s.nrows() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: W is {0}x{0}, S has {1} rows, R_H is {2}x{2}",
            w.dim(),
            s.nrows(),
            n
        )));
    }
    Ok(())
}

/// `tr[(R^{-1} + gram / scale)^{-1}]` for Hermitian PSD `gram`.
pub(crate) fn trace_inv_posterior(
    corr: &CorrelationMatrix,
    gram: &CMatrix,
    scale: f64,
) -> Result<f64> {
    let a = corr.inverse() + hermitize(gram) / C64::new(scale, 0.0);
    let t = hpd_inverse(&a)?.trace().re;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "posterior trace {t} is not positive"
        )));
    }
    Ok(t)
}

/// LMMSE estimate `Y (X^H R X + sigma^2 N_r I_L)^{-1} X^H R`.
pub fn lmmse_estimate(
    y: &CMatrix,
    x: &CMatrix,
    corr: &CorrelationMatrix,
    noise_var: f64,
    n_rx: usize,
) -> Result<CMatrix> {
    if !(noise_var > 0.0) {
        return Err(Error::invalid("noise_var must be positive"));
    }
    let len = x.ncols();
    if x.nrows() != corr.dim() || y.ncols() != len || y.nrows() != n_rx {
        return Err(Error::invalid("dimension mismatch between Y, X and R_H"));
    }
    let xh_r = x.adjoint() * corr.matrix();
    let gram = &xh_r * x + CMatrix::identity(len, len) * C64::new(noise_var * n_rx as f64, 0.0);
    let gain = hpd_solve(&gram, &xh_r)?;
    Ok(y * gain)
}

/// Conditional estimation error
/// `f(W; S) = tr[(R^{-1} + W S S^H W^H / (sigma^2 N_r))^{-1}]`.
pub fn conditional_mse(
    w: &Precoder,
    s: &CMatrix,
    corr: &CorrelationMatrix,
    noise_var: f64,
    n_rx: usize,
) -> Result<f64> {
    check_dims(w, s, corr)?;
    let x = w.matrix() * s;
    trace_inv_posterior(corr, &(&x * x.adjoint()), noise_var * n_rx as f64)
}

/// Error of deterministic training with `(1/L) S S^H = I`:
/// `tr[(R^{-1} + L W W^H / (sigma^2 N_r))^{-1}]`.
pub fn deterministic_lmmse(
    w: &Precoder,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
) -> Result<f64> {
    if w.dim() != corr.dim() {
        return Err(Error::invalid("precoder and correlation dimensions differ"));
    }
    let gram = w.matrix() * w.matrix().adjoint() * C64::new(config.frame_len as f64, 0.0);
    trace_inv_posterior(corr, &gram, config.noise_scale())
}

/// Estimates one scene with `X = W S` and scores it.
pub fn estimate_scene(
    scene: &SensingScene,
    w: &Precoder,
    s: &CMatrix,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
) -> Result<EstimateReport> {
    let x = w.matrix() * s;
    let y = forward_model(scene, &x)?;
    let estimate = lmmse_estimate(&y, &x, corr, config.noise_var, config.n_rx)?;
    let squared_error = frob_sq(&(&scene.channel - &estimate));
    let theoretical_mse = conditional_mse(w, s, corr, config.noise_var, config.n_rx)?;
    Ok(EstimateReport {
        estimate,
        squared_error,
        theoretical_mse,
    })
}

/// Mean of `||H - H_hat||_F^2` over `trials` independent scenes with the
/// transmit signal held fixed. Trial `t` uses substream `t` of `seed`.
pub fn empirical_mse(
    w: &Precoder,
    s: &CMatrix,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    check_dims(w, s, corr)?;
    let x = w.matrix() * s;
    let errors: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let scene = SensingScene::sample(config, corr, crate::rng::child_seed(seed, t))?;
            let y = forward_model(&scene, &x)?;
            let h_hat = lmmse_estimate(&y, &x, corr, config.noise_var, config.n_rx)?;
            Ok(frob_sq(&(&scene.channel - h_hat)))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&errors) / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_correlation, sample_signals, SignalKind};
    use crate::rng::{complex_normal_matrix, substream};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Direct evaluation with general LU inverses, kept apart from the
    /// Cholesky path.
    fn dense_conditional_mse(w: &CMatrix, s: &CMatrix, r: &CMatrix, noise_scale: f64) -> f64 {
        let r_inv = r.clone().try_inverse().unwrap();
        let x = w * s;
        let a = r_inv + &x * x.adjoint() / c(noise_scale);
        a.try_inverse().unwrap().trace().re
    }

    #[test]
    fn zero_precoder_gives_prior_trace() {
        let r = CorrelationMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let s = complex_normal_matrix(&mut substream(0, 0), 2, 5);
        let v = conditional_mse(&Precoder::zeros(2), &s, &r, 1.0, 1).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        let cfg = SystemConfig::new(2, 1, 5, 1.0, 1.0, 0).unwrap();
        assert!((deterministic_lmmse(&Precoder::zeros(2), &cfg, &r).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_case_is_one() {
        let r = CorrelationMatrix::diagonal(&[1.0, 1.0]).unwrap();
        let w = Precoder::new(CMatrix::identity(2, 2), 2.0).unwrap();
        let s = CMatrix::identity(2, 2);
        let v = conditional_mse(&w, &s, &r, 1.0, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_mse_matches_dense_oracle() {
        let r = gen_correlation(4, 1.0, 10.0, 17).unwrap();
        let mut rng = substream(17, 1);
        let w = complex_normal_matrix(&mut rng, 4, 4);
        let s = complex_normal_matrix(&mut rng, 4, 6);
        let got =
            conditional_mse(&Precoder::from_matrix_unchecked(w.clone()), &s, &r, 0.7, 3).unwrap();
        let want = dense_conditional_mse(&w, &s, r.matrix(), 0.7 * 3.0);
        assert!((got - want).abs() / want < 1e-10);
    }

    #[test]
    fn deterministic_lmmse_equals_orthogonal_conditional() {
        let cfg = SystemConfig::new(4, 2, 6, 3.0, 0.5, 0).unwrap();
        let r = gen_correlation(4, 1.0, 10.0, 2).unwrap();
        let batch = sample_signals(&cfg, 4, SignalKind::DeterministicOrthogonal, 9).unwrap();
        for (k, s) in batch.samples().iter().enumerate() {
            let w = Precoder::from_matrix_unchecked(complex_normal_matrix(
                &mut substream(k as u64, 3),
                4,
                4,
            ));
            let a = deterministic_lmmse(&w, &cfg, &r).unwrap();
            let b = conditional_mse(&w, s, &r, cfg.noise_var, cfg.n_rx).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn symmetric_case_scalar_formula() {
        let (n, lam, len, p, noise, n_rx) = (3usize, 2.5, 4usize, 6.0, 0.8, 2usize);
        let r = CorrelationMatrix::diagonal(&vec![lam; n]).unwrap();
        let cfg = SystemConfig::new(n, n_rx, len, p, noise, 0).unwrap();
        let w = Precoder::uniform(n, p);
        let got = deterministic_lmmse(&w, &cfg, &r).unwrap();
        let want = n as f64 / (1.0 / lam + len as f64 * p / (n as f64 * noise * n_rx as f64));
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn scalar_shrinkage_estimate() {
        let (n, cst, noise, n_rx) = (3usize, 4.0f64, 0.5, 2usize);
        let r = CorrelationMatrix::diagonal(&vec![1.0; n]).unwrap();
        let x = CMatrix::identity(n, n) * c(cst.sqrt());
        let y = complex_normal_matrix(&mut substream(1, 0), n_rx, n);
        let h = lmmse_estimate(&y, &x, &r, noise, n_rx).unwrap();
        let want = &y * c(cst.sqrt() / (cst + noise * n_rx as f64));
        assert!(crate::linalg::rel_frob_err(&h, &want) < 1e-12);

        let zero = lmmse_estimate(&y, &CMatrix::zeros(n, n), &r, noise, n_rx).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn estimate_matches_dense_formula() {
        let cfg = SystemConfig::new(3, 3, 3, 1.0, 0.3, 0).unwrap();
        let r = gen_correlation(3, 1.0, 10.0, 5).unwrap();
        let scene = SensingScene::sample(
            &SystemConfig {
                noise_var: 0.0,
                ..cfg.clone()
            },
            &r,
            8,
        )
        .unwrap();
        let x = complex_normal_matrix(&mut substream(5, 5), 3, 3);
        let y = forward_model(&scene, &x).unwrap();
        let got = lmmse_estimate(&y, &x, &r, cfg.noise_var, 3).unwrap();
        let m = x.adjoint() * r.matrix() * &x + CMatrix::identity(3, 3) * c(0.3 * 3.0);
        let want = &y * m.try_inverse().unwrap() * x.adjoint() * r.matrix();
        assert!(crate::linalg::rel_frob_err(&got, &want) < 1e-10);
    }

    #[test]
    fn mse_is_bounded_by_prior_trace_and_monotone_in_scale() {
        let r = gen_correlation(4, 1.0, 10.0, 1).unwrap();
        for seed in 0..20 {
            let mut rng = substream(seed, 7);
            let w = complex_normal_matrix(&mut rng, 4, 4);
            let s = complex_normal_matrix(&mut rng, 4, 3);
            let f = |a: f64| {
                conditional_mse(&Precoder::from_matrix_unchecked(&w * c(a)), &s, &r, 1.0, 2)
                    .unwrap()
            };
            let base = f(1.0);
            assert!(base > 0.0 && base <= r.trace() + 1e-12);
            assert!(f(1.5) <= base + 1e-12);
            assert!(f(3.0) <= f(1.5) + 1e-12);
        }
    }

    #[test]
    fn empirical_mse_is_deterministic_and_zero_precoder_recovers_prior() {
        let cfg = SystemConfig::new(3, 2, 4, 1.0, 1.0, 0).unwrap();
        let r = gen_correlation(3, 1.0, 4.0, 0).unwrap();
        let s = complex_normal_matrix(&mut substream(0, 1), 3, 4);
        let w = Precoder::uniform(3, 1.0);
        assert_eq!(
            empirical_mse(&w, &s, &cfg, &r, 50, 3).unwrap(),
            empirical_mse(&w, &s, &cfg, &r, 50, 3).unwrap()
        );
        let prior = empirical_mse(&Precoder::zeros(3), &s, &cfg, &r, 4000, 3).unwrap();
        assert!((prior - r.trace()).abs() / r.trace() < 0.05, "{prior}");
        assert!(empirical_mse(&w, &s, &cfg, &r, 0, 3).is_err());
    }

    #[test]
    fn precoder_feasibility() {
        assert!(Precoder::new(CMatrix::identity(2, 2), 1.0).is_err());
        assert!(Precoder::new(CMatrix::identity(2, 2), 2.0).is_ok());
        assert!(Precoder::new(CMatrix::zeros(2, 3), 2.0).is_err());
        assert!((Precoder::uniform(4, 8.0).power() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn scene_report_is_consistent() {
        let cfg = SystemConfig::new(2, 2, 4, 2.0, 0.5, 0).unwrap();
        let r = gen_correlation(2, 1.0, 3.0, 0).unwrap();
        let s = complex_normal_matrix(&mut substream(4, 4), 2, 4);
        let scene = SensingScene::sample(&cfg, &r, 2).unwrap();
        let rep = estimate_scene(&scene, &Precoder::uniform(2, 2.0), &s, &cfg, &r).unwrap();
        assert!(rep.squared_error >= 0.0);
        assert!(rep.theoretical_mse > 0.0 && rep.theoretical_mse <= r.trace());
        assert_eq!(rep.estimate.shape(), (2, 2));
    }
}
