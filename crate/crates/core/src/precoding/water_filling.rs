use nalgebra::Complex;

use crate::estimation::Precoder;
use crate::model::{CorrelationMatrix, SystemConfig};
use crate::precoding::project_to_ball;

/// Power-allocation optimum for deterministic training.
#[derive(Clone, Debug)]
pub struct WaterFillingResult {
    pub precoder: Precoder,
    /// Water level `mu_0`.
    pub water_level: f64,
    /// Per-eigendirection power `(sigma^2 N_r / L) (mu_0 - 1/lambda_i)^+`,
    /// in descending-eigenvalue order.
    pub powers: Vec<f64>,
    pub active_set: Vec<bool>,
}

const BISECTION_ITERS: usize = 200;

/// Water-filling over the eigendirections of `R_H`:
/// `W = sqrt(sigma^2 N_r / L) Q [(mu_0 I - Lambda^{-1})^+]^{1/2}` with `mu_0`
/// found by bisection so that `||W||_F^2 = P`.
pub fn water_filling(config: &SystemConfig, corr: &CorrelationMatrix) -> WaterFillingResult {
    let gain = config.noise_scale() / config.frame_len as f64;
    let floors: Vec<f64> = corr.eigvals().iter().map(|l| 1.0 / l).collect();
    let total = |mu: f64| gain * floors.iter().map(|f| (mu - f).max(0.0)).sum::<f64>();

    let min_floor = floors.iter().copied().fold(f64::INFINITY, f64::min);
    let max_floor = floors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = min_floor;
    let mut hi = max_floor + config.power / gain;
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) < config.power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = if (total(lo) - config.power).abs() <= (total(hi) - config.power).abs() {
        lo
    } else {
        hi
    };

    let powers: Vec<f64> = floors.iter().map(|f| gain * (mu - f).max(0.0)).collect();
    let active_set = powers.iter().map(|&p| p > 0.0).collect();
    let mut w = corr.eigvecs().clone();
    for (j, p) in powers.iter().enumerate() {
        let a = Complex::new(p.sqrt(), 0.0);
        w.column_mut(j).iter_mut().for_each(|z| *z *= a);
    }
    WaterFillingResult {
        precoder: project_to_ball(w, config.power),
        water_level: mu,
        powers,
        active_set,
    }
}
