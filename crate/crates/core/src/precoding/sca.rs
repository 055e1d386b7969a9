//! Data-dependent design: successive convex approximation of `f(W; S)` for
//! one known signal realization.
//!
//! Each iteration linearizes `f` at the current point, minimizes the linear
//! model over the power ball (closed form), and moves toward that minimizer
//! with an exact line search.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{conditional_mse, Precoder};
use crate::linalg::{frob_sq, inner};
use crate::model::{CorrelationMatrix, SignalBatch, SystemConfig};
use crate::precoding::{objective_and_gradient, project_to_ball, ConvergenceTrace, TraceRecord};
use crate::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    /// Points of the uniform grid on `[0, 1]`.
    pub grid_points: usize,
    /// Golden-section iterations inside the best grid bracket.
    pub refine_iters: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            grid_points: 33,
            refine_iters: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaConfig {
    /// `t_max`.
    pub max_iters: usize,
    /// `xi < 0`: iterate while the linearized descent `g(W')` is below it.
    pub stop_gap: f64,
    pub line_search: LineSearch,
}

impl Default for ScaConfig {
    fn default() -> Self {
        ScaConfig {
            max_iters: 30,
            stop_gap: -0.1,
            line_search: LineSearch::default(),
        }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("SCA max_iters must be at least 1"));
        }
        if !(self.stop_gap < 0.0) {
            return Err(Error::invalid("SCA stop_gap must be negative"));
        }
        if self.line_search.grid_points < 2 {
            return Err(Error::invalid("line search needs at least 2 grid points"));
        }
        Ok(())
    }
}

/// Minimizer of `Re tr(G^H W)` over `||W||_F^2 <= P`: `-sqrt(P) G / ||G||_F`.
/// Returns `None` when `G = 0` (every feasible point is optimal).
pub fn sca_subproblem(gradient: &CMatrix, power: f64) -> Option<Precoder> {
    let norm = frob_sq(gradient).sqrt();
    if norm == 0.0 {
        return None;
    }
    let w = gradient * C64::new(-power.sqrt() / norm, 0.0);
    Some(project_to_ball(w, power))
}

/// Minimizes `phi(d) = f(W_t + d (W' - W_t); S)` over `d in [0, 1]`: uniform
/// grid, then golden-section search on the bracket around the first grid
/// minimum. Returns `(step, objective)` with `objective <= phi(0)`.
pub fn exact_line_search(
    w_t: &Precoder,
    w_prime: &Precoder,
    s: &CMatrix,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
    search: &LineSearch,
) -> Result<(f64, f64)> {
    let dir = w_prime.matrix() - w_t.matrix();
    let phi = |d: f64| -> Result<f64> {
        let w = Precoder::from_matrix_unchecked(w_t.matrix() + &dir * C64::new(d, 0.0));
        conditional_mse(&w, s, corr, config.noise_var, config.n_rx)
    };

    let n = search.grid_points.max(2);
    let grid: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&d| phi(d)).collect::<Result<_>>()?;
    // first index attaining the minimum
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, &v)| if v < values[b] { k } else { b });
    let (mut best_d, mut best_v) = (grid[best], values[best]);

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(n - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = phi(x1)?;
    let mut f2 = phi(x2)?;
    for _ in 0..search.refine_iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = phi(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = phi(x2)?;
        }
    }
    for (d, v) in [(x1, f1), (x2, f2)] {
        if v < best_v {
            best_d = d;
            best_v = v;
        }
    }
    Ok((best_d, best_v))
}

/// Runs SCA on one realization `s` from `init`.
///
/// Stops when the linearized descent `g(W') = <grad, W' - W_t>` is no longer
/// below `cfg.stop_gap`, when the gradient vanishes, or after
/// `cfg.max_iters` iterations.
pub fn sca_optimize(
    s: &CMatrix,
    init: &Precoder,
    cfg: &ScaConfig,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
) -> Result<(Precoder, ConvergenceTrace)> {
    cfg.validate()?;
    if !init.is_feasible(config.power) {
        return Err(Error::invalid(
            "initial precoder is outside the power budget",
        ));
    }
    let start = Instant::now();
    let mut w = init.clone();
    let mut objective = conditional_mse(&w, s, corr, config.noise_var, config.n_rx)?;
    let mut records = vec![TraceRecord {
        iteration: 0,
        objective,
        step_size: 0.0,
        descent_gap: 0.0,
    }];

    for t in 1..=cfg.max_iters {
        let (_, grad) = objective_and_gradient(&w, s, corr, config.noise_var, config.n_rx)?;
        let Some(w_prime) = sca_subproblem(&grad, config.power) else {
            records.push(TraceRecord {
                iteration: t,
                objective,
                step_size: 0.0,
                descent_gap: 0.0,
            });
            break;
        };
        let gap = inner(&grad, &(w_prime.matrix() - w.matrix()));
        if gap >= cfg.stop_gap {
            records.push(TraceRecord {
                iteration: t,
                objective,
                step_size: 0.0,
                descent_gap: gap,
            });
            break;
        }
        let (step, next) = exact_line_search(&w, &w_prime, s, config, corr, &cfg.line_search)?;
        if next < objective {
            let dir = w_prime.matrix() - w.matrix();
            w = project_to_ball(w.matrix() + dir * C64::new(step, 0.0), config.power);
            objective = next;
        }
        records.push(TraceRecord {
            iteration: t,
            objective,
            step_size: step,
            descent_gap: gap,
        });
    }

    Ok((
        w,
        ConvergenceTrace {
            records,
            wall_clock: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Result of designing one precoder per signal realization.
#[derive(Clone, Debug)]
pub struct DataDependentSuite {
    pub precoders: Vec<Precoder>,
    /// `f(W_n*; S_n)`, in batch order.
    pub objectives: Vec<f64>,
    /// `(1/N) sum_n f(W_n*; S_n)`.
    pub average: f64,
}

/// Independent SCA runs for every sample of `batch`.
pub fn data_dependent_suite(
    batch: &SignalBatch,
    init: &Precoder,
    cfg: &ScaConfig,
    config: &SystemConfig,
    corr: &CorrelationMatrix,
) -> Result<DataDependentSuite> {
    let runs: Vec<(Precoder, f64)> = batch
        .samples()
        .par_iter()
        .map(|s| {
            let (w, trace) = sca_optimize(s, init, cfg, config, corr)?;
            Ok((
                w,
                trace
                    .final_objective()
                    .expect("trace has a starting record"),
            ))
        })
        .collect::<Result<_>>()?;
    let (precoders, objectives): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let average = crate::linalg::pairwise_sum(&objectives) / objectives.len() as f64;
    Ok(DataDependentSuite {
        precoders,
        objectives,
        average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_correlation, sample_signals, SignalKind};
    use crate::rng::{complex_normal_matrix, substream};

    fn setup(seed: u64) -> (SystemConfig, CorrelationMatrix, CMatrix) {
        let cfg = SystemConfig::new(4, 2, 4, 4.0, 1.0, seed).unwrap();
        let r = gen_correlation(4, 1.0, 10.0, seed).unwrap();
        let s = complex_normal_matrix(&mut substream(seed, 9), 4, 4);
        (cfg, r, s)
    }

    #[test]
    fn subproblem_closed_form() {
        assert!(sca_subproblem(&CMatrix::zeros(2, 2), 1.0).is_none());
        let mut g = CMatrix::zeros(2, 2);
        g[(0, 0)] = C64::new(1.0, 0.0);
        let w = sca_subproblem(&g, 4.0).unwrap();
        let mut want = CMatrix::zeros(2, 2);
        want[(0, 0)] = C64::new(-2.0, 0.0);
        assert!(crate::linalg::rel_frob_err(w.matrix(), &want) < 1e-15);
    }

    #[test]
    fn subproblem_beats_scaled_directions() {
        let mut rng = substream(3, 0);
        let g = complex_normal_matrix(&mut rng, 3, 3);
        let w = sca_subproblem(&g, 1.0).unwrap();
        assert!((w.power() - 1.0).abs() < 1e-12);
        let val = inner(&g, w.matrix());
        assert!((val + frob_sq(&g).sqrt()).abs() < 1e-12);
        // grid over directions u scaled to radius r <= 1
        for k in 0..200 {
            let u = complex_normal_matrix(&mut rng, 3, 3);
            let u = &u / C64::new(frob_sq(&u).sqrt(), 0.0);
            let radius = (k % 20) as f64 / 19.0;
            assert!(val <= inner(&g, &(&u * C64::new(radius, 0.0))) + 1e-12);
        }
    }

    #[test]
    fn line_search_matches_dense_grid() {
        let (cfg, r, s) = setup(5);
        let w_t = Precoder::uniform(4, cfg.power);
        let (_, g) = objective_and_gradient(&w_t, &s, &r, cfg.noise_var, cfg.n_rx).unwrap();
        let w_p = sca_subproblem(&g, cfg.power).unwrap();
        let (step, obj) =
            exact_line_search(&w_t, &w_p, &s, &cfg, &r, &LineSearch::default()).unwrap();

        let dir = w_p.matrix() - w_t.matrix();
        let (mut bd, mut bv) = (0.0, f64::INFINITY);
        for k in 0..=10_000 {
            let d = k as f64 / 10_000.0;
            let w = Precoder::from_matrix_unchecked(w_t.matrix() + &dir * C64::new(d, 0.0));
            let v = conditional_mse(&w, &s, &r, cfg.noise_var, cfg.n_rx).unwrap();
            if v < bv {
                bd = d;
                bv = v;
            }
        }
        assert!((step - bd).abs() < 1e-3, "step {step} vs {bd}");
        assert!(obj <= bv + 1e-8, "obj {obj} vs {bv}");
        let f0 = conditional_mse(&w_t, &s, &r, cfg.noise_var, cfg.n_rx).unwrap();
        assert!(obj <= f0);
    }

    #[test]
    fn degenerate_segment_returns_start_value() {
        let (cfg, r, s) = setup(6);
        let w = Precoder::uniform(4, cfg.power);
        let (_, obj) = exact_line_search(&w, &w, &s, &cfg, &r, &LineSearch::default()).unwrap();
        let f = conditional_mse(&w, &s, &r, cfg.noise_var, cfg.n_rx).unwrap();
        assert_eq!(obj, f);
    }

    #[test]
    fn stationary_start_stops_immediately() {
        let (cfg, r, s) = setup(7);
        let zero = Precoder::zeros(4);
        let (w, trace) = sca_optimize(&s, &zero, &ScaConfig::default(), &cfg, &r).unwrap();
        assert_eq!(w, zero);
        assert_eq!(trace.iterations(), 1);
    }

    #[test]
    fn trace_is_non_increasing_and_feasible() {
        for seed in 0..10 {
            let (cfg, r, s) = setup(seed);
            let init = Precoder::uniform(4, cfg.power);
            let (w, trace) = sca_optimize(&s, &init, &ScaConfig::default(), &cfg, &r).unwrap();
            assert!(w.is_feasible(cfg.power));
            let objs: Vec<f64> = trace.objectives().collect();
            assert!(objs.windows(2).all(|p| p[1] <= p[0]));
            assert!(trace.records.iter().all(|rec| rec.descent_gap <= 0.0));
        }
    }

    #[test]
    fn infeasible_init_rejected() {
        let (cfg, r, s) = setup(1);
        let big = Precoder::uniform(4, 100.0);
        assert!(sca_optimize(&s, &big, &ScaConfig::default(), &cfg, &r).is_err());
        let bad = ScaConfig {
            stop_gap: 0.1,
            ..ScaConfig::default()
        };
        assert!(sca_optimize(&s, &Precoder::zeros(4), &bad, &cfg, &r).is_err());
    }

    #[test]
    fn suite_of_one_equals_single_run() {
        let (cfg, r, _) = setup(2);
        let batch = sample_signals(&cfg, 1, SignalKind::Gaussian, 4).unwrap();
        let init = Precoder::uniform(4, cfg.power);
        let suite = data_dependent_suite(&batch, &init, &ScaConfig::default(), &cfg, &r).unwrap();
        let (w, trace) =
            sca_optimize(&batch.samples()[0], &init, &ScaConfig::default(), &cfg, &r).unwrap();
        assert_eq!(suite.precoders[0], w);
        assert_eq!(suite.average, trace.final_objective().unwrap());
    }
}
