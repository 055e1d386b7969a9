//! Sensing with random communication signals.
//!
//! A MIMO transmitter probes a target with precoded signals `X = W S` and the
//! co-located receiver estimates the target response matrix `H` from the
//! echoes `Y = H X + Z` with the LMMSE estimator. When `S` carries random data
//! the estimation error itself is random; its expectation over `S` (the
//! ergodic LMMSE, ELMMSE) is the figure of merit this crate computes and
//! minimizes.
//!
//! Module map:
//!
//! - [`model`]: system configuration, random correlation matrices, signals,
//!   channels and the forward echo model.
//! - [`estimation`]: LMMSE estimator, conditional error `f(W; S)`, the
//!   deterministic-training error and an empirical Monte Carlo check.
//! - [`elmmse`]: sample-average ELMMSE and its Jensen lower bound.
//! - [`precoding`]: water-filling, data-dependent SCA and data-independent
//!   stochastic gradient projection.
//! - [`experiments`]: config parsing, scenario runner and CSV output.
//!
//! ```
//! use isac_elmmse::prelude::*;
//!
//! let sys = SystemConfig::new(4, 2, 8, 10.0, 1.0, 7).unwrap();
//! let corr = CorrelationMatrix::random(4, 1.0, 10.0, 7).unwrap();
//! let wf = water_filling(&sys, &corr);
//! let batch = SignalBatch::sample(&sys, 200, SignalKind::Gaussian, 11).unwrap();
//! let est = monte_carlo_elmmse(&wf.precoder, &batch, &sys, &corr).unwrap();
//! let bound = jensen_bound(&wf.precoder, &sys, &corr).unwrap();
//! assert!(est.mean + 3.0 * est.std_error >= bound);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elmmse;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod precoding;
pub mod rng;

pub use error::{Error, Result};

/// Complex matrix type used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<nalgebra::Complex<f64>>;
/// Complex scalar.
pub type C64 = nalgebra::Complex<f64>;

pub mod prelude {
    pub use crate::elmmse::{jensen_bound, monte_carlo_elmmse, ElmmseEstimate};
    pub use crate::error::{Error, Result};
    pub use crate::estimation::{
        conditional_mse, deterministic_lmmse, empirical_mse, lmmse_estimate, EstimateReport,
        Precoder,
    };
    pub use crate::model::{
        forward_model, CorrelationMatrix, SensingScene, SignalBatch, SignalKind, SystemConfig,
    };
    pub use crate::precoding::{
        data_dependent_suite, elmmse_gradient, exact_line_search, project_to_ball, sca_optimize,
        sca_subproblem, sgp_optimize, water_filling, ConvergenceTrace, LineSearch, ScaConfig,
        SgpConfig, TraceRecord, WaterFillingResult,
    };
    pub use crate::{CMatrix, C64};
}
