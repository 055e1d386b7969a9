//! Precoder design: the water-filling baseline, data-dependent SCA and
//! data-independent stochastic gradient projection.

mod gradient;
mod projection;
mod sca;
mod sgp;
mod water_filling;

use serde::{Deserialize, Serialize};

pub use gradient::{elmmse_gradient, minibatch_gradient, objective_and_gradient};
pub use projection::project_to_ball;
pub use sca::{
    data_dependent_suite, exact_line_search, sca_optimize, sca_subproblem, DataDependentSuite,
    LineSearch, ScaConfig,
};
pub use sgp::{sgp_optimize, SgpConfig};
pub use water_filling::{water_filling, WaterFillingResult};

use crate::estimation::Precoder;
use crate::model::{CorrelationMatrix, SystemConfig};

/// One iteration of an optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub step_size: f64,
    /// SCA: linearized descent `g(W')`. SGP: mini-batch gradient norm.
    pub descent_gap: f64,
}

/// Per-iteration history of an optimizer run. Record 0 is the starting point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    /// Seconds.
    pub wall_clock: f64,
}

impl ConvergenceTrace {
    /// Number of optimizer iterations (records after the starting point).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }
}

/// Starting point for the iterative designs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    #[default]
    WaterFilling,
    Uniform,
}

impl InitStrategy {
    pub fn precoder(self, config: &SystemConfig, corr: &CorrelationMatrix) -> Precoder {
        match self {
            InitStrategy::WaterFilling => water_filling(config, corr).precoder,
            InitStrategy::Uniform => Precoder::uniform(config.n_tx, config.power),
        }
    }
}
