use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::elmmse::{jensen_bound, monte_carlo_elmmse, ElmmseEstimate};
use crate::error::{Error, Result};
use crate::estimation::Precoder;
use crate::experiments::config::{ExperimentConfig, Scenario, Scheme};
use crate::experiments::trace::export_trace;
use crate::model::{CorrelationMatrix, SignalBatch, SystemConfig};
use crate::precoding::{
    data_dependent_suite, sca_optimize, sgp_optimize, water_filling, ConvergenceTrace,
};
use crate::rng::child_seed;

// Seed labels.
const CORR: u64 = 0;
const EVAL: u64 = 1;
const SGP: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_point: f64,
    pub scheme: String,
    pub metric_mean: f64,
    pub metric_stderr: f64,
    /// Seconds spent producing this row's precoder and metric.
    pub wall_clock: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn get(&self, sweep_point: f64, scheme: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_point == sweep_point && r.scheme == scheme)
    }

    /// Rows of one scheme in sweep order.
    pub fn series(&self, scheme: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }
}

/// Iterative designs that produce a convergence trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Sca,
    Sgp,
}

/// Everything a sweep point needs, derived from the master seed alone.
struct PointContext<'a> {
    cfg: &'a ExperimentConfig,
    corr: &'a CorrelationMatrix,
    system: SystemConfig,
    value: f64,
    seed: u64,
}

impl PointContext<'_> {
    fn eval_batch(&self) -> Result<SignalBatch> {
        SignalBatch::sample(
            &self.system,
            self.cfg.batch_count,
            self.cfg.signal_kind,
            child_seed(self.seed, EVAL),
        )
    }

    fn init(&self) -> Precoder {
        self.cfg.init.precoder(&self.system, self.corr)
    }

    fn sgp(&self) -> Result<(Precoder, ConvergenceTrace)> {
        sgp_optimize(
            &self.system,
            self.corr,
            &self.init(),
            &self.cfg.sgp,
            child_seed(self.seed, SGP),
        )
    }

    fn sca_first(&self, batch: &SignalBatch) -> Result<(Precoder, ConvergenceTrace)> {
        sca_optimize(
            &batch.samples()[0],
            &self.init(),
            &self.cfg.sca,
            &self.system,
            self.corr,
        )
    }

    fn row(
        &self,
        scheme: impl Into<String>,
        mean: f64,
        stderr: f64,
        started: Instant,
    ) -> ResultRow {
        ResultRow {
            sweep_point: self.value,
            scheme: scheme.into(),
            metric_mean: mean,
            metric_stderr: stderr,
            wall_clock: started.elapsed().as_secs_f64(),
        }
    }

    fn with_bound(&self) -> bool {
        matches!(
            self.cfg.scenario,
            Scenario::AsymptoticL | Scenario::DetVsRandom
        )
    }

    fn precoder_rows(
        &self,
        scheme: Scheme,
        w: &Precoder,
        batch: &SignalBatch,
        started: Instant,
    ) -> Result<Vec<ResultRow>> {
        let ElmmseEstimate {
            mean, std_error, ..
        } = monte_carlo_elmmse(w, batch, &self.system, self.corr)?;
        let mut rows = vec![self.row(scheme.name(), mean, std_error, started)];
        if self.with_bound() {
            let bound = jensen_bound(w, &self.system, self.corr)?;
            rows.push(self.row(format!("{}_bound", scheme.name()), bound, 0.0, started));
        }
        Ok(rows)
    }

    fn run(&self) -> Result<Vec<ResultRow>> {
        let batch = self.eval_batch()?;
        let mut rows = Vec::new();
        for &scheme in &self.cfg.precoders {
            let started = Instant::now();
            match scheme {
                Scheme::WaterFilling => {
                    let wf = water_filling(&self.system, self.corr).precoder;
                    rows.extend(self.precoder_rows(scheme, &wf, &batch, started)?);
                }
                Scheme::Sgp => {
                    let (w, _) = self.sgp()?;
                    rows.extend(self.precoder_rows(scheme, &w, &batch, started)?);
                }
                Scheme::DataDependent if self.cfg.scenario == Scenario::Convergence => {
                    let (_, trace) = self.sca_first(&batch)?;
                    let obj = trace.final_objective().expect("nonempty trace");
                    rows.push(self.row(scheme.name(), obj, 0.0, started));
                }
                Scheme::DataDependent => {
                    let suite = data_dependent_suite(
                        &batch,
                        &self.init(),
                        &self.cfg.sca,
                        &self.system,
                        self.corr,
                    )?;
                    let est = ElmmseEstimate::from_values(&suite.objectives)?;
                    rows.push(self.row(scheme.name(), est.mean, est.std_error, started));
                }
            }
        }
        Ok(rows)
    }
}

fn correlation(cfg: &ExperimentConfig) -> Result<CorrelationMatrix> {
    CorrelationMatrix::random(
        cfg.system.n_tx,
        cfg.eig_low,
        cfg.eig_high,
        child_seed(cfg.system.master_seed, CORR),
    )
}

fn contexts<'a>(cfg: &'a ExperimentConfig, corr: &'a CorrelationMatrix) -> Vec<PointContext<'a>> {
    cfg.sweep
        .iter()
        .enumerate()
        .map(|(i, &value)| PointContext {
            cfg,
            corr,
            system: cfg.system_at(value),
            value,
            seed: child_seed(cfg.system.master_seed, 1000 + i as u64),
        })
        .collect()
}

/// Runs the configured scenario, writes the results CSV to
/// `cfg.output_path` and the timing sidecar next to it, and returns the
/// table. Convergence runs also write one trace file per sweep point and
/// algorithm (`<stem>_sca_<i>.csv`, `<stem>_sgp_<i>.csv`).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let corr = correlation(cfg)?;
    let points = contexts(cfg, &corr);
    let per_point: Vec<Vec<ResultRow>> = points
        .par_iter()
        .map(PointContext::run)
        .collect::<Result<_>>()?;
    let table = ResultTable {
        rows: per_point.into_iter().flatten().collect(),
    };

    write_results_csv(&table, &cfg.output_path)?;
    write_timing_csv(&table, timing_path(&cfg.output_path))?;
    if cfg.scenario == Scenario::Convergence {
        for (i, point) in points.iter().enumerate() {
            for alg in [Algorithm::Sca, Algorithm::Sgp] {
                let trace = point_trace(point, alg)?;
                export_trace(&trace, trace_path(&cfg.output_path, alg, i))?;
            }
        }
    }
    Ok(table)
}

fn point_trace(point: &PointContext<'_>, alg: Algorithm) -> Result<ConvergenceTrace> {
    match alg {
        Algorithm::Sca => point.sca_first(&point.eval_batch()?).map(|r| r.1),
        Algorithm::Sgp => point.sgp().map(|r| r.1),
    }
}

/// Convergence trace of `alg` at sweep point `index`. SCA runs on the first
/// sample of that point's evaluation batch.
pub fn run_trace(cfg: &ExperimentConfig, alg: Algorithm, index: usize) -> Result<ConvergenceTrace> {
    cfg.validate()?;
    if index >= cfg.sweep.len() {
        return Err(Error::config(
            "sweep",
            format!(
                "point {index} out of range (sweep has {} points)",
                cfg.sweep.len()
            ),
        ));
    }
    let corr = correlation(cfg)?;
    let points = contexts(cfg, &corr);
    point_trace(&points[index], alg)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    path.with_file_name(format!("{stem}{suffix}"))
}

/// `<stem>.timing.csv` next to the results file.
pub fn timing_path(path: &Path) -> PathBuf {
    sibling(path, ".timing.csv")
}

fn trace_path(path: &Path, alg: Algorithm, index: usize) -> PathBuf {
    let tag = match alg {
        Algorithm::Sca => "sca",
        Algorithm::Sgp => "sgp",
    };
    sibling(path, &format!("_{tag}_{index}.csv"))
}

pub fn write_results_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["sweep_point", "scheme", "metric_mean", "metric_stderr"])?;
    for r in &table.rows {
        wtr.write_record([
            r.sweep_point.to_string(),
            r.scheme.clone(),
            r.metric_mean.to_string(),
            r.metric_stderr.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_timing_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["sweep_point", "scheme", "wall_clock"])?;
    for r in &table.rows {
        wtr.write_record([
            r.sweep_point.to_string(),
            r.scheme.clone(),
            r.wall_clock.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(scenario: &str, extra: &str, out: &Path) -> ExperimentConfig {
        let doc = format!(
            "scenario = \"{scenario}\"\nn_tx = 3\nn_rx = 2\nframe_len = 4\nbatch_count = 20\n\
             sgp_max_iters = 60\nsweep = [10.0, 20.0]\n\
             precoders = [\"water_filling\", \"sgp\", \"data_dependent\"]\n\
             output_path = {:?}\n{extra}",
            out.display().to_string()
        );
        ExperimentConfig::from_toml_str(&doc).unwrap()
    }

    #[test]
    fn snr_sweep_writes_one_row_per_point_and_scheme() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let table = run_experiment(&tiny("snr_sweep", "", &out)).unwrap();
        assert_eq!(table.rows.len(), 6);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("sweep_point,scheme,metric_mean,metric_stderr\n"));
        assert_eq!(text.lines().count(), 7);
        assert!(timing_path(&out).exists());
        for r in &table.rows {
            assert!(r.metric_mean.is_finite() && r.metric_mean > 0.0);
        }
    }

    #[test]
    fn convergence_writes_traces() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("conv.csv");
        run_experiment(&tiny("convergence", "", &out)).unwrap();
        for name in ["conv_sca_0.csv", "conv_sgp_1.csv"] {
            let recs = crate::experiments::read_trace(dir.path().join(name)).unwrap();
            assert!(!recs.is_empty());
        }
    }

    #[test]
    fn trace_index_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny("snr_sweep", "", &dir.path().join("x.csv"));
        assert!(run_trace(&cfg, Algorithm::Sca, 5).is_err());
        let t = run_trace(&cfg, Algorithm::Sca, 1).unwrap();
        assert!(t.iterations() >= 1);
    }
}
