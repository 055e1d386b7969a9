//! Experiment configuration: a flat TOML document with dBm-valued power and
//! noise. Unknown keys are rejected; omitted optional keys take the
//! reference simulation defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dbm_to_mw, SignalKind, SystemConfig};
use crate::precoding::{InitStrategy, LineSearch, ScaConfig, SgpConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// ELMMSE vs. its bound over frame lengths (sweep = L values).
    #[serde(rename = "asymptotic_L")]
    AsymptoticL,
    /// Optimizer convergence (sweep = SNR in dB).
    Convergence,
    /// Scheme comparison over SNR (sweep = SNR in dB).
    SnrSweep,
    /// Random vs. deterministic signals over SNR (sweep = SNR in dB).
    DetVsRandom,
}

impl Scenario {
    pub fn sweeps_frame_len(self) -> bool {
        self == Scenario::AsymptoticL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    WaterFilling,
    Sgp,
    DataDependent,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::WaterFilling => "water_filling",
            Scheme::Sgp => "sgp",
            Scheme::DataDependent => "data_dependent",
        }
    }
}

/// Desk-scale antenna counts used when the document omits them.
pub const DESK_N_TX: usize = 8;
pub const DESK_N_RX: usize = 4;
/// Antenna counts of the reference large-array setup.
pub const FULL_N_TX: usize = 64;
pub const FULL_N_RX: usize = 32;

/// On-disk form. Every key but `scenario`, `sweep` and `precoders` is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDocument {
    scenario: Option<Scenario>,
    n_tx: Option<usize>,
    n_rx: Option<usize>,
    frame_len: Option<usize>,
    power_dbm: Option<f64>,
    noise_dbm: Option<f64>,
    eig_low: Option<f64>,
    eig_high: Option<f64>,
    sweep: Option<Vec<f64>>,
    precoders: Option<Vec<Scheme>>,
    batch_count: Option<usize>,
    signal_kind: Option<SignalKind>,
    output_path: Option<PathBuf>,
    master_seed: Option<u64>,
    init: Option<InitStrategy>,
    sca_max_iters: Option<usize>,
    sca_stop_gap: Option<f64>,
    line_search_grid: Option<usize>,
    line_search_refine: Option<usize>,
    sgp_batch_size: Option<usize>,
    sgp_max_iters: Option<usize>,
    sgp_tol: Option<f64>,
    sgp_step_scale: Option<f64>,
    sgp_window: Option<usize>,
}

/// Validated experiment description. `system.power` and `system.noise_var`
/// are linear; the dBm values they came from are kept for re-emission.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub system: SystemConfig,
    pub power_dbm: f64,
    pub noise_dbm: f64,
    pub eig_low: f64,
    pub eig_high: f64,
    pub sweep: Vec<f64>,
    pub precoders: Vec<Scheme>,
    /// `N`, size of the evaluation batch at every sweep point.
    pub batch_count: usize,
    pub signal_kind: SignalKind,
    pub output_path: PathBuf,
    pub init: InitStrategy,
    pub sca: ScaConfig,
    pub sgp: SgpConfig,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(field, "missing required key"))
}

/// Best-effort key name for a TOML error: the `key = ...` text on the line
/// where the error starts.
fn field_of(source: &str, err: &toml::de::Error) -> String {
    let Some(span) = err.span() else {
        return "document".into();
    };
    let line_start = source[..span.start].rfind('\n').map_or(0, |i| i + 1);
    let line = source[line_start..].lines().next().unwrap_or("");
    match line.split_once('=') {
        Some((key, _)) if !key.trim().is_empty() => key.trim().to_string(),
        _ => "document".into(),
    }
}

impl ExperimentConfig {
    /// Parses a TOML document.
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let doc: ConfigDocument = toml::from_str(source)
            .map_err(|e| Error::config(field_of(source, &e), e.message().to_string()))?;
        Self::from_document(doc)
    }

    fn from_document(doc: ConfigDocument) -> Result<Self> {
        let defaults_sca = ScaConfig::default();
        let defaults_sgp = SgpConfig::default();
        let scenario = required(doc.scenario, "scenario")?;
        let sweep = required(doc.sweep, "sweep")?;
        let precoders = required(doc.precoders, "precoders")?;
        let power_dbm = doc.power_dbm.unwrap_or(30.0);
        let noise_dbm = doc.noise_dbm.unwrap_or(0.0);

        let system = SystemConfig {
            n_tx: doc.n_tx.unwrap_or(DESK_N_TX),
            n_rx: doc.n_rx.unwrap_or(DESK_N_RX),
            frame_len: doc.frame_len.unwrap_or(DESK_N_TX),
            power: dbm_to_mw(power_dbm),
            noise_var: dbm_to_mw(noise_dbm),
            master_seed: doc.master_seed.unwrap_or(0),
        };
        let cfg = ExperimentConfig {
            scenario,
            system,
            power_dbm,
            noise_dbm,
            eig_low: doc.eig_low.unwrap_or(1.0),
            eig_high: doc.eig_high.unwrap_or(10.0),
            sweep,
            precoders,
            batch_count: doc.batch_count.unwrap_or(100),
            signal_kind: doc.signal_kind.unwrap_or(SignalKind::Gaussian),
            output_path: doc
                .output_path
                .unwrap_or_else(|| PathBuf::from("results.csv")),
            init: doc.init.unwrap_or_default(),
            sca: ScaConfig {
                max_iters: doc.sca_max_iters.unwrap_or(defaults_sca.max_iters),
                stop_gap: doc.sca_stop_gap.unwrap_or(defaults_sca.stop_gap),
                line_search: LineSearch {
                    grid_points: doc
                        .line_search_grid
                        .unwrap_or(defaults_sca.line_search.grid_points),
                    refine_iters: doc
                        .line_search_refine
                        .unwrap_or(defaults_sca.line_search.refine_iters),
                },
            },
            sgp: SgpConfig {
                batch_size: doc.sgp_batch_size.unwrap_or(defaults_sgp.batch_size),
                max_iters: doc.sgp_max_iters.unwrap_or(defaults_sgp.max_iters),
                tol: doc.sgp_tol.unwrap_or(defaults_sgp.tol),
                step_scale: doc.sgp_step_scale.unwrap_or(defaults_sgp.step_scale),
                window: doc.sgp_window.unwrap_or(defaults_sgp.window),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let field_err = |f: &str, e: Error| match e {
            Error::InvalidParameter(m) => Error::config(f, m),
            other => other,
        };
        self.system.validate().map_err(|e| field_err("system", e))?;
        if self.sweep.is_empty() {
            return Err(Error::config("sweep", "must contain at least one point"));
        }
        if self.sweep.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep", "points must be finite"));
        }
        if self.scenario.sweeps_frame_len()
            && self.sweep.iter().any(|&v| !(v >= 1.0 && v.fract() == 0.0))
        {
            return Err(Error::config(
                "sweep",
                "frame lengths must be positive integers",
            ));
        }
        if self.precoders.is_empty() {
            return Err(Error::config("precoders", "must name at least one scheme"));
        }
        if self.batch_count == 0 {
            return Err(Error::config("batch_count", "must be positive"));
        }
        if !(self.eig_low > 0.0) || !(self.eig_high >= self.eig_low) {
            return Err(Error::config("eig_low", "need 0 < eig_low <= eig_high"));
        }
        self.sca.validate().map_err(|e| field_err("sca", e))?;
        self.sgp.validate().map_err(|e| field_err("sgp", e))?;
        if self.signal_kind == SignalKind::DeterministicOrthogonal {
            let too_short = if self.scenario.sweeps_frame_len() {
                self.sweep.iter().any(|&l| (l as usize) < self.system.n_tx)
            } else {
                self.system.frame_len < self.system.n_tx
            };
            if too_short {
                return Err(Error::config(
                    "signal_kind",
                    "orthogonal training needs frame_len >= n_tx",
                ));
            }
        }
        Ok(())
    }

    /// Canonical TOML with every key present.
    pub fn to_toml_string(&self) -> String {
        let doc = ConfigDocument {
            scenario: Some(self.scenario),
            n_tx: Some(self.system.n_tx),
            n_rx: Some(self.system.n_rx),
            frame_len: Some(self.system.frame_len),
            power_dbm: Some(self.power_dbm),
            noise_dbm: Some(self.noise_dbm),
            eig_low: Some(self.eig_low),
            eig_high: Some(self.eig_high),
            sweep: Some(self.sweep.clone()),
            precoders: Some(self.precoders.clone()),
            batch_count: Some(self.batch_count),
            signal_kind: Some(self.signal_kind),
            output_path: Some(self.output_path.clone()),
            master_seed: Some(self.system.master_seed),
            init: Some(self.init),
            sca_max_iters: Some(self.sca.max_iters),
            sca_stop_gap: Some(self.sca.stop_gap),
            line_search_grid: Some(self.sca.line_search.grid_points),
            line_search_refine: Some(self.sca.line_search.refine_iters),
            sgp_batch_size: Some(self.sgp.batch_size),
            sgp_max_iters: Some(self.sgp.max_iters),
            sgp_tol: Some(self.sgp.tol),
            sgp_step_scale: Some(self.sgp.step_scale),
            sgp_window: Some(self.sgp.window),
        };
        toml::to_string(&doc).expect("config document serializes")
    }

    /// Switches to the large-array antenna counts.
    pub fn full_scale(mut self) -> Self {
        self.system.n_tx = FULL_N_TX;
        self.system.n_rx = FULL_N_RX;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.system.master_seed = seed;
        self
    }

    /// System parameters at sweep point `value`: the frame length for
    /// `asymptotic_L`, otherwise the transmit SNR in dB (power rescaled so
    /// that `L P / sigma^2` hits it).
    pub fn system_at(&self, value: f64) -> SystemConfig {
        if self.scenario.sweeps_frame_len() {
            SystemConfig {
                frame_len: value as usize,
                ..self.system.clone()
            }
        } else {
            self.system.with_snr_db(value)
        }
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let source = fs::read_to_string(path.as_ref())?;
    ExperimentConfig::from_toml_str(&source)
}
