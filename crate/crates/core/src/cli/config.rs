//! TOML config files and the resolved sweep specification.
//!
//! A config file holds an optional `seed`/`threads` and one table per
//! target. Unknown keys and duplicate keys are rejected. A sidecar
//! `.meta.json` written by a previous run is also accepted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::multiserver::{HubConfig, HubGrids, HubPhysical};
use crate::rsp::{DemandModel, DEFAULT_ALPHA2_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Window,
    Limits,
    EgCurve,
    EgGain,
    RspCurve,
    RspGain,
    MultiserverCurve,
    MultiserverGain,
    MultiserverSample,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Window => "window",
            Target::Limits => "limits",
            Target::EgCurve => "eg_curve",
            Target::EgGain => "eg_gain",
            Target::RspCurve => "rsp_curve",
            Target::RspGain => "rsp_gain",
            Target::MultiserverCurve => "multiserver_curve",
            Target::MultiserverGain => "multiserver_gain",
            Target::MultiserverSample => "multiserver_sample",
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowParams {
    pub w: u64,
    pub s: u32,
    /// Batch size for the temporal gain column.
    pub m: u32,
    pub p: Vec<f64>,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self { w: 5, s: 2, m: 2, p: vec![1e-3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsParams {
    pub m_max: u32,
    pub s: Vec<u32>,
    /// Window for the small-`p` temporal gain column.
    pub w: u64,
}

impl Default for LimitsParams {
    fn default() -> Self {
        Self { m_max: 10, s: vec![1, 2, 3], w: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgCurveParams {
    pub m: Vec<u32>,
    pub eta_a: f64,
    pub eta_b: f64,
    pub xi_a2: Vec<f64>,
}

impl Default for EgCurveParams {
    fn default() -> Self {
        Self {
            m: vec![1, 2, 5],
            eta_a: 0.1,
            eta_b: 0.1,
            xi_a2: log_grid(1e-4, 0.2, 25),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgGainParams {
    pub eta_a: f64,
    pub eta_b: f64,
    pub f_min: f64,
    pub m_max: u32,
}

impl Default for EgGainParams {
    fn default() -> Self {
        Self { eta_a: 0.1, eta_b: 0.1, f_min: 0.95, m_max: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RspCurveParams {
    pub m: Vec<u32>,
    pub eta_c: f64,
    pub eta_s: f64,
    /// Values of `eta_c |alpha|^2`.
    pub gamma: Vec<f64>,
    pub demand: DemandModel,
}

impl Default for RspCurveParams {
    fn default() -> Self {
        Self {
            m: vec![1, 5],
            eta_c: 1e-3,
            eta_s: 0.1,
            gamma: log_grid(1e-7, 5e-4, 25),
            demand: DemandModel::SingleUserAllDevices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RspGainParams {
    pub eta_c: f64,
    pub eta_s: f64,
    pub f_min: f64,
    pub m_max: u32,
    pub demand: Vec<DemandModel>,
    pub alpha2_cap: f64,
}

impl Default for RspGainParams {
    fn default() -> Self {
        Self {
            eta_c: 1e-3,
            eta_s: 0.9,
            f_min: 0.99,
            m_max: 30,
            demand: DemandModel::ALL.to_vec(),
            alpha2_cap: DEFAULT_ALPHA2_CAP,
        }
    }
}

/// Shared by the hub curve and gain sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiserverParams {
    pub m: Vec<u32>,
    pub s: u32,
    pub f_min: Vec<f64>,
    pub n_rounds: u64,
    pub physical: HubPhysical,
    pub grids: HubGrids,
}

impl Default for MultiserverParams {
    fn default() -> Self {
        Self {
            m: vec![2, 3, 4],
            s: 2,
            f_min: vec![0.8, 0.9, 0.95],
            n_rounds: 20_000,
            physical: HubPhysical::reference(),
            grids: HubGrids::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    pub hub: HubConfig,
    pub n_rounds: u64,
    pub f_min: f64,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self { hub: HubConfig::example(), n_rounds: 100_000, f_min: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Params {
    Window(WindowParams),
    Limits(LimitsParams),
    EgCurve(EgCurveParams),
    EgGain(EgGainParams),
    RspCurve(RspCurveParams),
    RspGain(RspGainParams),
    Multiserver(MultiserverParams),
    MultiserverSample(SampleParams),
}

/// Everything that determines the CSV bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: Target,
    pub seed: u64,
    pub params: Params,
}

impl SweepSpec {
    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Run settings that do not change the output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub output_path: Option<PathBuf>,
    pub threads: usize,
}

/// Contents of a TOML config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub window: Option<WindowParams>,
    pub limits: Option<LimitsParams>,
    pub eg_curve: Option<EgCurveParams>,
    pub eg_gain: Option<EgGainParams>,
    pub rsp_curve: Option<RspCurveParams>,
    pub rsp_gain: Option<RspGainParams>,
    pub multiserver: Option<MultiserverParams>,
    pub ms_sample: Option<SampleParams>,
}

impl ConfigFile {
    /// Table for `target`, or its defaults.
    pub fn params_for(&self, target: Target) -> Params {
        match target {
            Target::Window => Params::Window(self.window.clone().unwrap_or_default()),
            Target::Limits => Params::Limits(self.limits.clone().unwrap_or_default()),
            Target::EgCurve => Params::EgCurve(self.eg_curve.clone().unwrap_or_default()),
            Target::EgGain => Params::EgGain(self.eg_gain.clone().unwrap_or_default()),
            Target::RspCurve => Params::RspCurve(self.rsp_curve.clone().unwrap_or_default()),
            Target::RspGain => Params::RspGain(self.rsp_gain.clone().unwrap_or_default()),
            Target::MultiserverCurve | Target::MultiserverGain => {
                Params::Multiserver(self.multiserver.clone().unwrap_or_default())
            }
            Target::MultiserverSample => {
                Params::MultiserverSample(self.ms_sample.clone().unwrap_or_default())
            }
        }
    }
}

/// Sidecar written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool_version: String,
    pub config_sha256: String,
    pub spec: SweepSpec,
    pub threads: usize,
    pub wall_time_s: f64,
}

/// What a `--config` path resolved to.
pub enum Loaded {
    Toml(ConfigFile),
    Sidecar(Sidecar),
}

pub fn parse_toml(text: &str) -> Result<ConfigFile, toml::de::Error> {
    toml::from_str(text)
}

/// Reads a TOML config, or a `.json` sidecar.
pub fn parse_config(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    if path.extension().is_some_and(|x| x == "json") {
        let side: Sidecar = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        return Ok(Loaded::Sidecar(side));
    }
    parse_toml(&text)
        .map(Loaded::Toml)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
