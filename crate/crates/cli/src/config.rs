//! Run configuration: JSON documents, CLI overrides, and manifests.
//!
//! A run is fully described by a [`RunConfig`]. Configuration can come from
//! a JSON file (`--config`), from command-line flags (which win over the
//! file), or from defaults. Every run writes back a `manifest.json` holding
//! the fully resolved configuration, so `--config manifest.json` reproduces
//! the run exactly.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use regconv::bandwidth::BandwidthRule;
use regconv::harness::{PipelineOptions, ReferenceConfig, SelectOn};
use regconv::{Backend, Preset, ScenarioSpec};

use crate::CliError;

/// Scenario selection: a named preset or an inline specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Preset { preset: Preset },
    Inline(ScenarioSpec),
}

impl ScenarioConfig {
    pub fn spec(&self) -> ScenarioSpec {
        match self {
            ScenarioConfig::Preset { preset } => preset.spec(),
            ScenarioConfig::Inline(spec) => spec.clone(),
        }
    }
}

/// Bandwidth selection block (`bandwidth.rule`, `bandwidth.fixed_value`,
/// `bandwidth.select_on`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BandwidthConfig {
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_value: Option<f64>,
    pub select_on: SelectOn,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        Self { rule: "sheather_jones".into(), fixed_value: None, select_on: SelectOn::default() }
    }
}

impl BandwidthConfig {
    pub fn to_rule(&self) -> Result<BandwidthRule, CliError> {
        match self.rule.as_str() {
            "sheather_jones" => Ok(BandwidthRule::SheatherJones),
            "silverman" => Ok(BandwidthRule::Silverman),
            "fixed" => {
                let value = self.fixed_value.ok_or_else(|| {
                    CliError::Input("bandwidth.rule = fixed requires bandwidth.fixed_value".into())
                })?;
                Ok(BandwidthRule::Fixed { value })
            }
            other => Err(CliError::Input(format!(
                "unknown bandwidth.rule `{other}` (expected sheather_jones, silverman, or fixed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    /// CSV data file for `estimate` (overrides synthetic generation).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub backend: Backend,
    pub bandwidth: BandwidthConfig,
    /// Evaluation grid size V; per-command default when absent
    /// (128 for estimate/simulate, 50 for bench).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    // estimate
    pub n: usize,
    pub tau: usize,
    // simulate
    pub n_values: Vec<usize>,
    pub tau_values: Vec<usize>,
    pub replications: usize,
    pub reference: ReferenceConfig,
    // bench
    pub m_values: Vec<usize>,
    pub backends: Vec<Backend>,
    pub runs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::Preset { preset: Preset::Skewed },
            data: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            backend: Backend::fgt(),
            bandwidth: BandwidthConfig::default(),
            grid_size: None,
            n: 100,
            tau: 16,
            n_values: vec![50, 100, 200],
            tau_values: vec![0, 2, 4, 8, 16, 32, 64, 128],
            replications: 100,
            reference: ReferenceConfig::default(),
            m_values: vec![0, 100, 200, 400, 800, 1600, 3200, 6400, 12800],
            backends: vec![Backend::Naive, Backend::fft(), Backend::fgt()],
            runs: 5,
        }
    }
}

impl RunConfig {
    pub fn pipeline(&self) -> Result<PipelineOptions, CliError> {
        Ok(PipelineOptions {
            rule: self.bandwidth.to_rule()?,
            select_on: self.bandwidth.select_on,
            backend: self.backend,
        })
    }
}

/// Written next to every run's outputs; `--config manifest.json` re-runs it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<serde_json::Value>,
}

/// Loads a config file, accepting either a bare [`RunConfig`] or a
/// [`Manifest`] from a previous run.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{} is not valid JSON: {e}", path.display())))?;
    let config_value =
        if value.get("config").is_some() { value["config"].clone() } else { value };
    serde_json::from_value(config_value)
        .map_err(|e| CliError::Input(format!("{}: invalid configuration: {e}", path.display())))
}
