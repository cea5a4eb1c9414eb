//! Flat simulation config: file values, then `--set key=value`, then
//! dedicated flags.

use std::path::Path;

use atfe::adaptive::AtfeConfig;
use atfe::harness::{ExperimentPlan, OmegaPolicy};
use atfe::inference::DEFAULT_PERIOD;
use atfe::probe::{ProbeConfig, ProbeMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Config as written by the user; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub confidence_level: Option<f64>,
    pub nu_initial: Option<u32>,
    pub nu_total: Option<u32>,
    pub mode: Option<String>,
    pub n_qubits: Option<u32>,
    pub update_ci: Option<bool>,
    pub t1_scale: Option<f64>,
    pub seed: Option<u64>,
    pub trials_per_batch: Option<u32>,
    pub batches: Option<u32>,
    pub checkpoints: Option<Vec<u32>>,
    pub omega_policy: Option<String>,
    pub omega: Option<f64>,
    pub period: Option<f64>,
    pub tag: Option<String>,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident; $($f:ident),*) => {
        RawConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl RawConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
        } else {
            Self::from_toml(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.message().to_string())
    }

    /// Parses `key=value` pairs. Values are read as TOML and fall back to a
    /// bare string, so `mode=ghz` and `checkpoints=[10,20]` both work.
    pub fn from_assignments(pairs: &[String]) -> Result<Self, CliError> {
        let mut table = toml::Table::new();
        for pair in pairs {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override '{pair}' is not of the form key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.to_string()));
            table.insert(key.to_string(), parsed);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("override: {}", e.message())))
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: RawConfig) -> RawConfig {
        let base = self;
        merge_fields!(base, over; confidence_level, nu_initial, nu_total, mode, n_qubits, update_ci,
            t1_scale, seed, trials_per_batch, batches, checkpoints, omega_policy, omega, period, tag)
    }

    /// Fills defaults and checks every invariant.
    pub fn resolve(&self) -> Result<SimConfig, CliError> {
        let nu_total = self.nu_total.ok_or_else(|| CliError::Usage("nu_total required".into()))?;
        let mode: ProbeMode = self.mode.as_deref().unwrap_or("single").parse()?;
        let n_qubits = self.n_qubits.unwrap_or(1);
        let probe = ProbeConfig::new(mode, n_qubits)?;
        let defaults = AtfeConfig::new(probe, nu_total);
        let omega_policy = match (self.omega_policy.as_deref(), self.omega) {
            (None | Some("uniform"), None) => "uniform",
            (None | Some("fixed"), Some(_)) => "fixed",
            (Some("fixed"), None) => return Err(CliError::Usage("omega required for omega_policy = \"fixed\"".into())),
            (Some("uniform"), Some(_)) => {
                return Err(CliError::Usage("omega is only allowed with omega_policy = \"fixed\"".into()))
            }
            (Some(other), _) => {
                return Err(CliError::Usage(format!("omega_policy must be \"uniform\" or \"fixed\", got \"{other}\"")))
            }
        };
        let config = SimConfig {
            confidence_level: self.confidence_level.unwrap_or(defaults.confidence_level),
            nu_initial: self.nu_initial.unwrap_or(defaults.nu_initial),
            nu_total,
            mode: mode.as_str().to_string(),
            n_qubits,
            update_ci: self.update_ci.unwrap_or(defaults.update_ci),
            t1_scale: self.t1_scale.unwrap_or(defaults.t1_scale),
            seed: self.seed.unwrap_or(0),
            trials_per_batch: self.trials_per_batch.unwrap_or(ExperimentPlan::DEFAULT_TRIALS_PER_BATCH),
            batches: self.batches.unwrap_or(ExperimentPlan::DEFAULT_BATCHES),
            checkpoints: self.checkpoints.clone().unwrap_or_else(|| (1..=nu_total).collect()),
            omega_policy: omega_policy.to_string(),
            omega: self.omega,
            period: self.period.unwrap_or(DEFAULT_PERIOD),
            tag: self.tag.clone().unwrap_or_else(|| {
                format!("{}_n{n_qubits}_nu{nu_total}_seed{}", mode.as_str(), self.seed.unwrap_or(0))
            }),
        };
        config.plan()?.validate()?;
        if config.tag.is_empty() || !config.tag.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
            return Err(CliError::Usage(format!("tag '{}' must be nonempty and use [A-Za-z0-9_.-]", config.tag)));
        }
        Ok(config)
    }
}

/// Fully resolved config; echoed into the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub confidence_level: f64,
    pub nu_initial: u32,
    pub nu_total: u32,
    pub mode: String,
    pub n_qubits: u32,
    pub update_ci: bool,
    pub t1_scale: f64,
    pub seed: u64,
    pub trials_per_batch: u32,
    pub batches: u32,
    pub checkpoints: Vec<u32>,
    pub omega_policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub period: f64,
    pub tag: String,
}

impl SimConfig {
    pub fn plan(&self) -> Result<ExperimentPlan, CliError> {
        let probe = ProbeConfig::new(self.mode.parse()?, self.n_qubits)?;
        let base = AtfeConfig {
            confidence_level: self.confidence_level,
            nu_initial: self.nu_initial,
            nu_total: self.nu_total,
            probe,
            update_ci: self.update_ci,
            t1_scale: self.t1_scale,
            seed: self.seed,
        };
        Ok(ExperimentPlan {
            base,
            trials_per_batch: self.trials_per_batch,
            batches: self.batches,
            checkpoints: self.checkpoints.clone(),
            omega_policy: match self.omega {
                Some(w) => OmegaPolicy::Fixed(w),
                None => OmegaPolicy::UniformPerTrial,
            },
            period: self.period,
        })
    }
}
