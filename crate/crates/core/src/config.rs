//! Model configuration documents (TOML or JSON).
//!
//! ```toml
//! kappa = 0.2
//! delta = 0.5
//! pi0 = 0.3
//! c = 0.05
//! binary_precision = 0.75   # or: signals = [{ name = "Fail", f0 = 0.75, f1 = 0.25 }, ...]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{GameParams, Model, ModelError, MonitoringStructure, ValidationLevel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub name: String,
    pub f0: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kappa: f64,
    pub delta: f64,
    pub pi0: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary_precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<Vec<SignalSpec>>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("config must give exactly one of `signals` or `binary_precision`")]
    MonitoringSpec,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ModelConfig {
    pub fn binary(precision: f64, params: GameParams) -> Self {
        Self {
            kappa: params.kappa,
            delta: params.delta,
            pi0: params.pi0,
            c: params.c,
            binary_precision: Some(precision),
            signals: None,
        }
    }

    /// Echo of an already validated model, with the signals spelled out.
    pub fn from_model(model: &Model) -> Self {
        let p = model.params();
        let mon = model.monitoring();
        Self {
            kappa: p.kappa,
            delta: p.delta,
            pi0: p.pi0,
            c: p.c,
            binary_precision: None,
            signals: Some(
                (0..mon.len())
                    .map(|s| SignalSpec { name: mon.signals()[s].clone(), f0: mon.f0()[s], f1: mon.f1()[s] })
                    .collect(),
            ),
        }
    }

    /// JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn params(&self) -> GameParams {
        GameParams::new(self.kappa, self.delta, self.pi0, self.c)
    }

    pub fn monitoring(&self) -> Result<MonitoringStructure, ConfigError> {
        match (&self.binary_precision, &self.signals) {
            (Some(p), None) => Ok(MonitoringStructure::binary(*p)),
            (None, Some(sigs)) => Ok(MonitoringStructure::new(
                sigs.iter().map(|s| s.name.clone()).collect(),
                sigs.iter().map(|s| s.f0).collect(),
                sigs.iter().map(|s| s.f1).collect(),
            )?),
            _ => Err(ConfigError::MonitoringSpec),
        }
    }

    pub fn signal_names(&self) -> Option<Vec<String>> {
        self.monitoring().ok().map(|m| m.signals().to_vec())
    }

    pub fn to_model(&self, level: ValidationLevel) -> Result<Model, ConfigError> {
        Ok(Model::validate(self.monitoring()?, self.params(), level)?)
    }
}
