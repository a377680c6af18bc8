//! TOML configuration files for workloads, federations and forecasts.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::forecast::ForecastConfig;
use crate::simulate::FederationSpec;
use crate::workload::WorkloadSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {field}: {reason}")]
    Invalid { path: PathBuf, field: String, reason: String },
    #[error("cannot encode config: {0}")]
    Encode(String),
}

impl ConfigError {
    pub fn path(&self) -> Option<&Path> {
        match self {
            ConfigError::Io { path, .. } | ConfigError::Parse { path, .. } | ConfigError::Invalid { path, .. } => Some(path),
            ConfigError::Encode(_) => None,
        }
    }
}

/// 1-based line and column of byte offset `offset` in `text`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

/// Deserializes `text`; `path` only labels diagnostics.
pub fn parse_toml<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |span| line_col(text, span.start));
        ConfigError::Parse { path: path.to_owned(), line, column, message: e.message().trim().to_owned() }
    })
}

pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    parse_toml(&text, path)
}

pub fn to_toml_string<T: Serialize>(value: &T) -> Result<String, ConfigError> {
    toml::to_string(value).map_err(|e| ConfigError::Encode(e.to_string()))
}

fn invalid(path: &Path, field: String, reason: String) -> ConfigError {
    ConfigError::Invalid { path: path.to_owned(), field, reason }
}

pub fn parse_workload(text: &str, path: &Path) -> Result<WorkloadSpec, ConfigError> {
    let spec: WorkloadSpec = parse_toml(text, path)?;
    spec.validate().map_err(|e| match e {
        crate::workload::WorkloadError::InvalidSpec { field, reason } => invalid(path, field, reason),
        other => invalid(path, "workload".into(), other.to_string()),
    })?;
    Ok(spec)
}

pub fn parse_federation(text: &str, path: &Path) -> Result<FederationSpec, ConfigError> {
    let spec: FederationSpec = parse_toml(text, path)?;
    spec.validate().map_err(|e| match e {
        crate::simulate::SimulateError::InvalidFederation(msg) => match msg.split_once(": ") {
            Some((field, reason)) => invalid(path, field.to_owned(), reason.to_owned()),
            None => invalid(path, "federation".into(), msg),
        },
        other => invalid(path, "federation".into(), other.to_string()),
    })?;
    Ok(spec)
}

pub fn parse_forecast(text: &str, path: &Path) -> Result<ForecastConfig, ConfigError> {
    let config: ForecastConfig = parse_toml(text, path)?;
    config.validate().map_err(|e| match e {
        crate::forecast::ForecastError::InvalidConfig { field, reason } => invalid(path, field, reason),
        other => invalid(path, "forecast".into(), other.to_string()),
    })?;
    Ok(config)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })
}

pub fn load_workload(path: &Path) -> Result<WorkloadSpec, ConfigError> {
    parse_workload(&read(path)?, path)
}

pub fn load_federation(path: &Path) -> Result<FederationSpec, ConfigError> {
    parse_federation(&read(path)?, path)
}

pub fn load_forecast(path: &Path) -> Result<ForecastConfig, ConfigError> {
    parse_forecast(&read(path)?, path)
}
