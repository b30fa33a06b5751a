//! Scenario files: versioned TOML with the full [`ScenarioConfig`] schema.
//! Unknown fields are rejected and invariants are validated on load with
//! the offending field named in the error.

use super::{ScenarioConfig, ScenarioError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: unsupported schema_version {got} (this build reads {want})")]
    SchemaVersion { path: String, got: u32, want: u32 },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: ScenarioError,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    scenario: ScenarioConfig,
}

pub fn save_scenario(path: &Path, config: &ScenarioConfig) -> Result<(), FileError> {
    let file = ScenarioFile { schema_version: SCHEMA_VERSION, scenario: config.clone() };
    let text = toml::to_string_pretty(&file)
        .map_err(|e| FileError::Parse { path: path.display().to_string(), message: e.to_string() })?;
    std::fs::write(path, text)
        .map_err(|e| FileError::Io { path: path.display().to_string(), source: e })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, FileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FileError::Io { path: path.display().to_string(), source: e })?;
    let file: ScenarioFile = toml::from_str(&text)
        .map_err(|e| FileError::Parse { path: path.display().to_string(), message: e.to_string() })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(FileError::SchemaVersion {
            path: path.display().to_string(),
            got: file.schema_version,
            want: SCHEMA_VERSION,
        });
    }
    file.scenario
        .validate()
        .map_err(|e| FileError::Invalid { path: path.display().to_string(), source: e })?;
    Ok(file.scenario)
}
