//! On-disk JSON form of a game structure.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A probability as written in the file. Numbers are kept so that validation
/// can reject them with a location instead of failing deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbLiteral {
    Text(String),
    Number(serde_json::Number),
}

impl ProbLiteral {
    pub fn text(s: impl Into<String>) -> Self {
        ProbLiteral::Text(s.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawState {
    pub id: String,
    #[serde(default)]
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTransition {
    pub state: String,
    pub action: BTreeMap<String, String>,
    pub dist: BTreeMap<String, ProbLiteral>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawModel {
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    #[serde(default)]
    pub atoms: Vec<String>,
    pub states: Vec<RawState>,
    pub legality: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// Omitted agents observe states perfectly.
    #[serde(default)]
    pub observation: BTreeMap<String, Vec<Vec<String>>>,
    pub transitions: Vec<RawTransition>,
}

impl RawModel {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("raw model serializes")
    }
}
