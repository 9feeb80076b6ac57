use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model has {} violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error("unknown {namespace} `{name}`")]
    Unknown { namespace: &'static str, name: String },
    #[error("action `{action}` of agent `{agent}` is not legal in state `{state}`")]
    IllegalAction {
        state: String,
        agent: String,
        action: String,
    },
    #[error("joint action has {got} components, expected {expected}")]
    JointArity { got: usize, expected: usize },
}
