//! Instance files: `{"prior": [..], "utility": [..]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::model::{Prior, ReceiverUtility};

/// A prior with one receiver utility over the same states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    pub prior: Prior,
    pub utility: ReceiverUtility,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    prior: Vec<f64>,
    utility: Vec<f64>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = PersuasionError;

    fn try_from(raw: RawInstance) -> Result<Self> {
        Instance::new(Prior::new(raw.prior)?, ReceiverUtility::new(raw.utility)?)
    }
}

impl Instance {
    pub fn new(prior: Prior, utility: ReceiverUtility) -> Result<Self> {
        if prior.len() != utility.len() {
            return Err(PersuasionError::DimensionMismatch { expected: prior.len(), got: utility.len() });
        }
        Ok(Self { prior, utility })
    }
}

/// Why an instance file could not be loaded.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}")]
    Parse { path: String, source: serde_json::Error },
}

/// Reads any JSON-deserializable input; validation failures surface as
/// parse errors carrying the offending field's message.
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, LoadError> {
    let name = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|source| LoadError::Read { path: name.clone(), source })?;
    serde_json::from_str(&text).map_err(|source| LoadError::Parse { path: name, source })
}
