//! Run manifests: what was run, from which config digest, with which seed,
//! where the outputs went, and how it ended.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum ManifestStatus {
    Completed,
    Aborted { reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub seed: u64,
    pub output_paths: Vec<String>,
    pub status: ManifestStatus,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| LabError::Validation(format!("manifest: {e}")))?;
        std::fs::write(path, text).map_err(|e| LabError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| LabError::Validation(format!("{}: {e}", path.display())))
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
