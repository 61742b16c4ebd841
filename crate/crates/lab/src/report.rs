//! Theorem-report serialization: JSON document plus a margin-series CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use csmlab_core::monitors::TheoremReport;

use crate::error::{LabError, Result};
use crate::manifest::TOOL_VERSION;

/// Norm convention note carried by every report: the diagnostics use the
/// spectral H^s multiplier norm, summed componentwise over vector fields.
pub const NORM_CONVENTION: &str = "spectral H^s: length^2 sum (1+|k|^2)^s |coeff|^2, vector fields componentwise";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: TheoremReport,
    pub config_digest: String,
    pub tool_version: String,
    pub norm_convention: String,
    pub closure_sign: String,
}

impl ReportDocument {
    pub fn new(report: TheoremReport, config_digest: &str, closure_sign: &str) -> Self {
        ReportDocument {
            report,
            config_digest: config_digest.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            norm_convention: NORM_CONVENTION.to_string(),
            closure_sign: closure_sign.to_string(),
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| LabError::Validation(format!("report: {e}")))?;
        std::fs::write(path, text).map_err(|e| LabError::io(path, e))
    }

    /// Margin series as CSV; the ratio column prints `inf` where the
    /// left-hand side vanishes.
    pub fn write_margins_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t,lhs,rhs,ratio\n");
        for m in &self.report.margins {
            let ratio = m.ratio.unwrap_or(f64::INFINITY);
            out.push_str(&format!("{},{},{},{}\n", m.t, m.lhs, m.rhs, ratio));
        }
        std::fs::write(path, out).map_err(|e| LabError::io(path, e))
    }

    pub fn summary_line(&self) -> String {
        let consts: Vec<String> = self
            .report
            .fitted_constants
            .iter()
            .map(|(k, v)| format!("{k}={v:.6e}"))
            .collect();
        format!(
            "theorem {:?}: {} ({}{})",
            self.report.theorem_id,
            if self.report.pass { "PASS" } else { "FAIL" },
            consts.join(", "),
            self.report
                .reason
                .as_ref()
                .map(|r| format!("; {r}"))
                .unwrap_or_default()
        )
    }
}
