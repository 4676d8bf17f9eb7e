//! Machine-readable verification outcomes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// Outcome of one claim: identity residual summary, pass/fail, and
/// provenance back to the catalog id and paper anchor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub anchor: String,
    pub status: Status,
    pub residual_summary: String,
    pub millis: u128,
    /// Findings attached to the claim (typo resolutions, depth records,
    /// affine normalizations determined by comparison oracles).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Renders one line per claim for terminal output.
pub fn text_line(r: &VerificationReport) -> String {
    let status = match r.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    };
    let mut line = format!(
        "{status:5} {id:<28} {ms:>6} ms  {anchor}",
        id = r.claim_id,
        ms = r.millis,
        anchor = r.anchor
    );
    if !r.residual_summary.is_empty() && r.status != Status::Pass {
        line.push_str(&format!("\n      residual: {}", r.residual_summary));
    }
    for n in &r.notes {
        line.push_str(&format!("\n      note: {n}"));
    }
    line
}
