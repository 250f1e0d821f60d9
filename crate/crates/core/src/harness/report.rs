//! The JSON run report.

use serde::{Deserialize, Serialize};

use crate::ledger::MemoryLedger;
use crate::Element;

pub const REPORT_SCHEMA: &str = "fkmoments.report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub id: Element,
    pub freq: u64,
}

/// One run of a subcommand. Everything except `wall_ms` is a function of the
/// flags and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub mode: String,
    pub n: u64,
    pub k: u32,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub estimate: Option<i128>,
    pub candidates: Vec<CandidateEntry>,
    pub ledger: Option<MemoryLedger>,
    pub passes: u32,
    /// Resolved parameters.
    pub params: serde_json::Value,
    /// Mode-specific output.
    pub details: serde_json::Value,
    pub wall_ms: u64,
}

impl RunReport {
    pub fn new(mode: &str, n: u64, k: u32) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            mode: mode.to_string(),
            n,
            k,
            epsilon: None,
            rho: None,
            delta: None,
            seed: None,
            estimate: None,
            candidates: Vec::new(),
            ledger: None,
            passes: 0,
            params: serde_json::Value::Null,
            details: serde_json::Value::Null,
            wall_ms: 0,
        }
    }

    pub fn with_candidates(mut self, entries: &[(Element, u64)]) -> Self {
        self.candidates = entries
            .iter()
            .map(|&(id, freq)| CandidateEntry { id, freq })
            .collect();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
