//! The `report.json` document written by every CLI analysis.
//!
//! Key order is the struct field order and no maps are serialized, so the
//! same inputs give the same bytes. Floats use the shortest representation
//! that parses back to the identical `f64`; non-finite values become
//! `null`.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::accuracy::{AccuracyReport, DeviationReport};
use crate::agreement::{BlandAltmanReport, IccReport};
use crate::error::Result;
use crate::ingest::ScoreSet;
use crate::mixed::{MixedModelFit, SignificanceTable};
use crate::simulate::{MonteCarloSummary, ProcessSpec};
use crate::stats::CorrelationResult;
use crate::warning::Warning;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSection {
    pub variable: String,
    pub instrument_a: String,
    pub instrument_b: String,
    #[serde(flatten)]
    pub result: CorrelationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedModelSection {
    pub variable: String,
    pub fit: MixedModelFit,
    pub significance: SignificanceTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSection {
    pub spec: ProcessSpec,
    pub summaries: Vec<MonteCarloSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub command: String,
    /// SHA-256 of the primary input file, lowercase hex.
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<AccuracyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviations: Option<DeviationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bland_altman: Option<BlandAltmanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icc: Option<IccReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_model: Option<MixedModelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn new(command: &str, input: &[u8]) -> Self {
        AnalysisReport {
            tool_version: TOOL_VERSION.to_owned(),
            command: command.to_owned(),
            input_digest: digest(input),
            scores: None,
            accuracy: None,
            deviations: None,
            bland_altman: None,
            icc: None,
            correlation: None,
            mixed_model: None,
            simulation: None,
            warnings: Vec::new(),
        }
    }

    /// Appends warning messages, skipping exact repeats.
    pub fn add_warnings<'a>(&mut self, warnings: impl IntoIterator<Item = &'a Warning>) {
        for w in warnings {
            let msg = w.to_string();
            if !self.warnings.contains(&msg) {
                self.warnings.push(msg);
            }
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn empty_sections_are_omitted() {
        let mut r = AnalysisReport::new("icc", b"x");
        r.add_warnings(&[Warning::BoundaryFit, Warning::BoundaryFit]);
        let json = r.to_json().unwrap();
        assert!(!json.contains("accuracy"));
        assert_eq!(r.warnings, vec![Warning::BoundaryFit.to_string()]);
        assert!(json.ends_with("}\n"));
        assert_eq!(json, r.to_json().unwrap());
    }

    #[test]
    fn floats_round_trip() {
        let x: f64 = 0.1 + 0.2;
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
