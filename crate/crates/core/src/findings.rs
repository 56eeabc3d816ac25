//! Closed registry of finding codes and the report they are collected in.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    DupColumns,
    DupInconsistentLabels,
    RosterDup,
    RosterConflict,
    OffsetDetected,
    PlatformMismatch,
    LabelReversal,
    SentinelViolation,
    FlatResponse,
    SeparationOverlap,
    ConfoundPerfect,
    ConfoundHigh,
    BlockStructure,
    ReusedArtifact,
    DirectionConflict,
    LabelingFlip,
    DegenerateData,
}

impl FindingCode {
    pub const ALL: [FindingCode; 17] = [
        FindingCode::DupColumns,
        FindingCode::DupInconsistentLabels,
        FindingCode::RosterDup,
        FindingCode::RosterConflict,
        FindingCode::OffsetDetected,
        FindingCode::PlatformMismatch,
        FindingCode::LabelReversal,
        FindingCode::SentinelViolation,
        FindingCode::FlatResponse,
        FindingCode::SeparationOverlap,
        FindingCode::ConfoundPerfect,
        FindingCode::ConfoundHigh,
        FindingCode::BlockStructure,
        FindingCode::ReusedArtifact,
        FindingCode::DirectionConflict,
        FindingCode::LabelingFlip,
        FindingCode::DegenerateData,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::DupColumns => "DUP_COLUMNS",
            FindingCode::DupInconsistentLabels => "DUP_INCONSISTENT_LABELS",
            FindingCode::RosterDup => "ROSTER_DUP",
            FindingCode::RosterConflict => "ROSTER_CONFLICT",
            FindingCode::OffsetDetected => "OFFSET_DETECTED",
            FindingCode::PlatformMismatch => "PLATFORM_MISMATCH",
            FindingCode::LabelReversal => "LABEL_REVERSAL",
            FindingCode::SentinelViolation => "SENTINEL_VIOLATION",
            FindingCode::FlatResponse => "FLAT_RESPONSE",
            FindingCode::SeparationOverlap => "SEPARATION_OVERLAP",
            FindingCode::ConfoundPerfect => "CONFOUND_PERFECT",
            FindingCode::ConfoundHigh => "CONFOUND_HIGH",
            FindingCode::BlockStructure => "BLOCK_STRUCTURE",
            FindingCode::ReusedArtifact => "REUSED_ARTIFACT",
            FindingCode::DirectionConflict => "DIRECTION_CONFLICT",
            FindingCode::LabelingFlip => "LABELING_FLIP",
            FindingCode::DegenerateData => "DEGENERATE_DATA",
        }
    }

    /// What the code detects and why it matters.
    pub fn explanation(self) -> &'static str {
        match self {
            FindingCode::DupColumns => {
                "Duplicate test samples: two or more matrix columns are numerically identical \
                 (correlation at or above the duplicate threshold), so the effective sample size \
                 is smaller than the column count and any accuracy estimate is inflated."
            }
            FindingCode::DupInconsistentLabels => {
                "Duplicate test samples carry different response labels: the same profile is \
                 called sensitive in one column and resistant in another, which no classifier \
                 can get right and which indicates sample-tracking errors."
            }
            FindingCode::RosterDup => {
                "The label roster lists the same sample id more than once, so the number of \
                 distinct samples is smaller than the number of entries."
            }
            FindingCode::RosterConflict => {
                "A sample id appears in the roster with conflicting labels (for example in both \
                 the sensitive and the resistant group)."
            }
            FindingCode::OffsetDetected => {
                "Reported gene identifiers match the genes a method actually selects only after \
                 shifting them by a fixed number of rows in the platform annotation: an \
                 off-by-one style indexing error in the published list."
            }
            FindingCode::PlatformMismatch => {
                "Signature identifiers are not measured on the declared platform, so the \
                 signature could not have been derived from data on that array."
            }
            FindingCode::LabelReversal => {
                "Lines labeled sensitive show lower drug potency than lines labeled resistant: \
                 the sensitive and resistant labels appear reversed."
            }
            FindingCode::SentinelViolation => {
                "A sample of known response (for example a line named for its resistance to the \
                 drug) is assigned the opposite label, or is absent from the labeling."
            }
            FindingCode::FlatResponse => {
                "The drug shows essentially no differential activity across the panel (tiny \
                 interquartile range of potency), as for a prodrug that is inactive in culture, \
                 so sensitive and resistant groups cannot be defined from these data."
            }
            FindingCode::SeparationOverlap => {
                "No single potency cutoff reproduces the sensitive/resistant split: the labeled \
                 groups overlap, so the labels cannot come from thresholding the measure."
            }
            FindingCode::ConfoundPerfect => {
                "Treatment arms are perfectly confounded with processing batch or scanner: every \
                 batch holds samples of one treatment only, so batch effects cannot be separated \
                 from treatment effects."
            }
            FindingCode::ConfoundHigh => {
                "Treatment arms are strongly associated with processing batch (high Cramer's V) \
                 without being perfectly confounded."
            }
            FindingCode::BlockStructure => {
                "Samples fall into blocks of high pairwise correlation, a signature of run-date \
                 or batch effects dominating the biology."
            }
            FindingCode::ReusedArtifact => {
                "A matrix or figure presented for one analysis is numerically identical to one \
                 presented for a different analysis."
            }
            FindingCode::DirectionConflict => {
                "The same gene is listed as up-regulated in both the sensitive and the \
                 resistant direction within one signature."
            }
            FindingCode::LabelingFlip => {
                "An entity is labeled sensitive in one source and resistant in another for the \
                 same drug: the group assignments are not stable across reports."
            }
            FindingCode::DegenerateData => {
                "An input could not be analyzed: it is unreadable, empty, constant, or too small \
                 for the requested check."
            }
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FindingCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        FindingCode::ALL
            .into_iter()
            .find(|c| c.as_str() == up)
            .ok_or_else(|| Error::UnknownCode(s.to_string()))
    }
}

/// Explanation text for a code given by name.
pub fn explain(code: &str) -> Result<&'static str> {
    Ok(code.parse::<FindingCode>()?.explanation())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Int(i64),
    Real(f64),
}

impl From<usize> for MetricValue {
    fn from(v: usize) -> Self {
        MetricValue::Int(v as i64)
    }
}

impl From<i64> for MetricValue {
    fn from(v: i64) -> Self {
        MetricValue::Int(v)
    }
}

impl From<f64> for MetricValue {
    fn from(v: f64) -> Self {
        MetricValue::Real(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub code: FindingCode,
    pub severity: Severity,
    /// Check that produced the finding.
    pub check: String,
    /// Sample, feature or input ids the finding is about.
    pub subjects: Vec<String>,
    pub metrics: BTreeMap<String, MetricValue>,
    pub message: String,
}

impl Finding {
    pub fn new(code: FindingCode, severity: Severity, check: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            code,
            severity,
            check: check.into(),
            subjects: Vec::new(),
            metrics: BTreeMap::new(),
            message: message.into(),
        }
    }

    pub fn subjects<I, S>(mut self, subjects: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.subjects = subjects.into_iter().map(Into::into).collect();
        self
    }

    pub fn metric(mut self, key: &str, v: impl Into<MetricValue>) -> Self {
        let v = v.into();
        // JSON has no NaN or infinity
        if let MetricValue::Real(x) = v {
            if !x.is_finite() {
                return self;
            }
        }
        self.metrics.insert(key.to_string(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingsReport {
    pub schema_version: String,
    pub tool_version: String,
    /// Input name to lowercase hex SHA-256 of the file bytes.
    pub input_digests: BTreeMap<String, String>,
    pub findings: Vec<Finding>,
}

impl FindingsReport {
    pub fn max_severity(&self) -> Option<Severity> {
        self.findings.iter().map(|f| f.severity).max()
    }

    pub fn codes(&self) -> std::collections::BTreeSet<FindingCode> {
        self.findings.iter().map(|f| f.code).collect()
    }

    /// 0 when nothing is above Info, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.max_severity() > Some(Severity::Info) { 2 } else { 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_code_is_explained_and_round_trips() {
        for c in FindingCode::ALL {
            assert!(!c.explanation().is_empty());
            assert_eq!(c.as_str().parse::<FindingCode>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
        assert!(explain("DUP_COLUMNS").unwrap().contains("Duplicate test samples"));
        assert_eq!(explain("NOPE").unwrap_err(), Error::UnknownCode("NOPE".into()));
    }

    #[test]
    fn exit_code_ignores_info() {
        let mut r = FindingsReport {
            schema_version: "1".into(),
            tool_version: "0".into(),
            input_digests: BTreeMap::new(),
            findings: vec![],
        };
        assert_eq!(r.exit_code(), 0);
        r.findings.push(Finding::new(FindingCode::SentinelViolation, Severity::Info, "s", "absent"));
        assert_eq!(r.exit_code(), 0);
        r.findings.push(Finding::new(FindingCode::DupColumns, Severity::Warning, "d", "dup"));
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn non_finite_metrics_are_dropped() {
        let f = Finding::new(FindingCode::DegenerateData, Severity::Warning, "x", "y")
            .metric("a", f64::NAN)
            .metric("b", 3usize);
        assert_eq!(f.metrics.len(), 1);
    }
}
