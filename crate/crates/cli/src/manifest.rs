//! Audit manifest: declared inputs, the checks to run over them, and where
//! the report goes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use forensic_core::ingest::MatrixFormat;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditManifest {
    pub inputs: BTreeMap<String, InputSpec>,
    pub checks: Vec<CheckSpec>,
    /// Report path, relative to the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Matrix,
    Roster,
    Signature,
    Annotation,
    Sensitivity,
    Meta,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InputKind::Matrix => "matrix",
            InputKind::Roster => "roster",
            InputKind::Signature => "signature",
            InputKind::Annotation => "annotation",
            InputKind::Sensitivity => "sensitivity",
            InputKind::Meta => "meta",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Tsv,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: String,
    pub kind: InputKind,
    /// Matrix delimiter; inferred from the extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<TableFormat>,
    /// Matrix has a label row under the header.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub label_row: bool,
}

impl InputSpec {
    pub fn matrix_format(&self) -> MatrixFormat {
        let csv = match self.format {
            Some(f) => f == TableFormat::Csv,
            None => self.path.to_ascii_lowercase().ends_with(".csv"),
        };
        let fmt = if csv { MatrixFormat::csv() } else { MatrixFormat::tsv() };
        if self.label_row {
            fmt.with_labels()
        } else {
            fmt
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentinelSpec {
    pub sample_id: String,
    pub expected: String,
    #[serde(default)]
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    DupColumns {
        matrix: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
    },
    Roster {
        roster: String,
    },
    Offset {
        reported: String,
        generated: String,
        annotation: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_shift: Option<u32>,
    },
    Sentinel {
        labels: String,
        sentinels: Vec<SentinelSpec>,
    },
    Dose {
        records: String,
        labels: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        drug: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        measure: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        margin: Option<f64>,
    },
    FlatResponse {
        records: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        drug: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        measure: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    Confound {
        meta: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap_days: Option<f64>,
    },
    Blocks {
        matrix: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
    },
    Reuse {
        a: String,
        b: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        digits: Option<u32>,
    },
    Directions {
        signature: String,
    },
    LabelingFlip {
        /// Drug name to a roster whose source column names the source.
        drugs: BTreeMap<String, String>,
    },
}

impl CheckSpec {
    pub fn detector(&self) -> &'static str {
        match self {
            CheckSpec::DupColumns { .. } => "dup_columns",
            CheckSpec::Roster { .. } => "roster",
            CheckSpec::Offset { .. } => "offset",
            CheckSpec::Sentinel { .. } => "sentinel",
            CheckSpec::Dose { .. } => "dose",
            CheckSpec::FlatResponse { .. } => "flat_response",
            CheckSpec::Confound { .. } => "confound",
            CheckSpec::Blocks { .. } => "blocks",
            CheckSpec::Reuse { .. } => "reuse",
            CheckSpec::Directions { .. } => "directions",
            CheckSpec::LabelingFlip { .. } => "labeling_flip",
        }
    }

    /// Inputs the check reads, with the kind each must have.
    pub fn references(&self) -> Vec<(&str, InputKind)> {
        use InputKind::*;
        match self {
            CheckSpec::DupColumns { matrix, .. } | CheckSpec::Blocks { matrix, .. } => vec![(matrix, Matrix)],
            CheckSpec::Roster { roster } => vec![(roster, Roster)],
            CheckSpec::Offset { reported, generated, annotation, .. } => {
                vec![(reported, Signature), (generated, Signature), (annotation, Annotation)]
            }
            CheckSpec::Sentinel { labels, .. } => vec![(labels, Roster)],
            CheckSpec::Dose { records, labels, .. } => vec![(records, Sensitivity), (labels, Roster)],
            CheckSpec::FlatResponse { records, .. } => vec![(records, Sensitivity)],
            CheckSpec::Confound { meta, .. } => vec![(meta, Meta)],
            CheckSpec::Reuse { a, b, .. } => vec![(a, Matrix), (b, Matrix)],
            CheckSpec::Directions { signature } => vec![(signature, Signature)],
            CheckSpec::LabelingFlip { drugs } => drugs.values().map(|r| (r.as_str(), Roster)).collect(),
        }
    }
}

impl AuditManifest {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Every problem with cross-references: undeclared inputs and kind
    /// mismatches.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.checks.is_empty() {
            out.push("no checks declared".to_string());
        }
        for (i, check) in self.checks.iter().enumerate() {
            for (name, kind) in check.references() {
                match self.inputs.get(name) {
                    None => out.push(format!("check {} ({}) names undeclared input {name:?}", i + 1, check.detector())),
                    Some(spec) if spec.kind != kind => out.push(format!(
                        "check {} ({}) needs {name:?} to be a {kind}, it is declared as {}",
                        i + 1,
                        check.detector(),
                        spec.kind
                    )),
                    Some(_) => {}
                }
            }
            if let CheckSpec::LabelingFlip { drugs } = check {
                if drugs.is_empty() {
                    out.push(format!("check {} (labeling_flip) lists no drugs", i + 1));
                }
            }
        }
        out
    }

    /// Reads and validates a manifest file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest = Self::from_json(&text).map_err(|e| CliError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let problems = manifest.problems();
        if !problems.is_empty() {
            return Err(CliError::Manifest {
                path: path.to_path_buf(),
                message: problems.join("; "),
            });
        }
        Ok(manifest)
    }
}

/// Directory that relative paths in a manifest resolve against.
pub fn base_dir(manifest_path: &Path) -> PathBuf {
    manifest_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "inputs": {
            "m": {"path": "m.tsv", "kind": "matrix", "label_row": true},
            "r": {"path": "r.csv", "kind": "roster"}
        },
        "checks": [
            {"detector": "dup_columns", "matrix": "m", "threshold": 0.999},
            {"detector": "roster", "roster": "r"}
        ]
    }"#;

    #[test]
    fn parses_and_validates() {
        let m = AuditManifest::from_json(SMALL).unwrap();
        assert_eq!(m.checks.len(), 2);
        assert_eq!(m.checks[0].detector(), "dup_columns");
        assert!(m.problems().is_empty());
        assert!(m.inputs["m"].matrix_format().has_label_row);
    }

    #[test]
    fn kind_mismatch_and_missing_input() {
        let text = SMALL.replace(r#""roster": "r""#, r#""roster": "m""#).replace(r#""matrix": "m""#, r#""matrix": "zz""#);
        let m = AuditManifest::from_json(&text).unwrap();
        let p = m.problems();
        assert_eq!(p.len(), 2, "{p:?}");
        assert!(p[0].contains("undeclared input \"zz\""));
        assert!(p[1].contains("needs \"m\" to be a roster"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = SMALL.replace(r#""threshold": 0.999"#, r#""treshold": 0.999"#);
        assert!(AuditManifest::from_json(&text).is_err());
        let text = SMALL.replace("dup_columns", "dup_rows");
        assert!(AuditManifest::from_json(&text).is_err());
    }

    #[test]
    fn format_from_extension() {
        let spec = InputSpec {
            path: "X.CSV".into(),
            kind: InputKind::Matrix,
            format: None,
            label_row: false,
        };
        assert_eq!(spec.matrix_format(), MatrixFormat::csv());
    }
}
