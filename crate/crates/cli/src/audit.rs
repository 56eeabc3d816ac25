//! Running a manifest end to end and rendering the report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use forensic_core::{Finding, FindingCode, FindingsReport, Severity};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::detectors::run_check;
use crate::error::{CliError, Result};
use crate::inputs::Inputs;
use crate::manifest::{base_dir, AuditManifest};
use crate::{REPORT_SCHEMA_VERSION, TOOL_VERSION};

#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub report: FindingsReport,
    /// 0: nothing above Info; 2: findings; 1: an input could not be used.
    pub exit_code: i32,
}

/// Label used for the `check` field: detector name and 1-based position.
pub fn check_label(index: usize, detector: &str) -> String {
    format!("{detector}#{}", index + 1)
}

/// Runs every check of `manifest` against inputs under `base`. Checks run
/// concurrently; findings keep manifest order.
pub fn run_audit(manifest: &AuditManifest, base: &Path) -> AuditOutcome {
    let inputs = Inputs::load(&manifest.inputs, base);
    let per_check: Vec<Vec<Finding>> = manifest
        .checks
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_check(c, &check_label(i, c.detector()), &inputs))
        .collect();
    let mut findings = Vec::new();
    for (name, reason) in inputs.failures() {
        findings.push(
            Finding::new(FindingCode::DegenerateData, Severity::Warning, "inputs", format!("{name}: {reason}"))
                .subjects([name]),
        );
    }
    findings.extend(per_check.into_iter().flatten());
    let report = FindingsReport {
        schema_version: REPORT_SCHEMA_VERSION.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        input_digests: inputs.digests,
        findings,
    };
    let exit_code = if inputs.loaded.values().any(|r| r.is_err()) { 1 } else { report.exit_code() };
    AuditOutcome { report, exit_code }
}

/// Loads a manifest file and runs it. Paths resolve against the
/// manifest's directory.
pub fn run_manifest(path: &Path) -> Result<(AuditManifest, AuditOutcome)> {
    let manifest = AuditManifest::load(path)?;
    let outcome = run_audit(&manifest, &base_dir(path));
    Ok((manifest, outcome))
}

/// Where the report of a manifest is written by default.
pub fn report_path(manifest: &AuditManifest, manifest_path: &Path) -> Option<PathBuf> {
    manifest.output.as_ref().map(|o| base_dir(manifest_path).join(o))
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sorted(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Canonical JSON: keys sorted at every level, two-space indent, LF line
/// ends, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = sorted(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(report: &FindingsReport, path: &Path) -> Result<()> {
    let text = canonical_json(report)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Human-readable summary, one line per finding.
pub fn summary(report: &FindingsReport) -> String {
    let mut out = String::new();
    let count = |s: Severity| report.findings.iter().filter(|f| f.severity == s).count();
    let _ = writeln!(
        out,
        "{} findings ({} critical, {} warning, {} info) over {} inputs",
        report.findings.len(),
        count(Severity::Critical),
        count(Severity::Warning),
        count(Severity::Info),
        report.input_digests.len()
    );
    for f in &report.findings {
        let sev = match f.severity {
            Severity::Critical => "CRIT",
            Severity::Warning => "WARN",
            Severity::Info => "info",
        };
        let _ = writeln!(out, "{sev} {:<24} {:<18} {}", f.code.as_str(), f.check, f.message);
    }
    out
}
