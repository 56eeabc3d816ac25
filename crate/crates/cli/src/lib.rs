//! Manifest-driven integrity audits over expression matrices, label
//! rosters, gene lists and drug-response tables.

pub mod audit;
pub mod commands;
pub mod detectors;
pub mod error;
pub mod inputs;
pub mod manifest;

pub use audit::{canonical_json, run_audit, run_manifest, summary, AuditOutcome};
pub use error::{CliError, Result};
pub use manifest::{AuditManifest, CheckSpec, InputKind, InputSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_SCHEMA_VERSION: &str = "1.0";
pub const MANIFEST_SCHEMA_VERSION: &str = "1.0";

pub const MANIFEST_SCHEMA: &str = include_str!("../schemas/manifest.schema.json");
pub const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");
