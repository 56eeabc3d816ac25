//! Forensic checks for published genomic-signature analyses: duplicate
//! samples, label and roster inconsistencies, preprocessing inference,
//! index offsets, group reconstruction, and dose-response and batch sanity.

pub mod dupscan;
pub mod error;
pub mod findings;
pub mod groupsearch;
pub mod ingest;
pub mod integrity;
pub mod matchscan;
pub mod model;
pub mod signature;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use findings::{Finding, FindingCode, FindingsReport, MetricValue, Severity};
pub use model::{
    AnnotationIndex, Direction, GroupLabel, LabelRoster, LabeledMatrix, Measure, RosterEntry,
    SampleMeta, SensitivityRecord, SignatureList,
};
