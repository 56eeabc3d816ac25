//! Domain model shared by every detector.
//!
//! All types are immutable once built. Missing matrix entries are stored as
//! `NaN`; nothing in this module imputes or alters values.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Response group of a sample or cell line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupLabel {
    Sensitive,
    Resistant,
    Intermediate,
    Unused,
    Unknown,
}

impl GroupLabel {
    pub const ALL: [GroupLabel; 5] = [
        GroupLabel::Sensitive,
        GroupLabel::Resistant,
        GroupLabel::Intermediate,
        GroupLabel::Unused,
        GroupLabel::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GroupLabel::Sensitive => "Sensitive",
            GroupLabel::Resistant => "Resistant",
            GroupLabel::Intermediate => "Intermediate",
            GroupLabel::Unused => "Unused",
            GroupLabel::Unknown => "Unknown",
        }
    }

    /// True for the two labels that define a response contrast.
    pub fn is_response(self) -> bool {
        matches!(self, GroupLabel::Sensitive | GroupLabel::Resistant)
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One broken invariant found by [`LabeledMatrix::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub id: String,
    pub message: String,
}

/// Feature-by-sample numeric matrix with ids and optional group labels.
///
/// Values are stored row-major (one row per feature). `NaN` marks a
/// missing entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    feature_ids: Vec<String>,
    sample_ids: Vec<String>,
    values: Vec<f64>,
    labels: Option<BTreeMap<String, GroupLabel>>,
}

impl LabeledMatrix {
    /// Builds a matrix without checking invariants; see [`validate`](Self::validate).
    pub fn new(
        feature_ids: Vec<String>,
        sample_ids: Vec<String>,
        values: Vec<f64>,
        labels: Option<BTreeMap<String, GroupLabel>>,
    ) -> Self {
        LabeledMatrix {
            feature_ids,
            sample_ids,
            values,
            labels,
        }
    }

    /// Builds a matrix and rejects it if any invariant is broken.
    pub fn try_new(
        feature_ids: Vec<String>,
        sample_ids: Vec<String>,
        values: Vec<f64>,
        labels: Option<BTreeMap<String, GroupLabel>>,
    ) -> Result<Self> {
        let m = Self::new(feature_ids, sample_ids, values, labels);
        match m.validate().into_iter().next() {
            None => Ok(m),
            Some(v) => Err(Error::InvalidArgument(format!(
                "{} {:?}: {}",
                v.field, v.id, v.message
            ))),
        }
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows<S: Into<String>, T: Into<String>>(
        feature_ids: impl IntoIterator<Item = S>,
        sample_ids: impl IntoIterator<Item = T>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        let feature_ids: Vec<String> = feature_ids.into_iter().map(Into::into).collect();
        let sample_ids: Vec<String> = sample_ids.into_iter().map(Into::into).collect();
        let values = rows.iter().flatten().copied().collect();
        if let Some(r) = rows.iter().find(|r| r.len() != sample_ids.len()) {
            return Err(Error::ShapeMismatch(format!(
                "row of length {} for {} samples",
                r.len(),
                sample_ids.len()
            )));
        }
        Self::try_new(feature_ids, sample_ids, values, None)
    }

    /// Lists every broken invariant. Empty iff the matrix is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let expected = self.feature_ids.len() * self.sample_ids.len();
        if self.values.len() != expected {
            out.push(Violation {
                field: "values",
                id: String::new(),
                message: format!(
                    "{} values for a {}x{} matrix",
                    self.values.len(),
                    self.feature_ids.len(),
                    self.sample_ids.len()
                ),
            });
        }
        for id in duplicates(&self.feature_ids) {
            out.push(Violation {
                field: "feature_ids",
                id,
                message: "duplicate feature id".into(),
            });
        }
        for id in duplicates(&self.sample_ids) {
            out.push(Violation {
                field: "sample_ids",
                id,
                message: "duplicate sample id".into(),
            });
        }
        if let Some(labels) = &self.labels {
            let known: BTreeSet<&str> = self.sample_ids.iter().map(String::as_str).collect();
            for id in labels.keys() {
                if !known.contains(id.as_str()) {
                    out.push(Violation {
                        field: "labels",
                        id: id.clone(),
                        message: "label for unknown sample".into(),
                    });
                }
            }
        }
        for (i, v) in self.values.iter().enumerate() {
            if v.is_infinite() {
                let ns = self.sample_ids.len().max(1);
                out.push(Violation {
                    field: "values",
                    id: format!(
                        "{}/{}",
                        self.feature_ids.get(i / ns).map_or("?", |s| s.as_str()),
                        self.sample_ids.get(i % ns).map_or("?", |s| s.as_str())
                    ),
                    message: "non-finite value".into(),
                });
            }
        }
        out
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&BTreeMap<String, GroupLabel>> {
        self.labels.as_ref()
    }

    /// Label of a sample; `Unknown` when no label was recorded.
    pub fn label(&self, sample_id: &str) -> GroupLabel {
        self.labels
            .as_ref()
            .and_then(|l| l.get(sample_id).copied())
            .unwrap_or(GroupLabel::Unknown)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.sample_ids.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.sample_ids.len();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_features()).map(|r| self.get(r, col)).collect()
    }

    pub fn feature_position(&self, id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == id)
    }

    pub fn sample_position(&self, id: &str) -> Option<usize> {
        self.sample_ids.iter().position(|s| s == id)
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    /// Replaces the label map.
    pub fn with_labels(mut self, labels: Option<BTreeMap<String, GroupLabel>>) -> Self {
        self.labels = labels;
        self
    }

    /// Replaces every value through `f(row, col, value)`, keeping ids and labels.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let ns = self.n_samples();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i / ns, i % ns, v))
            .collect();
        LabeledMatrix {
            values,
            ..self.clone()
        }
    }

    /// Rows at the given positions, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let feature_ids = rows.iter().map(|&r| self.feature_ids[r].clone()).collect();
        let mut values = Vec::with_capacity(rows.len() * self.n_samples());
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        LabeledMatrix {
            feature_ids,
            sample_ids: self.sample_ids.clone(),
            values,
            labels: self.labels.clone(),
        }
    }

    /// Columns at the given positions, in the given order. Labels of
    /// dropped samples are dropped too.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let sample_ids: Vec<String> = cols.iter().map(|&c| self.sample_ids[c].clone()).collect();
        let mut values = Vec::with_capacity(cols.len() * self.n_features());
        for r in 0..self.n_features() {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        let labels = self.labels.as_ref().map(|l| {
            sample_ids
                .iter()
                .filter_map(|s| l.get(s).map(|g| (s.clone(), *g)))
                .collect()
        });
        LabeledMatrix {
            feature_ids: self.feature_ids.clone(),
            sample_ids,
            values,
            labels,
        }
    }

    /// Swaps the roles of features and samples. Labels are dropped.
    pub fn transpose(&self) -> Self {
        let (nf, ns) = (self.n_features(), self.n_samples());
        let mut values = Vec::with_capacity(nf * ns);
        for c in 0..ns {
            values.extend((0..nf).map(|r| self.get(r, c)));
        }
        LabeledMatrix {
            feature_ids: self.sample_ids.clone(),
            sample_ids: self.feature_ids.clone(),
            values,
            labels: None,
        }
    }

    /// Count of samples per label (unlabeled samples count as `Unknown`).
    pub fn label_census(&self) -> BTreeMap<GroupLabel, usize> {
        let mut out = BTreeMap::new();
        for s in &self.sample_ids {
            *out.entry(self.label(s)).or_insert(0) += 1;
        }
        out
    }
}

fn duplicates(ids: &[String]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut reported = BTreeSet::new();
    let mut out = Vec::new();
    for id in ids {
        if !seen.insert(id.as_str()) && reported.insert(id.as_str()) {
            out.push(id.clone());
        }
    }
    out
}

/// Rows of `m` named by `sig`, in signature order, optionally restricted
/// to samples whose label is in `sample_filter`.
///
/// Returns the submatrix together with the signature ids absent from `m`.
pub fn extract_submatrix(
    m: &LabeledMatrix,
    sig: &SignatureList,
    sample_filter: Option<&[GroupLabel]>,
) -> Result<(LabeledMatrix, Vec<String>)> {
    let index: HashMap<&str, usize> = m
        .feature_ids()
        .iter()
        .enumerate()
        .map(|(i, f)| (f.as_str(), i))
        .collect();
    let mut rows = Vec::new();
    let mut absent = Vec::new();
    for id in sig.feature_ids() {
        match index.get(id.as_str()) {
            Some(&r) => rows.push(r),
            None => absent.push(id.clone()),
        }
    }
    if rows.is_empty() {
        return Err(Error::PlatformMismatch {
            requested: sig.len(),
        });
    }
    let mut sub = m.select_rows(&rows);
    if let Some(filter) = sample_filter {
        let cols: Vec<usize> = (0..m.n_samples())
            .filter(|&c| filter.contains(&m.label(&m.sample_ids()[c])))
            .collect();
        sub = sub.select_columns(&cols);
    }
    Ok((sub, absent))
}

/// One line of a label roster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub sample_id: String,
    pub label: GroupLabel,
    pub source_id: String,
    pub note: Option<String>,
}

/// Ordered list of (sample, label) records. Sample ids may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRoster {
    entries: Vec<RosterEntry>,
}

impl LabelRoster {
    pub fn new(entries: Vec<RosterEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("roster"));
        }
        Ok(LabelRoster { entries })
    }

    pub fn entries(&self) -> &[RosterEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Last label seen for each sample. Use
    /// [`crate::dupscan::collapse_roster`] when conflicts matter.
    pub fn label_map(&self) -> BTreeMap<String, GroupLabel> {
        self.entries
            .iter()
            .map(|e| (e.sample_id.clone(), e.label))
            .collect()
    }
}

/// Which group a signature gene is more highly expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    UpInResistant,
    UpInSensitive,
}

/// A reported gene list, optionally with per-gene directions.
///
/// The same id may carry several direction entries; conflicting entries
/// are a defect reported by [`crate::dupscan::check_signature_directions`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureList {
    feature_ids: Vec<String>,
    directions: Vec<(String, Direction)>,
}

impl SignatureList {
    pub fn new<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        let feature_ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        if feature_ids.is_empty() {
            return Err(Error::Empty("signature"));
        }
        Ok(SignatureList {
            feature_ids,
            directions: Vec::new(),
        })
    }

    /// Attaches direction entries. Every key must name a listed feature.
    pub fn with_directions(mut self, directions: Vec<(String, Direction)>) -> Result<Self> {
        let known: BTreeSet<&str> = self.feature_ids.iter().map(String::as_str).collect();
        if let Some((id, _)) = directions.iter().find(|(id, _)| !known.contains(id.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "direction given for unlisted feature {id:?}"
            )));
        }
        self.directions = directions;
        Ok(self)
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn directions(&self) -> &[(String, Direction)] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_ids.is_empty()
    }

    pub fn id_set(&self) -> BTreeSet<&str> {
        self.feature_ids.iter().map(String::as_str).collect()
    }
}

/// Ordered feature universe of a platform. Row order is meaningful.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationIndex {
    platform_id: String,
    feature_ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl AnnotationIndex {
    pub fn new(platform_id: impl Into<String>, feature_ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(feature_ids.len());
        for (i, id) in feature_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "annotation feature",
                    id: id.clone(),
                });
            }
        }
        Ok(AnnotationIndex {
            platform_id: platform_id.into(),
            feature_ids,
            index,
        })
    }

    pub fn platform_id(&self) -> &str {
        &self.platform_id
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn len(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_ids.is_empty()
    }

    /// 0-based row of a feature.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn id_at(&self, row: usize) -> Option<&str> {
        self.feature_ids.get(row).map(String::as_str)
    }
}

/// Dose-response summary measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    GI50,
    TGI,
    LC50,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GI50" | "IC50" => Ok(Measure::GI50),
            "TGI" => Ok(Measure::TGI),
            "LC50" => Ok(Measure::LC50),
            other => Err(Error::InvalidArgument(format!("unknown measure {other:?}"))),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::GI50 => "GI50",
            Measure::TGI => "TGI",
            Measure::LC50 => "LC50",
        })
    }
}

/// Potency of one drug on one cell line, on the -log10(molar) scale
/// (larger = more potent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRecord {
    pub cell_line: String,
    pub drug_id: String,
    pub measure: Measure,
    pub value: f64,
}

/// Per-array processing metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub sample_id: String,
    pub run_timestamp: DateTime<Utc>,
    pub scanner_id: String,
    pub treatment_arm: String,
    pub included: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m3() -> LabeledMatrix {
        LabeledMatrix::from_rows(
            ["A", "B", "C"],
            ["S1", "S2", "S3"],
            &[
                vec![1.0, 2.0, 3.0],
                vec![4.0, 5.0, 6.0],
                vec![7.0, 8.0, 9.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn well_formed_matrix_has_no_violations() {
        assert!(m3().validate().is_empty());
    }

    #[test]
    fn duplicate_sample_id_is_named() {
        let m = LabeledMatrix::new(
            vec!["A".into()],
            vec!["S1".into(), "S1".into(), "S2".into()],
            vec![1.0, 2.0, 3.0],
            None,
        );
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].id, "S1");
        assert_eq!(v[0].field, "sample_ids");
    }

    #[test]
    fn label_for_unknown_sample_is_named() {
        let labels = BTreeMap::from([("S9".to_string(), GroupLabel::Sensitive)]);
        let m = m3().with_labels(Some(labels));
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].id, "S9");
        assert_eq!(m.validate(), v);
    }

    #[test]
    fn submatrix_follows_signature_order() {
        let sig = SignatureList::new(["C", "B"]).unwrap();
        let (sub, absent) = extract_submatrix(&m3(), &sig, None).unwrap();
        assert_eq!(sub.feature_ids(), &["C", "B"]);
        assert_eq!(sub.row(0), &[7.0, 8.0, 9.0]);
        assert!(absent.is_empty());
    }

    #[test]
    fn submatrix_reports_absent_ids() {
        let ids: Vec<String> = (0..43).map(|i| format!("p{i}")).collect();
        let rows: Vec<Vec<f64>> = (0..43).map(|i| vec![i as f64, 1.0]).collect();
        let m = LabeledMatrix::from_rows(ids.clone(), ["a", "b"], &rows).unwrap();
        let mut sig_ids = ids.clone();
        sig_ids.insert(10, "228131_at".into());
        sig_ids.push("231971_at".into());
        let sig = SignatureList::new(sig_ids).unwrap();
        let (sub, absent) = extract_submatrix(&m, &sig, None).unwrap();
        assert_eq!(sub.n_features(), 43);
        assert_eq!(absent, vec!["228131_at", "231971_at"]);
    }

    #[test]
    fn disjoint_signature_is_platform_mismatch() {
        let sig = SignatureList::new(["X", "Y"]).unwrap();
        assert_eq!(
            extract_submatrix(&m3(), &sig, None).unwrap_err(),
            Error::PlatformMismatch { requested: 2 }
        );
    }

    #[test]
    fn sample_filter_keeps_matching_labels() {
        let labels = BTreeMap::from([
            ("S1".to_string(), GroupLabel::Sensitive),
            ("S3".to_string(), GroupLabel::Resistant),
        ]);
        let m = m3().with_labels(Some(labels));
        let sig = SignatureList::new(["A"]).unwrap();
        let (sub, _) =
            extract_submatrix(&m, &sig, Some(&[GroupLabel::Sensitive, GroupLabel::Resistant]))
                .unwrap();
        assert_eq!(sub.sample_ids(), &["S1", "S3"]);
        assert_eq!(sub.row(0), &[1.0, 3.0]);
    }

    #[test]
    fn transpose_round_trips() {
        let m = m3();
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().row(0), &[1.0, 4.0, 7.0]);
    }
}
