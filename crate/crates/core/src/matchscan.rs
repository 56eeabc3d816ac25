//! Brute-force identification of rows/columns against a reference panel,
//! and detection of index offsets between a reported gene list and the
//! list a method actually produces.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AnnotationIndex, GroupLabel, LabeledMatrix, SignatureList};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MatchStats {
    pub matched: usize,
    pub unmatched: usize,
    pub ambiguous: usize,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// Unique reference hit per query item, by position.
    pub mapping: Vec<Option<usize>>,
    /// Every reference item reaching `min_corr`, per query item.
    pub hits: Vec<Vec<usize>>,
    /// Query items with two or more hits.
    pub ambiguous: Vec<usize>,
    /// Query items that are constant or have missing entries; never matched.
    pub degenerate: Vec<usize>,
    pub stats: MatchStats,
}

/// Finds, for every query row, the reference rows whose Pearson
/// correlation with it reaches `min_corr`. Columns correspond by position.
///
/// Rows with missing entries or zero variance on either side are skipped.
pub fn match_rows(query: &LabeledMatrix, reference: &LabeledMatrix, min_corr: f64) -> Result<MatchResult> {
    if query.n_samples() != reference.n_samples() {
        return Err(Error::ShapeMismatch(format!(
            "query has {} columns, reference has {}",
            query.n_samples(),
            reference.n_samples()
        )));
    }
    if query.n_samples() < 3 {
        return Err(Error::Degenerate("row matching needs at least 3 columns".into()));
    }
    let std_q: Vec<Option<Vec<f64>>> = (0..query.n_features())
        .into_par_iter()
        .map(|r| stats::standardize(query.row(r)))
        .collect();
    let std_r: Vec<Option<Vec<f64>>> = (0..reference.n_features())
        .into_par_iter()
        .map(|r| stats::standardize(reference.row(r)))
        .collect();
    let hits: Vec<Vec<usize>> = std_q
        .par_iter()
        .map(|q| match q {
            None => Vec::new(),
            Some(q) => std_r
                .iter()
                .enumerate()
                .filter_map(|(j, r)| {
                    let r = r.as_ref()?;
                    (stats::dot(q, r) >= min_corr).then_some(j)
                })
                .collect(),
        })
        .collect();
    let degenerate: Vec<usize> = (0..std_q.len()).filter(|&i| std_q[i].is_none()).collect();
    let ambiguous: Vec<usize> = (0..hits.len()).filter(|&i| hits[i].len() >= 2).collect();
    let mapping: Vec<Option<usize>> = hits
        .iter()
        .map(|h| if h.len() == 1 { Some(h[0]) } else { None })
        .collect();
    let matched = mapping.iter().filter(|m| m.is_some()).count();
    let stats = MatchStats {
        matched,
        unmatched: mapping.len() - matched - ambiguous.len(),
        ambiguous: ambiguous.len(),
        degenerate: degenerate.len(),
    };
    Ok(MatchResult {
        mapping,
        hits,
        ambiguous,
        degenerate,
        stats,
    })
}

/// Column-wise counterpart of [`match_rows`]: identifies query samples
/// among reference samples, with features corresponding by position.
pub fn match_columns(query: &LabeledMatrix, reference: &LabeledMatrix, min_corr: f64) -> Result<MatchResult> {
    if query.n_features() != reference.n_features() {
        return Err(Error::ShapeMismatch(format!(
            "query has {} rows, reference has {}",
            query.n_features(),
            reference.n_features()
        )));
    }
    match_rows(&query.transpose(), &reference.transpose(), min_corr)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OffsetReport {
    pub best_shift: i64,
    pub overlap_at_best: usize,
    /// Reported ids that do not land in the generated list at the best
    /// shift (including ids absent from the annotation).
    pub outliers: Vec<String>,
    pub overlap_by_shift: BTreeMap<i64, usize>,
    pub n_reported: usize,
}

/// Shifts every reported id by `s` annotation rows for each `s` in
/// `-max_shift..=max_shift` and counts how many land in `generated`.
///
/// The best shift maximizes that overlap; ties go to the smaller `|s|`,
/// then to the negative shift.
pub fn detect_offset(
    reported: &SignatureList,
    ann: &AnnotationIndex,
    generated: &SignatureList,
    max_shift: u32,
) -> Result<OffsetReport> {
    if reported.is_empty() || generated.is_empty() {
        return Err(Error::Empty("signature"));
    }
    let target = generated.id_set();
    let shifted = |id: &str, s: i64| -> Option<&str> {
        let row = ann.position(id)? as i64 + s;
        if row < 0 {
            return None;
        }
        ann.id_at(row as usize)
    };
    let max = max_shift as i64;
    let overlap_by_shift: BTreeMap<i64, usize> = (-max..=max)
        .into_par_iter()
        .map(|s| {
            let landed: BTreeSet<&str> = reported
                .feature_ids()
                .iter()
                .filter_map(|id| shifted(id, s))
                .filter(|t| target.contains(t))
                .collect();
            (s, landed.len())
        })
        .collect();
    let (&best_shift, &overlap_at_best) = overlap_by_shift
        .iter()
        .max_by(|a, b| {
            a.1.cmp(b.1)
                .then_with(|| b.0.abs().cmp(&a.0.abs()))
                .then_with(|| b.0.cmp(a.0))
        })
        .expect("at least shift 0");
    let outliers = reported
        .feature_ids()
        .iter()
        .filter(|id| !shifted(id, best_shift).is_some_and(|t| target.contains(t)))
        .cloned()
        .collect();
    Ok(OffsetReport {
        best_shift,
        overlap_at_best,
        outliers,
        overlap_by_shift,
        n_reported: reported.len(),
    })
}

/// Signature ids the platform does not measure, in signature order.
pub fn check_platform_membership(sig: &SignatureList, ann: &AnnotationIndex) -> Vec<String> {
    sig.feature_ids()
        .iter()
        .filter(|id| !ann.contains(id))
        .cloned()
        .collect()
}

/// How cleanly the signature genes split Sensitive from Resistant samples:
/// the mean over genes of `|t| / sqrt(t^2 + n - 2)`, in `[0, 1]`.
///
/// Samples with other labels are ignored, as are missing entries and
/// signature genes absent from `m`.
pub fn separation_score(
    m: &LabeledMatrix,
    sig: &SignatureList,
    labels: &BTreeMap<String, GroupLabel>,
) -> Result<f64> {
    let group = |g: GroupLabel| -> Vec<usize> {
        (0..m.n_samples())
            .filter(|&c| labels.get(&m.sample_ids()[c]) == Some(&g))
            .collect()
    };
    let (sens, res) = (group(GroupLabel::Sensitive), group(GroupLabel::Resistant));
    if sens.len() < 2 || res.len() < 2 {
        return Err(Error::Degenerate(
            "separation score needs at least 2 Sensitive and 2 Resistant samples".into(),
        ));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    for id in sig.feature_ids() {
        let Some(r) = m.feature_position(id) else { continue };
        let row = m.row(r);
        let pick = |idx: &[usize]| -> Vec<f64> {
            idx.iter().map(|&c| row[c]).filter(|v| !v.is_nan()).collect()
        };
        let (a, b) = (pick(&sens), pick(&res));
        if a.len() < 2 || b.len() < 2 {
            continue;
        }
        let t = stats::pooled_t(&a, &b);
        let nu = (a.len() + b.len() - 2) as f64;
        total += if t.is_infinite() { 1.0 } else { t.abs() / (t * t + nu).sqrt() };
        used += 1;
    }
    if used == 0 {
        return Err(Error::PlatformMismatch { requested: sig.len() });
    }
    Ok(total / used as f64)
}
