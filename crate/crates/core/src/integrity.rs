//! Dose-response sanity checks, sentinel labels, run-batch inference,
//! correlation blocks, confounding, and drug-combination scoring rules.
//!
//! Potencies are on the -log10(molar) scale: a larger value means a more
//! potent drug, i.e. a more sensitive line.

use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GroupLabel, LabeledMatrix, SampleMeta, SensitivityRecord};
use crate::signature;
use crate::stats;

/// (value, is_sensitive) for every record whose line is labeled
/// Sensitive or Resistant.
fn labeled_values(
    records: &[SensitivityRecord],
    labels: &BTreeMap<String, GroupLabel>,
) -> Vec<(f64, bool)> {
    records
        .iter()
        .filter_map(|r| match labels.get(&r.cell_line) {
            Some(GroupLabel::Sensitive) => Some((r.value, true)),
            Some(GroupLabel::Resistant) => Some((r.value, false)),
            _ => None,
        })
        .collect()
}

/// Which side of a threshold counts as Sensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Orientation {
    /// `value >= t` means Sensitive.
    #[default]
    HigherIsSensitive,
    /// Try both rules and keep the better one (ties go to the default rule).
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationCheck {
    /// Smallest value classed Sensitive; `+inf` when no line is.
    pub best_threshold: f64,
    pub misfit_count: usize,
    pub overlap: bool,
    /// False only when `Auto` found the reversed rule strictly better.
    pub higher_is_sensitive: bool,
    pub n_sensitive: usize,
    pub n_resistant: usize,
}

fn best_cut(values: &[(f64, bool)], sensitive_high: bool) -> (f64, usize) {
    let mut cuts: Vec<f64> = values.iter().map(|v| v.0).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(f64::INFINITY);
    let mut best = (f64::INFINITY, usize::MAX);
    for &t in &cuts {
        let misfits = values
            .iter()
            .filter(|&&(v, s)| ((v >= t) == sensitive_high) != s)
            .count();
        if misfits < best.1 {
            best = (t, misfits);
        }
    }
    best
}

/// Minimum number of lines misclassified by any single potency cutoff.
///
/// Every threshold position is tried: each distinct value (classing it and
/// everything above as Sensitive) plus one above the maximum. Ties go to
/// the lowest threshold.
pub fn check_separation(
    records: &[SensitivityRecord],
    labels: &BTreeMap<String, GroupLabel>,
    orientation: Orientation,
) -> Result<SeparationCheck> {
    let values = labeled_values(records, labels);
    let n_sensitive = values.iter().filter(|v| v.1).count();
    let n_resistant = values.len() - n_sensitive;
    if n_sensitive == 0 || n_resistant == 0 {
        return Err(Error::SingleClass);
    }
    let (mut t, mut misfits) = best_cut(&values, true);
    let mut higher = true;
    if orientation == Orientation::Auto {
        let (t2, m2) = best_cut(&values, false);
        if m2 < misfits {
            (t, misfits, higher) = (t2, m2, false);
        }
    }
    Ok(SeparationCheck {
        best_threshold: t,
        misfit_count: misfits,
        overlap: misfits > 0,
        higher_is_sensitive: higher,
        n_sensitive,
        n_resistant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReversalVerdict {
    /// Sensitive lines are clearly more potent-responding, as labeled.
    Oriented,
    /// Sensitive lines are clearly less responsive: labels look swapped.
    Reversed,
    /// Within the margin of 0.5; no call.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversalCheck {
    /// Probability that a Sensitive line out-potencies a Resistant one
    /// (ties count one half).
    pub auc: f64,
    pub verdict: ReversalVerdict,
    pub margin: f64,
}

impl ReversalCheck {
    pub fn reversed(&self) -> bool {
        self.verdict == ReversalVerdict::Reversed
    }
}

pub const DEFAULT_REVERSAL_MARGIN: f64 = 0.2;

/// Calls the Sensitive/Resistant labels reversed when the rank-sum AUC of
/// Sensitive over Resistant potency falls below `0.5 - margin`.
pub fn check_reversal(
    records: &[SensitivityRecord],
    labels: &BTreeMap<String, GroupLabel>,
    margin: f64,
) -> Result<ReversalCheck> {
    if !(0.0..0.5).contains(&margin) {
        return Err(Error::InvalidArgument(format!("margin {margin} outside [0, 0.5)")));
    }
    let values = labeled_values(records, labels);
    let n_s = values.iter().filter(|v| v.1).count();
    if n_s < 2 || values.len() - n_s < 2 {
        return Err(Error::Degenerate(
            "reversal check needs at least 2 Sensitive and 2 Resistant lines".into(),
        ));
    }
    let scores: Vec<f64> = values.iter().map(|v| v.0).collect();
    let flags: Vec<bool> = values.iter().map(|v| v.1).collect();
    let auc = signature::auc(&scores, &flags)?;
    let verdict = if auc < 0.5 - margin {
        ReversalVerdict::Reversed
    } else if auc > 0.5 + margin {
        ReversalVerdict::Oriented
    } else {
        ReversalVerdict::Unknown
    };
    Ok(ReversalCheck { auc, verdict, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatResponse {
    pub range: f64,
    pub iqr: f64,
    pub flat: bool,
    pub n: usize,
}

pub const DEFAULT_FLAT_EPSILON: f64 = 0.2;

/// Flags a drug whose potency barely varies across the panel (interquartile
/// range below `epsilon`), as for a prodrug inactive in culture.
pub fn check_flat_response(records: &[SensitivityRecord], epsilon: f64) -> Result<FlatResponse> {
    if records.len() < 5 {
        return Err(Error::Degenerate(format!(
            "flat-response check needs at least 5 records, got {}",
            records.len()
        )));
    }
    let mut v: Vec<f64> = records.iter().map(|r| r.value).collect();
    v.sort_by(f64::total_cmp);
    let iqr = stats::quantile_sorted(&v, 0.75) - stats::quantile_sorted(&v, 0.25);
    Ok(FlatResponse {
        range: v[v.len() - 1] - v[0],
        iqr,
        flat: iqr < epsilon,
        n: v.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sentinel {
    pub sample_id: String,
    pub expected: GroupLabel,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SentinelStatus {
    Matches,
    Conflict,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentinelOutcome {
    pub sample_id: String,
    pub expected: GroupLabel,
    pub observed: Option<GroupLabel>,
    pub status: SentinelStatus,
    pub reason: String,
}

/// Compares known-orientation samples (e.g. a line named as resistant to
/// the drug) against the labels in use. Returns only conflicts and absences.
pub fn sentinel_check(
    labels: &BTreeMap<String, GroupLabel>,
    sentinels: &[Sentinel],
) -> Vec<SentinelOutcome> {
    sentinels
        .iter()
        .filter_map(|s| {
            let observed = labels.get(&s.sample_id).copied();
            let status = match observed {
                None => SentinelStatus::Absent,
                Some(l) if l == s.expected => SentinelStatus::Matches,
                Some(_) => SentinelStatus::Conflict,
            };
            (status != SentinelStatus::Matches).then(|| SentinelOutcome {
                sample_id: s.sample_id.clone(),
                expected: s.expected,
                observed,
                status,
                reason: s.reason.clone(),
            })
        })
        .collect()
}

/// Batch number (1-based, in time order) per input sample, in input order.
///
/// Samples are sorted by run time (then id); a new batch starts whenever
/// the gap to the previous run exceeds `gap`.
pub fn infer_batches(metas: &[SampleMeta], gap: Duration) -> Result<Vec<usize>> {
    if metas.is_empty() {
        return Err(Error::Empty("sample metadata"));
    }
    let mut order: Vec<usize> = (0..metas.len()).collect();
    order.sort_by(|&a, &b| {
        metas[a]
            .run_timestamp
            .cmp(&metas[b].run_timestamp)
            .then_with(|| metas[a].sample_id.cmp(&metas[b].sample_id))
    });
    let mut out = vec![0; metas.len()];
    let mut batch = 1;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && metas[i].run_timestamp - metas[order[pos - 1]].run_timestamp > gap {
            batch += 1;
        }
        out[i] = batch;
    }
    Ok(out)
}

pub const DEFAULT_BLOCK_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Blocks {
    /// All components, singletons included, ordered by first column.
    pub components: Vec<Vec<String>>,
    pub sizes: Vec<usize>,
    /// Zero-variance columns, reported as singletons.
    pub degenerate: Vec<String>,
}

impl Blocks {
    pub fn multi_member(&self) -> usize {
        self.sizes.iter().filter(|&&s| s >= 2).count()
    }
}

/// Components of the sample graph joining columns whose Pearson
/// correlation reaches `corr_threshold`. Missing entries are handled
/// pairwise.
pub fn detect_blocks(m: &LabeledMatrix, corr_threshold: f64) -> Result<Blocks> {
    if m.n_samples() < 2 {
        return Err(Error::Degenerate("block detection needs at least 2 samples".into()));
    }
    let cols: Vec<Vec<f64>> = (0..m.n_samples()).map(|c| m.column(c)).collect();
    let (edges, degenerate) = crate::dupscan::correlation_edges(&cols, corr_threshold);
    let comps = stats::components(m.n_samples(), edges);
    Ok(Blocks {
        sizes: comps.iter().map(Vec::len).collect(),
        components: comps
            .iter()
            .map(|c| c.iter().map(|&i| m.sample_ids()[i].clone()).collect())
            .collect(),
        degenerate: degenerate.iter().map(|&i| m.sample_ids()[i].clone()).collect(),
    })
}

/// Counts of one categorical variable against another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCounts {
    pub row_levels: Vec<String>,
    pub col_levels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl CrossCounts {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let rows: Vec<String> = pairs
            .iter()
            .map(|p| p.0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(String::from)
            .collect();
        let cols: Vec<String> = pairs
            .iter()
            .map(|p| p.1)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(String::from)
            .collect();
        let mut counts = vec![vec![0; cols.len()]; rows.len()];
        for (a, b) in pairs {
            let r = rows.iter().position(|x| x == a).unwrap();
            let c = cols.iter().position(|x| x == b).unwrap();
            counts[r][c] += 1;
        }
        CrossCounts {
            row_levels: rows,
            col_levels: cols,
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Pearson chi-square statistic against independence.
    pub fn chi_square(&self) -> f64 {
        let n = self.total() as f64;
        let rs: Vec<f64> = self.counts.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
        let cs: Vec<f64> = (0..self.col_levels.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum::<usize>() as f64)
            .collect();
        let mut chi = 0.0;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &o) in row.iter().enumerate() {
                let e = rs[i] * cs[j] / n;
                if e > 0.0 {
                    chi += (o as f64 - e).powi(2) / e;
                }
            }
        }
        chi
    }

    /// Cramér's V, clamped to `[0, 1]`.
    pub fn cramers_v(&self) -> f64 {
        let k = self.row_levels.len().min(self.col_levels.len());
        if k < 2 {
            return 0.0;
        }
        (self.chi_square() / (self.total() as f64 * (k - 1) as f64))
            .sqrt()
            .clamp(0.0, 1.0)
    }

    /// Every column level (treatment) occupies a set of row levels (batches)
    /// disjoint from every other column level's.
    pub fn perfectly_separated(&self) -> bool {
        self.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() <= 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Association {
    pub table: CrossCounts,
    pub cramers_v: f64,
    pub perfect: bool,
}

impl Association {
    fn of(table: CrossCounts) -> Self {
        Association {
            cramers_v: table.cramers_v(),
            perfect: table.perfectly_separated(),
            table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Confounding {
    /// Batch (rows) by treatment (columns).
    pub batch: Association,
    /// Scanner (rows) by treatment (columns), when scanners were supplied.
    pub scanner: Option<Association>,
}

/// Tests whether treatment arms are confounded with processing batches
/// (and optionally scanners). All slices are aligned per sample.
pub fn test_confounding(
    batches: &[String],
    treatments: &[String],
    scanners: Option<&[String]>,
) -> Result<Confounding> {
    if batches.len() != treatments.len() || scanners.is_some_and(|s| s.len() != batches.len()) {
        return Err(Error::ShapeMismatch("batch, treatment and scanner lists differ in length".into()));
    }
    let distinct = |x: &[String]| x.iter().collect::<BTreeSet<_>>().len();
    if distinct(batches) < 2 {
        return Err(Error::Degenerate("confounding test needs at least 2 batches".into()));
    }
    if distinct(treatments) < 2 {
        return Err(Error::Degenerate("confounding test needs at least 2 treatments".into()));
    }
    let table = |rows: &[String]| {
        CrossCounts::from_pairs(rows.iter().zip(treatments).map(|(a, b)| (a.as_str(), b.as_str())))
    };
    Ok(Confounding {
        batch: Association::of(table(batches)),
        scanner: scanners.map(|s| Association::of(table(s))),
    })
}

/// The three combination rules, named by their arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CombinationRule {
    /// `P(T) + P(F) + P(A) + P(C) - P(T)P(F)P(A)P(C)`; batch min/max rescaling.
    SumMinusProduct,
    /// `max[P(E), P(T)]`; no rescaling.
    Max,
    /// `5/8 [P(F) + P(E) + P(C)] - 1/4`; clipped to `[0, 1]`.
    AffineMean,
}

impl CombinationRule {
    /// Drug keys each rule reads.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            CombinationRule::SumMinusProduct => &["T", "F", "A", "C"],
            CombinationRule::Max => &["E", "T"],
            CombinationRule::AffineMean => &["F", "E", "C"],
        }
    }

    /// Accepts `tfac`, `tet`, `fec` or the rule names.
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfac" | "sum_minus_product" | "summinusproduct" => Ok(CombinationRule::SumMinusProduct),
            "tet" | "max" => Ok(CombinationRule::Max),
            "fec" | "affine_mean" | "affinemean" => Ok(CombinationRule::AffineMean),
            other => Err(Error::InvalidArgument(format!("unknown combination rule {other:?}"))),
        }
    }
}

/// Raw combined score for one sample.
pub fn combine_probabilities(inputs: &BTreeMap<String, f64>, rule: CombinationRule) -> Result<f64> {
    let mut p = Vec::with_capacity(4);
    for &k in rule.keys() {
        let v = *inputs.get(k).ok_or_else(|| Error::MissingKey(k.to_string()))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange {
                key: k.to_string(),
                value: v,
            });
        }
        p.push(v);
    }
    Ok(match rule {
        CombinationRule::SumMinusProduct => crate::stats::compensated_sum(&p) - p.iter().product::<f64>(),
        CombinationRule::Max => p[0].max(p[1]),
        CombinationRule::AffineMean => 0.625 * crate::stats::compensated_sum(&p) - 0.25,
    })
}

/// Rule-specific rescaling of a batch of raw scores.
///
/// SumMinusProduct maps the batch minimum to 0 and maximum to 1 linearly
/// (a constant batch cannot be rescaled and is an error); AffineMean clips
/// to `[0, 1]`; Max is returned unchanged.
pub fn renormalize(raw: &[f64], rule: CombinationRule) -> Result<Vec<f64>> {
    match rule {
        CombinationRule::Max => Ok(raw.to_vec()),
        CombinationRule::AffineMean => Ok(raw.iter().map(|v| v.clamp(0.0, 1.0)).collect()),
        CombinationRule::SumMinusProduct => {
            if raw.is_empty() {
                return Err(Error::Empty("normalization batch"));
            }
            let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi.is_nan() || hi <= lo {
                return Err(Error::Degenerate("normalization batch has a single value".into()));
            }
            Ok(raw.iter().map(|v| (v - lo) / (hi - lo)).collect())
        }
    }
}

/// Raw scores for every sample of a batch, optionally rescaled.
pub fn combine_batch(
    batch: &[BTreeMap<String, f64>],
    rule: CombinationRule,
    normalize: bool,
) -> Result<Vec<f64>> {
    let raw = batch
        .iter()
        .map(|inputs| combine_probabilities(inputs, rule))
        .collect::<Result<Vec<_>>>()?;
    if normalize {
        renormalize(&raw, rule)
    } else {
        Ok(raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Measure;
    use chrono::{TimeZone, Utc};

    fn recs(values: &[(&str, f64)]) -> Vec<SensitivityRecord> {
        values
            .iter()
            .map(|&(c, v)| SensitivityRecord {
                cell_line: c.into(),
                drug_id: "D".into(),
                measure: Measure::GI50,
                value: v,
            })
            .collect()
    }

    fn labels(pairs: &[(&str, GroupLabel)]) -> BTreeMap<String, GroupLabel> {
        pairs.iter().map(|&(s, l)| (s.to_string(), l)).collect()
    }

    use GroupLabel::{Resistant as R, Sensitive as S};

    #[test]
    fn clean_split_has_no_misfits() {
        let r = recs(&[("a", 5.0), ("b", 6.0), ("c", 3.0), ("d", 4.0)]);
        let l = labels(&[("a", S), ("b", S), ("c", R), ("d", R)]);
        let out = check_separation(&r, &l, Orientation::HigherIsSensitive).unwrap();
        assert_eq!(out.misfit_count, 0);
        assert!(!out.overlap);
        assert!(out.best_threshold > 4.0 && out.best_threshold <= 5.0);
    }

    #[test]
    fn interleaved_values_overlap() {
        let r = recs(&[("a", 5.0), ("b", 3.5), ("c", 4.0), ("d", 3.0)]);
        let l = labels(&[("a", S), ("b", S), ("c", R), ("d", R)]);
        let out = check_separation(&r, &l, Orientation::HigherIsSensitive).unwrap();
        assert_eq!(out.misfit_count, 1);
        assert!(out.overlap);
        let one = labels(&[("a", S), ("b", S)]);
        assert_eq!(check_separation(&r, &one, Orientation::Auto).unwrap_err(), Error::SingleClass);
    }

    #[test]
    fn auto_orientation_finds_reversed_split() {
        let r = recs(&[("a", 1.0), ("b", 2.0), ("c", 5.0), ("d", 6.0)]);
        let l = labels(&[("a", S), ("b", S), ("c", R), ("d", R)]);
        let fixed = check_separation(&r, &l, Orientation::HigherIsSensitive).unwrap();
        assert_eq!(fixed.misfit_count, 2);
        let auto = check_separation(&r, &l, Orientation::Auto).unwrap();
        assert_eq!(auto.misfit_count, 0);
        assert!(!auto.higher_is_sensitive);
    }

    #[test]
    fn reversal_extremes() {
        let r = recs(&[("a", 1.0), ("b", 2.0), ("c", 5.0), ("d", 6.0)]);
        let l = labels(&[("a", S), ("b", S), ("c", R), ("d", R)]);
        let rev = check_reversal(&r, &l, DEFAULT_REVERSAL_MARGIN).unwrap();
        assert!(rev.reversed());
        assert_eq!(rev.auc, 0.0);
        let l2 = labels(&[("a", R), ("b", R), ("c", S), ("d", S)]);
        let ok = check_reversal(&r, &l2, DEFAULT_REVERSAL_MARGIN).unwrap();
        assert_eq!(ok.verdict, ReversalVerdict::Oriented);
        assert_eq!(ok.auc, 1.0);
        let mixed = labels(&[("a", S), ("b", R), ("c", R), ("d", S)]);
        assert_eq!(
            check_reversal(&r, &mixed, DEFAULT_REVERSAL_MARGIN).unwrap().verdict,
            ReversalVerdict::Unknown
        );
    }

    #[test]
    fn flat_response() {
        let equal = recs(&[("a", 4.0), ("b", 4.0), ("c", 4.0), ("d", 4.0), ("e", 4.0)]);
        let f = check_flat_response(&equal, DEFAULT_FLAT_EPSILON).unwrap();
        assert!(f.flat);
        assert_eq!((f.range, f.iqr), (0.0, 0.0));
        assert!(check_flat_response(&equal[..4], DEFAULT_FLAT_EPSILON).is_err());
    }

    #[test]
    fn sentinels() {
        let l = labels(&[("NCI/ADR-RES", S), ("MCF7", R)]);
        let sents = vec![
            Sentinel {
                sample_id: "NCI/ADR-RES".into(),
                expected: R,
                reason: "adriamycin resistant".into(),
            },
            Sentinel {
                sample_id: "MCF7".into(),
                expected: R,
                reason: "x".into(),
            },
            Sentinel {
                sample_id: "ABSENT".into(),
                expected: S,
                reason: "y".into(),
            },
        ];
        let out = sentinel_check(&l, &sents);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].status, SentinelStatus::Conflict);
        assert_eq!(out[0].observed, Some(S));
        assert_eq!(out[1].status, SentinelStatus::Absent);
    }

    fn meta(id: &str, day: u32, hour: u32) -> SampleMeta {
        SampleMeta {
            sample_id: id.into(),
            run_timestamp: Utc.with_ymd_and_hms(2005, 1, day, hour, 0, 0).unwrap(),
            scanner_id: "S".into(),
            treatment_arm: "FEC".into(),
            included: true,
        }
    }

    #[test]
    fn batches_by_gap() {
        let m = vec![meta("c", 20, 0), meta("a", 1, 0), meta("b", 1, 5), meta("d", 21, 0)];
        assert_eq!(infer_batches(&m, Duration::days(7)).unwrap(), vec![2, 1, 1, 2]);
        let same = vec![meta("a", 3, 1), meta("b", 3, 2)];
        assert_eq!(infer_batches(&same, Duration::days(7)).unwrap(), vec![1, 1]);
        assert!(infer_batches(&[], Duration::days(7)).is_err());
    }

    #[test]
    fn diagonal_two_by_two_is_perfect() {
        let b: Vec<String> = ["1", "1", "2", "2"].map(String::from).to_vec();
        let t: Vec<String> = ["FEC", "FEC", "TET", "TET"].map(String::from).to_vec();
        let c = test_confounding(&b, &t, None).unwrap();
        assert!(c.batch.perfect);
        assert_eq!(c.batch.cramers_v, 1.0);
        let one: Vec<String> = vec!["1".into(); 4];
        assert!(test_confounding(&one, &t, None).is_err());
    }

    fn probs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn combination_rules() {
        let tfac = probs(&[("T", 0.5), ("F", 0.5), ("A", 0.5), ("C", 0.5)]);
        assert_eq!(combine_probabilities(&tfac, CombinationRule::SumMinusProduct).unwrap(), 1.9375);
        let tet = probs(&[("E", 0.3), ("T", 0.7)]);
        assert_eq!(combine_probabilities(&tet, CombinationRule::Max).unwrap(), 0.7);
        let fec = probs(&[("F", 0.2), ("E", 0.4), ("C", 0.6)]);
        assert_eq!(combine_probabilities(&fec, CombinationRule::AffineMean).unwrap(), 0.5);
        let fec = probs(&[("F", 0.6), ("E", 0.2), ("C", 0.4)]);
        assert_eq!(combine_probabilities(&fec, CombinationRule::AffineMean).unwrap(), 0.5);
        let ones = probs(&[("F", 1.0), ("E", 1.0), ("C", 1.0)]);
        let raw = combine_probabilities(&ones, CombinationRule::AffineMean).unwrap();
        assert_eq!(raw, 1.625);
        assert_eq!(renormalize(&[raw], CombinationRule::AffineMean).unwrap(), vec![1.0]);
    }

    #[test]
    fn combination_errors() {
        let missing = probs(&[("E", 0.3)]);
        assert_eq!(
            combine_probabilities(&missing, CombinationRule::Max).unwrap_err(),
            Error::MissingKey("T".into())
        );
        let bad = probs(&[("E", 1.3), ("T", 0.1)]);
        assert!(matches!(
            combine_probabilities(&bad, CombinationRule::Max),
            Err(Error::OutOfRange { .. })
        ));
        assert!(renormalize(&[1.2, 1.2], CombinationRule::SumMinusProduct).is_err());
    }

    #[test]
    fn tfac_batch_interpolation() {
        let out = renormalize(&[1.2, 1.9375, 1.5], CombinationRule::SumMinusProduct).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 1.0);
        assert!((out[2] - 0.3 / 0.7375).abs() < 1e-15);
    }
}
