//! Duplicate samples, label consistency, roster census, cross-tabulation,
//! matrix fingerprints and labeling comparisons across sources.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Direction, GroupLabel, LabelRoster, LabeledMatrix, SignatureList};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CompareOn {
    #[default]
    Raw,
    /// Natural log of the values; every observed value must be positive.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MissingPolicy {
    /// Correlate each pair over entries observed in both columns.
    #[default]
    PairwiseComplete,
    /// Refuse matrices with missing entries.
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DupScanConfig {
    pub corr_threshold: f64,
    pub compare_on: CompareOn,
    pub missing_policy: MissingPolicy,
}

pub const DEFAULT_DUP_THRESHOLD: f64 = 0.9999;

impl Default for DupScanConfig {
    fn default() -> Self {
        DupScanConfig {
            corr_threshold: DEFAULT_DUP_THRESHOLD,
            compare_on: CompareOn::Raw,
            missing_policy: MissingPolicy::PairwiseComplete,
        }
    }
}

impl DupScanConfig {
    pub fn with_threshold(threshold: f64) -> Result<Self> {
        let cfg = DupScanConfig {
            corr_threshold: threshold,
            ..Self::default()
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        if self.corr_threshold > 0.0 && self.corr_threshold <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "correlation threshold {} outside (0, 1]",
                self.corr_threshold
            )))
        }
    }
}

/// Groups of samples that are copies of one another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DupComponents {
    /// Each component lists sample ids in column order; components are
    /// ordered by their first column. Only components of size >= 2.
    pub components: Vec<Vec<String>>,
    /// Multiplicity -> number of distinct samples present that many times.
    pub multiplicity_histogram: BTreeMap<usize, usize>,
    pub n_samples: usize,
    pub n_distinct: usize,
}

/// Result of [`find_duplicate_columns`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DupScan {
    pub duplicates: DupComponents,
    /// Zero-variance (or all-missing) columns, excluded from the graph and
    /// counted as singletons.
    pub degenerate: Vec<String>,
}

fn column_vectors(m: &LabeledMatrix, cfg: &DupScanConfig) -> Result<Vec<Vec<f64>>> {
    let mut cols: Vec<Vec<f64>> = (0..m.n_samples()).map(|c| m.column(c)).collect();
    if cfg.compare_on == CompareOn::Log {
        for (c, col) in cols.iter_mut().enumerate() {
            for (r, v) in col.iter_mut().enumerate() {
                if v.is_nan() {
                    continue;
                }
                if *v <= 0.0 {
                    return Err(Error::NonPositive {
                        feature: m.feature_ids()[r].clone(),
                        sample: m.sample_ids()[c].clone(),
                        value: *v,
                    });
                }
                *v = v.ln();
            }
        }
    }
    Ok(cols)
}

/// Correlation graph over samples: an edge wherever Pearson correlation
/// reaches `threshold`. Returns (edges, degenerate columns).
pub(crate) fn correlation_edges(
    cols: &[Vec<f64>],
    threshold: f64,
) -> (Vec<(usize, usize)>, Vec<usize>) {
    let n = cols.len();
    let complete = cols.iter().all(|c| c.iter().all(|v| !v.is_nan()));
    let standardized: Vec<Option<Vec<f64>>> = if complete {
        cols.iter().map(|c| stats::standardize(c)).collect()
    } else {
        Vec::new()
    };
    let degenerate: Vec<usize> = (0..n)
        .filter(|&i| {
            if complete {
                standardized[i].is_none()
            } else {
                let obs: Vec<f64> = cols[i].iter().copied().filter(|v| !v.is_nan()).collect();
                obs.len() < 3 || stats::variance(&obs, 0) <= 0.0
            }
        })
        .collect();
    let skip: BTreeSet<usize> = degenerate.iter().copied().collect();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .filter(|i| !skip.contains(i))
        .flat_map_iter(|i| {
            let skip = &skip;
            let standardized = &standardized;
            (i + 1..n).filter(move |j| !skip.contains(j)).filter_map(move |j| {
                let bitwise = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .all(|(a, b)| a.to_bits() == b.to_bits());
                let r = if bitwise {
                    1.0
                } else if complete {
                    stats::dot(standardized[i].as_ref()?, standardized[j].as_ref()?)
                } else {
                    stats::pearson(&cols[i], &cols[j])?
                };
                (r >= threshold).then_some((i, j))
            })
        })
        .collect();
    (edges, degenerate)
}

/// Connected components of the sample graph whose edges join columns
/// correlating at or above the configured threshold.
pub fn find_duplicate_columns(m: &LabeledMatrix, cfg: &DupScanConfig) -> Result<DupScan> {
    cfg.check()?;
    if m.n_samples() < 2 {
        return Err(Error::Degenerate("duplicate scan needs at least 2 samples".into()));
    }
    if m.n_features() < 3 {
        return Err(Error::Degenerate("duplicate scan needs at least 3 features".into()));
    }
    if cfg.missing_policy == MissingPolicy::Fail && m.has_missing() {
        return Err(Error::MissingValue("duplicate scan input".into()));
    }
    let cols = column_vectors(m, cfg)?;
    let (edges, degenerate) = correlation_edges(&cols, cfg.corr_threshold);
    let comps = stats::components(m.n_samples(), edges);

    let mut histogram = BTreeMap::new();
    let mut components = Vec::new();
    for c in &comps {
        *histogram.entry(c.len()).or_insert(0) += 1;
        if c.len() >= 2 {
            components.push(c.iter().map(|&i| m.sample_ids()[i].clone()).collect());
        }
    }
    Ok(DupScan {
        duplicates: DupComponents {
            components,
            multiplicity_histogram: histogram,
            n_samples: m.n_samples(),
            n_distinct: comps.len(),
        },
        degenerate: degenerate.iter().map(|&i| m.sample_ids()[i].clone()).collect(),
    })
}

/// A duplicate component whose members carry conflicting labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InconsistentComponent {
    pub members: Vec<String>,
    /// Labels in member order.
    pub labels: Vec<GroupLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelConsistency {
    pub consistent: Vec<Vec<String>>,
    pub inconsistent: Vec<InconsistentComponent>,
}

/// Splits duplicate components by whether their members agree on a label.
/// `Unknown` never conflicts with anything.
pub fn classify_duplicate_labels(
    comps: &DupComponents,
    labels: &BTreeMap<String, GroupLabel>,
) -> Result<LabelConsistency> {
    let mut out = LabelConsistency {
        consistent: Vec::new(),
        inconsistent: Vec::new(),
    };
    for comp in &comps.components {
        let ls = comp
            .iter()
            .map(|s| labels.get(s).copied().ok_or_else(|| Error::MissingLabel(s.clone())))
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<GroupLabel> =
            ls.iter().copied().filter(|&l| l != GroupLabel::Unknown).collect();
        if distinct.len() >= 2 {
            out.inconsistent.push(InconsistentComponent {
                members: comp.clone(),
                labels: ls,
            });
        } else {
            out.consistent.push(comp.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RosterDuplicates {
    pub n_entries: usize,
    pub n_distinct: usize,
    /// Ids listed more than once, in order of first appearance.
    pub duplicated_ids: Vec<String>,
    /// Duplicated ids carrying two or more distinct non-`Unknown` labels.
    pub inconsistent_ids: Vec<String>,
}

pub fn roster_duplicates(r: &LabelRoster) -> RosterDuplicates {
    let mut order: Vec<&str> = Vec::new();
    let mut seen: BTreeMap<&str, (usize, BTreeSet<GroupLabel>)> = BTreeMap::new();
    for e in r.entries() {
        let slot = seen.entry(e.sample_id.as_str()).or_insert_with(|| {
            order.push(e.sample_id.as_str());
            (0, BTreeSet::new())
        });
        slot.0 += 1;
        if e.label != GroupLabel::Unknown {
            slot.1.insert(e.label);
        }
    }
    let duplicated_ids: Vec<String> = order
        .iter()
        .filter(|id| seen[*id].0 >= 2)
        .map(|s| s.to_string())
        .collect();
    let inconsistent_ids = duplicated_ids
        .iter()
        .filter(|id| seen[id.as_str()].1.len() >= 2)
        .cloned()
        .collect();
    RosterDuplicates {
        n_entries: r.len(),
        n_distinct: order.len(),
        duplicated_ids,
        inconsistent_ids,
    }
}

/// Category on one axis of a cross-tabulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CrossLabel {
    Sensitive,
    Intermediate,
    Resistant,
    Unused,
    Unknown,
    /// The sample was labeled inconsistently by its source.
    Both,
}

impl From<GroupLabel> for CrossLabel {
    fn from(l: GroupLabel) -> Self {
        match l {
            GroupLabel::Sensitive => CrossLabel::Sensitive,
            GroupLabel::Intermediate => CrossLabel::Intermediate,
            GroupLabel::Resistant => CrossLabel::Resistant,
            GroupLabel::Unused => CrossLabel::Unused,
            GroupLabel::Unknown => CrossLabel::Unknown,
        }
    }
}

impl fmt::Display for CrossLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One label per distinct roster sample; samples listed with conflicting
/// labels become [`CrossLabel::Both`].
pub fn collapse_roster(r: &LabelRoster) -> BTreeMap<String, CrossLabel> {
    let mut out: BTreeMap<String, CrossLabel> = BTreeMap::new();
    for e in r.entries() {
        let l = CrossLabel::from(e.label);
        out.entry(e.sample_id.clone())
            .and_modify(|prev| {
                if *prev == CrossLabel::Unknown {
                    *prev = l;
                } else if l != CrossLabel::Unknown && *prev != l {
                    *prev = CrossLabel::Both;
                }
            })
            .or_insert(l);
    }
    out
}

/// Contingency table of two labelings over their shared samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<CrossLabel>,
    pub col_labels: Vec<CrossLabel>,
    pub counts: Vec<Vec<usize>>,
    pub row_margins: Vec<usize>,
    pub col_margins: Vec<usize>,
    pub total: usize,
    /// Samples labeled by only one side.
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
}

impl ContingencyTable {
    pub fn cell(&self, row: CrossLabel, col: CrossLabel) -> usize {
        match (
            self.row_labels.iter().position(|&l| l == row),
            self.col_labels.iter().position(|&l| l == col),
        ) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }
}

/// Cross-tabulates labeling `a` (rows) against `b` (columns). Categories
/// appear only when used, in the order Sensitive, Intermediate, Resistant,
/// Unused, Unknown, Both.
pub fn cross_tabulate(
    a: &BTreeMap<String, CrossLabel>,
    b: &BTreeMap<String, CrossLabel>,
) -> Result<ContingencyTable> {
    let shared: Vec<(&String, CrossLabel, CrossLabel)> = a
        .iter()
        .filter_map(|(s, &la)| b.get(s).map(|&lb| (s, la, lb)))
        .collect();
    if shared.is_empty() {
        return Err(Error::Degenerate("labelings share no samples".into()));
    }
    let row_labels: Vec<CrossLabel> = shared
        .iter()
        .map(|t| t.1)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let col_labels: Vec<CrossLabel> = shared
        .iter()
        .map(|t| t.2)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![vec![0usize; col_labels.len()]; row_labels.len()];
    for &(_, la, lb) in &shared {
        let r = row_labels.iter().position(|&l| l == la).unwrap();
        let c = col_labels.iter().position(|&l| l == lb).unwrap();
        counts[r][c] += 1;
    }
    let row_margins = counts.iter().map(|r| r.iter().sum()).collect();
    let col_margins = (0..col_labels.len())
        .map(|c| counts.iter().map(|r| r[c]).sum())
        .collect();
    Ok(ContingencyTable {
        row_labels,
        col_labels,
        counts,
        row_margins,
        col_margins,
        total: shared.len(),
        only_in_a: a.keys().filter(|s| !b.contains_key(*s)).cloned().collect(),
        only_in_b: b.keys().filter(|s| !a.contains_key(*s)).cloned().collect(),
    })
}

/// SHA-256 over the matrix shape and its values rounded to `digits`
/// decimals. Ids and labels do not enter the digest, so a relabeled copy
/// of the same numbers fingerprints identically.
pub fn fingerprint_matrix(m: &LabeledMatrix, digits: u32) -> String {
    let mut h = Sha256::new();
    h.update((m.n_features() as u64).to_le_bytes());
    h.update((m.n_samples() as u64).to_le_bytes());
    let d = digits as usize;
    for &v in m.values() {
        let cell = if v.is_nan() {
            "NA".to_string()
        } else {
            let s = format!("{:.*}", d, crate::transform::round_to(v, digits));
            // "-0.00" and "0.00" are the same number
            if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                s[1..].to_string()
            } else {
                s
            }
        };
        h.update(cell.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

pub fn matrices_identical(a: &LabeledMatrix, b: &LabeledMatrix, digits: u32) -> bool {
    a.n_features() == b.n_features()
        && a.n_samples() == b.n_samples()
        && fingerprint_matrix(a, digits) == fingerprint_matrix(b, digits)
}

/// Labels assigned to entities (cell lines) for one drug by one source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelingSource {
    pub source_id: String,
    pub drug_id: String,
    pub labels: BTreeMap<String, GroupLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityLabels {
    pub entity: String,
    /// (source, label) in source order.
    pub sequence: Vec<(String, GroupLabel)>,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DrugFlips {
    pub drug_id: String,
    pub sources: Vec<String>,
    pub entities: Vec<EntityLabels>,
    pub flipped: bool,
}

/// Per drug, lines up each entity's labels across sources and flags any
/// entity called both Sensitive and Resistant.
pub fn compare_labelings(sources: &[LabelingSource]) -> Result<Vec<DrugFlips>> {
    if sources.is_empty() {
        return Err(Error::Empty("labeling source list"));
    }
    let mut drugs: Vec<&str> = Vec::new();
    for s in sources {
        if !drugs.contains(&s.drug_id.as_str()) {
            drugs.push(&s.drug_id);
        }
    }
    let mut out = Vec::new();
    for drug in drugs {
        let srcs: Vec<&LabelingSource> = sources.iter().filter(|s| s.drug_id == drug).collect();
        let entities: BTreeSet<&String> = srcs.iter().flat_map(|s| s.labels.keys()).collect();
        let entities: Vec<EntityLabels> = entities
            .into_iter()
            .map(|e| {
                let sequence: Vec<(String, GroupLabel)> = srcs
                    .iter()
                    .filter_map(|s| s.labels.get(e).map(|&l| (s.source_id.clone(), l)))
                    .collect();
                let flipped = sequence.iter().any(|x| x.1 == GroupLabel::Sensitive)
                    && sequence.iter().any(|x| x.1 == GroupLabel::Resistant);
                EntityLabels {
                    entity: e.clone(),
                    sequence,
                    flipped,
                }
            })
            .collect();
        out.push(DrugFlips {
            drug_id: drug.to_string(),
            sources: srcs.iter().map(|s| s.source_id.clone()).collect(),
            flipped: entities.iter().any(|e| e.flipped),
            entities,
        });
    }
    Ok(out)
}

/// Features listed as higher in both groups.
pub fn check_signature_directions(sig: &SignatureList) -> Vec<String> {
    let mut dirs: BTreeMap<&str, BTreeSet<Direction>> = BTreeMap::new();
    for (id, d) in sig.directions() {
        dirs.entry(id).or_default().insert(*d);
    }
    sig.feature_ids()
        .iter()
        .filter(|id| dirs.get(id.as_str()).is_some_and(|s| s.len() > 1))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RosterEntry;

    fn cols(data: &[Vec<f64>]) -> LabeledMatrix {
        let nf = data[0].len();
        let rows: Vec<Vec<f64>> = (0..nf).map(|r| data.iter().map(|c| c[r]).collect()).collect();
        LabeledMatrix::from_rows(
            (0..nf).map(|i| format!("g{i}")),
            (0..data.len()).map(|i| format!("c{}", i + 1)),
            &rows,
        )
        .unwrap()
    }

    #[test]
    fn bitwise_pair_is_one_component() {
        let m = cols(&[
            vec![1.0, 5.0, 2.0, 8.0],
            vec![1.0, 5.0, 2.0, 8.0],
            vec![3.0, 1.0, 7.0, 2.0],
        ]);
        let scan = find_duplicate_columns(&m, &DupScanConfig::with_threshold(1.0).unwrap()).unwrap();
        assert_eq!(scan.duplicates.components, vec![vec!["c1", "c2"]]);
        assert_eq!(scan.duplicates.n_distinct, 2);
        assert_eq!(scan.duplicates.multiplicity_histogram, BTreeMap::from([(1, 1), (2, 1)]));
    }

    #[test]
    fn zero_variance_column_is_reported() {
        let m = cols(&[
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, 5.0, 2.0, 8.0],
            vec![3.0, 1.0, 7.0, 2.0],
        ]);
        let scan = find_duplicate_columns(&m, &DupScanConfig::default()).unwrap();
        assert_eq!(scan.degenerate, vec!["c1"]);
        assert_eq!(scan.duplicates.n_distinct, 3);
    }

    #[test]
    fn preconditions() {
        let m = cols(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(find_duplicate_columns(&m, &DupScanConfig::default()).is_err());
        assert!(DupScanConfig::with_threshold(0.0).is_err());
        assert!(DupScanConfig::with_threshold(1.5).is_err());
    }

    #[test]
    fn missing_values_pairwise_or_fail() {
        let m = cols(&[
            vec![1.0, 5.0, f64::NAN, 8.0, 3.0],
            vec![1.0, 5.0, 2.0, 8.0, 3.0],
            vec![3.0, 1.0, 7.0, 2.0, 9.0],
        ]);
        let scan = find_duplicate_columns(&m, &DupScanConfig::default()).unwrap();
        assert_eq!(scan.duplicates.components.len(), 1);
        let fail = DupScanConfig {
            missing_policy: MissingPolicy::Fail,
            ..Default::default()
        };
        assert!(matches!(find_duplicate_columns(&m, &fail), Err(Error::MissingValue(_))));
    }

    fn comp(ids: &[&str]) -> DupComponents {
        DupComponents {
            components: vec![ids.iter().map(|s| s.to_string()).collect()],
            multiplicity_histogram: BTreeMap::new(),
            n_samples: ids.len(),
            n_distinct: 1,
        }
    }

    #[test]
    fn four_copies_labeled_s_r_r_r_are_inconsistent() {
        use GroupLabel::*;
        let labels = BTreeMap::from([
            ("c32".into(), Sensitive),
            ("c66".into(), Resistant),
            ("c89".into(), Resistant),
            ("c117".into(), Resistant),
        ]);
        let out = classify_duplicate_labels(&comp(&["c32", "c66", "c89", "c117"]), &labels).unwrap();
        assert_eq!(out.inconsistent.len(), 1);
        assert_eq!(out.inconsistent[0].labels, vec![Sensitive, Resistant, Resistant, Resistant]);
    }

    #[test]
    fn unknown_does_not_conflict() {
        use GroupLabel::*;
        for pair in [[Resistant, Resistant], [Resistant, Unknown]] {
            let labels = BTreeMap::from([("a".into(), pair[0]), ("b".into(), pair[1])]);
            let out = classify_duplicate_labels(&comp(&["a", "b"]), &labels).unwrap();
            assert_eq!(out.consistent.len(), 1);
        }
        assert!(classify_duplicate_labels(&comp(&["a", "z"]), &BTreeMap::new()).is_err());
    }

    fn roster(rows: &[(&str, GroupLabel)]) -> LabelRoster {
        LabelRoster::new(
            rows.iter()
                .map(|(s, l)| RosterEntry {
                    sample_id: s.to_string(),
                    label: *l,
                    source_id: "x".into(),
                    note: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn consistent_repeat_is_duplicate_only() {
        use GroupLabel::*;
        let r = roster(&[("GSM9653", Resistant), ("GSM9653", Resistant), ("GSM9654", Resistant)]);
        let d = roster_duplicates(&r);
        assert_eq!(d.n_distinct, 2);
        assert_eq!(d.duplicated_ids, vec!["GSM9653"]);
        assert!(d.inconsistent_ids.is_empty());
        let clean = roster_duplicates(&roster(&[("a", Sensitive), ("b", Resistant)]));
        assert_eq!((clean.n_distinct, clean.duplicated_ids.len()), (2, 0));
    }

    #[test]
    fn collapse_marks_conflicts_both() {
        use GroupLabel::*;
        let r = roster(&[("GSM9708", Resistant), ("GSM9708", Sensitive), ("GSM9709", Resistant)]);
        let c = collapse_roster(&r);
        assert_eq!(c["GSM9708"], CrossLabel::Both);
        assert_eq!(c["GSM9709"], CrossLabel::Resistant);
    }

    #[test]
    fn identical_labelings_tabulate_diagonally() {
        let a: BTreeMap<String, CrossLabel> = (0..10)
            .map(|i| {
                let l = if i % 2 == 0 { CrossLabel::Sensitive } else { CrossLabel::Resistant };
                (format!("s{i}"), l)
            })
            .collect();
        let t = cross_tabulate(&a, &a).unwrap();
        assert_eq!(t.counts, vec![vec![5, 0], vec![0, 5]]);
        assert_eq!(t.total, 10);
        let b: BTreeMap<String, CrossLabel> =
            BTreeMap::from([("other".to_string(), CrossLabel::Sensitive)]);
        assert!(cross_tabulate(&a, &b).is_err());
    }

    #[test]
    fn fingerprint_sensitivity() {
        let m = cols(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        assert!(matrices_identical(&m, &m, 2));
        let changed = m.map_values(|r, c, v| if (r, c) == (1, 1) { v + 0.1 } else { v });
        assert!(!matrices_identical(&m, &changed, 2));
        let tiny = m.map_values(|_, _, v| v + 1e-4);
        assert!(matrices_identical(&m, &tiny, 2));
        let neg_zero = cols(&[vec![-0.001, 1.0, 2.0]]);
        let zero = cols(&[vec![0.0, 1.0, 2.0]]);
        assert!(matrices_identical(&neg_zero, &zero, 2));
    }

    #[test]
    fn labeling_flips() {
        use GroupLabel::*;
        let s1 = LabelingSource {
            source_id: "1".into(),
            drug_id: "D".into(),
            labels: BTreeMap::from([("A".into(), Sensitive), ("B".into(), Resistant)]),
        };
        let mut s2 = s1.clone();
        s2.source_id = "2".into();
        s2.labels.insert("B".into(), Sensitive);
        let single = compare_labelings(std::slice::from_ref(&s1)).unwrap();
        assert!(!single[0].flipped);
        let both = compare_labelings(&[s1, s2]).unwrap();
        assert!(both[0].flipped);
        let flipped: Vec<_> = both[0].entities.iter().filter(|e| e.flipped).map(|e| &e.entity).collect();
        assert_eq!(flipped, vec!["B"]);
        assert!(compare_labelings(&[]).is_err());
    }

    #[test]
    fn direction_conflicts() {
        let sig = SignatureList::new(["RRAGD", "SFN", "X"])
            .unwrap()
            .with_directions(vec![
                ("RRAGD".into(), Direction::UpInResistant),
                ("SFN".into(), Direction::UpInSensitive),
                ("RRAGD".into(), Direction::UpInSensitive),
            ])
            .unwrap();
        assert_eq!(check_signature_directions(&sig), vec!["RRAGD"]);
        assert!(check_signature_directions(&SignatureList::new(["A"]).unwrap()).is_empty());
    }
}
