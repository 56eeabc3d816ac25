//! One function per manifest detector, each turning core results into
//! findings.

use std::collections::BTreeMap;

use chrono::Duration;
use forensic_core::dupscan::{
    check_signature_directions, classify_duplicate_labels, collapse_roster, compare_labelings,
    find_duplicate_columns, matrices_identical, roster_duplicates, CrossLabel, DupScanConfig, LabelingSource,
};
use forensic_core::ingest::LabelSynonyms;
use forensic_core::integrity::{
    check_flat_response, check_reversal, check_separation, detect_blocks, infer_batches, sentinel_check,
    test_confounding, Association, Orientation, Sentinel, SentinelStatus, DEFAULT_BLOCK_THRESHOLD,
    DEFAULT_FLAT_EPSILON, DEFAULT_REVERSAL_MARGIN,
};
use forensic_core::matchscan::{check_platform_membership, detect_offset};
use forensic_core::model::{GroupLabel, LabelRoster, Measure, SensitivityRecord};
use forensic_core::{Finding, FindingCode, Severity};

use crate::inputs::Inputs;
use crate::manifest::{CheckSpec, SentinelSpec};

pub const DEFAULT_MAX_SHIFT: u32 = 3;
pub const DEFAULT_GAP_DAYS: f64 = 7.0;
pub const DEFAULT_REUSE_DIGITS: u32 = 2;
/// Cramér's V at or above which a non-perfect association is reported.
pub const HIGH_ASSOCIATION: f64 = 0.5;

type Outcome = std::result::Result<Vec<Finding>, String>;

fn core<T>(r: forensic_core::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Runs one check. Failures become a single DEGENERATE_DATA finding naming
/// the inputs involved.
pub fn run_check(check: &CheckSpec, label: &str, inputs: &Inputs) -> Vec<Finding> {
    let out = match check {
        CheckSpec::DupColumns { matrix, threshold } => dup_columns(label, inputs, matrix, *threshold),
        CheckSpec::Roster { roster } => roster_check(label, inputs, roster),
        CheckSpec::Offset { reported, generated, annotation, max_shift } => {
            offset(label, inputs, reported, generated, annotation, max_shift.unwrap_or(DEFAULT_MAX_SHIFT))
        }
        CheckSpec::Sentinel { labels, sentinels } => sentinel(label, inputs, labels, sentinels),
        CheckSpec::Dose { records, labels, drug, measure, margin } => dose(
            label,
            inputs,
            records,
            labels,
            drug.as_deref(),
            measure.as_deref(),
            margin.unwrap_or(DEFAULT_REVERSAL_MARGIN),
        ),
        CheckSpec::FlatResponse { records, drug, measure, epsilon } => flat_response(
            label,
            inputs,
            records,
            drug.as_deref(),
            measure.as_deref(),
            epsilon.unwrap_or(DEFAULT_FLAT_EPSILON),
        ),
        CheckSpec::Confound { meta, gap_days } => confound(label, inputs, meta, gap_days.unwrap_or(DEFAULT_GAP_DAYS)),
        CheckSpec::Blocks { matrix, threshold } => {
            blocks(label, inputs, matrix, threshold.unwrap_or(DEFAULT_BLOCK_THRESHOLD))
        }
        CheckSpec::Reuse { a, b, digits } => reuse(label, inputs, a, b, digits.unwrap_or(DEFAULT_REUSE_DIGITS)),
        CheckSpec::Directions { signature } => directions(label, inputs, signature),
        CheckSpec::LabelingFlip { drugs } => labeling_flip(label, inputs, drugs),
    };
    out.unwrap_or_else(|e| {
        let subjects: Vec<&str> = check.references().into_iter().map(|r| r.0).collect();
        vec![Finding::new(FindingCode::DegenerateData, Severity::Warning, label, e).subjects(subjects)]
    })
}

fn dup_columns(label: &str, inputs: &Inputs, matrix: &str, threshold: Option<f64>) -> Outcome {
    let m = inputs.matrix(matrix)?;
    let mut cfg = DupScanConfig::default();
    if let Some(t) = threshold {
        cfg.corr_threshold = t;
    }
    let scan = core(find_duplicate_columns(m, &cfg))?;
    let d = &scan.duplicates;
    let mut out = Vec::new();
    if !d.components.is_empty() {
        let mut f = Finding::new(
            FindingCode::DupColumns,
            Severity::Warning,
            label,
            format!(
                "{}: {} distinct of {} samples; {} groups of duplicated columns",
                matrix,
                d.n_distinct,
                d.n_samples,
                d.components.len()
            ),
        )
        .subjects(d.components.iter().flatten().cloned())
        .metric("n_samples", d.n_samples)
        .metric("n_distinct", d.n_distinct)
        .metric("n_groups", d.components.len());
        for (mult, count) in &d.multiplicity_histogram {
            f = f.metric(&format!("multiplicity_{mult}"), *count);
        }
        out.push(f);
        if let Some(labels) = m.labels() {
            let cons = core(classify_duplicate_labels(d, labels))?;
            for c in cons.inconsistent {
                let shown: Vec<&str> = c.labels.iter().map(|l| l.as_str()).collect();
                out.push(
                    Finding::new(
                        FindingCode::DupInconsistentLabels,
                        Severity::Critical,
                        label,
                        format!("{} share one profile but are labeled {}", c.members.join(", "), shown.join(", ")),
                    )
                    .metric("size", c.members.len())
                    .subjects(c.members),
                );
            }
        }
    }
    if !scan.degenerate.is_empty() {
        out.push(
            Finding::new(
                FindingCode::DegenerateData,
                Severity::Info,
                label,
                format!("{} constant or incomplete columns skipped", scan.degenerate.len()),
            )
            .subjects(scan.degenerate.iter().cloned()),
        );
    }
    Ok(out)
}

fn roster_check(label: &str, inputs: &Inputs, name: &str) -> Outcome {
    let r = inputs.roster(name)?;
    let d = roster_duplicates(r);
    let mut out = Vec::new();
    if !d.duplicated_ids.is_empty() {
        out.push(
            Finding::new(
                FindingCode::RosterDup,
                Severity::Warning,
                label,
                format!(
                    "{name}: {} entries name {} distinct samples; {} listed more than once",
                    d.n_entries,
                    d.n_distinct,
                    d.duplicated_ids.len()
                ),
            )
            .subjects(d.duplicated_ids.iter().cloned())
            .metric("n_entries", d.n_entries)
            .metric("n_distinct", d.n_distinct)
            .metric("n_duplicated", d.duplicated_ids.len()),
        );
    }
    if !d.inconsistent_ids.is_empty() {
        out.push(
            Finding::new(
                FindingCode::RosterConflict,
                Severity::Critical,
                label,
                format!("{name}: {} samples carry conflicting labels", d.inconsistent_ids.len()),
            )
            .metric("n_conflicting", d.inconsistent_ids.len())
            .subjects(d.inconsistent_ids),
        );
    }
    Ok(out)
}

fn offset(
    label: &str,
    inputs: &Inputs,
    reported: &str,
    generated: &str,
    annotation: &str,
    max_shift: u32,
) -> Outcome {
    let rep = inputs.signature(reported)?;
    let gen = inputs.signature(generated)?;
    let ann = inputs.annotation(annotation)?;
    let r = core(detect_offset(rep, ann, gen, max_shift))?;
    let mut out = Vec::new();
    let at_zero = r.overlap_by_shift.get(&0).copied().unwrap_or(0);
    if r.best_shift != 0 && r.overlap_at_best > at_zero {
        out.push(
            Finding::new(
                FindingCode::OffsetDetected,
                Severity::Critical,
                label,
                format!(
                    "{reported} matches {generated} in {} of {} ids after shifting {} row(s) on {}, {} without the shift",
                    r.overlap_at_best,
                    r.n_reported,
                    r.best_shift,
                    ann.platform_id(),
                    at_zero
                ),
            )
            .metric("shift", r.best_shift)
            .metric("overlap_at_shift", r.overlap_at_best)
            .metric("overlap_unshifted", at_zero)
            .metric("n_reported", r.n_reported)
            .metric("n_outliers", r.outliers.len())
            .subjects(r.outliers),
        );
    }
    let absent = check_platform_membership(rep, ann);
    if !absent.is_empty() {
        out.push(
            Finding::new(
                FindingCode::PlatformMismatch,
                Severity::Warning,
                label,
                format!("{} ids in {reported} are not on {}", absent.len(), ann.platform_id()),
            )
            .metric("n_absent", absent.len())
            .subjects(absent),
        );
    }
    Ok(out)
}

fn sentinel(label: &str, inputs: &Inputs, labels: &str, specs: &[SentinelSpec]) -> Outcome {
    let roster = inputs.roster(labels)?;
    let syn = LabelSynonyms::default();
    let sentinels = specs
        .iter()
        .map(|s| {
            syn.normalize(&s.expected)
                .map(|expected| Sentinel {
                    sample_id: s.sample_id.clone(),
                    expected,
                    reason: s.reason.clone(),
                })
                .ok_or_else(|| format!("sentinel {}: unknown label {:?}", s.sample_id, s.expected))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(sentinel_check(&roster.label_map(), &sentinels)
        .into_iter()
        .map(|o| {
            let (sev, msg) = match (o.status, o.observed) {
                (SentinelStatus::Conflict, Some(obs)) => (
                    Severity::Critical,
                    format!(
                        "{} is labeled {} but should be {} ({})",
                        o.sample_id,
                        obs.as_str(),
                        o.expected.as_str(),
                        o.reason
                    ),
                ),
                _ => (Severity::Info, format!("sentinel {} is not in {labels}", o.sample_id)),
            };
            Finding::new(FindingCode::SentinelViolation, sev, label, msg).subjects([o.sample_id])
        })
        .collect())
}

fn select_records(
    records: &[SensitivityRecord],
    drug: Option<&str>,
    measure: Option<&str>,
) -> std::result::Result<Vec<SensitivityRecord>, String> {
    let measure: Option<Measure> = measure.map(str::parse).transpose().map_err(|e: forensic_core::Error| e.to_string())?;
    let picked: Vec<SensitivityRecord> = records
        .iter()
        .filter(|r| drug.is_none_or(|d| r.drug_id == d) && measure.is_none_or(|m| r.measure == m))
        .cloned()
        .collect();
    if picked.is_empty() {
        return Err("no sensitivity records for the requested drug and measure".into());
    }
    Ok(picked)
}

/// Sensitive/Resistant labels from a roster; samples listed with both are
/// left out.
fn response_labels(r: &LabelRoster) -> BTreeMap<String, GroupLabel> {
    collapse_roster(r)
        .into_iter()
        .filter_map(|(id, l)| match l {
            CrossLabel::Sensitive => Some((id, GroupLabel::Sensitive)),
            CrossLabel::Resistant => Some((id, GroupLabel::Resistant)),
            _ => None,
        })
        .collect()
}

fn dose(
    label: &str,
    inputs: &Inputs,
    records: &str,
    labels: &str,
    drug: Option<&str>,
    measure: Option<&str>,
    margin: f64,
) -> Outcome {
    let recs = select_records(inputs.sensitivity(records)?, drug, measure)?;
    let labels_map = response_labels(inputs.roster(labels)?);
    let what = drug.unwrap_or(records);
    let mut out = Vec::new();
    let rev = core(check_reversal(&recs, &labels_map, margin))?;
    if rev.reversed() {
        out.push(
            Finding::new(
                FindingCode::LabelReversal,
                Severity::Critical,
                label,
                format!(
                    "{what}: lines labeled Sensitive respond less than lines labeled Resistant (AUC {:.3})",
                    rev.auc
                ),
            )
            .subjects([labels])
            .metric("auc", rev.auc)
            .metric("margin", margin),
        );
    }
    let sep = core(check_separation(&recs, &labels_map, Orientation::Auto))?;
    if sep.overlap {
        out.push(
            Finding::new(
                FindingCode::SeparationOverlap,
                Severity::Warning,
                label,
                format!(
                    "{what}: no single cutoff separates the groups; the best still misplaces {} of {} lines",
                    sep.misfit_count,
                    sep.n_sensitive + sep.n_resistant
                ),
            )
            .subjects([labels])
            .metric("misfits", sep.misfit_count)
            .metric("threshold", sep.best_threshold)
            .metric("n_sensitive", sep.n_sensitive)
            .metric("n_resistant", sep.n_resistant),
        );
    }
    Ok(out)
}

fn flat_response(
    label: &str,
    inputs: &Inputs,
    records: &str,
    drug: Option<&str>,
    measure: Option<&str>,
    epsilon: f64,
) -> Outcome {
    let recs = select_records(inputs.sensitivity(records)?, drug, measure)?;
    let f = core(check_flat_response(&recs, epsilon))?;
    if !f.flat {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        FindingCode::FlatResponse,
        Severity::Warning,
        label,
        format!(
            "{}: potency varies by {:.3} (interquartile range {:.3}) across {} lines",
            drug.unwrap_or(records),
            f.range,
            f.iqr,
            f.n
        ),
    )
    .subjects([records])
    .metric("range", f.range)
    .metric("iqr", f.iqr)
    .metric("n", f.n)
    .metric("epsilon", epsilon)])
}

fn association_finding(label: &str, what: &str, a: &Association, subjects: Vec<String>) -> Option<Finding> {
    let (code, sev) = if a.perfect {
        (FindingCode::ConfoundPerfect, Severity::Critical)
    } else if a.cramers_v >= HIGH_ASSOCIATION {
        (FindingCode::ConfoundHigh, Severity::Warning)
    } else {
        return None;
    };
    let msg = if a.perfect {
        format!("treatment arm is fully determined by {what}")
    } else {
        format!("treatment arm is strongly associated with {what} (V = {:.3})", a.cramers_v)
    };
    Some(
        Finding::new(code, sev, label, msg)
            .subjects(subjects)
            .metric("cramers_v", a.cramers_v)
            .metric("chi_square", a.table.chi_square())
            .metric("n_levels", a.table.row_levels.len())
            .metric("n_samples", a.table.total()),
    )
}

fn confound(label: &str, inputs: &Inputs, meta: &str, gap_days: f64) -> Outcome {
    let metas = inputs.meta(meta)?;
    if gap_days.is_nan() || gap_days <= 0.0 {
        return Err(format!("gap_days must be positive, got {gap_days}"));
    }
    let gap = Duration::seconds((gap_days * 86_400.0).round() as i64);
    let batch = core(infer_batches(metas, gap))?;
    let mut b = Vec::new();
    let mut arm = Vec::new();
    let mut scanner = Vec::new();
    for (m, n) in metas.iter().zip(&batch) {
        if m.included {
            b.push(format!("batch{n}"));
            arm.push(m.treatment_arm.clone());
            scanner.push(m.scanner_id.clone());
        }
    }
    let several = |v: &[String]| v.iter().any(|x| *x != v[0]);
    if b.is_empty() {
        return Err(format!("{meta}: no included samples"));
    }
    let scanners = several(&scanner).then_some(scanner.as_slice());
    let c = core(test_confounding(&b, &arm, scanners))?;
    let mut arms = arm.clone();
    arms.sort();
    arms.dedup();
    let n_batches = b.iter().collect::<std::collections::BTreeSet<_>>().len();
    let mut out = Vec::new();
    if let Some(f) = association_finding(label, &format!("run batch ({n_batches} batches)"), &c.batch, arms.clone()) {
        out.push(f.metric("n_batches", n_batches));
    }
    if let Some(s) = &c.scanner {
        out.extend(association_finding(label, "scanner", s, arms));
    }
    Ok(out)
}

fn blocks(label: &str, inputs: &Inputs, matrix: &str, threshold: f64) -> Outcome {
    let m = inputs.matrix(matrix)?;
    let b = core(detect_blocks(m, threshold))?;
    let n = b.multi_member();
    if n < 2 {
        return Ok(Vec::new());
    }
    let sizes: Vec<String> = b.sizes.iter().filter(|&&s| s > 1).map(|s| s.to_string()).collect();
    Ok(vec![Finding::new(
        FindingCode::BlockStructure,
        Severity::Warning,
        label,
        format!("{matrix}: samples fall into {n} highly correlated blocks of sizes {}", sizes.join(", ")),
    )
    .subjects([matrix])
    .metric("n_blocks", n)
    .metric("threshold", threshold)])
}

fn reuse(label: &str, inputs: &Inputs, a: &str, b: &str, digits: u32) -> Outcome {
    let ma = inputs.matrix(a)?;
    let mb = inputs.matrix(b)?;
    if !matrices_identical(ma, mb, digits) {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        FindingCode::ReusedArtifact,
        Severity::Critical,
        label,
        format!(
            "{a} and {b} hold the same {}x{} values to {digits} decimals under different names",
            ma.n_features(),
            ma.n_samples()
        ),
    )
    .subjects([a, b])
    .metric("digits", digits as usize)
    .metric("n_features", ma.n_features())
    .metric("n_samples", ma.n_samples())])
}

fn directions(label: &str, inputs: &Inputs, signature: &str) -> Outcome {
    let sig = inputs.signature(signature)?;
    let genes = check_signature_directions(sig);
    if genes.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![Finding::new(
        FindingCode::DirectionConflict,
        Severity::Warning,
        label,
        format!("{signature}: {} listed as higher in both groups", genes.join(", ")),
    )
    .metric("n_genes", genes.len())
    .subjects(genes)])
}

/// One labeling per source named in the roster's source column.
pub fn sources_of(drug: &str, roster: &LabelRoster) -> Vec<LabelingSource> {
    let mut by_source: BTreeMap<&str, BTreeMap<String, GroupLabel>> = BTreeMap::new();
    for e in roster.entries() {
        by_source
            .entry(e.source_id.as_str())
            .or_default()
            .insert(e.sample_id.clone(), e.label);
    }
    by_source
        .into_iter()
        .map(|(s, labels)| LabelingSource {
            source_id: s.to_string(),
            drug_id: drug.to_string(),
            labels,
        })
        .collect()
}

fn labeling_flip(label: &str, inputs: &Inputs, drugs: &BTreeMap<String, String>) -> Outcome {
    let mut sources = Vec::new();
    for (drug, roster) in drugs {
        sources.extend(sources_of(drug, inputs.roster(roster)?));
    }
    let flips = core(compare_labelings(&sources))?;
    Ok(flips
        .into_iter()
        .filter(|d| d.flipped)
        .map(|d| {
            let flipped: Vec<String> = d.entities.iter().filter(|e| e.flipped).map(|e| e.entity.clone()).collect();
            Finding::new(
                FindingCode::LabelingFlip,
                Severity::Warning,
                label,
                format!(
                    "{}: {} of {} lines are called Sensitive by one source and Resistant by another ({} sources)",
                    d.drug_id,
                    flipped.len(),
                    d.entities.len(),
                    d.sources.len()
                ),
            )
            .metric("n_sources", d.sources.len())
            .metric("n_lines", d.entities.len())
            .metric("n_flipped", flipped.len())
            .subjects(std::iter::once(drugs[&d.drug_id].clone()).chain(flipped))
        })
        .collect())
}
