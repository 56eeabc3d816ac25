use chrono::Duration;
use forensic_core::dupscan::{
    classify_duplicate_labels, collapse_roster, compare_labelings, cross_tabulate, find_duplicate_columns,
    matrices_identical, roster_duplicates, check_signature_directions, CrossLabel, DupScanConfig,
};
use forensic_core::integrity::{
    check_flat_response, check_reversal, detect_blocks, infer_batches, sentinel_check, test_confounding,
    DEFAULT_BLOCK_THRESHOLD, DEFAULT_FLAT_EPSILON, DEFAULT_REVERSAL_MARGIN,
};
use forensic_core::matchscan::{check_platform_membership, detect_offset};
use forensic_core::model::GroupLabel;
use forensic_fixtures::{batches, cisplatin, dose, doxorubicin, labelings, roster};

#[test]
fn doxorubicin_duplicates() {
    let d = doxorubicin::doxorubicin(7);
    let scan = find_duplicate_columns(&d.test, &DupScanConfig::default()).unwrap();
    let dups = &scan.duplicates;
    assert_eq!((dups.n_samples, dups.n_distinct), (122, 84));
    let hist: Vec<(usize, usize)> = dups.multiplicity_histogram.iter().map(|(k, v)| (*k, *v)).collect();
    assert_eq!(hist, doxorubicin::MULTIPLICITY_PROFILE);

    let labels = d.test.labels().unwrap();
    let cons = classify_duplicate_labels(dups, labels).unwrap();
    let planted: Vec<String> = doxorubicin::PLANTED_COLUMNS.iter().map(|c| format!("ALL{c:03}")).collect();
    let hit = cons.inconsistent.iter().find(|c| c.members == planted).expect("planted component");
    use GroupLabel::{Resistant as R, Sensitive as S};
    assert_eq!(hit.labels, vec![S, R, R, R]);
    assert_eq!(cons.inconsistent.len(), 2);

    let clean = doxorubicin::doxorubicin_clean(7);
    let scan = find_duplicate_columns(&clean.test, &DupScanConfig::default()).unwrap();
    assert_eq!(scan.duplicates.n_distinct, 84);
    assert!(scan.duplicates.components.is_empty());
}

#[test]
fn doxorubicin_sentinel() {
    let d = doxorubicin::doxorubicin(7);
    let out = sentinel_check(&d.training.label_map(), &d.sentinels);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].sample_id, "NCI/ADR-RES");
    let clean = doxorubicin::doxorubicin_clean(7);
    assert!(sentinel_check(&clean.training.label_map(), &clean.sentinels).is_empty());
}

#[test]
fn roster_counts_and_joint_table() {
    for seed in [1, 2, 3] {
        let f = roster::adria95(seed);
        let d = roster_duplicates(&f.roster);
        assert_eq!(
            (d.n_entries, d.n_distinct, d.duplicated_ids.len(), d.inconsistent_ids.len()),
            (95, 80, 15, 6)
        );
        let got: Vec<(&str, GroupLabel)> =
            f.roster.entries()[..20].iter().map(|e| (e.sample_id.as_str(), e.label)).collect();
        assert_eq!(got, roster::FIRST_ROWS);

        let t = cross_tabulate(&collapse_roster(&f.roster), &collapse_roster(&f.reference)).unwrap();
        use CrossLabel::*;
        for (i, row) in [Sensitive, Resistant, Both].into_iter().enumerate() {
            for (j, col) in [Sensitive, Intermediate, Resistant].into_iter().enumerate() {
                assert_eq!(t.cell(row, col), roster::JOINT_COUNTS[i][j], "{row:?}/{col:?}");
            }
        }
        assert_eq!(t.total, 80);
        assert_eq!(f.lc50.len(), 80);
    }
    let c = roster::adria_clean(1);
    let d = roster_duplicates(&c.roster);
    assert!(d.duplicated_ids.is_empty());
}

#[test]
fn cisplatin_offset_structure() {
    let c = cisplatin::cisplatin(11);
    assert_eq!(c.annotation.id_at(96), Some("200075_s_at"));
    assert_eq!(c.annotation.id_at(97), Some("200076_at"));
    assert_eq!(c.reported.len(), 45);
    assert_eq!(c.generated.feature_ids()[0], "200076_at");
    let r = detect_offset(&c.reported, &c.annotation, &c.generated, 3).unwrap();
    assert_eq!(r.best_shift, 1);
    assert_eq!(r.overlap_at_best, 41);
    let mut outliers = r.outliers.clone();
    outliers.sort();
    assert_eq!(outliers, cisplatin::OUTLIERS);
    let absent = check_platform_membership(&c.reported, &c.annotation);
    assert_eq!(absent, ["228131_at", "231971_at"]);
    assert_eq!(c.heatmap.n_features(), 45);
    assert_eq!(c.heatmap.n_samples(), 15);

    let clean = cisplatin::cisplatin_clean(11);
    let r = detect_offset(&clean.reported, &clean.annotation, &clean.generated, 3).unwrap();
    assert_eq!((r.best_shift, r.overlap_at_best), (0, 45));
}

#[test]
fn temozolomide_reuse_and_directions() {
    let c = cisplatin::cisplatin(11);
    let t = cisplatin::temozolomide(&c);
    assert!(matrices_identical(&c.heatmap, &t.heatmap, 4));
    assert_eq!(t.signature.len(), 42);
    assert_eq!(check_signature_directions(&t.signature), cisplatin::CONFLICTED_GENES);

    let tc = cisplatin::temozolomide_clean(5);
    assert!(!matrices_identical(&c.heatmap, &tc.heatmap, 2));
    assert!(check_signature_directions(&tc.signature).is_empty());
}

#[test]
fn dose_fixtures() {
    let pem = dose::pemetrexed(3, true);
    let labels = pem.labels.label_map();
    assert!(check_reversal(&pem.records, &labels, DEFAULT_REVERSAL_MARGIN).unwrap().reversed());
    let fixed = dose::pemetrexed(3, false);
    assert!(!check_reversal(&fixed.records, &fixed.labels.label_map(), DEFAULT_REVERSAL_MARGIN)
        .unwrap()
        .reversed());
    let cyc = dose::cyclophosphamide(3);
    assert!(check_flat_response(&cyc.records, DEFAULT_FLAT_EPSILON).unwrap().flat);
    assert!(!check_flat_response(&pem.records, DEFAULT_FLAT_EPSILON).unwrap().flat);
}

fn included_columns(t: &batches::TrialFixture) -> (Vec<String>, Vec<String>, Vec<String>) {
    let batch = infer_batches(&t.meta, Duration::days(7)).unwrap();
    let mut b = Vec::new();
    let mut arm = Vec::new();
    let mut scanner = Vec::new();
    for (m, n) in t.meta.iter().zip(batch) {
        if m.included {
            b.push(n.to_string());
            arm.push(m.treatment_arm.clone());
            scanner.push(m.scanner_id.clone());
        }
    }
    (b, arm, scanner)
}

#[test]
fn trial_confounding() {
    let t = batches::fec_tet(4);
    let batch = infer_batches(&t.meta, Duration::days(7)).unwrap();
    assert_eq!(batch.iter().max(), Some(&3));
    assert_eq!(t.meta.iter().filter(|m| m.included).count(), 125);
    let (b, arm, scanner) = included_columns(&t);
    let c = test_confounding(&b, &arm, Some(&scanner)).unwrap();
    assert!(c.batch.perfect);
    assert_eq!(c.batch.cramers_v, 1.0);
    assert!(c.scanner.unwrap().perfect);
    let blocks = detect_blocks(&t.expression, DEFAULT_BLOCK_THRESHOLD).unwrap();
    assert_eq!(blocks.multi_member(), 3);

    let bal = batches::balanced(4, 200);
    let (b, arm, scanner) = included_columns(&bal);
    assert_eq!(b.len(), 200);
    let c = test_confounding(&b, &arm, Some(&scanner)).unwrap();
    assert!(!c.batch.perfect);
    assert!(c.batch.cramers_v < 0.15);
    let blocks = detect_blocks(&bal.expression, DEFAULT_BLOCK_THRESHOLD).unwrap();
    assert_eq!(blocks.multi_member(), 0);
}

#[test]
fn survey_flips() {
    let s = labelings::survey(9, true);
    let mut multi = 0;
    for (drug, r) in &s {
        let flips = compare_labelings(&labelings::sources_of(drug, r)).unwrap();
        assert_eq!(flips.len(), 1);
        let n = labelings::n_sources(drug);
        assert_eq!(flips[0].sources.len(), n, "{drug}");
        assert_eq!(flips[0].flipped, n > 1, "{drug}");
        multi += usize::from(n > 1);
    }
    assert_eq!(multi, 7);
    assert_eq!(labelings::n_sources("D"), 8);
    for (drug, r) in &labelings::survey(9, false) {
        let flips = compare_labelings(&labelings::sources_of(drug, r)).unwrap();
        assert!(!flips[0].flipped, "{drug}");
    }
}
