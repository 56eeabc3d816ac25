use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use forensic_core::dupscan::{find_duplicate_columns, DupScanConfig};
use forensic_core::ingest::{parse_matrix, write_matrix, MatrixFormat};
use forensic_core::integrity::{
    combine_probabilities, infer_batches, renormalize, test_confounding, CombinationRule,
};
use forensic_core::matchscan::detect_offset;
use forensic_core::model::{AnnotationIndex, GroupLabel, LabeledMatrix, SampleMeta, SignatureList};
use forensic_core::signature::auc;
use forensic_core::transform::TransformPipeline;
use proptest::prelude::*;

fn matrix_strategy() -> impl Strategy<Value = LabeledMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        (
            prop::collection::vec(
                prop_oneof![
                    8 => -1e6f64..1e6,
                    1 => Just(f64::NAN),
                    1 => any::<i32>().prop_map(|v| v as f64),
                ],
                r * c,
            ),
            prop::collection::vec(
                prop::sample::select(vec![GroupLabel::Sensitive, GroupLabel::Resistant, GroupLabel::Unknown]),
                c,
            ),
        )
            .prop_map(move |(vals, labels)| {
                let rows: Vec<Vec<f64>> = vals.chunks(c).map(|ch| ch.to_vec()).collect();
                let samples: Vec<String> = (0..c).map(|j| format!("S{j}")).collect();
                let map: BTreeMap<String, GroupLabel> = samples.iter().cloned().zip(labels).collect();
                LabeledMatrix::from_rows((0..r).map(|i| format!("g{i}")), samples, &rows)
                    .unwrap()
                    .with_labels(Some(map))
            })
    })
}

fn same_values(a: &LabeledMatrix, b: &LabeledMatrix) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
}

proptest! {
    #[test]
    fn matrix_round_trips(m in matrix_strategy(), csv in any::<bool>()) {
        let fmt = if csv { MatrixFormat::csv() } else { MatrixFormat::tsv() }.with_labels();
        let back = parse_matrix(&write_matrix(&m, &fmt), &fmt).unwrap();
        prop_assert_eq!(back.feature_ids(), m.feature_ids());
        prop_assert_eq!(back.sample_ids(), m.sample_ids());
        prop_assert_eq!(back.labels(), m.labels());
        prop_assert!(same_values(&back, &m));
    }

    #[test]
    fn duplicate_count_ignores_column_order(
        base in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 6), 2..6),
        copies in prop::collection::vec(0usize..6, 0..8),
        seed in any::<u64>(),
    ) {
        let n_base = base.len();
        let mut cols: Vec<Vec<f64>> = base.clone();
        for c in copies {
            cols.push(base[c % n_base].clone());
        }
        let mut order: Vec<usize> = (0..cols.len()).collect();
        let mut s = seed;
        for i in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let build = |idx: &[usize]| {
            let rows: Vec<Vec<f64>> = (0..6).map(|r| idx.iter().map(|&c| cols[c][r]).collect()).collect();
            LabeledMatrix::from_rows((0..6).map(|i| format!("g{i}")), idx.iter().map(|c| format!("c{c}")), &rows).unwrap()
        };
        let ident: Vec<usize> = (0..cols.len()).collect();
        let cfg = DupScanConfig::default();
        let a = find_duplicate_columns(&build(&ident), &cfg).unwrap().duplicates;
        let b = find_duplicate_columns(&build(&order), &cfg).unwrap().duplicates;
        prop_assert_eq!(a.n_distinct, b.n_distinct);
        prop_assert_eq!(a.multiplicity_histogram, b.multiplicity_histogram);
        let mut ca: Vec<Vec<String>> = a.components.iter().map(|c| { let mut c = c.clone(); c.sort(); c }).collect();
        let mut cb: Vec<Vec<String>> = b.components.iter().map(|c| { let mut c = c.clone(); c.sort(); c }).collect();
        ca.sort();
        cb.sort();
        prop_assert_eq!(ca, cb);
    }

    #[test]
    fn offset_is_translation_equivariant(
        k in -3i64..=3,
        picks in prop::collection::btree_set(5usize..195, 5..30),
    ) {
        let ann = AnnotationIndex::new("P", (0..200).map(|i| format!("p{i}")).collect()).unwrap();
        let generated = SignatureList::new(picks.iter().map(|&i| format!("p{i}"))).unwrap();
        let reported = SignatureList::new(picks.iter().map(|&i| format!("p{}", i as i64 - k))).unwrap();
        let rep = detect_offset(&reported, &ann, &generated, 5).unwrap();
        prop_assert_eq!(rep.best_shift, k);
        prop_assert_eq!(rep.overlap_at_best, picks.len());
        prop_assert!(rep.outliers.is_empty());
    }

    #[test]
    fn batches_ignore_input_order(
        hours in prop::collection::vec(0i64..2000, 1..40),
        rot in any::<usize>(),
    ) {
        let metas: Vec<SampleMeta> = hours
            .iter()
            .enumerate()
            .map(|(i, &h)| SampleMeta {
                sample_id: format!("s{i}"),
                run_timestamp: Utc.with_ymd_and_hms(2004, 1, 1, 0, 0, 0).unwrap() + Duration::hours(h),
                scanner_id: "A".into(),
                treatment_arm: "X".into(),
                included: true,
            })
            .collect();
        let mut rotated = metas.clone();
        let shift = rot % metas.len();
        rotated.rotate_left(shift);
        let a = infer_batches(&metas, Duration::days(7)).unwrap();
        let b = infer_batches(&rotated, Duration::days(7)).unwrap();
        let by_id = |ms: &[SampleMeta], bs: &[usize]| -> BTreeMap<String, usize> {
            ms.iter().map(|m| m.sample_id.clone()).zip(bs.iter().copied()).collect()
        };
        prop_assert_eq!(by_id(&metas, &a), by_id(&rotated, &b));
    }

    #[test]
    fn affine_mean_is_clipped_to_unit_interval(f in 0.0f64..=1.0, e in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let inputs: BTreeMap<String, f64> = [("F", f), ("E", e), ("C", c)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let raw = combine_probabilities(&inputs, CombinationRule::AffineMean).unwrap();
        let out = renormalize(&[raw], CombinationRule::AffineMean).unwrap()[0];
        prop_assert!((0.0..=1.0).contains(&out));
    }

    #[test]
    fn max_rule_is_symmetric(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let mk = |e: f64, t: f64| -> BTreeMap<String, f64> {
            [("E".to_string(), e), ("T".to_string(), t)].into_iter().collect()
        };
        prop_assert_eq!(
            combine_probabilities(&mk(x, y), CombinationRule::Max).unwrap(),
            combine_probabilities(&mk(y, x), CombinationRule::Max).unwrap()
        );
    }

    #[test]
    fn sum_minus_product_normalization_is_monotone(raw in prop::collection::vec(0.0f64..4.0, 2..30)) {
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi > lo);
        let out = renormalize(&raw, CombinationRule::SumMinusProduct).unwrap();
        for i in 0..raw.len() {
            if raw[i] == hi { prop_assert_eq!(out[i], 1.0); }
            if raw[i] == lo { prop_assert_eq!(out[i], 0.0); }
            for j in 0..raw.len() {
                if raw[i] < raw[j] { prop_assert!(out[i] <= out[j]); }
            }
        }
    }

    #[test]
    fn perfect_confounding_implies_unit_v(
        arms in prop::collection::vec(0usize..3, 4..60),
        split in any::<bool>(),
    ) {
        // each arm gets its own batch (optionally split into two)
        let treatments: Vec<String> = arms.iter().map(|a| format!("T{a}")).collect();
        let batches: Vec<String> = arms
            .iter()
            .enumerate()
            .map(|(i, a)| format!("B{}", a * 2 + usize::from(split && i % 2 == 0)))
            .collect();
        let distinct = |v: &[String]| v.iter().collect::<std::collections::BTreeSet<_>>().len();
        prop_assume!(distinct(&treatments) >= 2);
        let c = test_confounding(&batches, &treatments, None).unwrap();
        prop_assert!(c.batch.perfect);
        prop_assert!((c.batch.cramers_v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_complement_is_exact(
        scores in prop::collection::vec(-3i32..3, 2..40),
        labels in prop::collection::vec(any::<bool>(), 2..40),
    ) {
        let n = scores.len().min(labels.len());
        let s: Vec<f64> = scores[..n].iter().map(|&v| v as f64).collect();
        let l = &labels[..n];
        prop_assume!(l.iter().any(|&x| x) && l.iter().any(|&x| !x));
        let inv: Vec<bool> = l.iter().map(|x| !x).collect();
        let a = auc(&s, l).unwrap();
        prop_assert_eq!(auc(&s, &inv).unwrap(), 1.0 - a);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn pipeline_strings_round_trip(idx in 0usize..12) {
        let p = TransformPipeline::default_grid()[idx].clone();
        prop_assert_eq!(p.to_string().parse::<TransformPipeline>().unwrap(), p);
    }
}
