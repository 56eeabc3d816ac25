//! Leukemia test set with duplicated samples, and the reversed training
//! labels of the doxorubicin cell-line signature.

use std::collections::BTreeMap;

use forensic_core::integrity::Sentinel;
use forensic_core::model::{GroupLabel, LabelRoster, LabeledMatrix, RosterEntry};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::panels::round4;

/// Copies per distinct profile: 60 once, 14 twice, 6 three times, 4 four times.
pub const MULTIPLICITY_PROFILE: [(usize, usize); 4] = [(1, 60), (2, 14), (3, 6), (4, 4)];

/// 1-based columns of the four copies labeled Sensitive, Resistant,
/// Resistant, Resistant.
pub const PLANTED_COLUMNS: [usize; 4] = [32, 66, 89, 117];

pub const RESISTANT_LINES: [&str; 10] = [
    "SF-539", "SNB-75", "MDA-MB-435", "NCI-H23", "M14", "MALME-3M", "SK-MEL-2", "SK-MEL-28",
    "SK-MEL-5", "UACC-62",
];

pub const SENSITIVE_LINES: [&str; 12] = [
    "NCI/ADR-RES", "HCT-15", "HT29", "EKVX", "NCI-H322M", "IGROV1", "OVCAR-3", "OVCAR-4",
    "OVCAR-5", "OVCAR-8", "SK-OV-3", "CAKI-1",
];

#[derive(Debug, Clone)]
pub struct Doxorubicin {
    /// Genes x test samples, carrying test labels.
    pub test: LabeledMatrix,
    /// Distinct profile index behind each column.
    pub profile_of_column: Vec<usize>,
    /// Training cell-line labels as distributed with the data.
    pub training: LabelRoster,
    pub sentinels: Vec<Sentinel>,
}

pub fn sentinels() -> Vec<Sentinel> {
    vec![Sentinel {
        sample_id: "NCI/ADR-RES".into(),
        expected: GroupLabel::Resistant,
        reason: "named as adriamycin (doxorubicin) resistant".into(),
    }]
}

fn training_roster(reversed: bool) -> LabelRoster {
    let (r, s) = if reversed {
        (GroupLabel::Resistant, GroupLabel::Sensitive)
    } else {
        (GroupLabel::Sensitive, GroupLabel::Resistant)
    };
    let entry = |id: &str, label| RosterEntry {
        sample_id: id.to_string(),
        label,
        source_id: "training".into(),
        note: None,
    };
    LabelRoster::new(
        RESISTANT_LINES
            .iter()
            .map(|id| entry(id, r))
            .chain(SENSITIVE_LINES.iter().map(|id| entry(id, s)))
            .collect(),
    )
    .unwrap()
}

fn profiles(rng: &mut ChaCha8Rng, n_genes: usize, n_profiles: usize) -> Vec<Vec<f64>> {
    let means: Vec<f64> = (0..n_genes).map(|_| rng.random_range(5.0..11.0)).collect();
    let noise = Normal::new(0.0, 1.0).unwrap();
    (0..n_profiles)
        .map(|_| means.iter().map(|m| round4(m + noise.sample(rng))).collect())
        .collect()
}

fn test_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("ALL{i:03}")).collect()
}

fn gene_ids(n: usize) -> Vec<String> {
    (0..n).map(|g| format!("{}_at", 31300 + g)).collect()
}

fn assemble(cols: &[Vec<f64>], labels: &[GroupLabel]) -> LabeledMatrix {
    let n_genes = cols[0].len();
    let rows: Vec<Vec<f64>> = (0..n_genes).map(|g| cols.iter().map(|c| c[g]).collect()).collect();
    let ids = test_ids(cols.len());
    let map: BTreeMap<String, GroupLabel> = ids.iter().cloned().zip(labels.iter().copied()).collect();
    LabeledMatrix::from_rows(gene_ids(n_genes), ids, &rows)
        .unwrap()
        .with_labels(Some(map))
}

/// The corrupted test set: 122 columns, 84 distinct profiles.
///
/// Copies are either exact or re-rounded to 2 decimals (correlation still
/// above 0.9999). Profile 0 fills the planted columns with labels S/R/R/R;
/// one three-copy profile is labeled S/S/R; every other copy shares its
/// profile's label.
pub fn doxorubicin(seed: u64) -> Doxorubicin {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_genes = 250;
    let mut mult: Vec<usize> = Vec::new();
    for &(m, count) in MULTIPLICITY_PROFILE.iter().rev() {
        mult.extend(std::iter::repeat_n(m, count));
    }
    let n_profiles = mult.len();
    let n_cols: usize = mult.iter().sum();
    let base = profiles(&mut rng, n_genes, n_profiles);
    let base_label: Vec<GroupLabel> = (0..n_profiles)
        .map(|_| if rng.random_bool(0.4) { GroupLabel::Sensitive } else { GroupLabel::Resistant })
        .collect();

    let mut profile_of_column = vec![usize::MAX; n_cols];
    for &c in &PLANTED_COLUMNS {
        profile_of_column[c - 1] = 0;
    }
    let mut rest: Vec<usize> = Vec::new();
    for (p, &m) in mult.iter().enumerate().skip(1) {
        rest.extend(std::iter::repeat_n(p, m));
    }
    rest.shuffle(&mut rng);
    let mut it = rest.into_iter();
    for slot in profile_of_column.iter_mut().filter(|p| **p == usize::MAX) {
        *slot = it.next().unwrap();
    }

    // profile 4 is the first three-copy profile (profiles 0..4 have four copies)
    let mixed_triple = 4;
    let mut seen = vec![0usize; n_profiles];
    let mut cols = Vec::with_capacity(n_cols);
    let mut labels = Vec::with_capacity(n_cols);
    for &p in &profile_of_column {
        let copy = seen[p];
        seen[p] += 1;
        let col: Vec<f64> = if copy % 2 == 1 {
            base[p].iter().map(|v| (v * 100.0).round() / 100.0).collect()
        } else {
            base[p].clone()
        };
        cols.push(col);
        labels.push(match (p, copy) {
            (0, 0) => GroupLabel::Sensitive,
            (0, _) => GroupLabel::Resistant,
            (p, 2) if p == mixed_triple => GroupLabel::Resistant,
            (p, _) if p == mixed_triple => GroupLabel::Sensitive,
            _ => base_label[p],
        });
    }
    Doxorubicin {
        test: assemble(&cols, &labels),
        profile_of_column,
        training: training_roster(true),
        sentinels: sentinels(),
    }
}

/// Clean counterpart: 84 distinct test samples and correctly oriented
/// training labels.
pub fn doxorubicin_clean(seed: u64) -> Doxorubicin {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 84;
    let cols = profiles(&mut rng, 250, n);
    let labels: Vec<GroupLabel> = (0..n)
        .map(|_| if rng.random_bool(0.4) { GroupLabel::Sensitive } else { GroupLabel::Resistant })
        .collect();
    Doxorubicin {
        test: assemble(&cols, &labels),
        profile_of_column: (0..n).collect(),
        training: training_roster(false),
        sentinels: sentinels(),
    }
}
