//! Cell-line panel, platform annotation and gene lists for the offset
//! signature, plus the heatmap later reused for another drug.

use std::collections::BTreeMap;

use forensic_core::groupsearch::{Assignment, GeneListGenerator, LineState, TopTGenerator};
use forensic_core::model::{AnnotationIndex, Direction, GroupLabel, LabeledMatrix, SignatureList};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::panels::round4;

pub const PLATFORM: &str = "HG-U133A";
pub const RESISTANT: [&str; 9] = ["257P", "A375", "C8161", "ES2", "me43", "MeWo", "SKMel19", "SNU423", "Sw13"];
pub const SENSITIVE: [&str; 6] = ["BT20", "DV90", "FUOV1", "OAW42", "OVKAR", "R103"];
pub const OTHER: [&str; 15] = [
    "SKMel13", "Skov3", "A2780", "CAOV3", "HT1376", "JIMT1", "KATO3", "LOVO", "MKN45", "H1299", "PA1",
    "SNU1", "SW480", "T24", "U87",
];
/// Reported ids that no shift explains; the last two are not on the platform.
pub const OUTLIERS: [&str; 4] = ["203719_at", "210158_at", "228131_at", "231971_at"];
pub const SIGNATURE_SIZE: usize = 45;
pub const CONFLICTED_GENES: [&str; 3] = ["RRAGD", "SFN", "SLC43A3"];

#[derive(Debug, Clone)]
pub struct Cisplatin {
    pub annotation: AnnotationIndex,
    /// Annotation rows x 30 lines.
    pub panel: LabeledMatrix,
    pub planted: Assignment,
    /// Generator output for the planted lines.
    pub generated: SignatureList,
    /// Published list.
    pub reported: SignatureList,
    /// Generated genes x used lines (Resistant first), as drawn.
    pub heatmap: LabeledMatrix,
}

#[derive(Debug, Clone)]
pub struct Temozolomide {
    /// Heatmap published for the second drug.
    pub heatmap: LabeledMatrix,
    pub signature: SignatureList,
}

fn suffix(n: u32) -> &'static str {
    match n {
        200075 => "_s_at",
        200076 | 203719 | 210158 => "_at",
        n if n % 5 == 0 => "_s_at",
        _ => "_at",
    }
}

/// 21 control probes, then 200000..200399 densely, then a sparse run up
/// to 222000 that includes the two on-platform outliers. Row 97 (1-based)
/// is 200075_s_at and row 98 is 200076_at.
pub fn annotation(seed: u64) -> AnnotationIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<String> = (1..=21).map(|i| format!("AFFX-CTRL{i:02}_at")).collect();
    let mut numbers: Vec<u32> = (200000..200400).collect();
    let mut n = 200400;
    while n < 222000 {
        numbers.push(n);
        n += rng.random_range(15..60);
    }
    for fixed in [203719, 210158] {
        if let Err(pos) = numbers.binary_search(&fixed) {
            numbers.insert(pos, fixed);
        }
    }
    ids.extend(numbers.iter().map(|&n| format!("{n}{}", suffix(n))));
    AnnotationIndex::new(PLATFORM, ids).unwrap()
}

fn line_ids() -> Vec<String> {
    RESISTANT.iter().chain(&SENSITIVE).chain(&OTHER).map(|s| s.to_string()).collect()
}

fn planted_assignment() -> Assignment {
    Assignment::new(
        std::iter::repeat_n(LineState::Resistant, RESISTANT.len())
            .chain(std::iter::repeat_n(LineState::Sensitive, SENSITIVE.len()))
            .chain(std::iter::repeat_n(LineState::Unused, OTHER.len()))
            .collect(),
    )
}

/// Builds the panel so that 200076_at is the strongest gene and the rows
/// right after the on-platform outliers carry no signal.
pub fn cisplatin(seed: u64) -> Cisplatin {
    let annotation = annotation(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let n_rows = annotation.len();
    let strongest = annotation.position("200076_at").unwrap();
    let mut excluded = vec![0usize, strongest];
    for id in &OUTLIERS[..2] {
        let p = annotation.position(id).unwrap();
        excluded.extend([p, p + 1]);
    }
    let mut candidates: Vec<usize> = (1..n_rows).filter(|r| !excluded.contains(r)).collect();
    candidates.shuffle(&mut rng);
    let mut informative: Vec<usize> = candidates[..59].to_vec();
    informative.push(strongest);

    let planted = planted_assignment();
    let noise = Normal::new(0.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..n_rows)
        .map(|r| {
            let base: f64 = rng.random_range(4.0..10.0);
            let effect = if r == strongest {
                6.0
            } else if informative.contains(&r) {
                if rng.random_bool(37.0 / 45.0) { 3.0 } else { -3.0 }
            } else {
                0.0
            };
            planted
                .states()
                .iter()
                .map(|s| {
                    let m = match s {
                        LineState::Resistant => base,
                        LineState::Sensitive => base + effect,
                        LineState::Unused => base + effect / 2.0,
                    };
                    round4(m + noise.sample(&mut rng))
                })
                .collect()
        })
        .collect();
    let panel = LabeledMatrix::from_rows(annotation.feature_ids().to_vec(), line_ids(), &rows).unwrap();

    let used: Vec<usize> = (0..RESISTANT.len() + SENSITIVE.len()).collect();
    let labeled = panel
        .clone()
        .with_labels(Some(planted.to_labels(&panel)))
        .select_columns(&used);
    let generated = TopTGenerator.generate(&labeled, SIGNATURE_SIZE).unwrap();

    // the published list: 41 generated genes named one row too early, the
    // four weakest replaced by the outliers
    let mut reported: Vec<String> = generated.feature_ids()[..SIGNATURE_SIZE - 4]
        .iter()
        .map(|id| {
            let row = annotation.position(id).unwrap();
            assert!(row > 0 && !excluded[2..].contains(&row), "fixture invariant");
            annotation.id_at(row - 1).unwrap().to_string()
        })
        .collect();
    for (slot, id) in [3usize, 11, 20, 38].into_iter().zip(OUTLIERS) {
        reported.insert(slot, id.to_string());
    }
    let heatmap_rows: Vec<usize> = generated
        .feature_ids()
        .iter()
        .map(|id| panel.feature_position(id).unwrap())
        .collect();
    let heatmap = panel.select_rows(&heatmap_rows).select_columns(&used);
    Cisplatin {
        annotation,
        panel,
        planted,
        generated,
        reported: SignatureList::new(reported).unwrap(),
        heatmap,
    }
}

/// Clean counterpart: the published list is exactly the generated one.
pub fn cisplatin_clean(seed: u64) -> Cisplatin {
    let mut c = cisplatin(seed);
    c.reported = c.generated.clone();
    c
}

pub const TMZ_RESISTANT: [&str; 9] = [
    "SF-295", "SF-539", "SNB-19", "U251", "HOP-62", "NCI-H522", "SK-MEL-5", "UACC-257", "ACHN",
];
pub const TMZ_SENSITIVE: [&str; 6] = ["SF-268", "SNB-75", "MALME-3M", "M14", "SK-MEL-2", "UACC-62"];

fn tmz_genes() -> Vec<String> {
    (1..=SIGNATURE_SIZE).map(|i| format!("TMZG{i:02}")).collect()
}

/// 45 probesets over 42 genes: 8 listed as higher in resistant lines and
/// 37 in sensitive lines, with three genes on both lists.
fn tmz_signature(conflicted: bool) -> SignatureList {
    let mut genes: Vec<String> = tmz_genes();
    let mut entries: Vec<(String, Direction)> = Vec::new();
    if conflicted {
        genes.truncate(SIGNATURE_SIZE - 6);
        for g in CONFLICTED_GENES {
            entries.push((g.to_string(), Direction::UpInResistant));
        }
        for (i, g) in genes.iter().enumerate() {
            let d = if i < 5 { Direction::UpInResistant } else { Direction::UpInSensitive };
            entries.push((g.clone(), d));
        }
        for g in CONFLICTED_GENES {
            entries.push((g.to_string(), Direction::UpInSensitive));
        }
    } else {
        for (i, g) in genes.iter().enumerate() {
            let d = if i < 8 { Direction::UpInResistant } else { Direction::UpInSensitive };
            entries.push((g.clone(), d));
        }
    }
    let mut ids: Vec<String> = Vec::new();
    for (id, _) in &entries {
        if !ids.contains(id) {
            ids.push(id.clone());
        }
    }
    SignatureList::new(ids).unwrap().with_directions(entries).unwrap()
}

fn relabel(values: &LabeledMatrix) -> LabeledMatrix {
    let rows: Vec<Vec<f64>> = (0..values.n_features()).map(|r| values.row(r).to_vec()).collect();
    let lines: Vec<String> = TMZ_RESISTANT.iter().chain(&TMZ_SENSITIVE).map(|s| s.to_string()).collect();
    let labels: BTreeMap<String, GroupLabel> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            (l.clone(), if i < TMZ_RESISTANT.len() { GroupLabel::Resistant } else { GroupLabel::Sensitive })
        })
        .collect();
    LabeledMatrix::from_rows(tmz_genes(), lines, &rows)
        .unwrap()
        .with_labels(Some(labels))
}

/// The second drug's published heatmap is the cisplatin heatmap under new
/// row and column names.
pub fn temozolomide(cis: &Cisplatin) -> Temozolomide {
    Temozolomide {
        heatmap: relabel(&cis.heatmap),
        signature: tmz_signature(true),
    }
}

/// Clean counterpart: an independently drawn heatmap and a consistent list.
pub fn temozolomide_clean(seed: u64) -> Temozolomide {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(7.0, 1.5).unwrap();
    let rows: Vec<Vec<f64>> = (0..SIGNATURE_SIZE)
        .map(|_| (0..15).map(|_| round4(noise.sample(&mut rng))).collect())
        .collect();
    let m = LabeledMatrix::from_rows(tmz_genes(), (0..15).map(|i| format!("x{i}")), &rows).unwrap();
    Temozolomide {
        heatmap: relabel(&m),
        signature: tmz_signature(false),
    }
}
