//! Panel-wide growth-inhibition data: a drug whose labels are reversed
//! relative to potency, and a prodrug with no differential activity.

use forensic_core::model::{GroupLabel, LabelRoster, Measure, RosterEntry, SensitivityRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::panels::round4;

pub const NCI60: [&str; 60] = [
    "CCRF-CEM", "HL-60(TB)", "K-562", "MOLT-4", "RPMI-8226", "SR", "A549/ATCC", "EKVX", "HOP-62",
    "HOP-92", "NCI-H226", "NCI-H23", "NCI-H322M", "NCI-H460", "NCI-H522", "COLO 205", "HCC-2998",
    "HCT-116", "HCT-15", "HT29", "KM12", "SW-620", "SF-268", "SF-295", "SF-539", "SNB-19", "SNB-75",
    "U251", "LOX IMVI", "MALME-3M", "M14", "MDA-MB-435", "SK-MEL-2", "SK-MEL-28", "SK-MEL-5",
    "UACC-257", "UACC-62", "IGROV1", "OVCAR-3", "OVCAR-4", "OVCAR-5", "OVCAR-8", "NCI/ADR-RES",
    "SK-OV-3", "786-0", "A498", "ACHN", "CAKI-1", "RXF 393", "SN12C", "TK-10", "UO-31", "PC-3",
    "DU-145", "MCF7", "MDA-MB-231/ATCC", "HS 578T", "BT-549", "T-47D", "MDA-MB-468",
];

/// Lines labeled Resistant in the published signature.
pub const PEM_RESISTANT: [&str; 8] = [
    "K-562", "MOLT-4", "HL-60(TB)", "MCF7", "HCC-2998", "HCT-116", "NCI-H460", "TK-10",
];
/// Lines labeled Sensitive in the published signature.
pub const PEM_SENSITIVE: [&str; 10] = [
    "SNB-19", "HS 578T", "MDA-MB-231/ATCC", "MDA-MB-435", "NCI-H226", "M14", "MALME-3M", "SK-MEL-2",
    "SK-MEL-28", "SN12C",
];

#[derive(Debug, Clone)]
pub struct DoseFixture {
    pub records: Vec<SensitivityRecord>,
    /// Labels attached to the signature's lines.
    pub labels: LabelRoster,
    pub drug: String,
    pub measure: Measure,
}

/// Published labels, or the potency-consistent correction of them.
fn roster(corrected: bool) -> LabelRoster {
    let (r, s) = if corrected {
        (GroupLabel::Sensitive, GroupLabel::Resistant)
    } else {
        (GroupLabel::Resistant, GroupLabel::Sensitive)
    };
    let e = |id: &str, label| RosterEntry {
        sample_id: id.to_string(),
        label,
        source_id: "signature".into(),
        note: None,
    };
    LabelRoster::new(
        PEM_RESISTANT
            .iter()
            .map(|id| e(id, r))
            .chain(PEM_SENSITIVE.iter().map(|id| e(id, s)))
            .collect(),
    )
    .unwrap()
}

/// -log10 GI50 over the 60 lines, bimodal with modes 2.0 apart: the lines
/// labeled Resistant sit in the potent mode and the lines labeled
/// Sensitive in the weak one. `reversed = false` gives the corrected labels.
pub fn pemetrexed(seed: u64, reversed: bool) -> DoseFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.25).unwrap();
    let records = NCI60
        .iter()
        .enumerate()
        .map(|(i, &line)| {
            let potent = PEM_RESISTANT.contains(&line) || (!PEM_SENSITIVE.contains(&line) && i % 2 == 0);
            SensitivityRecord {
                cell_line: line.to_string(),
                drug_id: "pemetrexed".into(),
                measure: Measure::GI50,
                value: round4(if potent { 7.5 } else { 5.5 } + noise.sample(&mut rng)),
            }
        })
        .collect();
    DoseFixture {
        records,
        labels: roster(!reversed),
        drug: "pemetrexed".into(),
        measure: Measure::GI50,
    }
}

/// A prodrug: every line within 0.05 of the same -log10 GI50. The lines
/// named for it are the pemetrexed lines.
pub fn cyclophosphamide(seed: u64) -> DoseFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = NCI60
        .iter()
        .map(|&line| SensitivityRecord {
            cell_line: line.to_string(),
            drug_id: "cyclophosphamide".into(),
            measure: Measure::GI50,
            value: round4(3.6 + rand::Rng::random_range(&mut rng, -0.05..=0.05)),
        })
        .collect();
    DoseFixture {
        records,
        labels: roster(true),
        drug: "cyclophosphamide".into(),
        measure: Measure::GI50,
    }
}
