//! Sensitive/resistant labelings of NCI-60 lines for ten drugs as given by
//! twelve sources.

use std::collections::BTreeMap;

use forensic_core::dupscan::LabelingSource;
use forensic_core::model::{GroupLabel, LabelRoster, RosterEntry};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dose::NCI60;

pub const DRUGS: [&str; 10] = ["D", "P", "A", "F", "T", "E", "C", "Pem", "Cis", "Tem"];

/// Drugs covered by each of the twelve sources. Cisplatin and
/// temozolomide name no NCI-60 lines.
pub const COVERAGE: [&[&str]; 12] = [
    &["D", "P", "A", "F", "T", "E"],
    &["Pem"],
    &["D", "P", "A", "F", "T", "E", "C"],
    &["D"],
    &["A"],
    &["D", "P", "A", "F", "T", "E", "C"],
    &["D", "A", "F", "C"],
    &["P", "A", "F", "C"],
    &["D", "P", "A", "F", "T", "E", "C"],
    &["D", "A", "F", "C"],
    &["D", "P", "A", "F", "T", "E", "C"],
    &[],
];

pub fn source_id(i: usize) -> String {
    format!("S{:02}", i + 1)
}

/// Number of sources covering `drug`.
pub fn n_sources(drug: &str) -> usize {
    COVERAGE.iter().filter(|c| c.contains(&drug)).count()
}

/// One roster per drug with lines; each entry's source column names the
/// source. With `flips`, every drug covered by more than one source has
/// at least one source that reverses some of the labels.
pub fn survey(seed: u64, flips: bool) -> BTreeMap<String, LabelRoster> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for drug in DRUGS {
        let sources: Vec<usize> = (0..COVERAGE.len()).filter(|&s| COVERAGE[s].contains(&drug)).collect();
        if sources.is_empty() {
            continue;
        }
        let lines: Vec<&str> = NCI60.choose_multiple(&mut rng, 14).copied().collect();
        let base: Vec<GroupLabel> = (0..lines.len())
            .map(|i| if i % 2 == 0 { GroupLabel::Sensitive } else { GroupLabel::Resistant })
            .collect();
        let forced = if flips && sources.len() > 1 { rng.random_range(1..sources.len()) } else { usize::MAX };
        let mut entries = Vec::new();
        for (k, &s) in sources.iter().enumerate() {
            let reverse_all = flips && k > 0 && k != forced && rng.random_bool(0.3);
            let mut swapped: Vec<usize> = Vec::new();
            if k == forced {
                swapped = (0..lines.len()).collect::<Vec<_>>();
                swapped.shuffle(&mut rng);
                swapped.truncate(2);
            }
            for (i, line) in lines.iter().enumerate() {
                if k > 0 && k != forced && rng.random_bool(0.15) {
                    continue;
                }
                let flip = reverse_all || swapped.contains(&i);
                let label = match (base[i], flip) {
                    (GroupLabel::Sensitive, true) => GroupLabel::Resistant,
                    (GroupLabel::Resistant, true) => GroupLabel::Sensitive,
                    (l, _) => l,
                };
                entries.push(RosterEntry {
                    sample_id: line.to_string(),
                    label,
                    source_id: source_id(s),
                    note: None,
                });
            }
        }
        out.insert(drug.to_string(), LabelRoster::new(entries).unwrap());
    }
    out
}

/// Splits a per-drug roster into one labeling per source.
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
