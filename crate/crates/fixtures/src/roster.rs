//! 95-entry response roster with duplicated and conflicting samples, its
//! three-way reference labeling, and LC50 values for the distinct samples.

use forensic_core::model::{GroupLabel, LabelRoster, Measure, RosterEntry, SensitivityRecord};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::panels::round4;

use GroupLabel::{Intermediate as I, Resistant as R, Sensitive as S};

/// First twenty rows, as printed.
pub const FIRST_ROWS: [(&str, GroupLabel); 20] = [
    ("GSM44303", R),
    ("GSM44304", R),
    ("GSM9653", R),
    ("GSM9653", R),
    ("GSM9654", R),
    ("GSM9655", R),
    ("GSM9656", R),
    ("GSM9657", R),
    ("GSM9658", S),
    ("GSM9658", S),
    ("GSM9694", R),
    ("GSM9695", R),
    ("GSM9696", R),
    ("GSM9698", R),
    ("GSM9699", S),
    ("GSM9701", R),
    ("GSM9708", R),
    ("GSM9708", S),
    ("GSM9709", R),
    ("GSM9711", R),
];

/// Joint counts: rows Sensitive, Resistant, Both; columns Sensitive,
/// Intermediate, Resistant.
pub const JOINT_COUNTS: [[usize; 3]; 3] = [[13, 0, 0], [29, 10, 22], [6, 0, 0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Call {
    S,
    R,
    Both,
}

#[derive(Debug, Clone)]
pub struct RosterFixture {
    pub roster: LabelRoster,
    /// One entry per distinct sample, labels Sensitive/Intermediate/Resistant.
    pub reference: LabelRoster,
    /// LC50 on the -log10 molar scale per distinct sample.
    pub lc50: Vec<SensitivityRecord>,
}

fn entry(id: &str, label: GroupLabel, source: &str) -> RosterEntry {
    RosterEntry {
        sample_id: id.to_string(),
        label,
        source_id: source.to_string(),
        note: None,
    }
}

fn lc50(ids_refs: &[(String, GroupLabel)], rng: &mut ChaCha8Rng) -> Vec<SensitivityRecord> {
    let noise = Normal::new(0.0, 0.3).unwrap();
    ids_refs
        .iter()
        .map(|(id, l)| {
            let center = match l {
                S => 6.5,
                I => 5.5,
                _ => 4.5,
            };
            SensitivityRecord {
                cell_line: id.clone(),
                drug_id: "daunorubicin".into(),
                measure: Measure::LC50,
                value: round4(center + noise.sample(rng)),
            }
        })
        .collect()
}

/// 95 entries over 80 distinct samples: 15 listed twice, 6 of them with
/// both labels. The first twenty rows are [`FIRST_ROWS`]; the reference
/// labeling reproduces [`JOINT_COUNTS`].
pub fn adria95(seed: u64) -> RosterFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // distinct ids beyond the first rows: 11 S, 47 R, 5 Both
    let mut extra: Vec<(String, Call)> = Vec::new();
    let mut next = 9712;
    let mut push = |call: Call, n: usize, extra: &mut Vec<(String, Call)>| {
        for _ in 0..n {
            extra.push((format!("GSM{next}"), call));
            next += 1;
        }
    };
    push(Call::S, 11, &mut extra);
    push(Call::R, 47, &mut extra);
    push(Call::Both, 5, &mut extra);
    extra.shuffle(&mut rng);

    // 7 further consistent duplicates (1 S, 6 R) and the 5 conflicting ones
    let mut dup_s = 1;
    let mut dup_r = 6;
    let mut tail: Vec<RosterEntry> = Vec::new();
    for (id, call) in &extra {
        match call {
            Call::S => {
                tail.push(entry(id, S, "potti"));
                if dup_s > 0 {
                    tail.push(entry(id, S, "potti"));
                    dup_s -= 1;
                }
            }
            Call::R => {
                tail.push(entry(id, R, "potti"));
                if dup_r > 0 {
                    tail.push(entry(id, R, "potti"));
                    dup_r -= 1;
                }
            }
            Call::Both => {
                tail.push(entry(id, R, "potti"));
                tail.push(entry(id, S, "potti"));
            }
        }
    }
    tail.shuffle(&mut rng);
    let mut entries: Vec<RosterEntry> = FIRST_ROWS.iter().map(|&(id, l)| entry(id, l, "potti")).collect();
    entries.extend(tail);

    // reference labels: Potti S and Both are all Sensitive; Potti R splits 29/10/22
    let mut distinct: Vec<(String, Call)> = Vec::new();
    for e in &entries {
        let call = match e.label {
            S => Call::S,
            _ => Call::R,
        };
        match distinct.iter_mut().find(|(id, _)| *id == e.sample_id) {
            Some((_, c)) if *c != call => *c = Call::Both,
            Some(_) => {}
            None => distinct.push((e.sample_id.clone(), call)),
        }
    }
    let mut r_ids: Vec<&String> = distinct.iter().filter(|d| d.1 == Call::R).map(|d| &d.0).collect();
    r_ids.shuffle(&mut rng);
    let reference: Vec<(String, GroupLabel)> = distinct
        .iter()
        .map(|(id, call)| {
            let l = match call {
                Call::S | Call::Both => S,
                Call::R => {
                    let pos = r_ids.iter().position(|r| *r == id).unwrap();
                    if pos < 29 {
                        S
                    } else if pos < 39 {
                        I
                    } else {
                        R
                    }
                }
            };
            (id.clone(), l)
        })
        .collect();
    let lc50 = lc50(&reference, &mut rng);
    RosterFixture {
        roster: LabelRoster::new(entries).unwrap(),
        reference: LabelRoster::new(reference.iter().map(|(id, l)| entry(id, *l, "holleman")).collect()).unwrap(),
        lc50,
    }
}

/// Clean counterpart: 80 distinct samples, each listed once, labeled as
/// the reference labeling does (Intermediate samples left out of the
/// roster), and LC50 values that separate the groups.
pub fn adria_clean(seed: u64) -> RosterFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reference: Vec<(String, GroupLabel)> = (0..80)
        .map(|i| {
            let l = match i % 8 {
                0..=3 => S,
                4 => I,
                _ => R,
            };
            (format!("GSM{}", 9800 + i), l)
        })
        .collect();
    let noise = Normal::new(0.0, 0.15).unwrap();
    let lc50 = reference
        .iter()
        .map(|(id, l)| SensitivityRecord {
            cell_line: id.clone(),
            drug_id: "daunorubicin".into(),
            measure: Measure::LC50,
            value: round4(
                match l {
                    S => 6.5,
                    I => 5.5,
                    _ => 4.5,
                } + noise.sample(&mut rng),
            ),
        })
        .collect();
    RosterFixture {
        roster: LabelRoster::new(
            reference
                .iter()
                .filter(|(_, l)| *l != I)
                .map(|(id, l)| entry(id, *l, "potti"))
                .collect(),
        )
        .unwrap(),
        reference: LabelRoster::new(reference.iter().map(|(id, l)| entry(id, *l, "holleman")).collect()).unwrap(),
        lc50,
    }
}
