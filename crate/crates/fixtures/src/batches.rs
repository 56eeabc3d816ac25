//! Array run metadata and expression for a two-arm trial, confounded and
//! balanced.

use chrono::{DateTime, Duration, TimeZone, Utc};
use forensic_core::model::{LabeledMatrix, SampleMeta};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::panels::round4;

#[derive(Debug, Clone)]
pub struct TrialFixture {
    pub meta: Vec<SampleMeta>,
    /// Genes x arrays, in metadata order.
    pub expression: LabeledMatrix,
}

fn run_times(rng: &mut ChaCha8Rng, start: DateTime<Utc>, n: usize) -> Vec<DateTime<Utc>> {
    let mut t = start;
    (0..n)
        .map(|_| {
            t += Duration::minutes(rng.random_range(60..36 * 60));
            t
        })
        .collect()
}

fn meta(id: String, t: DateTime<Utc>, scanner: &str, arm: &str, included: bool) -> SampleMeta {
    SampleMeta {
        sample_id: id,
        run_timestamp: t,
        scanner_id: scanner.into(),
        treatment_arm: arm.into(),
        included,
    }
}

/// Expression with one latent profile per block (or none when `blocks`
/// is empty): within-block correlation about 0.9, between blocks about 0.
fn expression(rng: &mut ChaCha8Rng, ids: &[String], block_of: &[usize], n_blocks: usize) -> LabeledMatrix {
    let n_genes = 300;
    let unit = Normal::new(0.0, 1.0).unwrap();
    let profiles: Vec<Vec<f64>> = (0..n_blocks)
        .map(|_| (0..n_genes).map(|_| unit.sample(rng)).collect())
        .collect();
    let noise = if n_blocks == 0 { 1.0 } else { 0.3 };
    let cols: Vec<Vec<f64>> = block_of
        .iter()
        .map(|&b| {
            (0..n_genes)
                .map(|g| {
                    let latent = if n_blocks == 0 { 0.0 } else { profiles[b][g] };
                    round4(latent + noise * unit.sample(rng))
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n_genes).map(|g| cols.iter().map(|c| c[g]).collect()).collect();
    LabeledMatrix::from_rows((0..n_genes).map(|g| format!("{}_x_at", 1000 + g)), ids.to_vec(), &rows).unwrap()
}

/// Three run blocks months apart. Block 1 holds half of the FEC patients
/// plus about as many arrays later excluded; block 2 the other FEC half;
/// block 3 every TET patient, on a different scanner.
pub fn fec_tet(seed: u64) -> TrialFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut metas = Vec::new();
    let mut block_of = Vec::new();
    let mut id = 0;
    let mut next_id = || {
        id += 1;
        format!("HB{id:03}")
    };

    let b1 = run_times(&mut rng, Utc.with_ymd_and_hms(2005, 1, 10, 9, 0, 0).unwrap(), 76);
    let mut flags: Vec<bool> = (0..76).map(|i| i < 40).collect();
    flags.shuffle(&mut rng);
    for (t, inc) in b1.into_iter().zip(flags) {
        metas.push(meta(next_id(), t, "SCANNER-A", "FEC", inc));
        block_of.push(0);
    }
    for t in run_times(&mut rng, Utc.with_ymd_and_hms(2005, 5, 2, 9, 0, 0).unwrap(), 40) {
        metas.push(meta(next_id(), t, "SCANNER-A", "FEC", true));
        block_of.push(1);
    }
    for t in run_times(&mut rng, Utc.with_ymd_and_hms(2005, 10, 3, 9, 0, 0).unwrap(), 45) {
        metas.push(meta(next_id(), t, "SCANNER-B", "TET", true));
        block_of.push(2);
    }
    let ids: Vec<String> = metas.iter().map(|m| m.sample_id.clone()).collect();
    let expression = expression(&mut rng, &ids, &block_of, 3);
    TrialFixture { meta: metas, expression }
}

/// `n` arrays in four run blocks on one scanner; arms are assigned by
/// permuted blocks of four within each run block.
pub fn balanced(seed: u64, n: usize) -> TrialFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = [
        Utc.with_ymd_and_hms(2005, 1, 10, 9, 0, 0).unwrap(),
        Utc.with_ymd_and_hms(2005, 4, 4, 9, 0, 0).unwrap(),
        Utc.with_ymd_and_hms(2005, 7, 4, 9, 0, 0).unwrap(),
        Utc.with_ymd_and_hms(2005, 10, 3, 9, 0, 0).unwrap(),
    ];
    let mut metas = Vec::new();
    let mut block_of = Vec::new();
    for (b, &start) in starts.iter().enumerate() {
        let size = n / 4 + usize::from(b < n % 4);
        let mut arms = Vec::with_capacity(size);
        while arms.len() < size {
            let mut block = ["FEC", "FEC", "TET", "TET"];
            block.shuffle(&mut rng);
            arms.extend(block);
        }
        arms.truncate(size);
        for (t, arm) in run_times(&mut rng, start, size).into_iter().zip(arms) {
            metas.push(meta(format!("BAL{:03}", metas.len() + 1), t, "SCANNER-A", arm, true));
            block_of.push(b);
        }
    }
    let ids: Vec<String> = metas.iter().map(|m| m.sample_id.clone()).collect();
    let expression = expression(&mut rng, &ids, &block_of, 0);
    TrialFixture { meta: metas, expression }
}
