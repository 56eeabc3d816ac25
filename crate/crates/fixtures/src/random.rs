//! Seeded positive matrices for transform and matching checks.

use forensic_core::model::LabeledMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

/// `n_rows` x `n_cols` lognormal values with per-row scale, ids `P00001_at`..
/// and `C01`.., rounded to 4 decimals.
pub fn lognormal(seed: u64, n_rows: usize, n_cols: usize) -> LabeledMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row_scale: LogNormal<f64> = LogNormal::new(1.5, 0.8).unwrap();
    let rows: Vec<Vec<f64>> = (0..n_rows)
        .map(|_| {
            let mu = row_scale.sample(&mut rng).ln();
            let d = LogNormal::new(mu, 0.7).unwrap();
            (0..n_cols).map(|_| ((d.sample(&mut rng) * 1e4).round() / 1e4).max(1e-4)).collect()
        })
        .collect();
    LabeledMatrix::from_rows(
        (1..=n_rows).map(|i| format!("P{i:05}_at")),
        (1..=n_cols).map(|j| format!("C{j:02}")),
        &rows,
    )
    .unwrap()
}

/// Rows of `m` in a seeded random order.
pub fn shuffle_rows(m: &LabeledMatrix, seed: u64) -> LabeledMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m.n_features()).collect();
    order.shuffle(&mut rng);
    m.select_rows(&order)
}
