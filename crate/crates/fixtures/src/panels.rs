//! Planted cell-line panels for group reconstruction.

use forensic_core::groupsearch::{Assignment, GeneListGenerator, LineState, TopTGenerator};
use forensic_core::model::{LabeledMatrix, SignatureList};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone)]
pub struct PanelSpec {
    pub n_lines: usize,
    pub n_genes: usize,
    pub n_resistant: usize,
    pub n_sensitive: usize,
    /// Genes whose Sensitive mean exceeds the Resistant mean by `effect`.
    pub n_informative: usize,
    pub effect: f64,
    pub k: usize,
}

impl PanelSpec {
    pub fn new(n_lines: usize) -> Self {
        let n_resistant = n_lines * 3 / 10;
        let n_sensitive = n_lines / 5;
        PanelSpec {
            n_lines,
            n_genes: 600,
            n_resistant,
            n_sensitive,
            n_informative: 250,
            effect: 4.0,
            k: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedPanel {
    pub panel: LabeledMatrix,
    pub planted: Assignment,
    /// Generator output for the planted assignment.
    pub target: SignatureList,
    pub k: usize,
    /// Row indices of the informative genes.
    pub informative: Vec<usize>,
}

pub fn line_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("LINE{i:02}")).collect()
}

/// Panel with planted Resistant/Sensitive/Unused lines. Unused lines sit
/// midway between the two groups on informative genes.
pub fn planted_panel(spec: &PanelSpec, seed: u64) -> PlantedPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![LineState::Unused; spec.n_lines];
    let mut order: Vec<usize> = (0..spec.n_lines).collect();
    order.shuffle(&mut rng);
    for &i in &order[..spec.n_resistant] {
        states[i] = LineState::Resistant;
    }
    for &i in &order[spec.n_resistant..spec.n_resistant + spec.n_sensitive] {
        states[i] = LineState::Sensitive;
    }
    let mut genes: Vec<usize> = (0..spec.n_genes).collect();
    genes.shuffle(&mut rng);
    let mut informative = genes[..spec.n_informative].to_vec();
    informative.sort_unstable();

    let noise = Normal::new(0.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..spec.n_genes)
        .map(|g| {
            let base: f64 = rng.random_range(4.0..10.0);
            let shift = if informative.binary_search(&g).is_ok() { spec.effect } else { 0.0 };
            states
                .iter()
                .map(|s| {
                    let mean = match s {
                        LineState::Resistant => base,
                        LineState::Sensitive => base + shift,
                        LineState::Unused => base + shift / 2.0,
                    };
                    round4(mean + noise.sample(&mut rng))
                })
                .collect()
        })
        .collect();
    let panel = LabeledMatrix::from_rows(
        (0..spec.n_genes).map(|g| format!("{}_at", 300000 + g)),
        line_names(spec.n_lines),
        &rows,
    )
    .unwrap();
    let planted = Assignment::new(states);
    let labeled = panel.clone().with_labels(Some(planted.to_labels(&panel)));
    let cols: Vec<usize> = (0..spec.n_lines)
        .filter(|&i| planted.states()[i] != LineState::Unused)
        .collect();
    let target = TopTGenerator.generate(&labeled.select_columns(&cols), spec.k).unwrap();
    PlantedPanel {
        panel,
        planted,
        target,
        k: spec.k,
        informative,
    }
}

/// Flips `n_errors` distinct lines of `a` to a different state, keeping
/// the result scorable.
pub fn perturb(a: &Assignment, n_errors: usize, seed: u64) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut lines: Vec<usize> = (0..a.len()).collect();
        lines.shuffle(&mut rng);
        let mut out = a.clone();
        for &i in &lines[..n_errors] {
            let choices: Vec<LineState> = LineState::ALL
                .into_iter()
                .filter(|&s| s != a.states()[i])
                .collect();
            out = out.with_state(i, choices[rng.random_range(0..choices.len())]);
        }
        if out.is_scorable() {
            return out;
        }
    }
}

pub(crate) fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}
