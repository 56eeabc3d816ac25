//! Steepest-ascent search for the cell-line grouping behind a reported
//! gene list.
//!
//! Each panel line is Resistant, Sensitive or Unused. An assignment scores
//! the number of genes its generated list shares with the target list; the
//! search moves one line at a time to the best strictly improving
//! neighbor.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GroupLabel, LabeledMatrix, SignatureList};
use crate::signature;

/// Role of one panel line. The declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LineState {
    Resistant,
    Sensitive,
    Unused,
}

impl LineState {
    pub const ALL: [LineState; 3] = [LineState::Resistant, LineState::Sensitive, LineState::Unused];

    pub fn label(self) -> GroupLabel {
        match self {
            LineState::Resistant => GroupLabel::Resistant,
            LineState::Sensitive => GroupLabel::Sensitive,
            LineState::Unused => GroupLabel::Unused,
        }
    }

    /// Sensitive and Resistant map to themselves; every other label is Unused.
    pub fn from_label(l: GroupLabel) -> Self {
        match l {
            GroupLabel::Resistant => LineState::Resistant,
            GroupLabel::Sensitive => LineState::Sensitive,
            _ => LineState::Unused,
        }
    }
}

/// State of every panel line, aligned with the panel's sample order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Assignment {
    states: Vec<LineState>,
}

impl Assignment {
    pub fn new(states: Vec<LineState>) -> Self {
        Assignment { states }
    }

    /// Builds an assignment from a label map; unlisted lines are Unused.
    pub fn from_labels(panel: &LabeledMatrix, labels: &BTreeMap<String, GroupLabel>) -> Self {
        Assignment {
            states: panel
                .sample_ids()
                .iter()
                .map(|s| labels.get(s).map_or(LineState::Unused, |&l| LineState::from_label(l)))
                .collect(),
        }
    }

    pub fn states(&self) -> &[LineState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn count(&self, s: LineState) -> usize {
        self.states.iter().filter(|&&x| x == s).count()
    }

    /// At least two Sensitive and two Resistant lines.
    pub fn is_scorable(&self) -> bool {
        self.count(LineState::Sensitive) >= 2 && self.count(LineState::Resistant) >= 2
    }

    pub fn with_state(&self, line: usize, s: LineState) -> Self {
        let mut next = self.clone();
        next.states[line] = s;
        next
    }

    pub fn to_labels(&self, panel: &LabeledMatrix) -> BTreeMap<String, GroupLabel> {
        panel
            .sample_ids()
            .iter()
            .zip(&self.states)
            .map(|(s, st)| (s.clone(), st.label()))
            .collect()
    }

    /// Number of lines whose state differs from `other`.
    pub fn distance(&self, other: &Assignment) -> usize {
        self.states.iter().zip(&other.states).filter(|(a, b)| a != b).count()
    }
}

/// Produces a ranked gene list from a labeled panel.
pub trait GeneListGenerator: Sync {
    fn generate(&self, panel: &LabeledMatrix, k: usize) -> Result<SignatureList>;
}

/// Default generator: the `k` genes with the largest pooled-variance `|t|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TopTGenerator;

impl GeneListGenerator for TopTGenerator {
    fn generate(&self, panel: &LabeledMatrix, k: usize) -> Result<SignatureList> {
        signature::select_top_genes(panel, k)
    }
}

/// Overlap between the generator's list for `a` and `target`, or `None`
/// when the assignment is not scorable.
pub fn score_assignment(
    a: &Assignment,
    panel: &LabeledMatrix,
    target: &SignatureList,
    k: usize,
    generator: &dyn GeneListGenerator,
) -> Result<Option<usize>> {
    if a.len() != panel.n_samples() {
        return Err(Error::ShapeMismatch(format!(
            "assignment covers {} lines, panel has {}",
            a.len(),
            panel.n_samples()
        )));
    }
    if !a.is_scorable() {
        return Ok(None);
    }
    let cols: Vec<usize> = (0..a.len()).filter(|&i| a.states[i] != LineState::Unused).collect();
    let sub = panel
        .clone()
        .with_labels(Some(a.to_labels(panel)))
        .select_columns(&cols);
    let generated = generator.generate(&sub, k)?;
    let target = target.id_set();
    Ok(Some(
        generated
            .feature_ids()
            .iter()
            .filter(|id| target.contains(id.as_str()))
            .count(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Move {
    pub line: usize,
    pub cell_line: String,
    pub from: LineState,
    pub to: LineState,
    pub score: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub start_score: usize,
    pub final_assignment: Assignment,
    pub final_score: usize,
    pub trajectory: Vec<Move>,
    /// Neighbors evaluated at each step, including the final check that
    /// found no improvement.
    pub neighbors_per_step: Vec<usize>,
    /// The step cap (10 x lines) was hit before a local maximum.
    pub budget_exhausted: bool,
}

/// Steepest ascent from `start`.
///
/// Each step evaluates all `2N` single-line changes and takes the highest
/// strictly improving one; ties go to the lower line index, then to the
/// state order Resistant < Sensitive < Unused. Unscorable neighbors score
/// as -1. Stops at a local maximum or after `10 N` moves.
pub fn steepest_ascent(
    start: &Assignment,
    panel: &LabeledMatrix,
    target: &SignatureList,
    k: usize,
    generator: &dyn GeneListGenerator,
) -> Result<SearchResult> {
    let start_score = score_assignment(start, panel, target, k, generator)?.ok_or_else(|| {
        Error::Degenerate("start assignment needs 2 Sensitive and 2 Resistant lines".into())
    })?;
    let n = start.len();
    let budget = 10 * n;
    let mut current = start.clone();
    let mut score = start_score as i64;
    let mut trajectory = Vec::new();
    let mut neighbors_per_step = Vec::new();
    let mut budget_exhausted = false;
    loop {
        if trajectory.len() >= budget {
            budget_exhausted = true;
            break;
        }
        let neighbors: Vec<(usize, LineState)> = (0..n)
            .flat_map(|i| {
                let cur = current.states[i];
                LineState::ALL.into_iter().filter(move |&s| s != cur).map(move |s| (i, s))
            })
            .collect();
        neighbors_per_step.push(neighbors.len());
        let scores: Vec<Result<i64>> = neighbors
            .par_iter()
            .map(|&(i, s)| {
                Ok(score_assignment(&current.with_state(i, s), panel, target, k, generator)?
                    .map_or(-1, |v| v as i64))
            })
            .collect();
        let mut best: Option<(usize, i64)> = None;
        for (idx, sc) in scores.into_iter().enumerate() {
            let sc = sc?;
            // neighbors are already in tie-break order, so only a strictly
            // higher score displaces the incumbent
            if sc > score && best.is_none_or(|(_, b)| sc > b) {
                best = Some((idx, sc));
            }
        }
        let Some((idx, sc)) = best else { break };
        let (line, to) = neighbors[idx];
        trajectory.push(Move {
            line,
            cell_line: panel.sample_ids()[line].clone(),
            from: current.states[line],
            to,
            score: sc as usize,
        });
        current = current.with_state(line, to);
        score = sc;
    }
    Ok(SearchResult {
        start_score,
        final_assignment: current,
        final_score: score as usize,
        trajectory,
        neighbors_per_step,
        budget_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel() -> (LabeledMatrix, Assignment) {
        // genes g0..g2 separate lines 0,1 (R) from 2,3 (S); line 4 unused
        let rows = vec![
            vec![0.0, 0.2, 5.0, 5.1, 2.0],
            vec![1.0, 1.1, -4.0, -4.2, 0.0],
            vec![3.0, 3.3, 9.0, 9.5, 1.0],
            vec![0.3, 0.1, 0.2, 0.4, 0.0],
            vec![0.5, 0.9, 0.7, 0.6, 0.2],
        ];
        let m = LabeledMatrix::from_rows(
            (0..5).map(|i| format!("g{i}")),
            ["L0", "L1", "L2", "L3", "L4"],
            &rows,
        )
        .unwrap();
        use LineState::*;
        (m, Assignment::new(vec![Resistant, Resistant, Sensitive, Sensitive, Unused]))
    }

    #[test]
    fn planted_target_scores_k() {
        let (m, a) = panel();
        let target = TopTGenerator.generate(&m.clone().with_labels(Some(a.to_labels(&m))), 3).unwrap();
        assert_eq!(score_assignment(&a, &m, &target, 3, &TopTGenerator).unwrap(), Some(3));
        let foreign = SignatureList::new(["nope"]).unwrap();
        assert_eq!(score_assignment(&a, &m, &foreign, 3, &TopTGenerator).unwrap(), Some(0));
    }

    #[test]
    fn unscorable_assignment() {
        let (m, a) = panel();
        let bad = a.with_state(0, LineState::Unused);
        let target = SignatureList::new(["g0"]).unwrap();
        assert_eq!(score_assignment(&bad, &m, &target, 2, &TopTGenerator).unwrap(), None);
        assert!(steepest_ascent(&bad, &m, &target, 2, &TopTGenerator).is_err());
    }

    #[test]
    fn start_at_optimum_stays() {
        let (m, a) = panel();
        let target = TopTGenerator.generate(&m.clone().with_labels(Some(a.to_labels(&m))), 3).unwrap();
        let out = steepest_ascent(&a, &m, &target, 3, &TopTGenerator).unwrap();
        assert!(out.trajectory.is_empty());
        assert_eq!(out.final_assignment, a);
        assert_eq!(out.neighbors_per_step, vec![10]);
    }

    struct Constant;
    impl GeneListGenerator for Constant {
        fn generate(&self, _: &LabeledMatrix, _: usize) -> Result<SignatureList> {
            SignatureList::new(["g0"])
        }
    }

    #[test]
    fn generator_is_pluggable() {
        let (m, a) = panel();
        let target = SignatureList::new(["g0"]).unwrap();
        assert_eq!(score_assignment(&a, &m, &target, 1, &Constant).unwrap(), Some(1));
    }
}
