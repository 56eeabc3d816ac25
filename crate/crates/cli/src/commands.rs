//! Standalone subcommands outside the manifest audit: matching, group
//! search, signature scoring, ROC and probability combination.

use std::collections::BTreeMap;
use std::path::Path;

use forensic_core::dupscan::{collapse_roster, cross_tabulate};
use forensic_core::groupsearch::{steepest_ascent, Assignment, TopTGenerator};
use forensic_core::ingest::{parse_matrix, parse_roster, parse_signature, LabelSynonyms, MatrixFormat};
use forensic_core::integrity::{combine_batch, CombinationRule};
use forensic_core::matchscan::{match_columns, match_rows, MatchResult};
use forensic_core::model::{extract_submatrix, GroupLabel, LabeledMatrix, SignatureList};
use forensic_core::signature::{auc, fit_probit, metagene_scores, predict_prob, roc_curve, select_top_genes, ProbitModel};
use forensic_core::transform::{apply_pipeline, infer_pipeline, TransformPipeline};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::manifest::{InputKind, InputSpec, TableFormat};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path) -> impl FnOnce(forensic_core::Error) -> CliError + '_ {
    move |source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    }
}

pub fn matrix_format(path: &Path, format: Option<TableFormat>, label_row: bool) -> MatrixFormat {
    InputSpec {
        path: path.to_string_lossy().into_owned(),
        kind: InputKind::Matrix,
        format,
        label_row,
    }
    .matrix_format()
}

pub fn load_matrix(path: &Path, fmt: &MatrixFormat) -> Result<LabeledMatrix> {
    parse_matrix(&read_text(path)?, fmt).map_err(parse_err(path))
}

pub fn load_signature(path: &Path) -> Result<SignatureList> {
    parse_signature(&read_text(path)?).map_err(parse_err(path))
}

/// Labels keyed by sample, the last entry winning.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, GroupLabel>> {
    Ok(parse_roster(&read_text(path)?).map_err(parse_err(path))?.label_map())
}

pub fn crosstab(a: &Path, b: &Path) -> Result<Value> {
    let ra = parse_roster(&read_text(a)?).map_err(parse_err(a))?;
    let rb = parse_roster(&read_text(b)?).map_err(parse_err(b))?;
    let t = cross_tabulate(&collapse_roster(&ra), &collapse_roster(&rb))?;
    Ok(serde_json::to_value(t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchAxis {
    Rows,
    Columns,
}

fn match_json(result: &MatchResult, query: &[String], reference: &[String]) -> Value {
    let pairs: Vec<Value> = result
        .mapping
        .iter()
        .enumerate()
        .filter_map(|(q, r)| r.map(|r| json!({ "query": query[q], "reference": reference[r] })))
        .collect();
    let unmatched: Vec<&String> = result
        .mapping
        .iter()
        .enumerate()
        .filter(|(q, r)| r.is_none() && !result.ambiguous.contains(q) && !result.degenerate.contains(q))
        .map(|(q, _)| &query[q])
        .collect();
    json!({
        "stats": result.stats,
        "matches": pairs,
        "ambiguous": result.ambiguous.iter().map(|&q| &query[q]).collect::<Vec<_>>(),
        "degenerate": result.degenerate.iter().map(|&q| &query[q]).collect::<Vec<_>>(),
        "unmatched": unmatched,
    })
}

/// Matches query rows (or columns) against a reference after transforming
/// the reference with `pipeline`.
pub fn match_items(
    query: &LabeledMatrix,
    reference: &LabeledMatrix,
    pipeline: &TransformPipeline,
    axis: MatchAxis,
    min_corr: f64,
) -> Result<Value> {
    let transformed = apply_pipeline(reference, pipeline)?;
    let (result, q_ids, r_ids) = match axis {
        MatchAxis::Rows => (match_rows(query, &transformed, min_corr)?, query.feature_ids(), reference.feature_ids()),
        MatchAxis::Columns => {
            (match_columns(query, &transformed, min_corr)?, query.sample_ids(), reference.sample_ids())
        }
    };
    let mut v = match_json(&result, q_ids, r_ids);
    v["pipeline"] = json!(pipeline.to_string());
    v["min_corr"] = json!(min_corr);
    Ok(v)
}

/// Best pipeline from the default grid for position-aligned matrices.
pub fn infer(query: &LabeledMatrix, reference: &LabeledMatrix) -> Result<Value> {
    let grid = TransformPipeline::default_grid();
    let fit = infer_pipeline(query, reference, &grid)?;
    let candidates: Vec<Value> = grid
        .iter()
        .zip(&fit.candidate_fits)
        .map(|(p, f)| json!({ "pipeline": p.to_string(), "fit": f }))
        .collect();
    Ok(json!({
        "best": fit.best.to_string(),
        "fit": fit.fit,
        "residual": fit.residual,
        "candidates": candidates,
    }))
}

/// Steepest ascent over line roles, starting from the labels in `start`
/// (lines not listed start Unused).
pub fn search_groups(
    panel: &LabeledMatrix,
    target: &SignatureList,
    start: &BTreeMap<String, GroupLabel>,
    k: Option<usize>,
    trace: bool,
) -> Result<Value> {
    let k = k.unwrap_or(target.len());
    let a = Assignment::from_labels(panel, start);
    let r = steepest_ascent(&a, panel, target, k, &TopTGenerator)?;
    let labels: BTreeMap<String, &str> = r
        .final_assignment
        .to_labels(panel)
        .into_iter()
        .map(|(id, l)| (id, l.as_str()))
        .collect();
    let mut v = json!({
        "k": k,
        "start_score": r.start_score,
        "final_score": r.final_score,
        "moves": r.trajectory.len(),
        "budget_exhausted": r.budget_exhausted,
        "final_labels": labels,
    });
    if trace {
        v["trajectory"] = serde_json::to_value(&r.trajectory)?;
        v["neighbors_per_step"] = json!(r.neighbors_per_step);
    }
    Ok(v)
}

/// A fitted signature: genes, metagene centering and loadings, and the
/// probit link from metagene score to probability of sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureModel {
    pub genes: Vec<String>,
    pub row_means: Vec<f64>,
    pub loadings: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
    pub converged: bool,
    pub training_auc: f64,
}

fn sensitive_flags(m: &LabeledMatrix) -> Vec<bool> {
    m.sample_ids().iter().map(|s| m.label(s) == GroupLabel::Sensitive).collect()
}

/// Top-`k` genes by `|t|`, their metagene, and a probit fit on the
/// Sensitive/Resistant training samples.
pub fn derive_signature(train: &LabeledMatrix, k: usize) -> Result<SignatureModel> {
    let sig = select_top_genes(train, k)?;
    let (sub, _) = extract_submatrix(train, &sig, Some(&[GroupLabel::Sensitive, GroupLabel::Resistant]))?;
    let mg = metagene_scores(&sub)?;
    let flags = sensitive_flags(&sub);
    let model = fit_probit(&mg.scores, &flags)?;
    let sign = if model.slope < 0.0 { -1.0 } else { 1.0 };
    let oriented: Vec<f64> = mg.scores.iter().map(|s| s * sign).collect();
    Ok(SignatureModel {
        genes: sig.feature_ids().to_vec(),
        row_means: mg.row_means,
        loadings: mg.loadings,
        intercept: model.intercept,
        slope: model.slope,
        converged: model.converged,
        training_auc: auc(&oriented, &flags)?,
    })
}

pub fn predict_signature(model: &SignatureModel, m: &LabeledMatrix, force: bool) -> Result<BTreeMap<String, f64>> {
    let sig = SignatureList::new(model.genes.clone())?;
    let (sub, absent) = extract_submatrix(m, &sig, None)?;
    if !absent.is_empty() {
        return Err(CliError::Usage(format!("{} signature genes missing: {}", absent.len(), absent.join(", "))));
    }
    let mg = forensic_core::signature::Metagene {
        scores: Vec::new(),
        loadings: model.loadings.clone(),
        row_means: model.row_means.clone(),
        singular_value: f64::NAN,
        iterations: 0,
        residual: f64::NAN,
    };
    let scores = mg.project(&sub)?;
    let probit = ProbitModel {
        intercept: model.intercept,
        slope: model.slope,
        converged: model.converged,
        n_iter: 0,
        separation: None,
    };
    let p = predict_prob(&probit, &scores, force)?;
    Ok(m.sample_ids().iter().cloned().zip(p).collect())
}

/// ROC over a `sample_id,score,label` table; Sensitive is the positive
/// class and other labels besides Resistant are skipped.
pub fn roc(text: &str) -> Result<Value> {
    let syn = LabelSynonyms::default();
    let mut scores = Vec::new();
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || CliError::Usage(format!("line {}: expected sample_id,score,label", i + 1));
        if cells.len() != 3 {
            return Err(bad());
        }
        let score: f64 = cells[1].parse().map_err(|_| bad())?;
        match syn.normalize(cells[2]) {
            Some(GroupLabel::Sensitive) => flags.push(true),
            Some(GroupLabel::Resistant) => flags.push(false),
            Some(_) => continue,
            None => return Err(bad()),
        }
        scores.push(score);
    }
    let points = roc_curve(&scores, &flags)?;
    Ok(json!({
        "auc": auc(&scores, &flags)?,
        "n_positive": flags.iter().filter(|&&f| f).count(),
        "n_negative": flags.iter().filter(|&&f| !f).count(),
        "points": points.iter().map(|&(fpr, tpr)| json!({"fpr": fpr, "tpr": tpr})).collect::<Vec<_>>(),
    }))
}

/// Parses `KEY=VALUE` pairs.
pub fn parse_pairs(pairs: &[String]) -> Result<BTreeMap<String, f64>> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected KEY=VALUE, got {p:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{k}: {v:?} is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub type Probabilities = BTreeMap<String, f64>;

/// A CSV with a header of drug keys and one row of probabilities per
/// patient; an optional first column named `sample_id` is carried along.
pub fn parse_batch(text: &str) -> Result<(Vec<String>, Vec<Probabilities>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Usage("empty batch file".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let has_ids = header.first().is_some_and(|h| h == "sample_id");
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != header.len() {
            return Err(CliError::Usage(format!("batch row {}: {} cells for {} columns", i + 1, cells.len(), header.len())));
        }
        let mut row = BTreeMap::new();
        for (j, (h, c)) in header.iter().zip(&cells).enumerate() {
            if has_ids && j == 0 {
                ids.push(c.to_string());
                continue;
            }
            let v: f64 = c
                .parse()
                .map_err(|_| CliError::Usage(format!("batch row {}: {c:?} is not a number", i + 1)))?;
            row.insert(h.clone(), v);
        }
        if !has_ids {
            ids.push(format!("row{}", i + 1));
        }
        rows.push(row);
    }
    Ok((ids, rows))
}

pub fn combo(rule: &str, pairs: &[String], batch: Option<&str>, normalize: bool) -> Result<Value> {
    let rule = CombinationRule::parse(rule)?;
    let (ids, rows) = match batch {
        Some(text) => parse_batch(text)?,
        None => (vec!["input".to_string()], vec![parse_pairs(pairs)?]),
    };
    let raw = combine_batch(&rows, rule, false)?;
    let mut out: Vec<Value> = ids.iter().zip(&raw).map(|(id, r)| json!({ "sample": id, "raw": r })).collect();
    if normalize {
        let scaled = combine_batch(&rows, rule, true)?;
        for (o, s) in out.iter_mut().zip(scaled) {
            o["normalized"] = json!(s);
        }
    }
    Ok(json!({ "rule": format!("{rule:?}"), "keys": rule.keys(), "results": out }))
}
