//! Deterministic signature pipeline: top-|t| gene selection, a leading
//! singular-direction metagene, a maximum-likelihood probit link, and ROC
//! analysis of the resulting predictions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Direction, GroupLabel, LabeledMatrix, SignatureList};
use crate::stats::{self, norm_cdf, norm_pdf};

/// Column positions of the Sensitive and Resistant samples of `m`.
///
/// Unused and Unknown samples are ignored; Intermediate samples make the
/// contrast ambiguous and are rejected.
pub fn response_groups(m: &LabeledMatrix) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut sens = Vec::new();
    let mut res = Vec::new();
    for (c, s) in m.sample_ids().iter().enumerate() {
        match m.label(s) {
            GroupLabel::Sensitive => sens.push(c),
            GroupLabel::Resistant => res.push(c),
            GroupLabel::Intermediate => {
                return Err(Error::Degenerate(format!(
                    "sample {s:?} is Intermediate; exactly two groups are required"
                )))
            }
            GroupLabel::Unused | GroupLabel::Unknown => {}
        }
    }
    if sens.len() < 2 || res.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 Sensitive and 2 Resistant samples, found {} and {}",
            sens.len(),
            res.len()
        )));
    }
    Ok((sens, res))
}

/// Pooled-variance t statistic of Sensitive versus Resistant for every
/// feature (positive = higher in Sensitive).
pub fn gene_t_statistics(m: &LabeledMatrix) -> Result<Vec<f64>> {
    let (sens, res) = response_groups(m)?;
    (0..m.n_features())
        .map(|r| {
            let row = m.row(r);
            let a: Vec<f64> = sens.iter().map(|&c| row[c]).collect();
            let b: Vec<f64> = res.iter().map(|&c| row[c]).collect();
            if a.iter().chain(&b).any(|v| v.is_nan()) {
                return Err(Error::MissingValue(format!("feature {:?}", m.feature_ids()[r])));
            }
            Ok(stats::pooled_t(&a, &b))
        })
        .collect()
}

/// The `k` features with the largest `|t|`, ties to the lower row index.
/// Each selected feature's direction follows the sign of its mean
/// difference (none is recorded for an exact zero).
pub fn select_top_genes(m: &LabeledMatrix, k: usize) -> Result<SignatureList> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > m.n_features() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} available features",
            m.n_features()
        )));
    }
    let t = gene_t_statistics(m)?;
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[b].abs().total_cmp(&t[a].abs()).then(a.cmp(&b)));
    order.truncate(k);
    let ids: Vec<String> = order.iter().map(|&r| m.feature_ids()[r].clone()).collect();
    let directions = order
        .iter()
        .filter(|&&r| t[r] != 0.0)
        .map(|&r| {
            let d = if t[r] > 0.0 {
                Direction::UpInSensitive
            } else {
                Direction::UpInResistant
            };
            (m.feature_ids()[r].clone(), d)
        })
        .collect();
    SignatureList::new(ids)?.with_directions(directions)
}

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;
/// Leading directions whose second eigenvalue is within this relative
/// distance of the first are reported as ambiguous.
pub const AMBIGUITY_RATIO: f64 = 1.0 - 1e-6;

/// Leading singular direction of a row-centered signature submatrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metagene {
    /// Per-sample projection onto the gene loadings (singular value times
    /// the right singular vector).
    pub scores: Vec<f64>,
    /// Unit-norm gene weights; the largest in magnitude is positive.
    pub loadings: Vec<f64>,
    /// Means used to center each gene.
    pub row_means: Vec<f64>,
    pub singular_value: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl Metagene {
    /// Scores new samples with the fitted centering and loadings. `sub`
    /// must list the same genes in the same order.
    pub fn project(&self, sub: &LabeledMatrix) -> Result<Vec<f64>> {
        if sub.n_features() != self.loadings.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} genes for a metagene over {}",
                sub.n_features(),
                self.loadings.len()
            )));
        }
        if sub.has_missing() {
            return Err(Error::MissingValue("metagene projection input".into()));
        }
        Ok((0..sub.n_samples())
            .map(|c| {
                (0..sub.n_features())
                    .map(|r| (sub.get(r, c) - self.row_means[r]) * self.loadings[r])
                    .sum()
            })
            .collect())
    }
}

struct PowerResult {
    vector: Vec<f64>,
    value: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn mat_vec(g: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| stats::dot(&g[i * n..(i + 1) * n], x)).collect()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = stats::dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Power iteration on a symmetric positive semidefinite `n x n` matrix.
/// Stops once `|G x - rho x| <= tol * rho` for the Rayleigh quotient `rho`.
fn power_iterate(g: &[f64], n: usize, tol: f64, max_iter: usize) -> PowerResult {
    let start = (0..n)
        .max_by(|&a, &b| g[a * n + a].total_cmp(&g[b * n + b]).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut x: Vec<f64> = g[start * n..(start + 1) * n].to_vec();
    if normalize(&mut x) == 0.0 {
        return PowerResult {
            vector: x,
            value: 0.0,
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let mut residual = f64::INFINITY;
    let mut value = 0.0;
    for it in 1..=max_iter {
        let mut y = mat_vec(g, n, &x);
        value = stats::dot(&x, &y);
        if value <= 0.0 {
            return PowerResult {
                vector: x,
                value: 0.0,
                iterations: it,
                residual: 0.0,
                converged: true,
            };
        }
        residual = x
            .iter()
            .zip(&y)
            .map(|(xi, yi)| (yi - value * xi).powi(2))
            .sum::<f64>()
            .sqrt()
            / value;
        if residual <= tol {
            return PowerResult {
                vector: x,
                value,
                iterations: it,
                residual,
                converged: true,
            };
        }
        normalize(&mut y);
        x = y;
    }
    PowerResult {
        vector: x,
        value,
        iterations: max_iter,
        residual,
        converged: false,
    }
}

/// Projects every sample of `sub` (rows = signature genes) onto the leading
/// singular direction of the row-centered matrix.
///
/// The power iteration runs on whichever Gram matrix (gene or sample
/// space) is smaller. A second, deflated iteration checks that the leading
/// eigenvalue is separated from the next; if not, the direction is not
/// identifiable and [`Error::AmbiguousDirection`] is returned.
pub fn metagene_scores(sub: &LabeledMatrix) -> Result<Metagene> {
    let (r, c) = (sub.n_features(), sub.n_samples());
    if r < 2 || c < 2 {
        return Err(Error::Degenerate(format!(
            "metagene needs at least 2 genes and 2 samples, got {r}x{c}"
        )));
    }
    if sub.has_missing() {
        return Err(Error::MissingValue("metagene input".into()));
    }
    let row_means: Vec<f64> = (0..r).map(|i| stats::mean(sub.row(i))).collect();
    let x: Vec<f64> = (0..r * c).map(|k| sub.values()[k] - row_means[k / c]).collect();
    let at = |i: usize, j: usize| x[i * c + j];

    let sample_space = c <= r;
    let n = if sample_space { c } else { r };
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = if sample_space {
                (0..r).map(|k| at(k, i) * at(k, j)).sum()
            } else {
                (0..c).map(|k| at(i, k) * at(j, k)).sum()
            };
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }

    let lead = power_iterate(&g, n, POWER_TOLERANCE, POWER_MAX_ITER);
    if !lead.converged {
        return Err(Error::NonConvergence {
            iterations: lead.iterations,
            residual: lead.residual,
        });
    }
    if lead.value <= 0.0 {
        return Err(Error::Degenerate("signature genes are constant across samples".into()));
    }

    let mut deflated = g.clone();
    for i in 0..n {
        for j in 0..n {
            deflated[i * n + j] -= lead.value * lead.vector[i] * lead.vector[j];
        }
    }
    let second = power_iterate(&deflated, n, POWER_TOLERANCE, POWER_MAX_ITER);
    let ratio = second.value / lead.value;
    if ratio >= AMBIGUITY_RATIO {
        return Err(Error::AmbiguousDirection { ratio });
    }

    let sigma = lead.value.sqrt();
    let mut loadings: Vec<f64> = if sample_space {
        (0..r)
            .map(|i| (0..c).map(|j| at(i, j) * lead.vector[j]).sum::<f64>() / sigma)
            .collect()
    } else {
        lead.vector.clone()
    };
    normalize(&mut loadings);
    let pivot = (0..r)
        .max_by(|&a, &b| loadings[a].abs().total_cmp(&loadings[b].abs()).then(b.cmp(&a)))
        .unwrap();
    if loadings[pivot] < 0.0 {
        loadings.iter_mut().for_each(|v| *v = -*v);
    }
    let scores = (0..c)
        .map(|j| (0..r).map(|i| at(i, j) * loadings[i]).sum())
        .collect();
    Ok(Metagene {
        scores,
        loadings,
        row_means,
        singular_value: sigma,
        iterations: lead.iterations,
        residual: lead.residual,
    })
}

pub const PROBIT_TOLERANCE: f64 = 1e-8;
pub const PROBIT_MAX_ITER: usize = 100;

/// Where a perfectly separating score cut lies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Separation {
    pub threshold: f64,
    /// True when class 1 lies at or above the threshold.
    pub positive_above: bool,
}

/// `P(class = 1 | score) = Phi(intercept + slope * score)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbitModel {
    pub intercept: f64,
    pub slope: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub separation: Option<Separation>,
}

/// `ln Phi(x)`, accurate far into the lower tail.
fn log_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        norm_cdf(x).ln()
    } else {
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Inverse Mills ratio `phi(x) / Phi(x)`.
fn mills(x: f64) -> f64 {
    if x > -30.0 {
        norm_pdf(x) / norm_cdf(x)
    } else {
        let x2 = x * x;
        -x / (1.0 - 1.0 / x2 + 3.0 / (x2 * x2))
    }
}

fn check_binary(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("scores must be finite".into()));
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Probit log-likelihood at `(intercept, slope)`.
pub fn probit_log_likelihood(scores: &[f64], labels: &[bool], intercept: f64, slope: f64) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let eta = intercept + slope * s;
            if y {
                log_norm_cdf(eta)
            } else {
                log_norm_cdf(-eta)
            }
        })
        .sum()
}

/// Gradient of [`probit_log_likelihood`] with respect to `(intercept, slope)`.
pub fn probit_gradient(scores: &[f64], labels: &[bool], intercept: f64, slope: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (&s, &y) in scores.iter().zip(labels) {
        let eta = intercept + slope * s;
        let d = if y { mills(eta) } else { -mills(-eta) };
        g[0] += d;
        g[1] += d * s;
    }
    g
}

/// Observed information (negative Hessian) as `[aa, ab, bb]`.
fn probit_information(scores: &[f64], labels: &[bool], intercept: f64, slope: f64) -> [f64; 3] {
    let mut h = [0.0; 3];
    for (&s, &y) in scores.iter().zip(labels) {
        let eta = intercept + slope * s;
        let w = if y {
            let l = mills(eta);
            l * (l + eta)
        } else {
            let l = mills(-eta);
            l * (l - eta)
        };
        h[0] += w;
        h[1] += w * s;
        h[2] += w * s * s;
    }
    h
}

fn find_separation(scores: &[f64], labels: &[bool]) -> Option<Separation> {
    let extreme = |class: bool, max: bool| {
        scores
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == class)
            .map(|(&s, _)| s)
            .fold(if max { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
                if max {
                    a.max(b)
                } else {
                    a.min(b)
                }
            })
    };
    let (max0, min1) = (extreme(false, true), extreme(true, false));
    let (max1, min0) = (extreme(true, true), extreme(false, false));
    if max0 <= min1 {
        Some(Separation {
            threshold: 0.5 * (max0 + min1),
            positive_above: true,
        })
    } else if max1 <= min0 {
        Some(Separation {
            threshold: 0.5 * (max1 + min0),
            positive_above: false,
        })
    } else {
        None
    }
}

/// Maximum-likelihood probit fit by Newton's method with step halving.
///
/// Converges when every coefficient moves less than 1e-8; gives up after
/// 100 iterations. Perfectly (or quasi-perfectly) separated data has no
/// finite maximum: the model is returned unconverged with the separating
/// threshold.
pub fn fit_probit(scores: &[f64], labels: &[bool]) -> Result<ProbitModel> {
    check_binary(scores, labels)?;
    if scores.iter().all(|&s| s == scores[0]) {
        return Err(Error::Degenerate("all scores are equal; slope is not identifiable".into()));
    }
    if let Some(sep) = find_separation(scores, labels) {
        return Ok(ProbitModel {
            intercept: f64::NAN,
            slope: f64::NAN,
            converged: false,
            n_iter: 0,
            separation: Some(sep),
        });
    }
    let (mut a, mut b) = (0.0, 0.0);
    let mut ll = probit_log_likelihood(scores, labels, a, b);
    for it in 1..=PROBIT_MAX_ITER {
        let g = probit_gradient(scores, labels, a, b);
        let h = probit_information(scores, labels, a, b);
        let det = h[0] * h[2] - h[1] * h[1];
        if det.is_nan() || det <= 0.0 {
            return Err(Error::Degenerate("singular probit information matrix".into()));
        }
        let mut da = (h[2] * g[0] - h[1] * g[1]) / det;
        let mut db = (h[0] * g[1] - h[1] * g[0]) / det;
        let mut halvings = 0;
        loop {
            let next = probit_log_likelihood(scores, labels, a + da, b + db);
            if next >= ll - 1e-12 * ll.abs() || halvings >= 30 {
                ll = next;
                break;
            }
            da *= 0.5;
            db *= 0.5;
            halvings += 1;
        }
        a += da;
        b += db;
        if da.abs().max(db.abs()) < PROBIT_TOLERANCE {
            return Ok(ProbitModel {
                intercept: a,
                slope: b,
                converged: true,
                n_iter: it,
                separation: None,
            });
        }
    }
    Ok(ProbitModel {
        intercept: a,
        slope: b,
        converged: false,
        n_iter: PROBIT_MAX_ITER,
        separation: None,
    })
}

/// `Phi(intercept + slope * s)` per score. Unconverged models are refused
/// unless `force` is set.
pub fn predict_prob(model: &ProbitModel, scores: &[f64], force: bool) -> Result<Vec<f64>> {
    if !model.converged && !force {
        return Err(Error::InvalidArgument("probit model did not converge".into()));
    }
    if !model.intercept.is_finite() || !model.slope.is_finite() {
        return Err(Error::InvalidArgument("probit model has no finite coefficients".into()));
    }
    Ok(scores
        .iter()
        .map(|&s| norm_cdf(model.intercept + model.slope * s))
        .collect())
}

/// ROC points `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one per distinct
/// score threshold (descending). Tied scores move both rates at once.
/// `labels[i] == true` marks a positive.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>> {
    check_binary(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg, tp as f64 / n_pos));
    }
    Ok(points)
}

/// Trapezoidal area under [`roc_curve`]; equals the probability that a
/// random positive outscores a random negative, ties counting one half.
///
/// The area is accumulated as an integer count and the smaller of the area
/// and its complement is rounded onto the 2^-53 grid, so swapping the
/// labels gives exactly `1 - auc`.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_binary(scores, labels)?;
    let n_pos = labels.iter().filter(|&&l| l).count() as u128;
    let n_neg = labels.len() as u128 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    // twice the trapezoid area in units of 1 / (n_pos n_neg)
    let (mut tp, mut twice) = (0u128, 0u128);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut dtp, mut dfp) = (0u128, 0u128);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        twice += dfp * (2 * tp + dtp);
        tp += dtp;
    }
    let denom = 2 * n_pos * n_neg;
    let small = twice.min(denom - twice);
    let scale = 1u128 << 53;
    let grid = (2 * small * scale + denom) / (2 * denom);
    let y = grid as f64 / scale as f64;
    Ok(if twice <= denom - twice { y } else { 1.0 - y })
}
