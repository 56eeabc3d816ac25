//! Row-wise transformation pipelines and their recovery from data.
//!
//! A pipeline is an ordered subset of `Log`, `RowZScore`, `Exp`, `Round`
//! (in that order, each at most once). Missing entries stay missing; row
//! statistics use the observed entries only.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::LabeledMatrix;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Base {
    E,
    Two,
    Ten,
}

impl Base {
    pub const ALL: [Base; 3] = [Base::E, Base::Two, Base::Ten];

    fn log(self, v: f64) -> f64 {
        match self {
            Base::E => v.ln(),
            Base::Two => v.log2(),
            Base::Ten => v.log10(),
        }
    }

    fn exp(self, v: f64) -> f64 {
        match self {
            Base::E => v.exp(),
            Base::Two => v.exp2(),
            Base::Ten => 10f64.powf(v),
        }
    }

    fn token(self) -> &'static str {
        match self {
            Base::E => "e",
            Base::Two => "2",
            Base::Ten => "10",
        }
    }
}

/// Denominator of the row standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Denominator {
    NMinusOne,
    N,
}

impl Denominator {
    pub const ALL: [Denominator; 2] = [Denominator::NMinusOne, Denominator::N];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Log(Base),
    RowZScore(Denominator),
    Exp(Base),
    Round(u32),
}

impl Step {
    fn rank(self) -> u8 {
        match self {
            Step::Log(_) => 0,
            Step::RowZScore(_) => 1,
            Step::Exp(_) => 2,
            Step::Round(_) => 3,
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Log(b) => write!(f, "log:{}", b.token()),
            Step::RowZScore(Denominator::NMinusOne) => f.write_str("zscore:n-1"),
            Step::RowZScore(Denominator::N) => f.write_str("zscore:n"),
            Step::Exp(b) => write!(f, "exp:{}", b.token()),
            Step::Round(d) => write!(f, "round:{d}"),
        }
    }
}

/// Largest accepted `Round` digit count.
pub const MAX_ROUND_DIGITS: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TransformPipeline {
    steps: Vec<Step>,
}

impl TransformPipeline {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        for w in steps.windows(2) {
            if w[0].rank() >= w[1].rank() {
                return Err(Error::InvalidPipeline(format!(
                    "{} may not precede {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(Step::Round(d)) = steps.iter().find(|s| matches!(s, Step::Round(_))) {
            if *d > MAX_ROUND_DIGITS {
                return Err(Error::InvalidPipeline(format!("round:{d} exceeds {MAX_ROUND_DIGITS} digits")));
            }
        }
        Ok(TransformPipeline { steps })
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `log:b | zscore:d | exp:b`, optionally followed by `round:digits`.
    pub fn log_z_exp(base: Base, denom: Denominator, round: Option<u32>) -> Self {
        let mut steps = vec![Step::Log(base), Step::RowZScore(denom), Step::Exp(base)];
        if let Some(d) = round {
            steps.push(Step::Round(d));
        }
        Self::new(steps).expect("ordered steps")
    }

    /// The 12 candidates searched by default: each base (shared by the log
    /// and exp steps) times each z-score denominator, unrounded and
    /// rounded to two digits.
    pub fn default_grid() -> Vec<Self> {
        let mut out = Vec::new();
        for base in Base::ALL {
            for denom in Denominator::ALL {
                for round in [None, Some(2)] {
                    out.push(Self::log_z_exp(base, denom, round));
                }
            }
        }
        out
    }
}

impl fmt::Display for TransformPipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("identity");
        }
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

fn parse_base(s: &str) -> Result<Base> {
    match s {
        "e" => Ok(Base::E),
        "2" => Ok(Base::Two),
        "10" => Ok(Base::Ten),
        other => Err(Error::InvalidPipeline(format!("unknown base {other:?}"))),
    }
}

impl FromStr for TransformPipeline {
    type Err = Error;

    /// Parses e.g. `log:e|zscore:n-1|exp:e|round:2`; `identity` or an
    /// empty string is the empty pipeline.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "identity" {
            return Ok(Self::identity());
        }
        let mut steps = Vec::new();
        for part in s.split('|') {
            let (kind, arg) = part.trim().split_once(':').unwrap_or((part.trim(), ""));
            let step = match kind {
                "log" => Step::Log(if arg.is_empty() { Base::E } else { parse_base(arg)? }),
                "exp" => Step::Exp(if arg.is_empty() { Base::E } else { parse_base(arg)? }),
                "zscore" => Step::RowZScore(match arg {
                    "" | "n-1" => Denominator::NMinusOne,
                    "n" => Denominator::N,
                    other => {
                        return Err(Error::InvalidPipeline(format!("unknown denominator {other:?}")))
                    }
                }),
                "round" => Step::Round(
                    arg.parse()
                        .map_err(|_| Error::InvalidPipeline(format!("bad digit count {arg:?}")))?,
                ),
                other => return Err(Error::InvalidPipeline(format!("unknown step {other:?}"))),
            };
            steps.push(step);
        }
        Self::new(steps)
    }
}

/// Rounds half away from zero to `digits` decimals.
pub fn round_to(v: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    (v * scale).round() / scale
}

fn transform_row(row: &mut [f64], p: &TransformPipeline) -> std::result::Result<(), RowError> {
    for step in p.steps() {
        match *step {
            Step::Log(b) => {
                for (j, v) in row.iter_mut().enumerate() {
                    if v.is_nan() {
                        continue;
                    }
                    if *v <= 0.0 {
                        return Err(RowError::NonPositive(j, *v));
                    }
                    *v = b.log(*v);
                }
            }
            Step::RowZScore(d) => {
                let obs: Vec<f64> = row.iter().copied().filter(|v| !v.is_nan()).collect();
                let ddof = match d {
                    Denominator::NMinusOne => 1,
                    Denominator::N => 0,
                };
                if obs.len() <= ddof {
                    return Err(RowError::ZeroVariance);
                }
                let m = stats::mean(&obs);
                let sd = stats::variance(&obs, ddof).sqrt();
                if sd.is_nan() || sd <= 0.0 {
                    return Err(RowError::ZeroVariance);
                }
                for v in row.iter_mut() {
                    *v = (*v - m) / sd;
                }
            }
            Step::Exp(b) => row.iter_mut().for_each(|v| *v = b.exp(*v)),
            Step::Round(d) => row.iter_mut().for_each(|v| *v = round_to(*v, d)),
        }
    }
    Ok(())
}

enum RowError {
    NonPositive(usize, f64),
    ZeroVariance,
}

/// Applies `p` to every row of `m`. Ids and labels are unchanged.
pub fn apply_pipeline(m: &LabeledMatrix, p: &TransformPipeline) -> Result<LabeledMatrix> {
    let ns = m.n_samples();
    let rows: Vec<std::result::Result<Vec<f64>, Error>> = (0..m.n_features())
        .into_par_iter()
        .map(|r| {
            let mut row = m.row(r).to_vec();
            transform_row(&mut row, p).map_err(|e| match e {
                RowError::NonPositive(j, value) => Error::NonPositive {
                    feature: m.feature_ids()[r].clone(),
                    sample: m.sample_ids()[j].clone(),
                    value,
                },
                RowError::ZeroVariance => Error::ZeroVariance(m.feature_ids()[r].clone()),
            })?;
            Ok(row)
        })
        .collect();
    let mut values = Vec::with_capacity(m.n_features() * ns);
    for row in rows {
        values.extend(row?);
    }
    Ok(m.map_values(|r, c, _| values[r * ns + c]))
}

/// Outcome of [`infer_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineFit {
    pub best: TransformPipeline,
    /// Mean Pearson correlation between query rows and transformed
    /// reference rows.
    pub fit: f64,
    /// Largest absolute difference between query and transformed reference.
    pub residual: f64,
    /// Fit of every candidate, in candidate order (`None` when the
    /// candidate could not be applied to the reference).
    pub candidate_fits: Vec<Option<f64>>,
}

/// Fits closer than this are ties.
pub const FIT_TIE_TOLERANCE: f64 = 1e-12;

fn mean_row_correlation(a: &LabeledMatrix, b: &LabeledMatrix) -> f64 {
    let total: f64 = (0..a.n_features())
        .map(|r| stats::pearson(a.row(r), b.row(r)).unwrap_or(0.0))
        .sum();
    total / a.n_features() as f64
}

fn max_abs_deviation(a: &LabeledMatrix, b: &LabeledMatrix) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .filter(|(x, y)| !x.is_nan() && !y.is_nan())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Picks the candidate whose output on `reference` best correlates, row by
/// row, with `query`. Rows and columns correspond by position. Ties (within
/// [`FIT_TIE_TOLERANCE`]) go to fewer steps, then to the earlier candidate.
/// Rows that correlate undefinedly (constant) count as 0.
pub fn infer_pipeline(
    query: &LabeledMatrix,
    reference: &LabeledMatrix,
    candidates: &[TransformPipeline],
) -> Result<PipelineFit> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate pipeline list"));
    }
    if query.n_features() != reference.n_features() || query.n_samples() != reference.n_samples() {
        return Err(Error::ShapeMismatch(format!(
            "query is {}x{}, reference is {}x{}",
            query.n_features(),
            query.n_samples(),
            reference.n_features(),
            reference.n_samples()
        )));
    }
    if query.n_features() == 0 {
        return Err(Error::Empty("query matrix"));
    }
    let evaluated: Vec<Option<(f64, f64)>> = candidates
        .iter()
        .map(|p| {
            apply_pipeline(reference, p)
                .ok()
                .map(|t| (mean_row_correlation(query, &t), max_abs_deviation(query, &t)))
        })
        .collect();
    let mut best: Option<usize> = None;
    for (i, e) in evaluated.iter().enumerate() {
        let Some((fit, _)) = e else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let (bfit, _) = evaluated[b].unwrap();
                let better = if (fit - bfit).abs() <= FIT_TIE_TOLERANCE {
                    candidates[i].len() < candidates[b].len()
                } else {
                    *fit > bfit
                };
                Some(if better { i } else { b })
            }
        };
    }
    let b = best.ok_or_else(|| {
        Error::Degenerate("no candidate pipeline could be applied to the reference".into())
    })?;
    let (fit, residual) = evaluated[b].unwrap();
    Ok(PipelineFit {
        best: candidates[b].clone(),
        fit,
        residual,
        candidate_fits: evaluated.iter().map(|e| e.map(|(f, _)| f)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn one_row(v: Vec<f64>) -> LabeledMatrix {
        let n = v.len();
        LabeledMatrix::from_rows(["g"], (0..n).map(|i| format!("s{i}")), &[v]).unwrap()
    }

    #[test]
    fn reported_pipeline_on_e_powers() {
        let p: TransformPipeline = "log:e|zscore:n-1|exp:e|round:2".parse().unwrap();
        let out = apply_pipeline(&one_row(vec![1.0, E, E * E]), &p).unwrap();
        assert_eq!(out.row(0), &[0.37, 1.0, 2.72]);
    }

    #[test]
    fn constant_row_is_zero_variance() {
        let p: TransformPipeline = "zscore".parse().unwrap();
        let err = apply_pipeline(&one_row(vec![5.0, 5.0, 5.0]), &p).unwrap_err();
        assert_eq!(err, Error::ZeroVariance("g".into()));
    }

    #[test]
    fn nonpositive_under_log_names_cell() {
        let p: TransformPipeline = "log:2".parse().unwrap();
        let err = apply_pipeline(&one_row(vec![1.0, 0.0, 3.0]), &p).unwrap_err();
        assert!(matches!(err, Error::NonPositive { ref sample, .. } if sample == "s1"));
    }

    #[test]
    fn identity_leaves_input() {
        let m = one_row(vec![1.0, -2.0, f64::NAN]);
        let out = apply_pipeline(&m, &TransformPipeline::identity()).unwrap();
        assert_eq!(out.row(0)[..2], m.row(0)[..2]);
        assert!(out.row(0)[2].is_nan());
    }

    #[test]
    fn pipeline_string_round_trip() {
        for p in TransformPipeline::default_grid() {
            let s = p.to_string();
            assert_eq!(s.parse::<TransformPipeline>().unwrap(), p);
        }
        assert_eq!("identity".parse::<TransformPipeline>().unwrap(), TransformPipeline::identity());
    }

    #[test]
    fn misordered_or_repeated_steps_rejected() {
        assert!("exp:e|log:e".parse::<TransformPipeline>().is_err());
        assert!("log:e|log:2".parse::<TransformPipeline>().is_err());
        assert!("round:99".parse::<TransformPipeline>().is_err());
        assert!("sqrt".parse::<TransformPipeline>().is_err());
    }

    #[test]
    fn zscore_row_has_unit_correlation_with_source() {
        let m = one_row(vec![3.0, 1.0, 4.0, 1.5, 9.0]);
        let z = apply_pipeline(&m, &"zscore:n".parse().unwrap()).unwrap();
        assert!((stats::pearson(m.row(0), z.row(0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_wins_on_identical_query() {
        let m = LabeledMatrix::from_rows(
            ["a", "b"],
            ["x", "y", "z", "w"],
            &[vec![1.0, 2.0, 4.0, 3.0], vec![5.0, 2.0, 1.0, 7.0]],
        )
        .unwrap();
        let mut cands = TransformPipeline::default_grid();
        cands.push(TransformPipeline::identity());
        let fit = infer_pipeline(&m, &m, &cands).unwrap();
        assert_eq!(fit.best, TransformPipeline::identity());
        assert!((fit.fit - 1.0).abs() < 1e-12);
        assert_eq!(fit.residual, 0.0);
    }

    #[test]
    fn inference_errors() {
        let m = one_row(vec![1.0, 2.0, 3.0]);
        assert!(matches!(infer_pipeline(&m, &m, &[]), Err(Error::Empty(_))));
        let other = one_row(vec![1.0, 2.0]);
        assert!(matches!(
            infer_pipeline(&m, &other, &[TransformPipeline::identity()]),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
