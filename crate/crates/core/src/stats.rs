//! Small numeric helpers shared by the detectors.

use petgraph::unionfind::UnionFind;
use statrs::function::erf::erfc;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Variance with denominator `n - ddof`.
pub fn variance(x: &[f64], ddof: usize) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - ddof) as f64
}

/// Pearson correlation over pairwise-complete entries.
///
/// `None` when fewer than three complete pairs remain or either side has
/// zero variance. Bitwise-equal complete vectors correlate at exactly 1.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    if pairs.len() < 3 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    if pairs.iter().all(|(a, b)| a.to_bits() == b.to_bits()) {
        return Some(1.0);
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Centers `x` and scales it to unit Euclidean norm, so that the dot
/// product of two standardized vectors is their Pearson correlation.
///
/// `None` for vectors with missing entries or zero variance.
pub fn standardize(x: &[f64]) -> Option<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return None;
    }
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return None;
    }
    Some(centered.into_iter().map(|v| v / norm).collect())
}

/// Neumaier-compensated sum; correctly rounded for short inputs.
pub fn compensated_sum(x: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &v in x {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pooled-variance two-sample t statistic of `a` versus `b`
/// (positive when `a` has the larger mean).
///
/// Zero pooled variance yields 0 for equal means and a signed infinity
/// otherwise.
pub fn pooled_t(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let ss = |x: &[f64], m: f64| x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    let pooled = (ss(a, ma) + ss(b, mb)) / (na + nb - 2.0);
    let diff = ma - mb;
    let se = (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" definition). `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Connected components of an undirected graph on `n` nodes.
///
/// Components are returned with members ascending, ordered by smallest
/// member. Singletons are included.
pub fn components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        by_root.entry(uf.find(i)).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = by_root.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_is_order_free() {
        assert_eq!(0.2 + 0.4 + 0.6, 1.2000000000000002);
        assert_eq!(compensated_sum(&[0.2, 0.4, 0.6]), 1.2);
        assert_eq!(compensated_sum(&[1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn pearson_of_copy_is_exactly_one() {
        let x = [0.1, 0.7, 0.3, 1e-9, 42.0];
        assert_eq!(pearson(&x, &x), Some(1.0));
    }

    #[test]
    fn pearson_skips_missing_pairs() {
        let x = [1.0, 2.0, f64::NAN, 3.0, 4.0];
        let y = [2.0, 4.0, 100.0, 6.0, 8.0];
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    }

    #[test]
    fn standardized_dot_is_correlation() {
        let x = [1.0, 3.0, 2.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0];
        let r = dot(&standardize(&x).unwrap(), &standardize(&y).unwrap());
        assert!((r - pearson(&x, &y).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn t_statistic_sign_and_degenerate_cases() {
        assert!(pooled_t(&[5.0, 6.0], &[1.0, 2.0]) > 0.0);
        assert_eq!(pooled_t(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
        assert_eq!(pooled_t(&[2.0, 2.0], &[1.0, 1.0]), f64::INFINITY);
    }

    #[test]
    fn quantile_type7() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_eq!(quantile_sorted(&s, 0.75), 3.25);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
    }

    #[test]
    fn components_are_sorted_by_smallest_member() {
        let c = components(5, [(4, 1), (2, 3)]);
        assert_eq!(c, vec![vec![0], vec![1, 4], vec![2, 3]]);
    }
}
