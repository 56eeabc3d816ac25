use forensic_core::model::LabeledMatrix;
use forensic_core::signature::{auc, metagene_scores, probit_gradient, probit_log_likelihood, fit_probit};
use forensic_core::stats::{norm_cdf, norm_pdf};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn concordance(scores: &[f64], labels: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

fn random_binary(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    loop {
        let l: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        if l.iter().any(|&x| x) && l.iter().any(|&x| !x) {
            return l;
        }
    }
}

#[test]
fn auc_equals_pair_concordance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..500 {
        let n = rng.random_range(2..60);
        let labels = random_binary(&mut rng, n);
        // every other instance uses coarse integer scores to force ties
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if trial % 2 == 0 {
                    rng.random_range(0..5) as f64
                } else {
                    rng.sample::<f64, _>(StandardNormal)
                }
            })
            .collect();
        let a = auc(&scores, &labels).unwrap();
        assert!((a - concordance(&scores, &labels)).abs() <= 1e-12, "trial {trial}");
        let inverted: Vec<bool> = labels.iter().map(|l| !l).collect();
        assert_eq!(auc(&scores, &inverted).unwrap(), 1.0 - a, "trial {trial}");
    }
}

#[test]
fn probit_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-5;
    for _ in 0..100 {
        let n = rng.random_range(10..40);
        let scores: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0).collect();
        let labels = random_binary(&mut rng, n);
        let a = rng.random_range(-2.0..2.0);
        let b = rng.random_range(-2.0..2.0);
        let g = probit_gradient(&scores, &labels, a, b);
        let ll = |a: f64, b: f64| probit_log_likelihood(&scores, &labels, a, b);
        let fd = [
            (ll(a + h, b) - ll(a - h, b)) / (2.0 * h),
            (ll(a, b + h) - ll(a, b - h)) / (2.0 * h),
        ];
        for k in 0..2 {
            let rel = (g[k] - fd[k]).abs() / g[k].abs().max(fd[k].abs()).max(1e-6);
            assert!(rel < 1e-5, "component {k}: analytic {} vs fd {}", g[k], fd[k]);
        }
    }
}

#[test]
fn probit_fit_zeroes_the_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let scores: Vec<f64> = (0..80).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let labels: Vec<bool> = scores
        .iter()
        .map(|&s| rng.random::<f64>() < norm_cdf(0.3 + 1.2 * s))
        .collect();
    let m = fit_probit(&scores, &labels).unwrap();
    assert!(m.converged);
    let g = probit_gradient(&scores, &labels, m.intercept, m.slope);
    assert!(g[0].abs() < 1e-6 && g[1].abs() < 1e-6);
}

fn planted(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Vec<Vec<f64>> {
    let u: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
    let v: Vec<f64> = (0..c).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect();
    (0..r)
        .map(|i| {
            (0..c)
                .map(|j| u[i] * v[j] + rng.sample::<f64, _>(StandardNormal) + 5.0)
                .collect()
        })
        .collect()
}

#[test]
fn metagene_matches_dense_eigensolve() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (r, c) in [(8, 20), (25, 12), (10, 10), (40, 6), (3, 30)] {
        let rows = planted(&mut rng, r, c);
        let m = LabeledMatrix::from_rows(
            (0..r).map(|i| format!("g{i}")),
            (0..c).map(|j| format!("s{j}")),
            &rows,
        )
        .unwrap();
        let mg = metagene_scores(&m).unwrap();

        let mut x = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
        for i in 0..r {
            let mu = x.row(i).mean();
            x.row_mut(i).add_scalar_mut(-mu);
        }
        let gram = &x * x.transpose();
        let eig = gram.symmetric_eigen();
        let lead = eig.eigenvalues.imax();
        let mut u = eig.eigenvectors.column(lead).into_owned();
        let pivot = u.iamax();
        if u[pivot] < 0.0 {
            u.neg_mut();
        }
        let scores = x.transpose() * &u;
        for j in 0..c {
            assert!(
                (mg.scores[j] - scores[j]).abs() < 1e-8,
                "{r}x{c} sample {j}: {} vs {}",
                mg.scores[j],
                scores[j]
            );
        }
        assert!((mg.singular_value - eig.eigenvalues[lead].sqrt()).abs() < 1e-8);
    }
}

#[test]
fn normal_cdf_matches_simpson_integration() {
    let simpson = |b: f64| {
        let (a, n) = (-12.0, 20_000);
        let h = (b - a) / n as f64;
        let mut s = norm_pdf(a) + norm_pdf(b);
        for k in 1..n {
            s += norm_pdf(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    for x in [-3.0, -1.0, 0.0, 0.5, 1.6449, 2.5] {
        assert!((norm_cdf(x) - simpson(x)).abs() < 1e-10, "x = {x}");
    }
    assert!((norm_cdf(1.6449) - 0.95).abs() < 1e-5);
}
