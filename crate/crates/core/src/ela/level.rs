//! Level-set features: LDA/QDA misclassification under stratified 5-fold CV.
//!
//! Binary labels split the sample at an objective-value quantile; LDA uses a
//! pooled covariance, QDA one covariance per class. Degenerate covariances
//! fall back to a ridge-regularized matrix (1e-6 on the diagonal).

use crate::ela::distr::quantile_sorted;
use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_inverse_logdet, Matrix};

pub const QUANTILES: [(f64, &str); 3] = [(0.10, "10"), (0.25, "25"), (0.50, "50")];
const FOLDS: usize = 5;
const RIDGE: f64 = 1e-6;

struct ClassModel {
    mean: Vec<f64>,
    inv: Matrix,
    logdet: f64,
    log_prior: f64,
}

fn class_mean(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for &i in members {
        for (m, v) in mean.iter_mut().zip(&points[i]) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= members.len() as f64;
    }
    mean
}

/// Scatter matrix around a given mean (sum of outer products).
fn scatter(points: &[Vec<f64>], members: &[usize], mean: &[f64]) -> Matrix {
    let dim = mean.len();
    let mut s = Matrix::zeros(dim, dim);
    for &i in members {
        for a in 0..dim {
            let da = points[i][a] - mean[a];
            for b in a..dim {
                let db = points[i][b] - mean[b];
                s.data[a * dim + b] += da * db;
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            s.data[a * dim + b] = s.data[b * dim + a];
        }
    }
    s
}

/// Invert a covariance, ridging the diagonal until it is positive definite.
fn robust_inverse(mut cov: Matrix) -> (Matrix, f64) {
    let dim = cov.rows;
    let mut ridge = RIDGE;
    loop {
        match cholesky_inverse_logdet(&cov) {
            Ok(out) => return out,
            Err(_) => {
                for i in 0..dim {
                    cov.data[i * dim + i] += ridge;
                }
                ridge *= 10.0;
            }
        }
    }
}

/// Train LDA (pooled covariance) or QDA (per-class) on the given rows.
fn train(
    points: &[Vec<f64>],
    labels: &[bool],
    rows: &[usize],
    pooled: bool,
) -> Vec<(bool, ClassModel)> {
    let n = rows.len() as f64;
    let classes: Vec<(bool, Vec<usize>)> = [false, true]
        .into_iter()
        .map(|c| {
            (
                c,
                rows.iter().cloned().filter(|&i| labels[i] == c).collect::<Vec<_>>(),
            )
        })
        .filter(|(_, members)| !members.is_empty())
        .collect();

    if pooled {
        let dim = points[0].len();
        let mut pooled_scatter = Matrix::zeros(dim, dim);
        let mut means = Vec::new();
        for (c, members) in &classes {
            let mean = class_mean(points, members);
            let s = scatter(points, members, &mean);
            for (acc, v) in pooled_scatter.data.iter_mut().zip(&s.data) {
                *acc += v;
            }
            means.push((*c, mean, members.len()));
        }
        let denom = (rows.len().max(classes.len() + 1) - classes.len()) as f64;
        for v in pooled_scatter.data.iter_mut() {
            *v /= denom;
        }
        let (inv, logdet) = robust_inverse(pooled_scatter);
        means
            .into_iter()
            .map(|(c, mean, count)| {
                (
                    c,
                    ClassModel {
                        mean,
                        inv: inv.clone(),
                        logdet,
                        log_prior: (count as f64 / n).ln(),
                    },
                )
            })
            .collect()
    } else {
        classes
            .into_iter()
            .map(|(c, members)| {
                let mean = class_mean(points, &members);
                let mut cov = scatter(points, &members, &mean);
                let denom = (members.len().max(2) - 1) as f64;
                for v in cov.data.iter_mut() {
                    *v /= denom;
                }
                let (inv, logdet) = robust_inverse(cov);
                (
                    c,
                    ClassModel {
                        mean,
                        inv,
                        logdet,
                        log_prior: (members.len() as f64 / n).ln(),
                    },
                )
            })
            .collect()
    }
}

fn classify(models: &[(bool, ClassModel)], x: &[f64]) -> bool {
    let mut best = f64::NEG_INFINITY;
    let mut label = false;
    for (c, m) in models {
        let diff: Vec<f64> = x.iter().zip(&m.mean).map(|(a, b)| a - b).collect();
        let q: f64 = m
            .inv
            .matvec(&diff)
            .iter()
            .zip(&diff)
            .map(|(a, b)| a * b)
            .sum();
        let score = -0.5 * m.logdet - 0.5 * q + m.log_prior;
        if score > best {
            best = score;
            label = *c;
        }
    }
    label
}

/// Mean misclassification error over stratified folds.
fn cv_mmce(points: &[Vec<f64>], labels: &[bool], pooled: bool) -> f64 {
    let n = points.len();
    // Deterministic stratified assignment: round-robin within each class.
    let mut fold_of = vec![0usize; n];
    for class in [false, true] {
        let mut k = 0;
        for i in 0..n {
            if labels[i] == class {
                fold_of[i] = k % FOLDS;
                k += 1;
            }
        }
    }
    let mut errors = Vec::with_capacity(FOLDS);
    for fold in 0..FOLDS {
        let train_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| fold_of[i] == fold).collect();
        if test_rows.is_empty() || train_rows.is_empty() {
            continue;
        }
        let models = train(points, labels, &train_rows, pooled);
        let wrong = test_rows
            .iter()
            .filter(|&&i| classify(&models, &points[i]) != labels[i])
            .count();
        errors.push(wrong as f64 / test_rows.len() as f64);
    }
    errors.iter().sum::<f64>() / errors.len() as f64
}

/// Level-set features for the standard quantiles 0.10, 0.25, 0.50.
pub fn ela_level(points: &[Vec<f64>], values: &[f64]) -> Result<Vec<FeatureValue>> {
    ela_level_at(points, values, &QUANTILES)
}

/// Level-set features at explicit quantiles (exposed for tests).
pub fn ela_level_at(
    points: &[Vec<f64>],
    values: &[f64],
    quantiles: &[(f64, &'static str)],
) -> Result<Vec<FeatureValue>> {
    let n = points.len();
    if n < 20 {
        return Err(Error::invalid_argument(format!(
            "ela_level needs >= 20 points, got {n}"
        )));
    }
    if n != values.len() {
        return Err(Error::invalid_argument("points/values length mismatch"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));

    let mut out = Vec::with_capacity(quantiles.len() * 3);
    for &(q, suffix) in quantiles {
        let threshold = quantile_sorted(&sorted, q);
        let labels: Vec<bool> = values.iter().map(|&v| v <= threshold).collect();
        let positives = labels.iter().filter(|&&l| l).count();
        let names = level_names(suffix);
        if positives == 0 || positives == n {
            out.push((names.0, None));
            out.push((names.1, None));
            out.push((names.2, None));
            continue;
        }
        let mmce_lda = cv_mmce(points, &labels, true);
        let mmce_qda = cv_mmce(points, &labels, false);
        let ratio = if mmce_qda > 0.0 {
            Some(mmce_lda / mmce_qda)
        } else {
            None
        };
        out.push((names.0, Some(mmce_lda)));
        out.push((names.1, Some(mmce_qda)));
        out.push((names.2, ratio));
    }
    Ok(out)
}

fn level_names(suffix: &'static str) -> (&'static str, &'static str, &'static str) {
    match suffix {
        "10" => (
            "ela_level.mmce_lda_10",
            "ela_level.mmce_qda_10",
            "ela_level.lda_qda_10",
        ),
        "25" => (
            "ela_level.mmce_lda_25",
            "ela_level.mmce_qda_25",
            "ela_level.lda_qda_25",
        ),
        "50" => (
            "ela_level.mmce_lda_50",
            "ela_level.mmce_qda_50",
            "ela_level.lda_qda_50",
        ),
        _ => panic!("unsupported quantile suffix {suffix}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn grid_2d(side: usize) -> Vec<Vec<f64>> {
        let mut points = Vec::new();
        for i in 0..side {
            for j in 0..side {
                points.push(vec![i as f64 / side as f64, j as f64 / side as f64]);
            }
        }
        points
    }

    fn get(out: &[FeatureValue], name: &str) -> Option<f64> {
        out.iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn linearly_separable_labels_are_easy_for_lda() {
        let points = grid_2d(10);
        let values: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let out = ela_level(&points, &values).unwrap();
        let mmce = get(&out, "ela_level.mmce_lda_50").unwrap();
        assert!(mmce <= 0.05, "mmce_lda_50 = {mmce}");
    }

    #[test]
    fn random_labels_hover_near_chance() {
        let mut rng = seed::rng(2024, &[]);
        let points = grid_2d(10);
        let values: Vec<f64> = (0..points.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let out = ela_level(&points, &values).unwrap();
        let mmce = get(&out, "ela_level.mmce_lda_50").unwrap();
        assert!((mmce - 0.5).abs() <= 0.15, "mmce_lda_50 = {mmce}");
    }

    #[test]
    fn radial_landscape_favors_qda() {
        let points = grid_2d(12);
        let values: Vec<f64> = points
            .iter()
            .map(|p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2))
            .collect();
        let out = ela_level(&points, &values).unwrap();
        let lda = get(&out, "ela_level.mmce_lda_25").unwrap();
        let qda = get(&out, "ela_level.mmce_qda_25").unwrap();
        assert!(qda < lda, "expected QDA ({qda}) < LDA ({lda})");
    }

    #[test]
    fn small_samples_are_rejected() {
        let points = vec![vec![0.0]; 10];
        let values = vec![0.0; 10];
        assert!(ela_level(&points, &values).is_err());
    }

    #[test]
    fn constant_values_flag_missing() {
        let points = grid_2d(6);
        let values = vec![1.0; points.len()];
        let out = ela_level(&points, &values).unwrap();
        assert_eq!(get(&out, "ela_level.mmce_lda_50"), None);
    }
}
