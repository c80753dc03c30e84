//! Analysis artifacts built on top of raw Shapley explanations: global
//! importance rankings, beeswarm export, top-k intersections, per-fold
//! representation vectors, a t-SNE embedding and local explanation lists.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;
use crate::shap::ShapExplanation;
use crate::table::{self};

// --- global importance ------------------------------------------------------

/// Mean absolute attribution per feature, ranked per target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalImportance {
    pub target_names: Vec<String>,
    pub feature_names: Vec<String>,
    /// `ranked[target]` = (feature index, mean |phi|), descending; ties
    /// fall back to catalog order.
    pub ranked: Vec<Vec<(usize, f64)>>,
}

pub fn global_importance(
    explanations: &[ShapExplanation],
    feature_names: &[String],
) -> Result<GlobalImportance> {
    let first = explanations
        .first()
        .ok_or_else(|| Error::invalid_argument("global_importance needs >= 1 explanation"))?;
    let n_features = first.n_features();
    let m = first.n_targets();
    if n_features != feature_names.len() {
        return Err(Error::invalid_argument("feature name count mismatch"));
    }
    for e in explanations {
        if e.n_features() != n_features || e.n_targets() != m {
            return Err(Error::invalid_argument("inconsistent explanation shapes"));
        }
    }
    let count = explanations.len() as f64;
    let ranked = (0..m)
        .map(|t| {
            let mut scores: Vec<(usize, f64)> = (0..n_features)
                .map(|f| {
                    let total: f64 = explanations.iter().map(|e| e.phi[f][t].abs()).sum();
                    (f, total / count)
                })
                .collect();
            scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            scores
        })
        .collect();
    Ok(GlobalImportance {
        target_names: first.target_names.clone(),
        feature_names: feature_names.to_vec(),
        ranked,
    })
}

impl GlobalImportance {
    /// Importance of a feature for a target (unranked lookup).
    pub fn importance(&self, target: usize, feature: usize) -> f64 {
        self.ranked[target]
            .iter()
            .find(|(f, _)| *f == feature)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<String> = ["target", "rank", "feature", "importance"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (t, target) in self.target_names.iter().enumerate() {
            for (rank, (f, v)) in self.ranked[t].iter().enumerate() {
                rows.push(vec![
                    target.clone(),
                    (rank + 1).to_string(),
                    self.feature_names[*f].clone(),
                    table::fmt_f64(*v),
                ]);
            }
        }
        table::write_csv(&header, &rows)
    }
}

/// Average per-fold importances (fold mean of per-fold means), then re-rank.
pub fn mean_importance(per_fold: &[GlobalImportance]) -> Result<GlobalImportance> {
    let first = per_fold
        .first()
        .ok_or_else(|| Error::invalid_argument("mean_importance needs >= 1 fold"))?;
    let n_features = first.feature_names.len();
    let m = first.target_names.len();
    for imp in per_fold {
        if imp.feature_names != first.feature_names || imp.target_names != first.target_names {
            return Err(Error::invalid_argument("fold importances are inconsistent"));
        }
    }
    let ranked = (0..m)
        .map(|t| {
            let mut scores: Vec<(usize, f64)> = (0..n_features)
                .map(|f| {
                    let total: f64 = per_fold.iter().map(|imp| imp.importance(t, f)).sum();
                    (f, total / per_fold.len() as f64)
                })
                .collect();
            scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            scores
        })
        .collect();
    Ok(GlobalImportance {
        target_names: first.target_names.clone(),
        feature_names: first.feature_names.clone(),
        ranked,
    })
}

/// The k most important feature names per target, in rank order.
pub fn top_k(importance: &GlobalImportance, k: usize) -> Result<Vec<Vec<String>>> {
    if k > importance.feature_names.len() {
        return Err(Error::invalid_argument(format!(
            "k {k} exceeds the catalog size {}",
            importance.feature_names.len()
        )));
    }
    Ok(importance
        .ranked
        .iter()
        .map(|scores| {
            scores
                .iter()
                .take(k)
                .map(|(f, _)| importance.feature_names[*f].clone())
                .collect()
        })
        .collect())
}

// --- beeswarm export ---------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BeeswarmRow {
    pub target: String,
    pub feature: String,
    pub instance: usize,
    pub phi: f64,
    /// Feature value min-max normalized to [0,1]; 0.5 for constant columns.
    pub normalized_value: f64,
}

/// Plot data for attribution summary plots, restricted to the `top` features
/// by global importance per target.
pub fn beeswarm_export(
    explanations: &[ShapExplanation],
    feature_values: &[Vec<f64>],
    feature_names: &[String],
    top: usize,
) -> Result<Vec<BeeswarmRow>> {
    if explanations.len() != feature_values.len() {
        return Err(Error::invalid_argument(
            "explanations and feature rows are misaligned",
        ));
    }
    let importance = global_importance(explanations, feature_names)?;
    let n_features = feature_names.len();
    let top = top.min(n_features);

    // Per-feature min-max over the supplied instances.
    let mut lo = vec![f64::INFINITY; n_features];
    let mut hi = vec![f64::NEG_INFINITY; n_features];
    for row in feature_values {
        for (f, &v) in row.iter().enumerate() {
            lo[f] = lo[f].min(v);
            hi[f] = hi[f].max(v);
        }
    }
    let mut rows = Vec::new();
    for (t, target) in importance.target_names.iter().enumerate() {
        for &(f, _) in importance.ranked[t].iter().take(top) {
            for (i, (e, values)) in explanations.iter().zip(feature_values).enumerate() {
                let normalized = if hi[f] > lo[f] {
                    (values[f] - lo[f]) / (hi[f] - lo[f])
                } else {
                    0.5
                };
                rows.push(BeeswarmRow {
                    target: target.clone(),
                    feature: feature_names[f].clone(),
                    instance: i,
                    phi: e.phi[f][t],
                    normalized_value: normalized,
                });
            }
        }
    }
    Ok(rows)
}

pub fn beeswarm_csv(rows: &[BeeswarmRow]) -> String {
    let header: Vec<String> = ["target", "feature", "instance", "phi", "normalized_value"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.target.clone(),
                r.feature.clone(),
                r.instance.to_string(),
                table::fmt_f64(r.phi),
                table::fmt_f64(r.normalized_value),
            ]
        })
        .collect();
    table::write_csv(&header, &body)
}

// --- set intersections --------------------------------------------------------

/// One exclusive Venn region: members in exactly the listed sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VennRegion {
    /// Indices of the sets this region belongs to.
    pub sets: Vec<usize>,
    pub members: Vec<String>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VennReport {
    pub set_names: Vec<String>,
    pub regions: Vec<VennRegion>,
    pub union_size: usize,
}

/// Exclusive region cardinalities for 2 or 3 named sets.
pub fn intersect(named_sets: &[(String, Vec<String>)]) -> Result<VennReport> {
    let k = named_sets.len();
    if !(2..=3).contains(&k) {
        return Err(Error::invalid_argument("intersect expects 2 or 3 sets"));
    }
    let mut union: Vec<String> = named_sets
        .iter()
        .flat_map(|(_, s)| s.iter().cloned())
        .collect();
    union.sort();
    union.dedup();

    let mut regions = Vec::new();
    for mask in 1..(1usize << k) {
        let mut members: Vec<String> = union
            .iter()
            .filter(|name| {
                (0..k).all(|s| {
                    let inside = named_sets[s].1.contains(name);
                    inside == (mask & (1 << s) != 0)
                })
            })
            .cloned()
            .collect();
        members.sort();
        regions.push(VennRegion {
            sets: (0..k).filter(|s| mask & (1 << s) != 0).collect(),
            count: members.len(),
            members,
        });
    }
    Ok(VennReport {
        set_names: named_sets.iter().map(|(n, _)| n.clone()).collect(),
        union_size: union.len(),
        regions,
    })
}

impl VennReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("venn report serializes")
    }

    /// Cardinality of the region common to all sets.
    pub fn center_count(&self) -> usize {
        let all: Vec<usize> = (0..self.set_names.len()).collect();
        self.regions
            .iter()
            .find(|r| r.sets == all)
            .map(|r| r.count)
            .unwrap_or(0)
    }
}

// --- representation vectors ----------------------------------------------------

/// An algorithm's per-fold fingerprint: the signed mean attribution per
/// feature over the fold's training instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationVector {
    pub algorithm: String,
    pub fold: usize,
    pub values: Vec<f64>,
}

/// Signed mean phi per feature for one target column.
pub fn shapley_representation(
    explanations: &[ShapExplanation],
    target: usize,
    algorithm: &str,
    fold: usize,
) -> Result<RepresentationVector> {
    let first = explanations
        .first()
        .ok_or_else(|| Error::invalid_argument("representation needs >= 1 explanation"))?;
    let n_features = first.n_features();
    let mut values = vec![0.0; n_features];
    for e in explanations {
        if e.n_features() != n_features {
            return Err(Error::invalid_argument("inconsistent explanation shapes"));
        }
        for (acc, row) in values.iter_mut().zip(&e.phi) {
            *acc += row[target];
        }
    }
    for v in values.iter_mut() {
        *v /= explanations.len() as f64;
    }
    Ok(RepresentationVector {
        algorithm: algorithm.to_string(),
        fold,
        values,
    })
}

pub fn representation_csv(vectors: &[RepresentationVector], feature_names: &[String]) -> String {
    let mut header = vec!["algorithm".to_string(), "fold".to_string()];
    header.extend(feature_names.iter().cloned());
    let rows: Vec<Vec<String>> = vectors
        .iter()
        .map(|v| {
            let mut row = vec![v.algorithm.clone(), v.fold.to_string()];
            row.extend(v.values.iter().map(|x| table::fmt_f64(*x)));
            row
        })
        .collect();
    table::write_csv(&header, &rows)
}

/// Cosine similarity; 0 when either vector is all zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

// --- t-SNE ----------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TsneResult {
    /// `embedding[i]` = 2-D coordinates of input vector i.
    pub embedding: Vec<[f64; 2]>,
    /// KL divergence at the end of the early-exaggeration phase.
    pub kl_after_exaggeration: f64,
    /// KL divergence after the final iteration.
    pub kl_final: f64,
}

const TSNE_EXAGGERATION: f64 = 12.0;
const TSNE_EXAGGERATION_ITERS: usize = 250;
const TSNE_LEARNING_RATE: f64 = 200.0;
const TSNE_INITIAL_MOMENTUM: f64 = 0.5;
const TSNE_FINAL_MOMENTUM: f64 = 0.8;
const P_FLOOR: f64 = 1e-12;

/// Exact t-SNE embedding into two dimensions: Gaussian input affinities with
/// per-point bandwidths binary-searched to the target perplexity, Student-t
/// output kernel, gradient descent with momentum, per-coordinate gains and
/// an early exaggeration phase.
pub fn tsne(
    vectors: &[Vec<f64>],
    perplexity: f64,
    iterations: usize,
    seed_value: u64,
) -> Result<TsneResult> {
    let n = vectors.len();
    if n < 4 {
        return Err(Error::invalid_argument("t-SNE needs at least 4 vectors"));
    }
    if !perplexity.is_finite() || perplexity <= 0.0 || perplexity >= (n as f64 - 1.0) / 3.0 {
        return Err(Error::invalid_argument(format!(
            "perplexity {perplexity} must be positive and below (n-1)/3 = {}",
            (n as f64 - 1.0) / 3.0
        )));
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid_argument("ragged input vectors"));
    }

    // Squared input distances.
    let mut d2 = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2[i * n + j] = d;
            d2[j * n + i] = d;
        }
    }

    // Conditional affinities with binary-searched bandwidths.
    let target_entropy = perplexity.ln();
    let mut p_cond = vec![0.0f64; n * n];
    for i in 0..n {
        let mut beta = 1.0f64;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        for _ in 0..50 {
            let mut sum = 0.0;
            for j in 0..n {
                if j == i {
                    p_cond[i * n + j] = 0.0;
                    continue;
                }
                let p = (-beta * d2[i * n + j]).exp();
                p_cond[i * n + j] = p;
                sum += p;
            }
            let mut entropy = 0.0;
            if sum > 0.0 {
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let p = p_cond[i * n + j] / sum;
                    p_cond[i * n + j] = p;
                    if p > 1e-300 {
                        entropy -= p * p.ln();
                    }
                }
            }
            let diff = entropy - target_entropy;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                beta_min = beta;
                beta = if beta_max.is_infinite() {
                    beta * 2.0
                } else {
                    0.5 * (beta + beta_max)
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_infinite() {
                    beta * 0.5
                } else {
                    0.5 * (beta + beta_min)
                };
            }
        }
    }

    // Symmetrized joint distribution.
    let mut p = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            p[i * n + j] =
                ((p_cond[i * n + j] + p_cond[j * n + i]) / (2.0 * n as f64)).max(P_FLOOR);
        }
    }

    let mut rng = seed::rng(seed_value, &[0x75E]);
    let mut y: Vec<f64> = (0..2 * n)
        .map(|_| 1e-4 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut velocity = vec![0.0f64; 2 * n];
    let mut gains = vec![1.0f64; 2 * n];

    let mut q_norm = vec![0.0f64; n * n];
    let mut kl_after_exaggeration = f64::NAN;

    let kl = |p: &[f64], q_norm: &[f64], qsum: f64| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = p[i * n + j];
                let qij = (q_norm[i * n + j] / qsum).max(P_FLOOR);
                total += pij * (pij / qij).ln();
            }
        }
        total
    };

    let mut final_kl = f64::NAN;
    for iter in 0..iterations {
        let exaggeration = if iter < TSNE_EXAGGERATION_ITERS {
            TSNE_EXAGGERATION
        } else {
            1.0
        };
        // Student-t kernel in the embedding.
        let mut qsum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = y[2 * i] - y[2 * j];
                let dy = y[2 * i + 1] - y[2 * j + 1];
                let q = 1.0 / (1.0 + dx * dx + dy * dy);
                q_norm[i * n + j] = q;
                q_norm[j * n + i] = q;
                qsum += 2.0 * q;
            }
        }
        if iter == TSNE_EXAGGERATION_ITERS {
            kl_after_exaggeration = kl(&p, &q_norm, qsum);
        }

        let mut grad = vec![0.0f64; 2 * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let qn = q_norm[i * n + j];
                let factor = 4.0 * (exaggeration * p[i * n + j] - qn / qsum) * qn;
                grad[2 * i] += factor * (y[2 * i] - y[2 * j]);
                grad[2 * i + 1] += factor * (y[2 * i + 1] - y[2 * j + 1]);
            }
        }
        let momentum = if iter < TSNE_EXAGGERATION_ITERS {
            TSNE_INITIAL_MOMENTUM
        } else {
            TSNE_FINAL_MOMENTUM
        };
        for k in 0..2 * n {
            let same_sign = grad[k].signum() == velocity[k].signum();
            gains[k] = if same_sign {
                (gains[k] * 0.8).max(0.01)
            } else {
                gains[k] + 0.2
            };
            velocity[k] = momentum * velocity[k] - TSNE_LEARNING_RATE * gains[k] * grad[k];
            y[k] += velocity[k];
        }

        if iter + 1 == iterations {
            let mut qsum = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let dx = y[2 * i] - y[2 * j];
                    let dy = y[2 * i + 1] - y[2 * j + 1];
                    let q = 1.0 / (1.0 + dx * dx + dy * dy);
                    q_norm[i * n + j] = q;
                    q_norm[j * n + i] = q;
                    qsum += 2.0 * q;
                }
            }
            final_kl = kl(&p, &q_norm, qsum);
        }
    }
    if kl_after_exaggeration.is_nan() {
        kl_after_exaggeration = final_kl;
    }

    Ok(TsneResult {
        embedding: (0..n).map(|i| [y[2 * i], y[2 * i + 1]]).collect(),
        kl_after_exaggeration,
        kl_final: final_kl,
    })
}

pub fn tsne_csv(labels: &[(String, usize)], result: &TsneResult) -> String {
    let header: Vec<String> = ["algorithm", "fold", "x", "y"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = labels
        .iter()
        .zip(&result.embedding)
        .map(|((alg, fold), point)| {
            vec![
                alg.clone(),
                fold.to_string(),
                table::fmt_f64(point[0]),
                table::fmt_f64(point[1]),
            ]
        })
        .collect();
    table::write_csv(&header, &rows)
}

// --- local explanations -----------------------------------------------------------

/// Truncated per-instance attribution: the `top` features by |phi| plus a
/// rest aggregate, so base + listed + rest still reproduces the prediction.
#[derive(Debug, Clone, Serialize)]
pub struct LocalExplanation {
    pub target_names: Vec<String>,
    pub base: Vec<f64>,
    /// `contributions[target]` = (feature index, signed phi), |phi| descending.
    pub contributions: Vec<Vec<(usize, f64)>>,
    pub rest: Vec<f64>,
}

pub fn local_explanation(explanation: &ShapExplanation, top: usize) -> Result<LocalExplanation> {
    let n_features = explanation.n_features();
    if top > n_features {
        return Err(Error::invalid_argument(format!(
            "top {top} exceeds the feature count {n_features}"
        )));
    }
    let m = explanation.n_targets();
    let mut contributions = Vec::with_capacity(m);
    let mut rest = Vec::with_capacity(m);
    for t in 0..m {
        let mut order: Vec<(usize, f64)> = (0..n_features)
            .map(|f| (f, explanation.phi[f][t]))
            .collect();
        order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        let listed: Vec<(usize, f64)> = order
            .into_iter()
            .take(top)
            .filter(|(_, phi)| *phi != 0.0)
            .collect();
        let listed_sum: f64 = listed.iter().map(|(_, phi)| phi).sum();
        let total: f64 = (0..n_features).map(|f| explanation.phi[f][t]).sum();
        contributions.push(listed);
        rest.push(total - listed_sum);
    }
    Ok(LocalExplanation {
        target_names: explanation.target_names.clone(),
        base: explanation.base.clone(),
        contributions,
        rest,
    })
}

impl LocalExplanation {
    pub fn to_csv(&self, feature_names: &[String]) -> String {
        let header: Vec<String> = ["target", "feature", "phi"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (t, target) in self.target_names.iter().enumerate() {
            rows.push(vec![
                target.clone(),
                "__base__".to_string(),
                table::fmt_f64(self.base[t]),
            ]);
            for (f, phi) in &self.contributions[t] {
                rows.push(vec![
                    target.clone(),
                    feature_names[*f].clone(),
                    table::fmt_f64(*phi),
                ]);
            }
            rows.push(vec![
                target.clone(),
                "__rest__".to_string(),
                table::fmt_f64(self.rest[t]),
            ]);
        }
        table::write_csv(&header, &rows)
    }

    /// base + listed + rest, per target.
    pub fn reconstructed(&self) -> Vec<f64> {
        (0..self.base.len())
            .map(|t| {
                self.base[t]
                    + self.contributions[t].iter().map(|(_, phi)| phi).sum::<f64>()
                    + self.rest[t]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explanation(phi: Vec<Vec<f64>>, base: Vec<f64>) -> ShapExplanation {
        let m = base.len();
        ShapExplanation {
            phi,
            base,
            instance_id: None,
            target_names: (0..m).map(|t| format!("y{t}")).collect(),
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn zero_feature_ranks_last() {
        let e1 = explanation(vec![vec![1.0], vec![0.0], vec![-2.0]], vec![0.0]);
        let e2 = explanation(vec![vec![-1.0], vec![0.0], vec![2.0]], vec![0.0]);
        let imp = global_importance(&[e1, e2], &names(3)).unwrap();
        assert_eq!(imp.ranked[0][2].0, 1);
        assert_eq!(imp.ranked[0][2].1, 0.0);
        // absolute before mean: |+1| and |-1| average to 1
        assert_eq!(imp.importance(0, 0), 1.0);
        assert_eq!(imp.importance(0, 2), 2.0);
    }

    #[test]
    fn single_instance_importance_is_its_magnitude() {
        let e = explanation(vec![vec![-3.0], vec![0.5]], vec![1.0]);
        let imp = global_importance(&[e], &names(2)).unwrap();
        assert_eq!(imp.importance(0, 0), 3.0);
        assert_eq!(imp.importance(0, 1), 0.5);
    }

    #[test]
    fn fold_mean_averages_before_ranking() {
        let a = explanation(vec![vec![0.2]], vec![0.0]);
        let b = explanation(vec![vec![0.4]], vec![0.0]);
        let fold1 = global_importance(&[a], &names(1)).unwrap();
        let fold2 = global_importance(&[b], &names(1)).unwrap();
        let merged = mean_importance(&[fold1, fold2]).unwrap();
        assert!((merged.importance(0, 0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn top_k_limits_and_orders() {
        let e = explanation(
            vec![vec![0.1], vec![5.0], vec![2.0], vec![0.0]],
            vec![0.0],
        );
        let imp = global_importance(&[e], &names(4)).unwrap();
        let top = top_k(&imp, 2).unwrap();
        assert_eq!(top[0], vec!["f1", "f2"]);
        let all = top_k(&imp, 4).unwrap();
        assert_eq!(all[0].len(), 4);
        assert!(top_k(&imp, 5).is_err());
    }

    #[test]
    fn top_k_is_invariant_under_positive_scaling() {
        let e = explanation(
            vec![vec![0.3], vec![-0.9], vec![0.5], vec![0.05]],
            vec![0.0],
        );
        let scaled = explanation(
            vec![vec![0.3 * 7.5], vec![-0.9 * 7.5], vec![0.5 * 7.5], vec![0.05 * 7.5]],
            vec![0.0],
        );
        let a = top_k(&global_importance(&[e], &names(4)).unwrap(), 3).unwrap();
        let b = top_k(&global_importance(&[scaled], &names(4)).unwrap(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn venn_of_identical_sets_centers_everything() {
        let set: Vec<String> = (0..10).map(|i| format!("f{i}")).collect();
        let report = intersect(&[
            ("a".into(), set.clone()),
            ("b".into(), set.clone()),
            ("c".into(), set.clone()),
        ])
        .unwrap();
        assert_eq!(report.center_count(), 10);
        let sum: usize = report.regions.iter().map(|r| r.count).sum();
        assert_eq!(sum, report.union_size);
        for region in &report.regions {
            if region.sets.len() < 3 {
                assert_eq!(region.count, 0);
            }
        }
    }

    #[test]
    fn venn_of_disjoint_sets_has_empty_center() {
        let report = intersect(&[
            ("a".into(), vec!["x".into()]),
            ("b".into(), vec!["y".into()]),
            ("c".into(), vec!["z".into()]),
        ])
        .unwrap();
        assert_eq!(report.center_count(), 0);
        let sum: usize = report.regions.iter().map(|r| r.count).sum();
        assert_eq!(sum, 3);
    }

    #[test]
    fn venn_chain_example() {
        let report = intersect(&[
            ("a".into(), vec!["a".into(), "b".into(), "c".into()]),
            ("b".into(), vec!["b".into(), "c".into(), "d".into()]),
            ("c".into(), vec!["c".into(), "d".into(), "e".into()]),
        ])
        .unwrap();
        assert_eq!(report.center_count(), 1);
        let sum: usize = report.regions.iter().map(|r| r.count).sum();
        assert_eq!(sum, report.union_size);
        assert_eq!(report.union_size, 5);
        assert_eq!(report.regions.len(), 7);
    }

    #[test]
    fn venn_rejects_wrong_arity() {
        assert!(intersect(&[("a".into(), vec![])]).is_err());
    }

    #[test]
    fn representation_is_the_signed_mean() {
        let e1 = explanation(vec![vec![1.0], vec![0.0]], vec![0.0]);
        let e2 = explanation(vec![vec![-1.0], vec![4.0]], vec![0.0]);
        let rep = shapley_representation(&[e1, e2], 0, "ES_1", 3).unwrap();
        assert_eq!(rep.values, vec![0.0, 2.0]);
        assert_eq!(rep.fold, 3);
    }

    #[test]
    fn representation_of_single_instance_is_its_phi_column() {
        let e = explanation(vec![vec![0.5, 1.5], vec![-0.25, 2.0]], vec![0.0, 0.0]);
        let rep = shapley_representation(&[e], 1, "ES_2", 1).unwrap();
        assert_eq!(rep.values, vec![1.5, 2.0]);
    }

    #[test]
    fn all_zero_explanations_give_the_zero_vector() {
        let e = explanation(vec![vec![0.0], vec![0.0]], vec![0.7]);
        let rep = shapley_representation(&[e], 0, "ES_1", 1).unwrap();
        assert!(rep.values.iter().all(|&v| v == 0.0));
    }

    fn cluster_vectors() -> Vec<Vec<f64>> {
        // Two tight clusters plus two stragglers.
        let mut out = Vec::new();
        for k in 0..4 {
            out.push(vec![0.0 + 0.01 * k as f64, 0.0]);
        }
        for k in 0..4 {
            out.push(vec![10.0 + 0.01 * k as f64, 5.0]);
        }
        out.push(vec![5.0, 2.5]);
        out.push(vec![-5.0, -2.5]);
        out
    }

    #[test]
    fn tsne_shape_and_kl_monotonicity() {
        let vectors = cluster_vectors();
        let result = tsne(&vectors, 2.0, 600, 7).unwrap();
        assert_eq!(result.embedding.len(), vectors.len());
        assert!(result.kl_final.is_finite());
        assert!(
            result.kl_final <= result.kl_after_exaggeration + 1e-9,
            "KL rose after exaggeration: {} -> {}",
            result.kl_after_exaggeration,
            result.kl_final
        );
    }

    #[test]
    fn tsne_places_duplicates_together() {
        let mut vectors = cluster_vectors();
        vectors.push(vectors[0].clone()); // exact duplicate of the first point
        let result = tsne(&vectors, 2.0, 600, 3).unwrap();
        let last = result.embedding.len() - 1;
        let dup_dist = dist(result.embedding[0], result.embedding[last]);
        let mut all: Vec<f64> = Vec::new();
        for i in 0..result.embedding.len() {
            for j in (i + 1)..result.embedding.len() {
                all.push(dist(result.embedding[i], result.embedding[j]));
            }
        }
        let median = crate::linalg::median(&all);
        assert!(
            dup_dist < median,
            "duplicate embedded at {dup_dist}, median pair distance {median}"
        );
    }

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    #[test]
    fn tsne_rejects_bad_perplexity_and_tiny_inputs() {
        let vectors = cluster_vectors();
        assert!(tsne(&vectors, 3.1, 100, 0).is_err()); // (10-1)/3 = 3
        assert!(tsne(&vectors[..3], 1.0, 100, 0).is_err());
    }

    #[test]
    fn tsne_is_invariant_under_global_translation() {
        // Dyadic coordinates plus a dyadic shift keep every pairwise
        // distance bitwise identical, so the seeded embedding matches too.
        let mut rng = crate::seed::rng(12, &[]);
        use rand::Rng;
        let vectors: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                (0..3)
                    .map(|_| rng.random_range(0..64) as f64 * 0.25)
                    .collect()
            })
            .collect();
        let shifted: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| v.iter().map(|x| x + 64.0).collect())
            .collect();
        let a = tsne(&vectors, 2.0, 300, 9).unwrap();
        let b = tsne(&shifted, 2.0, 300, 9).unwrap();
        for (pa, pb) in a.embedding.iter().zip(&b.embedding) {
            assert_eq!(pa[0].to_bits(), pb[0].to_bits());
            assert_eq!(pa[1].to_bits(), pb[1].to_bits());
        }
    }

    #[test]
    fn local_explanation_preserves_the_sum() {
        let e = explanation(
            vec![vec![0.5], vec![-1.5], vec![0.25], vec![0.1]],
            vec![2.0],
        );
        let full_sum: f64 = 2.0 + 0.5 - 1.5 + 0.25 + 0.1;
        let local = local_explanation(&e, 2).unwrap();
        assert_eq!(local.contributions[0].len(), 2);
        assert_eq!(local.contributions[0][0].0, 1); // largest |phi|
        assert!((local.reconstructed()[0] - full_sum).abs() < 1e-12);
    }

    #[test]
    fn local_explanation_with_full_top_has_no_rest() {
        let e = explanation(vec![vec![0.5], vec![-1.5]], vec![2.0]);
        let local = local_explanation(&e, 2).unwrap();
        assert_eq!(local.rest[0], 0.0);
    }

    #[test]
    fn local_explanation_of_zero_phi_is_just_the_base() {
        let e = explanation(vec![vec![0.0], vec![0.0]], vec![3.5]);
        let local = local_explanation(&e, 2).unwrap();
        assert!(local.contributions[0].is_empty());
        assert_eq!(local.reconstructed()[0], 3.5);
    }

    #[test]
    fn beeswarm_rows_and_normalization() {
        let e1 = explanation(vec![vec![1.0], vec![0.2]], vec![0.0]);
        let e2 = explanation(vec![vec![-1.0], vec![0.1]], vec![0.0]);
        let feature_values = vec![vec![0.0, 7.0], vec![10.0, 7.0]];
        let rows = beeswarm_export(&[e1, e2], &feature_values, &names(2), 20).unwrap();
        // 2 features x 2 instances x 1 target
        assert_eq!(rows.len(), 4);
        let f0_min = rows
            .iter()
            .find(|r| r.feature == "f0" && r.instance == 0)
            .unwrap();
        assert_eq!(f0_min.normalized_value, 0.0);
        let constant = rows.iter().find(|r| r.feature == "f1").unwrap();
        assert_eq!(constant.normalized_value, 0.5);
    }

    #[test]
    fn beeswarm_respects_the_top_limit() {
        let e = explanation(vec![vec![1.0], vec![0.5], vec![0.1]], vec![0.0]);
        let feature_values = vec![vec![0.0, 1.0, 2.0]];
        let rows = beeswarm_export(&[e], &feature_values, &names(3), 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.feature != "f2"));
    }
}
