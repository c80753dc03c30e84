//! Regression trees and random forests with the mean-absolute-error split
//! criterion.
//!
//! Trees are greedy top-down CART. The split score of a candidate is the
//! total absolute deviation from the child median, summed over children and
//! over all targets; leaves predict the per-target median (the L1-optimal
//! constant). A forest with an m-column target matrix is a multi-target
//! (MTR) model; fitting the same data with a single column is the
//! single-target (STR) case and produces bitwise-identical predictions for
//! matching seeds.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::median;
use crate::seed;

/// Per-node feature subsampling size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxFeatures {
    /// Absolute number of features to consider at each split.
    Count(u32),
    /// Fraction of the feature count (1.0 = all features).
    Fraction(f64),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Fraction(f) => (f * n_features as f64).ceil() as usize,
            MaxFeatures::Count(c) => c as usize,
        };
        k.clamp(1, n_features)
    }
}

/// Forest hyper-parameters. The split criterion is fixed to mean absolute
/// error; `max_depth` 0 means a single leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 25,
            max_depth: 25,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Fraction(1.0),
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::invalid_argument("n_estimators must be >= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid_argument("min_samples_leaf must be >= 1"));
        }
        if let MaxFeatures::Fraction(f) = self.max_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid_argument(
                    "max_features fraction must be in (0, 1]",
                ));
            }
        }
        Ok(())
    }
}

/// A fitted tree node. Every node records its cover: the number of training
/// rows (bootstrap slots, not unique rows) that reached it.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        cover: usize,
    },
    Leaf {
        prediction: Vec<f64>,
        cover: usize,
    },
}

impl TreeNode {
    pub fn cover(&self) -> usize {
        match self {
            TreeNode::Internal { cover, .. } | TreeNode::Leaf { cover, .. } => *cover,
        }
    }

    /// Number of targets the tree predicts.
    pub fn n_targets(&self) -> usize {
        match self {
            TreeNode::Leaf { prediction, .. } => prediction.len(),
            TreeNode::Internal { left, .. } => left.n_targets(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> &[f64] {
        match self {
            TreeNode::Leaf { prediction, .. } => prediction,
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
                ..
            } => {
                if x[*feature_index] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }

    /// Structural identity ignoring leaf values: split features, thresholds
    /// and covers.
    pub fn same_structure(&self, other: &TreeNode) -> bool {
        match (self, other) {
            (TreeNode::Leaf { cover: a, .. }, TreeNode::Leaf { cover: b, .. }) => a == b,
            (
                TreeNode::Internal {
                    feature_index: fa,
                    threshold: ta,
                    left: la,
                    right: ra,
                    cover: ca,
                },
                TreeNode::Internal {
                    feature_index: fb,
                    threshold: tb,
                    left: lb,
                    right: rb,
                    cover: cb,
                },
            ) => {
                fa == fb
                    && ta == tb
                    && ca == cb
                    && la.same_structure(lb)
                    && ra.same_structure(rb)
            }
            _ => false,
        }
    }
}

/// A fitted random forest; immutable and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<TreeNode>,
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    pub target_names: Vec<String>,
}

impl Forest {
    /// Fit a forest on `x` (n rows of features) and `y` (n rows of targets).
    pub fn fit(x: &[Vec<f64>], y: &[Vec<f64>], params: &ForestParams) -> Result<Forest> {
        params.validate()?;
        check_data(x, y)?;
        let n = x.len();
        let trees: Vec<TreeNode> = (0..params.n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(params.seed, &[0x7EEE, t as u64]);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                grow(x, y, rows, 0, params, &mut rng)
            })
            .collect();
        let n_features = x[0].len();
        let m = y[0].len();
        Ok(Forest {
            trees,
            params: params.clone(),
            feature_names: (0..n_features).map(|i| format!("x{i}")).collect(),
            target_names: (0..m).map(|i| format!("y{i}")).collect(),
        })
    }

    pub fn with_names(mut self, feature_names: Vec<String>, target_names: Vec<String>) -> Forest {
        assert_eq!(feature_names.len(), self.feature_names.len());
        assert_eq!(target_names.len(), self.target_names.len());
        self.feature_names = feature_names;
        self.target_names = target_names;
        self
    }

    pub fn n_targets(&self) -> usize {
        self.trees[0].n_targets()
    }

    /// Mean over tree predictions, per target.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_names.len() {
            return Err(Error::invalid_argument(format!(
                "input has {} features, forest expects {}",
                x.len(),
                self.feature_names.len()
            )));
        }
        let m = self.n_targets();
        let mut out = vec![0.0; m];
        for tree in &self.trees {
            for (acc, v) in out.iter_mut().zip(tree.predict(x)) {
                *acc += v;
            }
        }
        for v in out.iter_mut() {
            *v /= self.trees.len() as f64;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let flat = FlatForest::from(self);
        serde_json::to_string_pretty(&flat).expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Forest> {
        let flat: FlatForest =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("forest JSON: {e}")))?;
        flat.try_into()
    }
}

/// Fit a single CART tree on the full data (no bootstrap).
pub fn fit_tree(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    params: &ForestParams,
    seed_value: u64,
) -> Result<TreeNode> {
    check_data(x, y)?;
    let mut rng = seed::rng(seed_value, &[0x7EEE]);
    Ok(grow(x, y, (0..x.len()).collect(), 0, params, &mut rng))
}

fn check_data(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<()> {
    if x.is_empty() || y.len() != x.len() {
        return Err(Error::invalid_argument("empty or misaligned training data"));
    }
    let n_features = x[0].len();
    if n_features == 0 {
        return Err(Error::invalid_argument("training data has no features"));
    }
    for row in x {
        if row.len() != n_features {
            return Err(Error::invalid_argument("ragged feature rows"));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument("non-finite feature value"));
        }
    }
    let m = y[0].len();
    if m == 0 {
        return Err(Error::invalid_argument("training data has no targets"));
    }
    for row in y {
        if row.len() != m {
            return Err(Error::invalid_argument("ragged target rows"));
        }
    }
    Ok(())
}

/// Max-heap ordering wrapper for f64.
#[derive(PartialEq)]
struct F64Ord(f64);

impl Eq for F64Ord {}

impl PartialOrd for F64Ord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for F64Ord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming median with total-absolute-deviation tracking.
struct MedianTracker {
    low: BinaryHeap<F64Ord>,
    high: BinaryHeap<Reverse<F64Ord>>,
    low_sum: f64,
    high_sum: f64,
}

impl MedianTracker {
    fn new() -> Self {
        MedianTracker {
            low: BinaryHeap::new(),
            high: BinaryHeap::new(),
            low_sum: 0.0,
            high_sum: 0.0,
        }
    }

    fn insert(&mut self, v: f64) {
        if self.low.peek().is_none_or(|top| v <= top.0) {
            self.low.push(F64Ord(v));
            self.low_sum += v;
        } else {
            self.high.push(Reverse(F64Ord(v)));
            self.high_sum += v;
        }
        // Rebalance: |low| is |high| or |high| + 1.
        if self.low.len() > self.high.len() + 1 {
            let moved = self.low.pop().unwrap().0;
            self.low_sum -= moved;
            self.high_sum += moved;
            self.high.push(Reverse(F64Ord(moved)));
        } else if self.high.len() > self.low.len() {
            let moved = self.high.pop().unwrap().0 .0;
            self.high_sum -= moved;
            self.low_sum += moved;
            self.low.push(F64Ord(moved));
        }
    }

    fn median(&self) -> f64 {
        if self.low.len() > self.high.len() {
            self.low.peek().unwrap().0
        } else {
            (self.low.peek().unwrap().0 + self.high.peek().unwrap().0 .0) / 2.0
        }
    }

    /// Total absolute deviation from the current median.
    fn sad(&self) -> f64 {
        let med = self.median();
        (med * self.low.len() as f64 - self.low_sum)
            + (self.high_sum - med * self.high.len() as f64)
    }
}

fn leaf(y: &[Vec<f64>], rows: &[usize]) -> TreeNode {
    let m = y[0].len();
    let prediction = (0..m)
        .map(|t| median(&rows.iter().map(|&r| y[r][t]).collect::<Vec<f64>>()))
        .collect();
    TreeNode::Leaf {
        prediction,
        cover: rows.len(),
    }
}

#[allow(clippy::needless_range_loop)]
fn grow(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    rows: Vec<usize>,
    depth: usize,
    params: &ForestParams,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let n = rows.len();
    let m = y[0].len();
    if depth >= params.max_depth || n < 2 * params.min_samples_leaf {
        return leaf(y, &rows);
    }
    // Pure node: all target rows coincide.
    let first = &y[rows[0]];
    if rows.iter().all(|&r| y[r] == *first) {
        return leaf(y, &rows);
    }

    let n_features = x[0].len();
    let k = params.max_features.resolve(n_features);
    let candidates: Vec<usize> = if k >= n_features {
        (0..n_features).collect()
    } else {
        let mut all: Vec<usize> = (0..n_features).collect();
        for i in (1..n_features).rev() {
            let j = rng.random_range(0..=i);
            all.swap(i, j);
        }
        let mut chosen = all[..k].to_vec();
        chosen.sort_unstable();
        chosen
    };

    // (score, feature, threshold, left row count)
    let mut best: Option<(f64, usize, f64, usize)> = None;
    let mut order = rows.clone();
    for &feature in &candidates {
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        if x[order[0]][feature] == x[order[n - 1]][feature] {
            continue; // constant feature in this node
        }

        // Prefix and suffix total absolute deviations, summed over targets.
        let mut prefix = vec![0.0f64; n];
        let mut suffix = vec![0.0f64; n];
        for t in 0..m {
            let mut tracker = MedianTracker::new();
            for (i, &r) in order.iter().enumerate() {
                tracker.insert(y[r][t]);
                prefix[i] += tracker.sad();
            }
            let mut tracker = MedianTracker::new();
            for (i, &r) in order.iter().enumerate().rev() {
                tracker.insert(y[r][t]);
                suffix[i] += tracker.sad();
            }
        }

        for split in params.min_samples_leaf..=(n - params.min_samples_leaf) {
            if split == n {
                break;
            }
            let lo = x[order[split - 1]][feature];
            let hi = x[order[split]][feature];
            if lo == hi {
                continue;
            }
            let score = prefix[split - 1] + suffix[split];
            let mut threshold = 0.5 * (lo + hi);
            if threshold >= hi {
                threshold = lo; // midpoint rounded up to the larger value
            }
            let better = match best {
                None => true,
                Some((s, f, t, _)) => {
                    score < s || (score == s && (feature < f || (feature == f && threshold < t)))
                }
            };
            if better {
                best = Some((score, feature, threshold, split));
            }
        }
    }

    let Some((_, feature, threshold, _)) = best else {
        return leaf(y, &rows);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&r| x[r][feature] <= threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
    let cover = n;
    let left = grow(x, y, left_rows, depth + 1, params, rng);
    let right = grow(x, y, right_rows, depth + 1, params, rng);
    TreeNode::Internal {
        feature_index: feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
        cover,
    }
}

// --- flattened JSON schema ---------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FlatNode {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    feature_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    left: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    right: Option<usize>,
    cover: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    values: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlatForest {
    params: ForestParams,
    feature_names: Vec<String>,
    target_names: Vec<String>,
    /// Per tree: nodes in preorder; children reference node indices.
    trees: Vec<Vec<FlatNode>>,
}

fn flatten(node: &TreeNode, out: &mut Vec<FlatNode>) -> usize {
    let slot = out.len();
    match node {
        TreeNode::Leaf { prediction, cover } => {
            out.push(FlatNode {
                feature_index: None,
                threshold: None,
                left: None,
                right: None,
                cover: *cover,
                values: Some(prediction.clone()),
            });
        }
        TreeNode::Internal {
            feature_index,
            threshold,
            left,
            right,
            cover,
        } => {
            out.push(FlatNode {
                feature_index: Some(*feature_index),
                threshold: Some(*threshold),
                left: None,
                right: None,
                cover: *cover,
                values: None,
            });
            let l = flatten(left, out);
            let r = flatten(right, out);
            out[slot].left = Some(l);
            out[slot].right = Some(r);
        }
    }
    slot
}

fn unflatten(nodes: &[FlatNode], idx: usize) -> Result<TreeNode> {
    let node = nodes
        .get(idx)
        .ok_or_else(|| Error::parse("node index out of range"))?;
    match (node.feature_index, node.values.as_ref()) {
        (None, Some(values)) => Ok(TreeNode::Leaf {
            prediction: values.clone(),
            cover: node.cover,
        }),
        (Some(feature_index), None) => {
            let left = node
                .left
                .ok_or_else(|| Error::parse("internal node missing left child"))?;
            let right = node
                .right
                .ok_or_else(|| Error::parse("internal node missing right child"))?;
            Ok(TreeNode::Internal {
                feature_index,
                threshold: node
                    .threshold
                    .ok_or_else(|| Error::parse("internal node missing threshold"))?,
                left: Box::new(unflatten(nodes, left)?),
                right: Box::new(unflatten(nodes, right)?),
                cover: node.cover,
            })
        }
        _ => Err(Error::parse("node is neither a leaf nor an internal split")),
    }
}

impl From<&Forest> for FlatForest {
    fn from(forest: &Forest) -> FlatForest {
        FlatForest {
            params: forest.params.clone(),
            feature_names: forest.feature_names.clone(),
            target_names: forest.target_names.clone(),
            trees: forest
                .trees
                .iter()
                .map(|t| {
                    let mut nodes = Vec::new();
                    flatten(t, &mut nodes);
                    nodes
                })
                .collect(),
        }
    }
}

impl TryFrom<FlatForest> for Forest {
    type Error = Error;

    fn try_from(flat: FlatForest) -> Result<Forest> {
        let trees: Result<Vec<TreeNode>> =
            flat.trees.iter().map(|nodes| unflatten(nodes, 0)).collect();
        Ok(Forest {
            trees: trees?,
            params: flat.params,
            feature_names: flat.feature_names,
            target_names: flat.target_names,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn single_target(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    fn random_data(
        n: usize,
        n_features: usize,
        m: usize,
        tag: u64,
    ) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = seed::rng(tag, &[n as u64]);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n_features).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        (x, y)
    }

    #[test]
    fn depth_zero_leaf_predicts_the_median() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = single_target(&[1.0, 2.0, 10.0]);
        let params = ForestParams {
            max_depth: 0,
            ..ForestParams::default()
        };
        let tree = fit_tree(&x, &y, &params, 0).unwrap();
        match tree {
            TreeNode::Leaf { prediction, cover } => {
                assert_eq!(prediction, vec![2.0]);
                assert_eq!(cover, 3);
            }
            _ => panic!("expected a leaf"),
        }
    }

    #[test]
    fn one_split_separates_binary_targets() {
        let x = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
        let y = single_target(&[0.0, 0.0, 1.0, 1.0]);
        let tree = fit_tree(&x, &y, &ForestParams::default(), 0).unwrap();
        let mae: f64 = x
            .iter()
            .zip(&y)
            .map(|(row, target)| (tree.predict(row)[0] - target[0]).abs())
            .sum();
        assert_eq!(mae, 0.0);
    }

    #[test]
    fn duplicated_target_column_preserves_structure() {
        let (x, y1) = random_data(40, 3, 1, 7);
        let y2: Vec<Vec<f64>> = y1.iter().map(|r| vec![r[0], r[0]]).collect();
        let params = ForestParams {
            bootstrap: false,
            ..ForestParams::default()
        };
        let a = fit_tree(&x, &y1, &params, 3).unwrap();
        let b = fit_tree(&x, &y2, &params, 3).unwrap();
        assert!(a.same_structure(&b), "duplicating a target changed the tree");
    }

    #[test]
    fn covers_add_up() {
        fn check(node: &TreeNode) {
            if let TreeNode::Internal {
                left, right, cover, ..
            } = node
            {
                assert_eq!(*cover, left.cover() + right.cover());
                assert!(left.cover() <= *cover && right.cover() <= *cover);
                check(left);
                check(right);
            }
        }
        let (x, y) = random_data(60, 4, 2, 9);
        let forest = Forest::fit(&x, &y, &ForestParams::default()).unwrap();
        for tree in &forest.trees {
            assert_eq!(tree.cover(), 60);
            check(tree);
        }
    }

    #[test]
    fn single_tree_forest_equals_tree() {
        let (x, y) = random_data(30, 3, 1, 5);
        let params = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        let forest = Forest::fit(&x, &y, &params).unwrap();
        let tree = fit_tree(&x, &y, &params, params.seed).unwrap();
        for row in &x {
            assert_eq!(forest.predict(row).unwrap(), tree.predict(row));
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let (x, y) = random_data(50, 4, 2, 11);
        let params = ForestParams::default();
        let a = Forest::fit(&x, &y, &params).unwrap();
        let b = Forest::fit(&x, &y, &params).unwrap();
        for row in &x {
            assert_eq!(a.predict(row).unwrap(), b.predict(row).unwrap());
        }
        assert_eq!(a, b);
    }

    #[test]
    fn memorizable_data_reaches_zero_training_error() {
        let (x, y) = random_data(30, 3, 1, 13);
        let params = ForestParams {
            bootstrap: false,
            n_estimators: 3,
            ..ForestParams::default()
        };
        let forest = Forest::fit(&x, &y, &params).unwrap();
        for (row, target) in x.iter().zip(&y) {
            let pred = forest.predict(row).unwrap();
            assert!((pred[0] - target[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn str_equals_mtr_on_single_target() {
        let (x, y) = random_data(40, 3, 1, 17);
        let params = ForestParams::default();
        let a = Forest::fit(&x, &y, &params).unwrap();
        let b = Forest::fit(&x, &y, &params).unwrap();
        for row in &x {
            let pa = a.predict(row).unwrap();
            let pb = b.predict(row).unwrap();
            assert_eq!(pa[0].to_bits(), pb[0].to_bits());
        }
    }

    #[test]
    fn predictions_stay_in_target_range() {
        let (x, y) = random_data(80, 5, 2, 19);
        let forest = Forest::fit(&x, &y, &ForestParams::default()).unwrap();
        for t in 0..2 {
            let lo = y.iter().map(|r| r[t]).fold(f64::INFINITY, f64::min);
            let hi = y.iter().map(|r| r[t]).fold(f64::NEG_INFINITY, f64::max);
            let mut rng = seed::rng(23, &[t as u64]);
            for _ in 0..50 {
                let probe: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
                let pred = forest.predict(&probe).unwrap()[t];
                assert!(pred >= lo - 1e-12 && pred <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn integer_target_shift_moves_predictions_exactly() {
        // With integer targets, an integer shift and a power-of-two tree
        // count, every median and mean in the pipeline is exact, so the
        // shift comes out bitwise.
        let mut rng = seed::rng(29, &[]);
        let x: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let y: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random_range(0..100) as f64])
            .collect();
        let shifted: Vec<Vec<f64>> = y.iter().map(|r| vec![r[0] + 16.0]).collect();
        let params = ForestParams {
            n_estimators: 4,
            ..ForestParams::default()
        };
        let a = Forest::fit(&x, &y, &params).unwrap();
        let b = Forest::fit(&x, &shifted, &params).unwrap();
        for (ta, tb) in a.trees.iter().zip(&b.trees) {
            assert!(ta.same_structure(tb), "shift changed the tree structure");
        }
        for row in &x {
            let pa = a.predict(row).unwrap()[0];
            let pb = b.predict(row).unwrap()[0];
            assert_eq!((pa + 16.0).to_bits(), pb.to_bits());
        }
    }

    #[test]
    fn mean_of_two_stumps() {
        let t1 = TreeNode::Leaf {
            prediction: vec![1.0],
            cover: 1,
        };
        let t2 = TreeNode::Leaf {
            prediction: vec![3.0],
            cover: 1,
        };
        let forest = Forest {
            trees: vec![t1, t2],
            params: ForestParams::default(),
            feature_names: vec!["x0".into()],
            target_names: vec!["y0".into()],
        };
        assert_eq!(forest.predict(&[0.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn empty_data_is_rejected() {
        let params = ForestParams::default();
        assert!(Forest::fit(&[], &[], &params).is_err());
        assert!(fit_tree(&[vec![1.0]], &[vec![]], &params, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let (x, y) = random_data(25, 3, 2, 31);
        let forest = Forest::fit(&x, &y, &ForestParams::default()).unwrap();
        let json = forest.to_json();
        let back = Forest::from_json(&json).unwrap();
        assert_eq!(back, forest);
        for row in &x {
            assert_eq!(forest.predict(row).unwrap(), back.predict(row).unwrap());
        }
    }

    #[test]
    fn max_features_subsampling_still_fits() {
        let (x, y) = random_data(50, 6, 1, 37);
        let params = ForestParams {
            max_features: MaxFeatures::Count(2),
            ..ForestParams::default()
        };
        let forest = Forest::fit(&x, &y, &params).unwrap();
        assert_eq!(forest.trees.len(), params.n_estimators);
        let params_frac = ForestParams {
            max_features: MaxFeatures::Fraction(0.5),
            ..ForestParams::default()
        };
        Forest::fit(&x, &y, &params_frac).unwrap();
    }
}
