//! Exact per-instance Shapley attributions for trees and forests.
//!
//! The fast path is the polynomial-time path algorithm for trees with cover
//! counts: absent features are marginalized down both branches by training
//! cover fractions, present features follow the instance. `brute_force_shap`
//! evaluates the same game by explicit subset enumeration and exists purely
//! as a verification oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forest::{Forest, TreeNode};
use crate::table::{self};

/// Per-instance attribution matrix plus expected model outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ShapExplanation {
    /// `phi[feature][target]`.
    pub phi: Vec<Vec<f64>>,
    /// Expected model output per target (the empty-coalition value).
    pub base: Vec<f64>,
    pub instance_id: Option<String>,
    pub target_names: Vec<String>,
}

impl ShapExplanation {
    pub fn n_features(&self) -> usize {
        self.phi.len()
    }

    pub fn n_targets(&self) -> usize {
        self.base.len()
    }

    /// `base[t] + sum_i phi[i][t]` — must reproduce the model prediction.
    pub fn reconstructed(&self) -> Vec<f64> {
        let mut out = self.base.clone();
        for row in &self.phi {
            for (acc, v) in out.iter_mut().zip(row) {
                *acc += v;
            }
        }
        out
    }

    /// Largest local-accuracy violation against a prediction vector.
    pub fn accuracy_gap(&self, prediction: &[f64]) -> f64 {
        self.reconstructed()
            .iter()
            .zip(prediction)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV export: a base-value record followed by one row per feature.
    pub fn to_csv(&self, feature_names: &[String]) -> String {
        assert_eq!(feature_names.len(), self.phi.len());
        let mut header = vec!["feature".to_string()];
        header.extend(self.target_names.iter().map(|t| format!("phi_{t}")));
        let mut rows = Vec::with_capacity(self.phi.len() + 1);
        let mut base_row = vec!["__base__".to_string()];
        base_row.extend(self.base.iter().map(|v| table::fmt_f64(*v)));
        rows.push(base_row);
        for (name, phi_row) in feature_names.iter().zip(&self.phi) {
            let mut row = vec![name.clone()];
            row.extend(phi_row.iter().map(|v| table::fmt_f64(*v)));
            rows.push(row);
        }
        table::write_csv(&header, &rows)
    }
}

/// Cover-weighted expectation of the tree output (the empty-coalition value).
fn expectation(node: &TreeNode) -> Vec<f64> {
    match node {
        TreeNode::Leaf { prediction, .. } => prediction.clone(),
        TreeNode::Internal { left, right, .. } => {
            let le = expectation(left);
            let re = expectation(right);
            let lc = left.cover() as f64;
            let rc = right.cover() as f64;
            let total = lc + rc;
            le.iter()
                .zip(&re)
                .map(|(l, r)| (lc * l + rc * r) / total)
                .collect()
        }
    }
}

fn validate_covers(node: &TreeNode) -> Result<()> {
    if node.cover() == 0 {
        return Err(Error::invalid_state("tree node with zero cover"));
    }
    if let TreeNode::Internal { left, right, .. } = node {
        validate_covers(left)?;
        validate_covers(right)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
struct PathItem {
    feature_index: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

fn extend_path(
    unique_path: &mut [PathItem],
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature_index: Option<usize>,
) {
    unique_path[unique_depth] = PathItem {
        feature_index,
        zero_fraction,
        one_fraction,
        pweight: if unique_depth == 0 { 1.0 } else { 0.0 },
    };
    for i in (0..unique_depth).rev() {
        unique_path[i + 1].pweight +=
            one_fraction * unique_path[i].pweight * (i + 1) as f64 / (unique_depth + 1) as f64;
        unique_path[i].pweight =
            zero_fraction * unique_path[i].pweight * (unique_depth - i) as f64
                / (unique_depth + 1) as f64;
    }
}

fn unwind_path(unique_path: &mut [PathItem], unique_depth: usize, path_index: usize) {
    let one_fraction = unique_path[path_index].one_fraction;
    let zero_fraction = unique_path[path_index].zero_fraction;
    let mut next_one_portion = unique_path[unique_depth].pweight;
    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp = unique_path[i].pweight;
            unique_path[i].pweight =
                next_one_portion * (unique_depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            next_one_portion = tmp
                - unique_path[i].pweight * zero_fraction * (unique_depth - i) as f64
                    / (unique_depth + 1) as f64;
        } else {
            unique_path[i].pweight = unique_path[i].pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    for i in path_index..unique_depth {
        unique_path[i].feature_index = unique_path[i + 1].feature_index;
        unique_path[i].zero_fraction = unique_path[i + 1].zero_fraction;
        unique_path[i].one_fraction = unique_path[i + 1].one_fraction;
    }
}

fn unwound_path_sum(unique_path: &[PathItem], unique_depth: usize, path_index: usize) -> f64 {
    let one_fraction = unique_path[path_index].one_fraction;
    let zero_fraction = unique_path[path_index].zero_fraction;
    let mut next_one_portion = unique_path[unique_depth].pweight;
    let mut total = 0.0;
    if one_fraction != 0.0 {
        for i in (0..unique_depth).rev() {
            let tmp = next_one_portion / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next_one_portion =
                unique_path[i].pweight - tmp * zero_fraction * (unique_depth - i) as f64;
        }
    } else {
        for i in (0..unique_depth).rev() {
            total += unique_path[i].pweight / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    total * (unique_depth + 1) as f64
}

fn tree_depth(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf { .. } => 1,
        TreeNode::Internal { left, right, .. } => 1 + tree_depth(left).max(tree_depth(right)),
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    phi: &mut [Vec<f64>],
    x: &[f64],
    node: &TreeNode,
    unique_path: &mut [PathItem],
    unique_depth: usize,
    parent_zero_fraction: f64,
    parent_one_fraction: f64,
    parent_feature_index: Option<usize>,
) {
    extend_path(
        unique_path,
        unique_depth,
        parent_zero_fraction,
        parent_one_fraction,
        parent_feature_index,
    );
    match node {
        TreeNode::Leaf { prediction, .. } => {
            for path_index in 1..=unique_depth {
                let w = unwound_path_sum(unique_path, unique_depth, path_index);
                let item = &unique_path[path_index];
                let scale = w * (item.one_fraction - item.zero_fraction);
                let feature = item.feature_index.expect("path items carry features");
                for (t, value) in prediction.iter().enumerate() {
                    phi[feature][t] += scale * value;
                }
            }
        }
        TreeNode::Internal {
            feature_index,
            threshold,
            left,
            right,
            cover,
        } => {
            let mut unique_depth = unique_depth;
            let (hot, cold) = if x[*feature_index] <= *threshold {
                (left, right)
            } else {
                (right, left)
            };
            let hot_zero_fraction = hot.cover() as f64 / *cover as f64;
            let cold_zero_fraction = cold.cover() as f64 / *cover as f64;
            let mut incoming_zero_fraction = 1.0;
            let mut incoming_one_fraction = 1.0;
            // A feature already on the path is unwound first: its previous
            // fractions combine with the new split.
            if let Some(path_index) =
                (1..=unique_depth).find(|&i| unique_path[i].feature_index == Some(*feature_index))
            {
                incoming_zero_fraction = unique_path[path_index].zero_fraction;
                incoming_one_fraction = unique_path[path_index].one_fraction;
                unwind_path(unique_path, unique_depth, path_index);
                unique_depth -= 1;
            }
            let (parent_path, child_path) = unique_path.split_at_mut(unique_depth + 1);
            child_path[..parent_path.len()].clone_from_slice(parent_path);
            recurse(
                phi,
                x,
                hot,
                child_path,
                unique_depth + 1,
                hot_zero_fraction * incoming_zero_fraction,
                incoming_one_fraction,
                Some(*feature_index),
            );
            child_path[..parent_path.len()].clone_from_slice(parent_path);
            recurse(
                phi,
                x,
                cold,
                child_path,
                unique_depth + 1,
                cold_zero_fraction * incoming_zero_fraction,
                0.0,
                Some(*feature_index),
            );
        }
    }
}

/// Exact path-dependent Shapley attributions for one tree at `x`.
pub fn shap_tree(tree: &TreeNode, x: &[f64]) -> Result<ShapExplanation> {
    validate_covers(tree)?;
    let m = tree.n_targets();
    let mut phi = vec![vec![0.0; m]; x.len()];
    let max_depth = tree_depth(tree) + 2;
    let mut unique_path = vec![PathItem::default(); max_depth * (max_depth + 1) / 2];
    recurse(&mut phi, x, tree, &mut unique_path, 0, 1.0, 1.0, None);
    Ok(ShapExplanation {
        phi,
        base: expectation(tree),
        instance_id: None,
        target_names: (0..m).map(|t| format!("y{t}")).collect(),
    })
}

/// Forest attributions: the arithmetic mean of per-tree explanations, which
/// matches the forest's mean aggregation and preserves local accuracy.
pub fn shap_forest(forest: &Forest, x: &[f64]) -> Result<ShapExplanation> {
    if x.len() != forest.feature_names.len() {
        return Err(Error::invalid_argument(format!(
            "input has {} features, forest expects {}",
            x.len(),
            forest.feature_names.len()
        )));
    }
    let m = forest.n_targets();
    let mut phi = vec![vec![0.0; m]; x.len()];
    let mut base = vec![0.0; m];
    for tree in &forest.trees {
        let one = shap_tree(tree, x)?;
        for (acc_row, row) in phi.iter_mut().zip(&one.phi) {
            for (acc, v) in acc_row.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for (acc, v) in base.iter_mut().zip(&one.base) {
            *acc += v;
        }
    }
    let count = forest.trees.len() as f64;
    for row in phi.iter_mut() {
        for v in row.iter_mut() {
            *v /= count;
        }
    }
    for v in base.iter_mut() {
        *v /= count;
    }
    Ok(ShapExplanation {
        phi,
        base,
        instance_id: None,
        target_names: forest.target_names.clone(),
    })
}

/// Explain a model set as one multi-target explanation: a single
/// multi-output forest passes through unchanged, a list of single-target
/// forests contributes one phi column each.
pub fn shap_models(models: &[Forest], x: &[f64]) -> Result<ShapExplanation> {
    if models.is_empty() {
        return Err(Error::invalid_argument("no models to explain"));
    }
    if models.len() == 1 {
        return shap_forest(&models[0], x);
    }
    let mut phi: Vec<Vec<f64>> = vec![Vec::new(); x.len()];
    let mut base = Vec::new();
    let mut target_names = Vec::new();
    for model in models {
        let one = shap_forest(model, x)?;
        for (row, part) in phi.iter_mut().zip(&one.phi) {
            row.extend(part);
        }
        base.extend(one.base);
        target_names.extend(one.target_names);
    }
    Ok(ShapExplanation {
        phi,
        base,
        instance_id: None,
        target_names,
    })
}

/// Maximum number of distinct tree features the oracle accepts.
pub const BRUTE_FORCE_FEATURE_LIMIT: usize = 15;

/// Subset-enumeration Shapley oracle. Exponential in the number of distinct
/// features the tree uses; refuses more than [`BRUTE_FORCE_FEATURE_LIMIT`].
pub fn brute_force_shap(tree: &TreeNode, x: &[f64]) -> Result<ShapExplanation> {
    validate_covers(tree)?;
    let m = tree.n_targets();
    let mut used = Vec::new();
    collect_features(tree, &mut used);
    used.sort_unstable();
    used.dedup();
    if used.len() > BRUTE_FORCE_FEATURE_LIMIT {
        return Err(Error::invalid_argument(format!(
            "brute force refuses {} features (limit {})",
            used.len(),
            BRUTE_FORCE_FEATURE_LIMIT
        )));
    }
    let count = used.len();

    // Coalition value: features in the mask follow x, the rest split by
    // cover fractions.
    let coalition_value = |mask: usize| -> Vec<f64> {
        fn descend(node: &TreeNode, x: &[f64], used: &[usize], mask: usize) -> Vec<f64> {
            match node {
                TreeNode::Leaf { prediction, .. } => prediction.clone(),
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                    cover,
                } => {
                    let pos = used.iter().position(|f| f == feature_index);
                    let in_coalition = pos.is_some_and(|p| mask & (1 << p) != 0);
                    if in_coalition {
                        if x[*feature_index] <= *threshold {
                            descend(left, x, used, mask)
                        } else {
                            descend(right, x, used, mask)
                        }
                    } else {
                        let l = descend(left, x, used, mask);
                        let r = descend(right, x, used, mask);
                        let lw = left.cover() as f64 / *cover as f64;
                        let rw = right.cover() as f64 / *cover as f64;
                        l.iter().zip(&r).map(|(a, b)| lw * a + rw * b).collect()
                    }
                }
            }
        }
        descend(tree, x, &used, mask)
    };

    let values: Vec<Vec<f64>> = (0..1usize << count).map(coalition_value).collect();

    let factorial: Vec<f64> = {
        let mut f = vec![1.0; count + 1];
        for i in 1..=count {
            f[i] = f[i - 1] * i as f64;
        }
        f
    };

    let mut phi = vec![vec![0.0; m]; x.len()];
    for (pos, &feature) in used.iter().enumerate() {
        let bit = 1usize << pos;
        for mask in 0..1usize << count {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial[s] * factorial[count - s - 1] / factorial[count];
            let with = &values[mask | bit];
            let without = &values[mask];
            for t in 0..m {
                phi[feature][t] += weight * (with[t] - without[t]);
            }
        }
    }

    Ok(ShapExplanation {
        phi,
        base: values[0].clone(),
        instance_id: None,
        target_names: (0..m).map(|t| format!("y{t}")).collect(),
    })
}

fn collect_features(node: &TreeNode, out: &mut Vec<usize>) {
    if let TreeNode::Internal {
        feature_index,
        left,
        right,
        ..
    } = node
    {
        out.push(*feature_index);
        collect_features(left, out);
        collect_features(right, out);
    }
}
