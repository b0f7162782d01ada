// SPDX-License-Identifier: MIT OR Apache-2.0

//! CART decision trees and bootstrap forests.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, Classifier, Likelihood};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// A node in the flat tree arena. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

/// Axis-aligned box reached by one root-to-leaf path: `lower[j] < x[j] <= upper[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRegion {
    pub node: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub probs: Vec<f64>,
}

impl LeafRegion {
    /// 1-based majority label of the leaf.
    pub fn label(&self) -> usize {
        argmax(&self.probs) + 1
    }

    pub fn contains(&self, x: ArrayView1<f64>) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| v > lo && v <= hi)
    }
}

/// One split condition on a root-to-leaf path. `left` means `x[feature] <= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCondition {
    pub feature: usize,
    pub threshold: f64,
    pub left: bool,
}

/// The ordered split conditions leading from the root to one leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafPath {
    pub node: usize,
    pub conditions: Vec<PathCondition>,
    pub probs: Vec<f64>,
}

impl LeafPath {
    /// 1-based majority label of the leaf.
    pub fn label(&self) -> usize {
        argmax(&self.probs) + 1
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    n_features: usize,
    n_classes: usize,
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Node 0 is the root.
    pub fn new(n_features: usize, n_classes: usize, nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::config("a tree needs at least one node"));
        }
        for node in &nodes {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features || *left >= nodes.len() || *right >= nodes.len() || !threshold.is_finite() {
                        return Err(Error::config("malformed split node"));
                    }
                }
                TreeNode::Leaf { probs } => {
                    if probs.len() != n_classes || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                        return Err(Error::config("leaf probabilities must cover every class and sum to 1"));
                    }
                }
            }
        }
        let tree = DecisionTree {
            n_features,
            n_classes,
            nodes,
        };
        // Walking the regions also rejects cycles and empty (inconsistent) paths.
        let mut visited = vec![false; tree.nodes.len()];
        tree.collect_regions(0, vec![f64::NEG_INFINITY; n_features], vec![f64::INFINITY; n_features], &mut visited, &mut Vec::new())?;
        Ok(tree)
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: ArrayView1<f64>) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { .. } => return i,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn leaf_probs(&self, x: ArrayView1<f64>) -> &[f64] {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { probs } => probs,
            TreeNode::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    /// Every leaf with the box of inputs that reaches it.
    pub fn leaf_regions(&self) -> Vec<LeafRegion> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.nodes.len()];
        self.collect_regions(
            0,
            vec![f64::NEG_INFINITY; self.n_features],
            vec![f64::INFINITY; self.n_features],
            &mut visited,
            &mut out,
        )
        .expect("validated on construction");
        out
    }

    /// Every leaf with the split conditions on its path, root first.
    pub fn leaf_paths(&self) -> Vec<LeafPath> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((i, conditions)) = stack.pop() {
            match &self.nodes[i] {
                TreeNode::Leaf { probs } => out.push(LeafPath {
                    node: i,
                    conditions,
                    probs: probs.clone(),
                }),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    for (child, went_left) in [(*right, false), (*left, true)] {
                        let mut c = conditions.clone();
                        c.push(PathCondition {
                            feature: *feature,
                            threshold: *threshold,
                            left: went_left,
                        });
                        stack.push((child, c));
                    }
                }
            }
        }
        out
    }

    fn collect_regions(
        &self,
        i: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        visited: &mut [bool],
        out: &mut Vec<LeafRegion>,
    ) -> Result<()> {
        if visited[i] {
            return Err(Error::config("tree nodes must form a tree (node reached twice)"));
        }
        visited[i] = true;
        match &self.nodes[i] {
            TreeNode::Leaf { probs } => {
                if lower.iter().zip(&upper).any(|(lo, hi)| lo >= hi) {
                    return Err(Error::config("tree path describes an empty region"));
                }
                out.push(LeafRegion {
                    node: i,
                    lower,
                    upper,
                    probs: probs.clone(),
                });
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let mut left_upper = upper.clone();
                left_upper[*feature] = left_upper[*feature].min(*threshold);
                let mut right_lower = lower.clone();
                right_lower[*feature] = right_lower[*feature].max(*threshold);
                self.collect_regions(*left, lower, left_upper, visited, out)?;
                self.collect_regions(*right, right_lower, upper, visited, out)?;
            }
        }
        Ok(())
    }

    fn fit(x: ArrayView2<f64>, y: &[usize], rows: Vec<usize>, n_classes: usize, max_depth: usize, min_leaf: usize) -> Self {
        let mut nodes = Vec::new();
        grow(x, y, rows, n_classes, max_depth, min_leaf, &mut nodes);
        DecisionTree {
            n_features: x.ncols(),
            n_classes,
            nodes,
        }
    }
}

fn class_counts(y: &[usize], rows: &[usize], n_classes: usize) -> Vec<f64> {
    let mut c = vec![0.0; n_classes];
    for &r in rows {
        c[y[r] - 1] += 1.0;
    }
    c
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

/// Best split by weighted Gini impurity; `None` if no split lowers impurity.
fn best_split(x: ArrayView2<f64>, y: &[usize], rows: &[usize], n_classes: usize, min_leaf: usize) -> Option<(usize, f64)> {
    let n = rows.len() as f64;
    let total = class_counts(y, rows, n_classes);
    let parent = gini(&total, n);
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..x.ncols() {
        let mut sorted = rows.to_vec();
        sorted.sort_by(|&a, &b| x[[a, j]].total_cmp(&x[[b, j]]));
        let mut left = vec![0.0; n_classes];
        for k in 0..sorted.len() - 1 {
            left[y[sorted[k]] - 1] += 1.0;
            let (a, b) = (x[[sorted[k], j]], x[[sorted[k + 1], j]]);
            if a == b {
                continue;
            }
            let n_left = (k + 1) as f64;
            let n_right = n - n_left;
            if (k + 1) < min_leaf || sorted.len() - (k + 1) < min_leaf {
                continue;
            }
            let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let score = (n_left * gini(&left, n_left) + n_right * gini(&right, n_right)) / n;
            if best.is_none_or(|(_, _, s)| score < s) {
                let mut threshold = 0.5 * (a + b);
                if !(threshold >= a && threshold < b) {
                    threshold = a;
                }
                best = Some((j, threshold, score));
            }
        }
    }
    best.filter(|(_, _, s)| parent - s > 1e-12).map(|(j, t, _)| (j, t))
}

fn grow(
    x: ArrayView2<f64>,
    y: &[usize],
    rows: Vec<usize>,
    n_classes: usize,
    depth_left: usize,
    min_leaf: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let id = nodes.len();
    let counts = class_counts(y, &rows, n_classes);
    let total: f64 = counts.iter().sum();
    let leaf = TreeNode::Leaf {
        probs: counts.iter().map(|c| c / total).collect(),
    };
    nodes.push(leaf);
    let pure = counts.iter().filter(|c| **c > 0.0).count() <= 1;
    if pure || depth_left == 0 || rows.len() < 2 * min_leaf {
        return id;
    }
    let Some((feature, threshold)) = best_split(x, y, &rows, n_classes, min_leaf) else {
        return id;
    };
    let (l_rows, r_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x[[r, feature]] <= threshold);
    let left = grow(x, y, l_rows, n_classes, depth_left - 1, min_leaf, nodes);
    let right = grow(x, y, r_rows, n_classes, depth_left - 1, min_leaf, nodes);
    nodes[id] = TreeNode::Split {
        feature,
        threshold,
        left,
        right,
    };
    id
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoteRule {
    /// Each tree votes for its leaf's majority class.
    Majority,
    /// Leaf probabilities are averaged.
    Soft,
}

/// One tree or a forest of trees. A single tree reports its leaf
/// probabilities directly; forests aggregate with the vote rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    trees: Vec<DecisionTree>,
    vote: VoteRule,
}

impl TreeModel {
    pub fn new(trees: Vec<DecisionTree>, vote: VoteRule) -> Result<Self> {
        let first = trees.first().ok_or_else(|| Error::config("a tree model needs at least one tree"))?;
        for t in &trees[1..] {
            check_dim(first.n_features, t.n_features)?;
            check_dim(first.n_classes, t.n_classes)?;
        }
        Ok(TreeModel { trees, vote })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn vote(&self) -> VoteRule {
        self.vote
    }

    fn probs_row(&self, x: ArrayView1<f64>) -> Vec<f64> {
        if self.trees.len() == 1 {
            return self.trees[0].leaf_probs(x).to_vec();
        }
        let c = self.trees[0].n_classes;
        let mut acc = vec![0.0; c];
        for t in &self.trees {
            let p = t.leaf_probs(x);
            match self.vote {
                VoteRule::Majority => acc[argmax(p)] += 1.0,
                VoteRule::Soft => acc.iter_mut().zip(p).for_each(|(a, v)| *a += v),
            }
        }
        let n = self.trees.len() as f64;
        acc.iter().map(|a| a / n).collect()
    }
}

impl Classifier for TreeModel {
    fn input_dim(&self) -> usize {
        self.trees[0].n_features
    }

    fn output_dim(&self) -> usize {
        self.trees[0].n_classes
    }

    fn likelihood(&self) -> Likelihood {
        if self.output_dim() == 2 {
            Likelihood::Binary
        } else {
            Likelihood::Multiclass
        }
    }

    /// Log-probabilities; trees have no native logit scale.
    fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.probs(x)?.mapv(|p| p.max(1e-12).ln()))
    }

    fn probs(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim(self.input_dim(), x.ncols())?;
        let c = self.output_dim();
        let mut out = Array2::zeros((x.nrows(), c));
        for (i, row) in x.rows().into_iter().enumerate() {
            for (j, p) in self.probs_row(row).into_iter().enumerate() {
                out[[i, j]] = p;
            }
        }
        Ok(out)
    }

    fn as_tree(&self) -> Option<&TreeModel> {
        Some(self)
    }
}

/// Fits a single CART tree with greedy Gini splits.
pub fn train_tree(d: &Dataset, max_depth: usize, min_leaf: usize) -> Result<TreeModel> {
    check_tree_config(d, max_depth, min_leaf)?;
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    let tree = DecisionTree::fit(d.x().view(), d.y(), rows, d.n_classes(), max_depth, min_leaf);
    TreeModel::new(vec![tree], VoteRule::Majority)
}

/// Fits `n_trees` CART trees on bootstrap resamples; prediction by majority vote.
pub fn train_forest(d: &Dataset, n_trees: usize, max_depth: usize, seed: u64) -> Result<TreeModel> {
    train_forest_with(d, n_trees, max_depth, 1, seed)
}

pub fn train_forest_with(d: &Dataset, n_trees: usize, max_depth: usize, min_leaf: usize, seed: u64) -> Result<TreeModel> {
    check_tree_config(d, max_depth, min_leaf)?;
    if n_trees == 0 {
        return Err(Error::config("a forest needs at least one tree"));
    }
    if n_trees == 1 {
        return train_tree(d, max_depth, min_leaf);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = d.n_rows();
    let trees = (0..n_trees)
        .map(|_| {
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            DecisionTree::fit(d.x().view(), d.y(), rows, d.n_classes(), max_depth, min_leaf)
        })
        .collect();
    TreeModel::new(trees, VoteRule::Majority)
}

fn check_tree_config(d: &Dataset, max_depth: usize, min_leaf: usize) -> Result<()> {
    if max_depth < 1 {
        return Err(Error::config("max_depth must be at least 1"));
    }
    if min_leaf < 1 {
        return Err(Error::config("min_leaf must be at least 1"));
    }
    if d.n_rows() < 2 * min_leaf {
        return Err(Error::config(format!(
            "need at least {} rows for min_leaf = {min_leaf}",
            2 * min_leaf
        )));
    }
    Ok(())
}
