// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};

use super::penalties::{penalty_distance, Norm};
use crate::dataset::{mad_statistics, Dataset, Mutability};
use crate::error::{Error, Result};
use crate::models::{argmax_rows, Classifier, LeafPath, TreeModel};
use crate::search::{ConvergedReason, ExplanationState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureTweakConfig {
    /// How far past each split threshold a tweaked feature is placed.
    pub epsilon: f64,
    /// Norm used to rank candidates.
    pub cost: Norm,
}

impl Default for FeatureTweakConfig {
    fn default() -> Self {
        FeatureTweakConfig {
            epsilon: 0.1,
            cost: Norm::L2,
        }
    }
}

impl FeatureTweakConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(Error::config(format!("feature_tweak epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// The ε-satisfactory instance for one leaf: every split on the path is
/// satisfied by placing its feature `epsilon` inside the threshold; features
/// not on the path keep their factual value.
pub fn epsilon_satisfactory(x: &Array1<f64>, path: &LeafPath, epsilon: f64) -> Array1<f64> {
    let mut out = x.clone();
    for c in &path.conditions {
        out[c.feature] = if c.left { c.threshold - epsilon } else { c.threshold + epsilon };
    }
    out
}

fn respects(tags: &[Mutability], x: &Array1<f64>, cf: &Array1<f64>) -> bool {
    tags.iter().enumerate().all(|(j, tag)| match tag {
        Mutability::Both => true,
        Mutability::None => cf[j] == x[j],
        Mutability::Increase => cf[j] >= x[j],
        Mutability::Decrease => cf[j] <= x[j],
    })
}

/// Tree-based search: build the ε-satisfactory instance of every leaf (in
/// every tree) that predicts `t`, keep those the whole model classifies as
/// `t` and that respect the dataset's mutability tags, and return the one
/// with the lowest cost. Ties go to the earliest tree and leaf.
pub fn feature_tweak(x: &Array1<f64>, t: usize, d: &Dataset, m: &TreeModel, cfg: &FeatureTweakConfig) -> Result<ExplanationState> {
    cfg.validate()?;
    let label = |v: &Array1<f64>| -> Result<usize> { Ok(argmax_rows(m.probs(v.view().insert_axis(Axis(0)))?.view())[0]) };
    if label(x)? == t {
        return Ok(ExplanationState::from_path(x, t, "feature_tweak", vec![x.clone()], ConvergedReason::ThresholdReached));
    }
    let mad = match (cfg.cost, d.mad()) {
        (Norm::Mad, None) => Some(mad_statistics(d)?),
        (_, m) => m.map(|v| v.to_vec()),
    };
    let mut best: Option<(f64, Array1<f64>)> = None;
    for tree in m.trees() {
        for leaf in tree.leaf_paths().iter().filter(|l| l.label() == t) {
            let cand = epsilon_satisfactory(x, leaf, cfg.epsilon);
            if !respects(d.mutability(), x, &cand) || label(&cand)? != t {
                continue;
            }
            let cost = penalty_distance(cand.view(), x.view(), cfg.cost, mad.as_deref())?;
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, cand));
            }
        }
    }
    Ok(match best {
        Some((_, cf)) => ExplanationState::from_path(x, t, "feature_tweak", vec![x.clone(), cf], ConvergedReason::ThresholdReached),
        None => ExplanationState::from_path(x, t, "feature_tweak", vec![x.clone()], ConvergedReason::NoCandidate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{DecisionTree, TreeNode, VoteRule};
    use ndarray::array;

    fn stump() -> TreeModel {
        let nodes = vec![
            TreeNode::Split {
                feature: 0,
                threshold: 0.0,
                left: 1,
                right: 2,
            },
            TreeNode::Leaf { probs: vec![1.0, 0.0] },
            TreeNode::Leaf { probs: vec![0.0, 1.0] },
        ];
        TreeModel::new(vec![DecisionTree::new(2, 2, nodes).unwrap()], VoteRule::Majority).unwrap()
    }

    fn data() -> Dataset {
        Dataset::new(
            vec!["a".into(), "b".into()],
            array![[-1.0, 0.0], [1.0, 0.0], [-2.0, 1.0], [2.0, 1.0]],
            vec![1, 2, 1, 2],
        )
        .unwrap()
    }

    #[test]
    fn stump_hand_trace() {
        let x = array![-1.0, 5.0];
        let es = feature_tweak(&x, 2, &data(), &stump(), &FeatureTweakConfig::default()).unwrap();
        assert_eq!(es.counterfactuals.row(0).to_vec(), vec![0.1, 5.0]);
        assert_eq!(es.converged_reason, Some(ConvergedReason::ThresholdReached));
    }

    #[test]
    fn factual_in_target_is_returned() {
        let x = array![3.0, 5.0];
        let es = feature_tweak(&x, 2, &data(), &stump(), &FeatureTweakConfig::default()).unwrap();
        assert_eq!(es.counterfactuals.row(0), x);
        assert_eq!(es.iterations, 0);
    }

    #[test]
    fn immutable_split_feature_leaves_no_candidate() {
        let x = array![-1.0, 5.0];
        let d = data().set_mutability(vec![Mutability::None, Mutability::Both]).unwrap();
        let es = feature_tweak(&x, 2, &d, &stump(), &FeatureTweakConfig::default()).unwrap();
        assert_eq!(es.converged_reason, Some(ConvergedReason::NoCandidate));
        assert_eq!(es.counterfactuals.row(0), x);
    }
}
