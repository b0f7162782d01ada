// SPDX-License-Identifier: MIT OR Apache-2.0

//! The classifier contract and the built-in models.
//!
//! Every model maps a batch of inputs (rows = samples) to raw logits. Binary
//! models emit a single logit per sample, read as the log-odds of label 2;
//! multi-class models emit one logit per class. Probabilities are always
//! reported with one column per class.

mod autoencoder;
mod ensemble;
mod io;
mod linear;
mod loss;
mod mlp;
mod train;
mod tree;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use autoencoder::{train_autoencoder, Autoencoder, AutoencoderConfig};
pub use ensemble::DeepEnsemble;
pub use io::{
    autoencoder_from_json, autoencoder_to_json, load_autoencoder, load_model, model_from_json, model_to_json,
    save_autoencoder, save_model, FORMAT_VERSION,
};
pub use linear::LinearModel;
pub use loss::{log_sum_exp, sigmoid, softmax, Loss};
pub use mlp::{Activation, Dense, Mlp};
pub use train::{train, ModelSpec, OptimizerKind, TrainConfig, TrainReport};
pub use tree::{
    train_forest, train_forest_with, train_tree, DecisionTree, LeafPath, LeafRegion, PathCondition, TreeModel, TreeNode,
    VoteRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    Binary,
    Multiclass,
}

/// Behaviour every classifier offers to the counterfactual search.
///
/// Implementors provide [`logits`](Classifier::logits); differentiable models
/// also provide [`logits_vjp`](Classifier::logits_vjp), from which the input
/// gradient of any [`Loss`] follows.
pub trait Classifier: Send + Sync {
    fn input_dim(&self) -> usize;

    /// Width of the logit output: 1 for binary models, `C` otherwise.
    fn output_dim(&self) -> usize;

    fn n_classes(&self) -> usize {
        self.output_dim().max(2)
    }

    fn likelihood(&self) -> Likelihood {
        if self.output_dim() == 1 {
            Likelihood::Binary
        } else {
            Likelihood::Multiclass
        }
    }

    fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>>;

    fn probs(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(probs_from_logits(self.logits(x)?.view()))
    }

    fn is_differentiable(&self) -> bool {
        false
    }

    /// Vector-Jacobian product `upstreamᵀ · ∂logits/∂x` at a single input.
    fn logits_vjp(&self, _x: ArrayView1<f64>, _upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        Err(Error::capability("model does not expose input gradients"))
    }

    fn loss(&self, x: ArrayView1<f64>, target: usize, loss: Loss) -> Result<f64> {
        let z = self.logits(x.insert_axis(Axis(0)))?;
        loss.value(z.row(0), target)
    }

    /// Gradient of `loss(M(x), target)` with respect to `x`.
    fn input_gradient(&self, x: ArrayView1<f64>, target: usize, loss: Loss) -> Result<Array1<f64>> {
        if !self.is_differentiable() {
            return Err(Error::capability(
                "input gradients are unavailable for non-differentiable (tree based) models",
            ));
        }
        let z = self.logits(x.insert_axis(Axis(0)))?;
        let (_, g) = loss.value_and_grad(z.row(0), target)?;
        self.logits_vjp(x, g.view())
    }

    /// Predicted 1-based labels.
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(self.probs(x)?.view()))
    }

    fn as_tree(&self) -> Option<&TreeModel> {
        None
    }
}

/// Converts logits to per-class probabilities row by row.
pub fn probs_from_logits(logits: ArrayView2<f64>) -> Array2<f64> {
    if logits.ncols() == 1 {
        let mut out = Array2::zeros((logits.nrows(), 2));
        for (i, z) in logits.column(0).iter().enumerate() {
            out[[i, 0]] = sigmoid(-z);
            out[[i, 1]] = sigmoid(*z);
        }
        out
    } else {
        let mut out = Array2::zeros(logits.raw_dim());
        for (i, row) in logits.rows().into_iter().enumerate() {
            out.row_mut(i).assign(&softmax(row));
        }
        out
    }
}

/// 1-based argmax of every row; ties go to the lower label.
pub fn argmax_rows(p: ArrayView2<f64>) -> Vec<usize> {
    p.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = j;
                }
            }
            best + 1
        })
        .collect()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::Dimension { expected, got })
    } else {
        Ok(())
    }
}

/// Fraction of rows of `x` whose predicted label matches `y`.
pub fn accuracy(m: &dyn Classifier, x: ArrayView2<f64>, y: &[usize]) -> Result<f64> {
    let pred = m.predict(x)?;
    let hits = pred.iter().zip(y).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y.len().max(1) as f64)
}

/// Any of the built-in classifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Mlp(Mlp),
    Ensemble(DeepEnsemble),
    Tree(TreeModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Mlp(_) => "mlp",
            Model::Ensemble(_) => "ensemble",
            Model::Tree(t) if t.trees().len() == 1 => "tree",
            Model::Tree(_) => "forest",
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Linear(m) => m,
            Model::Mlp(m) => m,
            Model::Ensemble(m) => m,
            Model::Tree(m) => m,
        }
    }
}

impl Classifier for Model {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }
    fn output_dim(&self) -> usize {
        self.inner().output_dim()
    }
    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }
    fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.inner().logits(x)
    }
    fn probs(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.inner().probs(x)
    }
    fn is_differentiable(&self) -> bool {
        self.inner().is_differentiable()
    }
    fn logits_vjp(&self, x: ArrayView1<f64>, upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.inner().logits_vjp(x, upstream)
    }
    fn loss(&self, x: ArrayView1<f64>, target: usize, loss: Loss) -> Result<f64> {
        self.inner().loss(x, target, loss)
    }
    fn input_gradient(&self, x: ArrayView1<f64>, target: usize, loss: Loss) -> Result<Array1<f64>> {
        self.inner().input_gradient(x, target, loss)
    }
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        self.inner().predict(x)
    }
    fn as_tree(&self) -> Option<&TreeModel> {
        self.inner().as_tree()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn binary_probs_from_single_logit() {
        let p = probs_from_logits(array![[0.0], [1000.0], [-1000.0]].view());
        assert_eq!(p.row(0).to_vec(), vec![0.5, 0.5]);
        assert_eq!(p[[1, 1]], 1.0);
        assert!(p[[2, 1]] >= 0.0 && p[[2, 0]] == 1.0);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let p = probs_from_logits(array![[0.0, 0.0], [1000.0, 0.0], [1e4, -1e4]].view());
        assert_eq!(p.row(0).to_vec(), vec![0.5, 0.5]);
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
        assert!(p[[1, 0]] <= 1.0 && p[[1, 1]] < 1e-300 + 1e-15);
    }

    #[test]
    fn argmax_is_one_based() {
        assert_eq!(argmax_rows(array![[0.2, 0.8], [0.9, 0.1]].view()), vec![2, 1]);
    }
}
