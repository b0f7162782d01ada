// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array, Array1, Array2, ArrayView1, ArrayView2, Dimension};

use super::{check_dim, Classifier, Loss, Mlp};
use crate::error::{Error, Result};

/// Independently trained MLPs whose predictions are averaged.
///
/// Probabilities are the mean of member probabilities; losses and input
/// gradients are the mean of the member losses and gradients. Logits are the
/// mean of member logits.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepEnsemble {
    members: Vec<Mlp>,
}

impl DeepEnsemble {
    pub fn new(members: Vec<Mlp>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::config("a deep ensemble needs at least two members"));
        }
        let (d, k) = (members[0].input_dim(), members[0].output_dim());
        for m in &members[1..] {
            check_dim(d, m.input_dim())?;
            check_dim(k, m.output_dim())?;
        }
        Ok(DeepEnsemble { members })
    }

    pub fn members(&self) -> &[Mlp] {
        &self.members
    }

    fn mean<D, F>(&self, f: F) -> Result<Array<f64, D>>
    where
        D: Dimension,
        F: Fn(&Mlp) -> Result<Array<f64, D>>,
    {
        let mut acc = f(&self.members[0])?;
        for m in &self.members[1..] {
            acc += &f(m)?;
        }
        acc /= self.members.len() as f64;
        Ok(acc)
    }
}

impl Classifier for DeepEnsemble {
    fn input_dim(&self) -> usize {
        self.members[0].input_dim()
    }

    fn output_dim(&self) -> usize {
        self.members[0].output_dim()
    }

    fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.mean(|m| m.logits(x))
    }

    fn probs(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.mean(|m| m.probs(x))
    }

    fn is_differentiable(&self) -> bool {
        true
    }

    fn logits_vjp(&self, x: ArrayView1<f64>, upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.mean(|m| m.vjp(x, upstream))
    }

    fn loss(&self, x: ArrayView1<f64>, target: usize, loss: Loss) -> Result<f64> {
        let mut acc = 0.0;
        for m in &self.members {
            acc += m.loss(x, target, loss)?;
        }
        Ok(acc / self.members.len() as f64)
    }

    fn input_gradient(&self, x: ArrayView1<f64>, target: usize, loss: Loss) -> Result<Array1<f64>> {
        self.mean(|m| m.input_gradient(x, target, loss))
    }
}
