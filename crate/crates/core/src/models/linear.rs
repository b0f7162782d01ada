// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::{check_dim, Classifier};
use crate::error::{Error, Result};

/// Logistic regression (one logit) or multinomial logit (one logit per class).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl LinearModel {
    /// `weights` has shape (outputs, features).
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        check_dim(weights.nrows(), bias.len())?;
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(Error::config("linear model needs at least one output and one feature"));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::config("linear model parameters must be finite"));
        }
        Ok(LinearModel { weights, bias })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }
}

impl Classifier for LinearModel {
    fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim(self.input_dim(), x.ncols())?;
        Ok(x.dot(&self.weights.t()) + &self.bias)
    }

    fn is_differentiable(&self) -> bool {
        true
    }

    fn logits_vjp(&self, x: ArrayView1<f64>, upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim(self.input_dim(), x.len())?;
        check_dim(self.output_dim(), upstream.len())?;
        Ok(upstream.dot(&self.weights))
    }
}
