// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, Classifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(&self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Identity => v,
        }
    }

    fn derivative(&self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer `act(W·x + b)` with `W` of shape (out, in).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, activation: Activation) -> Result<Self> {
        check_dim(weights.nrows(), bias.len())?;
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::config("layer parameters must be finite"));
        }
        Ok(Dense {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = Array2::from_shape_fn((outputs, inputs), |_| rng.random_range(-limit..=limit));
        Dense {
            weights,
            bias: Array1::zeros(outputs),
            activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    fn pre_activation(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + &self.bias
    }
}

/// Parameter gradients for one layer.
#[derive(Debug, Clone)]
pub(crate) struct DenseGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Activations recorded during a forward pass.
pub(crate) struct ForwardCache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
    pub output: Array2<f64>,
}

/// Multilayer perceptron whose final layer emits raw values (no softmax).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    /// Dropout rate applied to each layer's output while training.
    dropout: Vec<f64>,
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        let n = layers.len();
        Self::with_dropout(layers, vec![0.0; n])
    }

    pub fn with_dropout(layers: Vec<Dense>, dropout: Vec<f64>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("an MLP needs at least one layer"));
        }
        if dropout.len() != layers.len() || dropout.iter().any(|p| !(0.0..1.0).contains(p)) {
            return Err(Error::config("dropout needs one rate in [0, 1) per layer"));
        }
        for pair in layers.windows(2) {
            check_dim(pair[0].output_dim(), pair[1].input_dim())?;
        }
        if layers.last().map(|l| l.activation) != Some(Activation::Identity) {
            return Err(Error::config("the final layer must use the identity activation"));
        }
        Ok(Mlp { layers, dropout })
    }

    /// Randomly initialised network `dims[0] → … → dims[last]` with ReLU hidden
    /// layers and an identity output layer.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], dropout: f64, rng: &mut R) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::config("MLP dimensions must have at least two positive entries"));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n {
                    Activation::Identity
                } else {
                    Activation::Relu
                };
                Dense::glorot(dims[i], dims[i + 1], act, rng)
            })
            .collect();
        let rates = (0..n).map(|i| if i + 1 == n { 0.0 } else { dropout }).collect();
        Self::with_dropout(layers, rates)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn dropout(&self) -> &[f64] {
        &self.dropout
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").output_dim()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dim(self.input_dim(), x.ncols())?;
        let mut a = x.to_owned();
        for layer in &self.layers {
            let act = layer.activation;
            a = layer.pre_activation(a.view()).mapv(|v| act.apply(v));
        }
        Ok(a)
    }

    /// Forward pass keeping everything backpropagation needs. Dropout masks
    /// are drawn only when `rng` is given.
    pub(crate) fn forward_cached<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        mut rng: Option<&mut R>,
    ) -> Result<ForwardCache> {
        check_dim(self.input_dim(), x.ncols())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (layer, &p) in self.layers.iter().zip(&self.dropout) {
            let z = layer.pre_activation(a.view());
            let act = layer.activation;
            let mut out = z.mapv(|v| act.apply(v));
            let mask = match rng.as_deref_mut() {
                Some(r) if p > 0.0 => {
                    let keep = 1.0 - p;
                    let m = Array2::from_shape_fn(out.raw_dim(), |_| {
                        if r.random::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    });
                    out *= &m;
                    Some(m)
                }
                _ => None,
            };
            inputs.push(a);
            pre.push(z);
            masks.push(mask);
            a = out;
        }
        Ok(ForwardCache {
            inputs,
            pre,
            masks,
            output: a,
        })
    }

    /// Backpropagates `d_output` (gradient w.r.t. the network output) and
    /// returns per-layer parameter gradients plus the gradient w.r.t. the input.
    pub(crate) fn backward(&self, cache: &ForwardCache, d_output: ArrayView2<f64>) -> (Vec<DenseGrad>, Array2<f64>) {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut d_a = d_output.to_owned();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if let Some(mask) = &cache.masks[l] {
                d_a *= mask;
            }
            let act = layer.activation;
            let d_z = match act {
                Activation::Identity => d_a,
                _ => {
                    let mut d = d_a;
                    d.zip_mut_with(&cache.pre[l], |g, &z| *g *= act.derivative(z));
                    d
                }
            };
            grads.push(DenseGrad {
                weights: d_z.t().dot(&cache.inputs[l]),
                bias: d_z.sum_axis(Axis(0)),
            });
            d_a = d_z.dot(&layer.weights);
        }
        grads.reverse();
        (grads, d_a)
    }

    /// `upstreamᵀ · ∂f/∂x` at a single input.
    pub fn vjp(&self, x: ArrayView1<f64>, upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        check_dim(self.output_dim(), upstream.len())?;
        let cache = self.forward_cached::<rand_chacha::ChaCha8Rng>(x.insert_axis(Axis(0)), None)?;
        let (_, d_x) = self.backward(&cache, upstream.insert_axis(Axis(0)));
        Ok(d_x.row(0).to_owned())
    }

    /// Jacobian `∂f/∂x` (output × input) at a single input.
    pub fn jacobian(&self, x: ArrayView1<f64>) -> Result<Array2<f64>> {
        let k = self.output_dim();
        let mut j = Array2::zeros((k, self.input_dim()));
        for o in 0..k {
            let mut e = Array1::zeros(k);
            e[o] = 1.0;
            j.row_mut(o).assign(&self.vjp(x, e.view())?);
        }
        Ok(j)
    }
}

impl Classifier for Mlp {
    fn input_dim(&self) -> usize {
        Mlp::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        Mlp::output_dim(self)
    }

    fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.forward(x)
    }

    fn is_differentiable(&self) -> bool {
        true
    }

    fn logits_vjp(&self, x: ArrayView1<f64>, upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.vjp(x, upstream)
    }
}
