// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::DenseGrad;
use super::tree::train_forest_with;
use super::{accuracy, sigmoid, softmax, train_tree, DeepEnsemble, LinearModel, Mlp, Model};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Which model to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Linear,
    Mlp {
        hidden: Vec<usize>,
        #[serde(default)]
        dropout: f64,
    },
    Ensemble {
        members: usize,
        hidden: Vec<usize>,
        #[serde(default)]
        dropout: f64,
    },
    Tree {
        max_depth: usize,
        min_leaf: usize,
    },
    Forest {
        n_trees: usize,
        max_depth: usize,
        min_leaf: usize,
    },
}

impl ModelSpec {
    /// One hidden layer of 32 ReLU units.
    pub fn default_mlp() -> Self {
        ModelSpec::Mlp {
            hidden: vec![32],
            dropout: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Descent,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            learning_rate: 0.01,
            batch_size: 32,
            seed: 0,
            optimizer: OptimizerKind::Adam,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean training loss per epoch (cross-entropy on logits; empty for trees).
    pub loss_history: Vec<f64>,
    pub accuracy: f64,
}

/// Fits a model on the whole dataset. Deterministic for a fixed seed.
pub fn train(spec: &ModelSpec, d: &Dataset, cfg: &TrainConfig) -> Result<(Model, TrainReport)> {
    if d.n_rows() == 0 {
        return Err(Error::config("cannot train on an empty dataset"));
    }
    if cfg.learning_rate <= 0.0 || cfg.batch_size == 0 {
        return Err(Error::config("learning rate and batch size must be positive"));
    }
    let n_out = if d.n_classes() == 2 { 1 } else { d.n_classes() };
    let dim = d.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (model, history) = match spec {
        ModelSpec::Linear => {
            let mut net = Mlp::init(&[dim, n_out], 0.0, &mut rng)?;
            let history = fit_classifier(&mut net, d, cfg, &mut rng)?;
            let layer = &net.layers()[0];
            let lin = LinearModel::new(layer.weights.clone(), layer.bias.clone())?;
            (Model::Linear(lin), history)
        }
        ModelSpec::Mlp { hidden, dropout } => {
            let mut net = Mlp::init(&dims(dim, hidden, n_out), *dropout, &mut rng)?;
            let history = fit_classifier(&mut net, d, cfg, &mut rng)?;
            (Model::Mlp(net), history)
        }
        ModelSpec::Ensemble {
            members,
            hidden,
            dropout,
        } => {
            let mut nets = Vec::with_capacity(*members);
            let mut history = vec![0.0; cfg.epochs];
            for i in 0..*members {
                let mut member_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                let mut net = Mlp::init(&dims(dim, hidden, n_out), *dropout, &mut member_rng)?;
                let h = fit_classifier(&mut net, d, cfg, &mut member_rng)?;
                history.iter_mut().zip(h).for_each(|(a, b)| *a += b / *members as f64);
                nets.push(net);
            }
            (Model::Ensemble(DeepEnsemble::new(nets)?), history)
        }
        ModelSpec::Tree { max_depth, min_leaf } => (Model::Tree(train_tree(d, *max_depth, *min_leaf)?), Vec::new()),
        ModelSpec::Forest {
            n_trees,
            max_depth,
            min_leaf,
        } => (
            Model::Tree(train_forest_with(d, *n_trees, *max_depth, *min_leaf, cfg.seed)?),
            Vec::new(),
        ),
    };
    let acc = accuracy(&model, d.x().view(), d.y())?;
    Ok((
        model,
        TrainReport {
            loss_history: history,
            accuracy: acc,
        },
    ))
}

fn dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut v = vec![input];
    v.extend_from_slice(hidden);
    v.push(output);
    v
}

fn fit_classifier(net: &mut Mlp, d: &Dataset, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let y = d.y();
    let binary = net.output_dim() == 1;
    fit_network(net, d.x().view(), cfg, rng, |out, rows| {
        let b = rows.len() as f64;
        let mut grad = Array2::zeros(out.raw_dim());
        let mut total = 0.0;
        for (i, &r) in rows.iter().enumerate() {
            let z = out.row(i);
            if binary {
                let t = if y[r] == 2 { 1.0 } else { 0.0 };
                let v = z[0];
                total += v.max(0.0) - t * v + (-v.abs()).exp().ln_1p();
                grad[[i, 0]] = (sigmoid(v) - t) / b;
            } else {
                let p = softmax(z);
                let m = z.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
                let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                total += lse - z[y[r] - 1];
                let mut g = p;
                g[y[r] - 1] -= 1.0;
                grad.row_mut(i).assign(&(g / b));
            }
        }
        (total / b, grad)
    })
}

/// Mini-batch training loop shared by classifiers and autoencoders. `loss`
/// receives the batch output and the dataset rows it came from, and returns
/// the mean batch loss and its gradient w.r.t. the output.
pub(crate) fn fit_network<F>(
    net: &mut Mlp,
    x: ArrayView2<f64>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    loss: F,
) -> Result<Vec<f64>>
where
    F: Fn(&Array2<f64>, &[usize]) -> (f64, Array2<f64>),
{
    let n = x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut opt = ParamOptimizer::new(net, cfg);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let cache = net.forward_cached(xb.view(), Some(&mut *rng))?;
            let (value, d_out) = loss(&cache.output, batch);
            if !value.is_finite() {
                return Err(Error::Divergence(format!("non-finite loss at epoch {epoch}")));
            }
            epoch_loss += value * batch.len() as f64;
            let (grads, _) = net.backward(&cache, d_out.view());
            opt.step(net, &grads);
        }
        let mean = epoch_loss / n as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence(format!("non-finite loss at epoch {epoch}")));
        }
        history.push(mean);
    }
    if net.layers().iter().any(|l| l.weights.iter().any(|v| !v.is_finite())) {
        return Err(Error::Divergence("non-finite weights".into()));
    }
    Ok(history)
}

struct ParamOptimizer {
    kind: OptimizerKind,
    lr: f64,
    t: i32,
    m: Vec<DenseGrad>,
    v: Vec<DenseGrad>,
}

impl ParamOptimizer {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(net: &Mlp, cfg: &TrainConfig) -> Self {
        let zeros: Vec<DenseGrad> = net
            .layers()
            .iter()
            .map(|l| DenseGrad {
                weights: Array2::zeros(l.weights.raw_dim()),
                bias: ndarray::Array1::zeros(l.bias.len()),
            })
            .collect();
        ParamOptimizer {
            kind: cfg.optimizer,
            lr: cfg.learning_rate,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    fn step(&mut self, net: &mut Mlp, grads: &[DenseGrad]) {
        self.t += 1;
        let lr = self.lr;
        match self.kind {
            OptimizerKind::Descent => {
                for (layer, g) in net.layers_mut().iter_mut().zip(grads) {
                    layer.weights.scaled_add(-lr, &g.weights);
                    layer.bias.scaled_add(-lr, &g.bias);
                }
            }
            OptimizerKind::Adam => {
                let c1 = 1.0 - Self::BETA1.powi(self.t);
                let c2 = 1.0 - Self::BETA2.powi(self.t);
                let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                    *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
                    *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
                };
                for ((layer, g), (m, v)) in net
                    .layers_mut()
                    .iter_mut()
                    .zip(grads)
                    .zip(self.m.iter_mut().zip(self.v.iter_mut()))
                {
                    ndarray::Zip::from(&mut layer.weights)
                        .and(&g.weights)
                        .and(&mut m.weights)
                        .and(&mut v.weights)
                        .for_each(|p, &g, m, v| update(p, g, m, v));
                    ndarray::Zip::from(&mut layer.bias)
                        .and(&g.bias)
                        .and(&mut m.bias)
                        .and(&mut v.bias)
                        .for_each(|p, &g, m, v| update(p, g, m, v));
                }
            }
        }
    }
}
