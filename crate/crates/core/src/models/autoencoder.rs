// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::train::{fit_network, OptimizerKind, TrainConfig};
use super::check_dim;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Deterministic autoencoder whose decoder maps latent codes back to feature
/// space. Latent-space search optimises codes and differentiates through the
/// decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    encoder: Mlp,
    decoder: Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    /// Hidden widths of the encoder; the decoder mirrors them.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            hidden: vec![16],
            epochs: 200,
            learning_rate: 0.005,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl Autoencoder {
    pub fn new(encoder: Mlp, decoder: Mlp) -> Result<Self> {
        check_dim(encoder.output_dim(), decoder.input_dim())?;
        check_dim(encoder.input_dim(), decoder.output_dim())?;
        Ok(Autoencoder { encoder, decoder })
    }

    pub fn encoder(&self) -> &Mlp {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp {
        &self.decoder
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn encode(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.encoder.forward(x.insert_axis(Axis(0)))?.row(0).to_owned())
    }

    pub fn decode(&self, z: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.decoder.forward(z.insert_axis(Axis(0)))?.row(0).to_owned())
    }

    pub fn decode_batch(&self, z: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.decoder.forward(z)
    }

    /// `upstreamᵀ · ∂decode/∂z`.
    pub fn decode_vjp(&self, z: ArrayView1<f64>, upstream: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.decoder.vjp(z, upstream)
    }

    pub fn reconstruct(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.decoder.forward(self.encoder.forward(x)?.view())
    }

    /// Mean squared reconstruction error over all entries.
    pub fn reconstruction_mse(&self, x: ArrayView2<f64>) -> Result<f64> {
        let r = self.reconstruct(x)?;
        Ok((&r - &x).mapv(|v| v * v).mean().unwrap_or(0.0))
    }
}

/// Trains an autoencoder with a `latent_dim`-wide bottleneck on the dataset
/// features, minimising mean squared reconstruction error with Adam.
pub fn train_autoencoder(d: &Dataset, latent_dim: usize, cfg: &AutoencoderConfig) -> Result<Autoencoder> {
    let dim = d.n_features();
    if latent_dim == 0 || latent_dim > dim {
        return Err(Error::config(format!(
            "latent dimension must be in 1..={dim}, got {latent_dim}"
        )));
    }
    let mut widths = vec![dim];
    widths.extend_from_slice(&cfg.hidden);
    widths.push(latent_dim);
    widths.extend(cfg.hidden.iter().rev());
    widths.push(dim);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Build as one chain so a single backward pass trains both halves; the
    // bottleneck layer has an identity activation.
    let enc = Mlp::init(&widths[..cfg.hidden.len() + 2], 0.0, &mut rng)?;
    let dec = Mlp::init(&widths[cfg.hidden.len() + 1..], 0.0, &mut rng)?;
    let n_enc = enc.layers().len();
    let mut layers = enc.layers().to_vec();
    layers.extend_from_slice(dec.layers());
    let mut chain = Mlp::new(layers)?;

    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        learning_rate: cfg.learning_rate,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        optimizer: OptimizerKind::Adam,
    };
    let x = d.x();
    fit_network(&mut chain, x.view(), &train_cfg, &mut rng, |out, rows| {
        let target = x.select(Axis(0), rows);
        let diff = out - &target;
        let count = diff.len() as f64;
        let value = diff.mapv(|v| v * v).sum() / count;
        (value, diff * (2.0 / count))
    })?;

    let layers = chain.layers().to_vec();
    let encoder = Mlp::new(layers[..n_enc].to_vec())?;
    let decoder = Mlp::new(layers[n_enc..].to_vec())?;
    Autoencoder::new(encoder, decoder)
}
