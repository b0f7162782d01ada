// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON persistence for models and autoencoders. Matrices are stored as
//! row-major nested arrays.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Activation, Autoencoder, Classifier, DecisionTree, DeepEnsemble, Dense, LinearModel, Likelihood, Mlp, Model, TreeModel, VoteRule};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

const KINDS: [&str; 6] = ["linear", "mlp", "ensemble", "tree", "forest", "autoencoder"];

#[derive(Serialize, Deserialize)]
struct LayerJson {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    layers: Vec<LayerJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dropout: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct Dims {
    input: usize,
    output: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    kind: String,
    version: u64,
    dims: Dims,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    likelihood: Option<Likelihood>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    layers: Vec<LayerJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dropout: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    members: Vec<NetJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    trees: Vec<DecisionTree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vote: Option<VoteRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encoder: Option<NetJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decoder: Option<NetJson>,
}

impl ModelFile {
    fn empty(kind: &str, input: usize, output: usize) -> Self {
        ModelFile {
            kind: kind.to_string(),
            version: FORMAT_VERSION,
            dims: Dims { input, output },
            likelihood: None,
            layers: Vec::new(),
            dropout: None,
            members: Vec::new(),
            trees: Vec::new(),
            vote: None,
            encoder: None,
            decoder: None,
        }
    }
}

fn layer_to_json(l: &Dense) -> LayerJson {
    LayerJson {
        w: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
        b: l.bias.to_vec(),
        activation: l.activation,
    }
}

fn layer_from_json(l: LayerJson) -> Result<Dense> {
    let rows = l.w.len();
    let cols = l.w.first().map_or(0, Vec::len);
    if l.w.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema("ragged weight matrix".into()));
    }
    let w = Array2::from_shape_vec((rows, cols), l.w.into_iter().flatten().collect())
        .map_err(|e| Error::Schema(e.to_string()))?;
    Dense::new(w, Array1::from(l.b), l.activation)
}

fn net_to_json(m: &Mlp) -> NetJson {
    NetJson {
        layers: m.layers().iter().map(layer_to_json).collect(),
        dropout: Some(m.dropout().to_vec()),
    }
}

fn net_from_json(n: NetJson) -> Result<Mlp> {
    let layers = n.layers.into_iter().map(layer_from_json).collect::<Result<Vec<_>>>()?;
    match n.dropout {
        Some(d) => Mlp::with_dropout(layers, d),
        None => Mlp::new(layers),
    }
}

fn to_file(m: &Model) -> ModelFile {
    let mut f = ModelFile::empty(m.kind(), m.input_dim(), m.output_dim());
    f.likelihood = Some(m.likelihood());
    match m {
        Model::Linear(l) => {
            f.layers = vec![LayerJson {
                w: l.weights().rows().into_iter().map(|r| r.to_vec()).collect(),
                b: l.bias().to_vec(),
                activation: Activation::Identity,
            }];
        }
        Model::Mlp(net) => {
            let n = net_to_json(net);
            f.layers = n.layers;
            f.dropout = n.dropout;
        }
        Model::Ensemble(e) => f.members = e.members().iter().map(net_to_json).collect(),
        Model::Tree(t) => {
            f.trees = t.trees().to_vec();
            f.vote = Some(t.vote());
        }
    }
    f
}

fn check_header(text: &str) -> Result<()> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Schema("model file must be a JSON object".into()))?;
    let version = obj
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Schema("missing integer 'version'".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Schema("missing string 'kind'".into()))?;
    if !KINDS.contains(&kind) {
        return Err(Error::UnsupportedKind(kind.to_string()));
    }
    Ok(())
}

pub fn model_to_json(m: &Model) -> Result<String> {
    Ok(serde_json::to_string(&to_file(m))?)
}

pub fn model_from_json(text: &str) -> Result<Model> {
    check_header(text)?;
    let f: ModelFile = serde_json::from_str(text)?;
    let model = match f.kind.as_str() {
        "linear" => {
            let mut layers = f.layers;
            if layers.len() != 1 {
                return Err(Error::Schema("linear model needs exactly one layer".into()));
            }
            let dense = layer_from_json(layers.remove(0))?;
            Model::Linear(LinearModel::new(dense.weights, dense.bias)?)
        }
        "mlp" => Model::Mlp(net_from_json(NetJson {
            layers: f.layers,
            dropout: f.dropout,
        })?),
        "ensemble" => Model::Ensemble(DeepEnsemble::new(
            f.members.into_iter().map(net_from_json).collect::<Result<Vec<_>>>()?,
        )?),
        "tree" | "forest" => {
            let trees = f
                .trees
                .into_iter()
                .map(|t| DecisionTree::new(t.n_features(), t.n_classes(), t.nodes().to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Model::Tree(TreeModel::new(trees, f.vote.unwrap_or(VoteRule::Majority))?)
        }
        other => return Err(Error::UnsupportedKind(format!("{other} (not a classifier)"))),
    };
    if model.input_dim() != f.dims.input || model.output_dim() != f.dims.output {
        return Err(Error::Schema("declared dims do not match the parameters".into()));
    }
    Ok(model)
}

pub fn save_model(m: &Model, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_json(m)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn autoencoder_to_json(ae: &Autoencoder) -> Result<String> {
    let mut f = ModelFile::empty("autoencoder", ae.input_dim(), ae.latent_dim());
    f.encoder = Some(net_to_json(ae.encoder()));
    f.decoder = Some(net_to_json(ae.decoder()));
    Ok(serde_json::to_string(&f)?)
}

pub fn autoencoder_from_json(text: &str) -> Result<Autoencoder> {
    check_header(text)?;
    let f: ModelFile = serde_json::from_str(text)?;
    if f.kind != "autoencoder" {
        return Err(Error::UnsupportedKind(format!("{} (expected autoencoder)", f.kind)));
    }
    let enc = f.encoder.ok_or_else(|| Error::Schema("missing encoder".into()))?;
    let dec = f.decoder.ok_or_else(|| Error::Schema("missing decoder".into()))?;
    Autoencoder::new(net_from_json(enc)?, net_from_json(dec)?)
}

pub fn save_autoencoder(ae: &Autoencoder, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, autoencoder_to_json(ae)?)?;
    Ok(())
}

pub fn load_autoencoder(path: impl AsRef<Path>) -> Result<Autoencoder> {
    autoencoder_from_json(&std::fs::read_to_string(path)?)
}
