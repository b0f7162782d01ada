// SPDX-License-Identifier: MIT OR Apache-2.0

//! Counterfactual explanations and algorithmic recourse for tabular classifiers.
//!
//! The crate is organised around the usual workflow:
//!
//! 1. build or ingest a [`Dataset`] (synthetic blobs or CSV), optionally
//!    standardized and annotated with per-feature [`Mutability`] tags;
//! 2. train a [`Model`] (linear, MLP, deep ensemble, decision tree or forest)
//!    or bring your own type implementing [`Classifier`];
//! 3. pick a [`Generator`] (a gradient preset such as `generic`, `dice` or
//!    `revise`, or one of the model-specific searches `growing_spheres` and
//!    `feature_tweak`) and call [`generate_counterfactual`];
//! 4. score the resulting [`ExplanationState`]s with [`eval::evaluate`] or
//!    compare generators with [`eval::benchmark`].
//!
//! ```no_run
//! use recourse::prelude::*;
//!
//! let data = load_synthetic(SyntheticKind::LinearlySeparable, 1000, 1).unwrap();
//! let (model, _) = train(&ModelSpec::Linear, &data, &TrainConfig::default()).unwrap();
//! let target = 2;
//! let predicted = model.predict(data.x().view()).unwrap();
//! let chosen = predicted.iter().position(|&p| p != target).unwrap();
//! let x = data.select_factual(chosen).unwrap();
//! let generator = Generator::preset("generic").unwrap();
//! let ce = generate_counterfactual(&x, target, &data, &model, &generator, &SearchOptions::default())
//!     .unwrap();
//! println!("valid: {}", ce.is_valid(&model).unwrap());
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod generators;
pub mod models;
pub mod plot;
pub mod search;

pub use dataset::{load_csv, load_synthetic, Dataset, Mutability, Standardizer, SyntheticKind};
pub use error::{Error, Result};

pub use models::{
    train, train_autoencoder, train_forest, train_tree, Autoencoder, AutoencoderConfig,
    Classifier, Loss, Model, ModelSpec, TrainConfig,
};
pub use generators::Generator;
pub use search::{generate_counterfactual, ExplanationState, SearchOptions};

/// The types needed for the basic train-and-explain workflow.
pub mod prelude {
    pub use crate::dataset::{load_csv, load_synthetic, Dataset, Mutability, SyntheticKind};
    pub use crate::generators::{dropout_decorator, Generator};
    pub use crate::models::{train, train_autoencoder, Classifier, Loss, Model, ModelSpec, TrainConfig};
    pub use crate::search::{
        generate_counterfactual, ConvergedReason, ConvergenceConfig, ExplanationState, OptimizerConfig, SearchOptions,
        SearchSpace,
    };
}
