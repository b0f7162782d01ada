// SPDX-License-Identifier: MIT OR Apache-2.0

//! Counterfactual generators: the named gradient presets, the dropout
//! decorator, and the two searches that need no gradients (GrowingSpheres
//! and FeatureTweak).

mod feature_tweak;
mod greedy;
mod growing_spheres;
pub mod penalties;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use feature_tweak::{epsilon_satisfactory, feature_tweak, FeatureTweakConfig};
pub use greedy::greedy_perturbation;
pub use growing_spheres::{growing_spheres, GrowingSpheresConfig};
pub use penalties::{
    ddp_diversity_gradient, distance_gradient, gravitational_gradient, penalty_claproar, penalty_ddp_diversity,
    penalty_distance, penalty_gravitational, Norm, Penalty, DIVERSITY_RIDGE, L0_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::models::{Autoencoder, Classifier, Loss};
use crate::search::{compose_objective, Objective, OptimizerConfig, PenaltyTerm, SearchSpace};

/// Names accepted by [`Generator::preset`].
pub const PRESETS: &[&str] = &[
    "generic",
    "wachter",
    "dice",
    "greedy",
    "gravitational",
    "claproar",
    "revise",
    "growing_spheres",
    "feature_tweak",
];

/// How a gradient generator turns the objective gradient into a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// Step with the configured optimizer.
    Gradient,
    /// Move one feature per counterfactual by a fixed `step` against the
    /// sign of its gradient; each feature may be moved at most `cap` times.
    Greedy { step: f64, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientGenerator {
    pub name: String,
    pub objective: Objective,
    pub optimizer: OptimizerConfig,
    pub perturbation: Perturbation,
    /// Fraction of the step entries zeroed at every iteration.
    pub dropout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Gradient(GradientGenerator),
    GrowingSpheres(GrowingSpheresConfig),
    FeatureTweak(FeatureTweakConfig),
}

fn gradient(name: &str, objective: Objective) -> Generator {
    Generator::Gradient(GradientGenerator {
        name: name.to_string(),
        objective,
        optimizer: OptimizerConfig::default(),
        perturbation: Perturbation::Gradient,
        dropout: None,
    })
}

impl Generator {
    /// One of the catalogue presets; see [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        let f = SearchSpace::Feature;
        let name = name.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match name.as_str() {
            "generic" => gradient("generic", compose_objective(None, &[("distance_l1", 0.1)], f, 1)?),
            "wachter" => gradient("wachter", compose_objective(None, &[("distance_mad", 0.1)], f, 1)?),
            "dice" => gradient(
                "dice",
                compose_objective(None, &[("distance_l1", 0.1), ("ddp_diversity", 0.2)], f, 5)?,
            ),
            "greedy" => {
                let mut g = gradient("greedy", compose_objective(None, &[], f, 1)?);
                if let Generator::Gradient(inner) = &mut g {
                    inner.perturbation = Perturbation::Greedy { step: 0.1, cap: 10 };
                }
                g
            }
            "gravitational" => gradient(
                "gravitational",
                compose_objective(None, &[("distance_l1", 0.1), ("gravitational", 0.5)], f, 1)?,
            ),
            "claproar" => gradient(
                "claproar",
                compose_objective(None, &[("distance_l1", 0.1), ("claproar", 0.5)], f, 1)?,
            ),
            "revise" => gradient(
                "revise",
                compose_objective(None, &[("distance_l1", 0.1)], SearchSpace::Latent, 1)?,
            ),
            "growing_spheres" => Generator::GrowingSpheres(GrowingSpheresConfig::default()),
            "feature_tweak" => Generator::FeatureTweak(FeatureTweakConfig::default()),
            other => {
                return Err(Error::config(format!(
                    "unknown generator '{other}'; expected one of {}",
                    PRESETS.join(", ")
                )))
            }
        })
    }

    /// A gradient generator built from a custom objective.
    pub fn custom(name: &str, objective: Objective, optimizer: OptimizerConfig) -> Result<Self> {
        optimizer.validate()?;
        Ok(Generator::Gradient(GradientGenerator {
            name: name.to_string(),
            objective,
            optimizer,
            perturbation: Perturbation::Gradient,
            dropout: None,
        }))
    }

    pub fn name(&self) -> &str {
        match self {
            Generator::Gradient(g) => &g.name,
            Generator::GrowingSpheres(_) => "growing_spheres",
            Generator::FeatureTweak(_) => "feature_tweak",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Generator::Gradient(_) => "gradient_preset",
            Generator::GrowingSpheres(_) => "growing_spheres",
            Generator::FeatureTweak(_) => "feature_tweak",
        }
    }

    /// Which model types the generator works with.
    pub fn category(&self) -> &'static str {
        match self {
            Generator::Gradient(_) => "gradient based",
            Generator::GrowingSpheres(_) => "agnostic",
            Generator::FeatureTweak(_) => "tree based",
        }
    }

    pub fn objective(&self) -> Option<&Objective> {
        match self {
            Generator::Gradient(g) => Some(&g.objective),
            _ => None,
        }
    }

    /// Fails with a capability error when the generator cannot explain `m`.
    pub fn check_compatible(&self, m: &dyn Classifier) -> Result<()> {
        match self {
            Generator::Gradient(g) if !m.is_differentiable() => Err(Error::capability(format!(
                "generator '{}' is gradient based and needs a differentiable model",
                g.name
            ))),
            Generator::FeatureTweak(_) if m.as_tree().is_none() => Err(Error::capability(
                "generator 'feature_tweak' is tree based and needs a decision tree or forest",
            )),
            _ => Ok(()),
        }
    }

    fn gradient_mut(&mut self, what: &str) -> Result<&mut GradientGenerator> {
        match self {
            Generator::Gradient(g) => Ok(g),
            other => Err(Error::config(format!(
                "generator '{}' is not composable: {what} applies to gradient generators only",
                other.name()
            ))),
        }
    }

    /// Appends a weighted penalty to a gradient generator's objective.
    pub fn with_penalty(mut self, id: &str, weight: f64) -> Result<Self> {
        let extra = compose_objective(None, &[(id, weight)], SearchSpace::Feature, 1)?.penalties;
        self.gradient_mut("penalties")?.objective.penalties.extend(extra);
        Ok(self)
    }

    pub fn with_loss(mut self, loss: Loss) -> Result<Self> {
        self.gradient_mut("a loss")?.objective.loss = Some(loss);
        Ok(self)
    }

    pub fn with_optimizer(mut self, optimizer: OptimizerConfig) -> Result<Self> {
        optimizer.validate()?;
        self.gradient_mut("an optimizer")?.optimizer = optimizer;
        Ok(self)
    }

    pub fn with_num_counterfactuals(mut self, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::config("num_counterfactuals must be at least 1"));
        }
        match &mut self {
            Generator::Gradient(g) => g.objective.num_counterfactuals = l,
            _ if l == 1 => {}
            other => {
                return Err(Error::config(format!(
                    "generator '{}' returns a single counterfactual",
                    other.name()
                )))
            }
        }
        Ok(self)
    }

    /// Attaches the autoencoder used to decode latent search states.
    pub fn with_autoencoder(mut self, ae: Arc<Autoencoder>) -> Result<Self> {
        self.gradient_mut("an autoencoder")?.objective.autoencoder = Some(ae);
        Ok(self)
    }

    pub fn needs_autoencoder(&self) -> bool {
        matches!(self, Generator::Gradient(g) if g.objective.search_space == SearchSpace::Latent && g.objective.autoencoder.is_none())
    }

    /// Parses a generator config document (see [`GeneratorConfig`]).
    pub fn from_config_json(text: &str) -> Result<Self> {
        let cfg: GeneratorConfig = serde_json::from_str(text)?;
        cfg.build()
    }

    /// Serializes the generator back into a config document. An attached
    /// autoencoder is not part of the document.
    pub fn to_config_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GeneratorConfig::from(self))?)
    }

    /// Resolves a CLI-style spec: a path to a config file, or a preset name.
    pub fn resolve(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            Self::from_config_json(&std::fs::read_to_string(path)?)
        } else {
            Self::preset(spec)
        }
    }
}

/// Wraps a gradient generator so a random `round(p · n)` of the `n` entries
/// of every step are set to zero.
pub fn dropout_decorator(inner: Generator, p_dropout: f64) -> Result<Generator> {
    if !(0.0..1.0).contains(&p_dropout) {
        return Err(Error::config(format!("dropout probability must lie in [0, 1), got {p_dropout}")));
    }
    match inner {
        Generator::Gradient(mut g) => {
            g.dropout = Some(p_dropout);
            Ok(Generator::Gradient(g))
        }
        other => Err(Error::config(format!(
            "dropout applies to gradient generators only, not '{}'",
            other.name()
        ))),
    }
}

/// JSON form of a generator:
///
/// ```json
/// {"preset": "dice",
///  "objective": {"loss": "logit_crossentropy",
///                "penalties": [{"id": "distance_l1", "weight": 0.1}],
///                "search_space": "feature", "num_counterfactuals": 5},
///  "optimizer": {"kind": "adam", "learning_rate": 0.005},
///  "options": {"dropout": 0.1}}
/// ```
///
/// Every part is optional. Objective fields override the preset (a given
/// penalty list replaces the preset's); without a preset the objective
/// describes a custom gradient generator.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<GeneratorOptions>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<Loss>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalties: Option<Vec<PenaltyTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_space: Option<SearchSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_counterfactuals: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropout: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Norm>,
}

impl GeneratorConfig {
    pub fn build(self) -> Result<Generator> {
        let mut g = match &self.preset {
            Some(p) => Generator::preset(p)?,
            None => {
                if self.objective.is_none() {
                    return Err(Error::config("generator config needs a preset or an objective"));
                }
                Generator::custom("custom", compose_objective(None, &[], SearchSpace::Feature, 1)?, OptimizerConfig::default())?
            }
        };
        if let Some(spec) = self.objective {
            let inner = g.gradient_mut("an objective")?;
            if let Some(loss) = spec.loss {
                inner.objective.loss = Some(loss);
            }
            if let Some(terms) = spec.penalties {
                for t in &terms {
                    if t.weight < 0.0 || !t.weight.is_finite() {
                        return Err(Error::config(format!("penalty weight for {} must be finite and >= 0", t.penalty)));
                    }
                }
                inner.objective.penalties = terms;
            }
            if let Some(s) = spec.search_space {
                inner.objective.search_space = s;
            }
            if let Some(l) = spec.num_counterfactuals {
                if l == 0 {
                    return Err(Error::config("num_counterfactuals must be at least 1"));
                }
                inner.objective.num_counterfactuals = l;
            }
        }
        if let Some(opt) = self.optimizer {
            g = g.with_optimizer(opt)?;
        }
        if let Some(name) = self.name {
            if let Generator::Gradient(inner) = &mut g {
                inner.name = name;
            } else {
                return Err(Error::config("only gradient generators can be renamed"));
            }
        }
        if let Some(o) = self.options {
            g = apply_options(g, o)?;
        }
        Ok(g)
    }
}

fn apply_options(g: Generator, o: GeneratorOptions) -> Result<Generator> {
    let misplaced = |what: &str, g: &Generator| {
        Err(Error::config(format!("option '{what}' does not apply to generator '{}'", g.name())))
    };
    match g {
        Generator::Gradient(mut inner) => {
            if o.n_samples.is_some() || o.eta0.is_some() || o.growth.is_some() || o.max_rounds.is_some() {
                return misplaced("growing_spheres options", &Generator::Gradient(inner));
            }
            if o.epsilon.is_some() || o.cost.is_some() {
                return misplaced("feature_tweak options", &Generator::Gradient(inner));
            }
            if o.greedy_step.is_some() || o.greedy_cap.is_some() {
                let (mut step, mut cap) = match inner.perturbation {
                    Perturbation::Greedy { step, cap } => (step, cap),
                    Perturbation::Gradient => (0.1, 10),
                };
                step = o.greedy_step.unwrap_or(step);
                cap = o.greedy_cap.unwrap_or(cap);
                if step.is_nan() || step <= 0.0 || cap == 0 {
                    return Err(Error::config("greedy step must be positive and cap at least 1"));
                }
                inner.perturbation = Perturbation::Greedy { step, cap };
            }
            let g = Generator::Gradient(inner);
            match o.dropout {
                Some(p) => dropout_decorator(g, p),
                None => Ok(g),
            }
        }
        Generator::GrowingSpheres(mut cfg) => {
            if o.dropout.is_some() || o.greedy_step.is_some() || o.greedy_cap.is_some() || o.epsilon.is_some() || o.cost.is_some() {
                return misplaced("gradient or feature_tweak options", &Generator::GrowingSpheres(cfg));
            }
            cfg.n_samples = o.n_samples.unwrap_or(cfg.n_samples);
            cfg.eta0 = o.eta0.unwrap_or(cfg.eta0);
            cfg.growth = o.growth.unwrap_or(cfg.growth);
            cfg.max_rounds = o.max_rounds.unwrap_or(cfg.max_rounds);
            cfg.validate()?;
            Ok(Generator::GrowingSpheres(cfg))
        }
        Generator::FeatureTweak(mut cfg) => {
            if o.dropout.is_some()
                || o.greedy_step.is_some()
                || o.greedy_cap.is_some()
                || o.n_samples.is_some()
                || o.eta0.is_some()
                || o.growth.is_some()
                || o.max_rounds.is_some()
            {
                return misplaced("gradient or growing_spheres options", &Generator::FeatureTweak(cfg));
            }
            cfg.epsilon = o.epsilon.unwrap_or(cfg.epsilon);
            cfg.cost = o.cost.unwrap_or(cfg.cost);
            cfg.validate()?;
            Ok(Generator::FeatureTweak(cfg))
        }
    }
}

impl From<&Generator> for GeneratorConfig {
    fn from(g: &Generator) -> Self {
        match g {
            Generator::Gradient(inner) => {
                let (greedy_step, greedy_cap) = match inner.perturbation {
                    Perturbation::Greedy { step, cap } => (Some(step), Some(cap)),
                    Perturbation::Gradient => (None, None),
                };
                let options = GeneratorOptions {
                    dropout: inner.dropout,
                    greedy_step,
                    greedy_cap,
                    ..Default::default()
                };
                let has_options = options.dropout.is_some() || greedy_step.is_some();
                GeneratorConfig {
                    preset: None,
                    name: Some(inner.name.clone()),
                    objective: Some(ObjectiveSpec {
                        loss: inner.objective.loss,
                        penalties: Some(inner.objective.penalties.clone()),
                        search_space: Some(inner.objective.search_space),
                        num_counterfactuals: Some(inner.objective.num_counterfactuals),
                    }),
                    optimizer: Some(inner.optimizer),
                    options: has_options.then_some(options),
                }
            }
            Generator::GrowingSpheres(cfg) => GeneratorConfig {
                preset: Some("growing_spheres".into()),
                options: Some(GeneratorOptions {
                    n_samples: Some(cfg.n_samples),
                    eta0: Some(cfg.eta0),
                    growth: Some(cfg.growth),
                    max_rounds: Some(cfg.max_rounds),
                    ..Default::default()
                }),
                ..Default::default()
            },
            Generator::FeatureTweak(cfg) => GeneratorConfig {
                preset: Some("feature_tweak".into()),
                options: Some(GeneratorOptions {
                    epsilon: Some(cfg.epsilon),
                    cost: Some(cfg.cost),
                    ..Default::default()
                }),
                ..Default::default()
            },
        }
    }
}
