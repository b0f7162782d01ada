// SPDX-License-Identifier: MIT OR Apache-2.0

//! The counterfactual search loop.
//!
//! Gradient generators optimise all `L` counterfactuals jointly: at every
//! iteration the objective gradient with respect to the `L x K'` state matrix
//! is turned into a step (optimizer or greedy rule), optionally thinned by
//! dropout, clamped to the mutability envelope and applied. The decoded
//! counterfactuals are recorded after every step.

mod mutability;
mod objective;
mod optimizer;
mod state;

use ndarray::{Array1, Array2, Axis};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use mutability::apply_mutability;
pub use objective::{
    compose_objective, objective_gradient, total_objective, Objective, ObjectiveContext, PenaltyTerm, SearchSpace,
};
pub use optimizer::{optimizer_step, OptimizerConfig, OptimizerState};
pub use state::{ConvergedReason, ConvergenceCheck, ConvergenceConfig, ExplanationState};

use crate::dataset::{Dataset, Mutability};
use crate::error::{Error, Result};
use crate::generators::{feature_tweak, greedy_perturbation, growing_spheres, GradientGenerator, Generator, Perturbation};
use crate::models::{argmax_rows, Classifier};
use mutability::update_within_envelope;

/// Per-run settings that are not part of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    /// Overrides the generator's number of counterfactuals.
    pub num_counterfactuals: Option<usize>,
    pub convergence: ConvergenceConfig,
    /// Standard deviation of the Gaussian noise added to the initial states.
    /// `None` means 0.1 when searching for several counterfactuals (so they
    /// can separate) and 0 otherwise.
    pub init_noise: Option<f64>,
    pub seed: u64,
}

impl ExplanationState {
    /// State for a single-counterfactual feature-space search that followed `path`.
    pub(crate) fn from_path(x: &Array1<f64>, target: usize, generator: &str, path: Vec<Array1<f64>>, reason: ConvergedReason) -> Self {
        let path: Vec<Array2<f64>> = path.into_iter().map(|p| p.insert_axis(Axis(0))).collect();
        let last = path.last().expect("path starts at the factual").clone();
        ExplanationState {
            factual: x.clone(),
            target,
            generator: generator.to_string(),
            search_space: SearchSpace::Feature,
            states: last.clone(),
            counterfactuals: last,
            iterations: path.len() - 1,
            path,
            converged_reason: Some(reason),
            warnings: Vec::new(),
        }
    }
}

fn ensure_finite(a: &Array2<f64>, iteration: usize, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric {
            iteration,
            message: format!("{what} is not finite; try a smaller learning rate"),
        })
    }
}

/// Searches counterfactuals for factual `x` that the model `m` assigns to
/// the 1-based label `target`.
pub fn generate_counterfactual(
    x: &Array1<f64>,
    target: usize,
    data: &Dataset,
    m: &dyn Classifier,
    generator: &Generator,
    opts: &SearchOptions,
) -> Result<ExplanationState> {
    if x.len() != m.input_dim() {
        return Err(Error::Dimension {
            expected: m.input_dim(),
            got: x.len(),
        });
    }
    if x.len() != data.n_features() {
        return Err(Error::Dimension {
            expected: data.n_features(),
            got: x.len(),
        });
    }
    if target < 1 || target > m.n_classes() {
        return Err(Error::config(format!(
            "target label {target} is outside 1..={}",
            m.n_classes()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("factual contains non-finite values"));
    }
    opts.convergence.validate()?;
    generator.check_compatible(m)?;

    let mut warnings = Vec::new();
    let predicted = argmax_rows(m.probs(x.view().insert_axis(Axis(0)))?.view())[0];
    if predicted == target {
        warnings.push(format!("the factual is already predicted as target label {target}"));
    }

    let mut es = match generator {
        Generator::Gradient(g) => gradient_search(x, target, data, m, g, opts, &mut warnings)?,
        other => {
            if opts.num_counterfactuals.is_some_and(|l| l != 1) {
                return Err(Error::config(format!(
                    "generator '{}' returns a single counterfactual",
                    other.name()
                )));
            }
            match other {
                Generator::GrowingSpheres(cfg) => growing_spheres(x, target, m, data, cfg, opts.seed)?,
                Generator::FeatureTweak(cfg) => {
                    let tree = m.as_tree().expect("compatibility checked");
                    feature_tweak(x, target, data, tree, cfg)?
                }
                Generator::Gradient(_) => unreachable!(),
            }
        }
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    es.warnings = warnings;
    Ok(es)
}

fn gradient_search(
    x: &Array1<f64>,
    target: usize,
    data: &Dataset,
    m: &dyn Classifier,
    g: &GradientGenerator,
    opts: &SearchOptions,
    warnings: &mut Vec<String>,
) -> Result<ExplanationState> {
    let mut objective = g.objective.clone();
    let l = opts.num_counterfactuals.unwrap_or(objective.num_counterfactuals);
    if l == 0 {
        return Err(Error::config("num_counterfactuals must be at least 1"));
    }
    objective.num_counterfactuals = l;
    warnings.extend(objective.warnings());
    g.optimizer.validate()?;

    let tags = data.mutability();
    let latent = objective.search_space == SearchSpace::Latent;
    let start = if latent {
        if tags.iter().any(|t| *t != Mutability::Both) {
            return Err(Error::config(
                "mutability constraints are not supported for latent-space search; reset them to 'both' or search in feature space",
            ));
        }
        let ae = objective.autoencoder.as_ref().ok_or_else(|| {
            Error::config(format!(
                "generator '{}' searches a latent space; train an autoencoder with train_autoencoder and attach it",
                g.name
            ))
        })?;
        if ae.input_dim() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: ae.input_dim(),
            });
        }
        ae.encode(x.view())?
    } else {
        x.clone()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let k = start.len();
    let mut states = Array2::zeros((l, k));
    for mut row in states.rows_mut() {
        row.assign(&start);
    }
    let sigma = opts.init_noise.unwrap_or(if l > 1 { 0.1 } else { 0.0 });
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::config(format!("init_noise must be finite and >= 0, got {sigma}")));
    }
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("valid sigma");
        for mut row in states.rows_mut() {
            for (j, s) in row.iter_mut().enumerate() {
                let n: f64 = normal.sample(&mut rng);
                *s += if latent {
                    n
                } else {
                    match tags[j] {
                        Mutability::Both => n,
                        Mutability::None => 0.0,
                        Mutability::Increase => n.abs(),
                        Mutability::Decrease => -n.abs(),
                    }
                };
            }
        }
    }

    let ctx = ObjectiveContext::new(&objective, m, data, x, target)?;
    let conv = opts.convergence;
    let mut optimizer = OptimizerState::new(g.optimizer, (l, k));
    let mut hits = Array2::<usize>::zeros((l, k));
    let mut cfs = objective.decode(states.view())?;
    let mut path = vec![cfs.clone()];
    let mut iterations = 0;
    let reason = loop {
        if conv.check == ConvergenceCheck::ThresholdReached {
            let p = m.probs(cfs.view())?;
            if p.column(target - 1).iter().all(|v| *v >= conv.decision_threshold) {
                break ConvergedReason::ThresholdReached;
            }
        }
        if iterations >= conv.max_iter {
            break ConvergedReason::MaxIter;
        }
        let grad = objective.gradient(states.view(), &ctx)?;
        ensure_finite(&grad, iterations, "objective gradient")?;
        let mut delta = match g.perturbation {
            Perturbation::Gradient => optimizer.step(&grad),
            Perturbation::Greedy { step, cap } => {
                match greedy_perturbation(grad.view(), tags, x.view(), states.view(), &mut hits, step, cap) {
                    Some(d) => d,
                    None => break ConvergedReason::FeaturesExhausted,
                }
            }
        };
        if let Some(p) = g.dropout {
            let n = delta.len();
            let drop = (p * n as f64).round() as usize;
            if drop > 0 {
                let flat = delta.as_slice_mut().expect("standard layout");
                for i in sample(&mut rng, n, drop) {
                    flat[i] = 0.0;
                }
            }
        }
        if !latent {
            delta = apply_mutability(&delta, tags, x.view(), states.view());
        }
        ensure_finite(&delta, iterations, "search step")?;
        if latent {
            states += &delta;
        } else {
            update_within_envelope(&mut states, &delta, tags, x.view());
        }
        cfs = objective.decode(states.view())?;
        ensure_finite(&cfs, iterations, "counterfactual")?;
        path.push(cfs.clone());
        iterations += 1;
        if conv.check == ConvergenceCheck::StepBelowTolerance {
            let largest = delta.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if largest < conv.min_step {
                break ConvergedReason::StepBelowTolerance;
            }
        }
    };

    Ok(ExplanationState {
        factual: x.clone(),
        target,
        generator: g.name.clone(),
        search_space: objective.search_space,
        states,
        counterfactuals: cfs,
        path,
        converged_reason: Some(reason),
        iterations,
        warnings: Vec::new(),
    })
}
