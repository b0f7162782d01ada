// SPDX-License-Identifier: MIT OR Apache-2.0

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{mad_statistics, Dataset};
use crate::error::{Error, Result};
use crate::generators::penalties::{
    ddp_diversity_gradient, distance_gradient, gravitational_gradient, penalty_ddp_diversity, penalty_distance,
    penalty_gravitational, Penalty,
};
use crate::models::{Autoencoder, Classifier, Likelihood, Loss};

use super::ExplanationState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchSpace {
    Feature,
    Latent,
}

/// One weighted penalty in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerm {
    #[serde(rename = "id")]
    pub penalty: Penalty,
    pub weight: f64,
}

/// `mean_i loss(M(x′_i), t) + Σ_k weight_k · penalty_k(X′)`, where the
/// counterfactuals `X′` are the search states themselves (feature space) or
/// their decodings (latent space).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Objective {
    /// `None` picks binary cross-entropy for single-logit models and
    /// cross-entropy otherwise.
    pub loss: Option<Loss>,
    pub penalties: Vec<PenaltyTerm>,
    pub search_space: SearchSpace,
    pub num_counterfactuals: usize,
    #[serde(skip)]
    pub autoencoder: Option<Arc<Autoencoder>>,
}

impl PartialEq for Objective {
    fn eq(&self, other: &Self) -> bool {
        self.loss == other.loss
            && self.penalties == other.penalties
            && self.search_space == other.search_space
            && self.num_counterfactuals == other.num_counterfactuals
            && match (&self.autoencoder, &other.autoencoder) {
                (None, None) => true,
                (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
                _ => false,
            }
    }
}

/// Builds an objective from a loss and `(penalty id, weight)` pairs, keeping
/// their order.
pub fn compose_objective(
    loss: impl Into<Option<Loss>>,
    penalties: &[(&str, f64)],
    search_space: SearchSpace,
    num_counterfactuals: usize,
) -> Result<Objective> {
    let terms = penalties
        .iter()
        .map(|(id, w)| {
            let penalty: Penalty = id.parse()?;
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::config(format!("penalty weight for {id} must be finite and >= 0, got {w}")));
            }
            Ok(PenaltyTerm { penalty, weight: *w })
        })
        .collect::<Result<Vec<_>>>()?;
    if num_counterfactuals == 0 {
        return Err(Error::config("num_counterfactuals must be at least 1"));
    }
    Ok(Objective {
        loss: loss.into(),
        penalties: terms,
        search_space,
        num_counterfactuals,
        autoencoder: None,
    })
}

/// Everything an objective needs besides the states.
pub struct ObjectiveContext<'a> {
    pub model: &'a dyn Classifier,
    pub data: &'a Dataset,
    pub factual: &'a Array1<f64>,
    pub target: usize,
    centroid: Option<Array1<f64>>,
    mad: Option<Vec<f64>>,
}

impl<'a> ObjectiveContext<'a> {
    pub fn new(
        objective: &Objective,
        model: &'a dyn Classifier,
        data: &'a Dataset,
        factual: &'a Array1<f64>,
        target: usize,
    ) -> Result<Self> {
        let needs_centroid = objective.penalties.iter().any(|p| p.penalty == Penalty::Gravitational);
        let centroid = if needs_centroid {
            Some(data.class_centroid(target).map_err(|_| {
                Error::config(format!("gravitational penalty: no training rows with target label {target}"))
            })?)
        } else {
            None
        };
        // MAD statistics are computed on the fly when the dataset carries none.
        let needs_mad = objective.penalties.iter().any(|p| p.penalty == Penalty::DistanceMad);
        let mad = match data.mad() {
            Some(m) => Some(m.to_vec()),
            None if needs_mad => Some(mad_statistics(data)?),
            None => None,
        };
        Ok(ObjectiveContext {
            model,
            data,
            factual,
            target,
            centroid,
            mad,
        })
    }

    pub fn mad(&self) -> Option<&[f64]> {
        self.mad.as_deref()
    }
}

impl Objective {
    pub fn weight_of(&self, penalty: Penalty) -> Option<f64> {
        self.penalties.iter().find(|p| p.penalty == penalty).map(|p| p.weight)
    }

    pub fn resolved_loss(&self, model: &dyn Classifier) -> Loss {
        self.loss.unwrap_or(match model.likelihood() {
            Likelihood::Binary if model.output_dim() == 1 => Loss::LogitBinaryCrossentropy,
            _ => Loss::LogitCrossentropy,
        })
    }

    /// Human-readable notes about questionable but legal configurations.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.weight_of(Penalty::DdpDiversity).is_some() && self.num_counterfactuals < 2 {
            out.push("ddp_diversity has no effect unless num_counterfactuals is higher than 1".to_string());
        }
        out
    }

    fn autoencoder(&self) -> Result<&Autoencoder> {
        self.autoencoder.as_deref().ok_or_else(|| {
            Error::config("latent-space search needs an autoencoder; train one with train_autoencoder and attach it")
        })
    }

    /// Maps search states to counterfactuals in feature space.
    pub fn decode(&self, states: ArrayView2<f64>) -> Result<Array2<f64>> {
        match self.search_space {
            SearchSpace::Feature => Ok(states.to_owned()),
            SearchSpace::Latent => self.autoencoder()?.decode_batch(states),
        }
    }

    /// Objective value at the given search states.
    pub fn value(&self, states: ArrayView2<f64>, ctx: &ObjectiveContext<'_>) -> Result<f64> {
        let cfs = self.decode(states)?;
        let loss = self.resolved_loss(ctx.model);
        let l = cfs.nrows() as f64;
        let mut total = 0.0;
        for row in cfs.rows() {
            total += ctx.model.loss(row, ctx.target, loss)? / l;
        }
        for term in &self.penalties {
            total += term.weight * self.penalty_value(term.penalty, cfs.view(), ctx, loss)?;
        }
        Ok(total)
    }

    /// Unweighted value of one penalty on decoded counterfactuals.
    pub fn penalty_value(&self, penalty: Penalty, cfs: ArrayView2<f64>, ctx: &ObjectiveContext<'_>, loss: Loss) -> Result<f64> {
        let l = cfs.nrows() as f64;
        Ok(match penalty {
            Penalty::DdpDiversity => penalty_ddp_diversity(cfs)?,
            Penalty::Gravitational => {
                let c = ctx.centroid.as_ref().expect("centroid prepared for gravitational");
                cfs.rows().into_iter().map(|r| penalty_gravitational(r, c.view())).sum::<f64>() / l
            }
            Penalty::Claproar => {
                let mut acc = 0.0;
                for r in cfs.rows() {
                    acc += ctx.model.loss(r, ctx.target, loss)?;
                }
                acc / l
            }
            p => {
                let norm = p.norm().expect("distance penalty");
                let mut acc = 0.0;
                for r in cfs.rows() {
                    acc += penalty_distance(r, ctx.factual.view(), norm, ctx.mad())?;
                }
                acc / l
            }
        })
    }

    /// Gradient of [`Objective::value`] with respect to the search states,
    /// chained through the decoder for latent search.
    pub fn gradient(&self, states: ArrayView2<f64>, ctx: &ObjectiveContext<'_>) -> Result<Array2<f64>> {
        if !ctx.model.is_differentiable() {
            return Err(Error::capability("gradient search needs a differentiable model"));
        }
        let cfs = self.decode(states)?;
        let loss = self.resolved_loss(ctx.model);
        let l = cfs.nrows() as f64;
        let mut grad = Array2::zeros(cfs.raw_dim());
        for (i, row) in cfs.rows().into_iter().enumerate() {
            let g = ctx.model.input_gradient(row, ctx.target, loss)?;
            grad.row_mut(i).scaled_add(1.0 / l, &g);
        }
        for term in &self.penalties {
            match term.penalty {
                Penalty::DdpDiversity => grad.scaled_add(term.weight, &ddp_diversity_gradient(cfs.view())?),
                Penalty::Gravitational => {
                    let c = ctx.centroid.as_ref().expect("centroid prepared for gravitational");
                    for (i, row) in cfs.rows().into_iter().enumerate() {
                        grad.row_mut(i).scaled_add(term.weight / l, &gravitational_gradient(row, c.view()));
                    }
                }
                Penalty::Claproar => {
                    for (i, row) in cfs.rows().into_iter().enumerate() {
                        let g = ctx.model.input_gradient(row, ctx.target, loss)?;
                        grad.row_mut(i).scaled_add(term.weight / l, &g);
                    }
                }
                p => {
                    let norm = p.norm().expect("distance penalty");
                    for (i, row) in cfs.rows().into_iter().enumerate() {
                        let g = distance_gradient(row, ctx.factual.view(), norm, ctx.mad())?;
                        grad.row_mut(i).scaled_add(term.weight / l, &g);
                    }
                }
            }
        }
        match self.search_space {
            SearchSpace::Feature => Ok(grad),
            SearchSpace::Latent => {
                let ae = self.autoencoder()?;
                let mut out = Array2::zeros(states.raw_dim());
                for (i, z) in states.rows().into_iter().enumerate() {
                    out.row_mut(i).assign(&ae.decode_vjp(z, grad.row(i))?);
                }
                Ok(out)
            }
        }
    }
}

/// Objective value at the state's current search states.
pub fn total_objective(obj: &Objective, es: &ExplanationState, m: &dyn Classifier, d: &Dataset) -> Result<f64> {
    let ctx = ObjectiveContext::new(obj, m, d, &es.factual, es.target)?;
    let v = obj.value(es.states.view(), &ctx)?;
    if !v.is_finite() {
        return Err(Error::Numeric {
            iteration: es.iterations,
            message: format!("objective evaluated to {v}"),
        });
    }
    Ok(v)
}

/// Objective gradient at the state's current search states.
pub fn objective_gradient(obj: &Objective, es: &ExplanationState, m: &dyn Classifier, d: &Dataset) -> Result<Array2<f64>> {
    let ctx = ObjectiveContext::new(obj, m, d, &es.factual, es.target)?;
    obj.gradient(es.states.view(), &ctx)
}
