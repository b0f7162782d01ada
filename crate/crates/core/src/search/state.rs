// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::Standardizer;
use crate::error::{Error, Result};
use crate::models::{argmax_rows, Classifier};

use super::SearchSpace;

/// Which condition ends a gradient search. `max_iter` always applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceCheck {
    /// Stop once every counterfactual has `p_t >= decision_threshold`.
    #[default]
    ThresholdReached,
    /// Stop once the largest coordinate change of a step is below `min_step`.
    StepBelowTolerance,
    /// Always run `max_iter` steps.
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    pub decision_threshold: f64,
    pub max_iter: usize,
    pub min_step: f64,
    pub check: ConvergenceCheck,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            decision_threshold: 0.5,
            max_iter: 1000,
            min_step: 1e-3,
            check: ConvergenceCheck::ThresholdReached,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        let g = self.decision_threshold;
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::config(format!("decision threshold must lie in (0, 1], got {g}")));
        }
        if self.max_iter < 1 {
            return Err(Error::config("max_iter must be at least 1"));
        }
        if self.min_step <= 0.0 || !self.min_step.is_finite() {
            return Err(Error::config(format!("min_step must be positive, got {}", self.min_step)));
        }
        Ok(())
    }
}

/// Why a search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedReason {
    ThresholdReached,
    StepBelowTolerance,
    MaxIter,
    /// Greedy search: no feature is left that may still be moved.
    FeaturesExhausted,
    /// FeatureTweak: no leaf yields an admissible target-class candidate.
    NoCandidate,
    /// GrowingSpheres: no target-class point within the largest sphere.
    MaxRounds,
}

impl ConvergedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvergedReason::ThresholdReached => "threshold_reached",
            ConvergedReason::StepBelowTolerance => "step_below_tolerance",
            ConvergedReason::MaxIter => "max_iter",
            ConvergedReason::FeaturesExhausted => "features_exhausted",
            ConvergedReason::NoCandidate => "no_candidate",
            ConvergedReason::MaxRounds => "max_rounds",
        }
    }

    /// True for reasons that mean the generator gave up without a result.
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            ConvergedReason::FeaturesExhausted | ConvergedReason::NoCandidate | ConvergedReason::MaxRounds
        )
    }
}

impl fmt::Display for ConvergedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finished (or in-progress) search: factual, target, the live search
/// states, their decoded counterfactuals and the full path.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationState {
    pub factual: Array1<f64>,
    /// 1-based target label.
    pub target: usize,
    pub generator: String,
    pub search_space: SearchSpace,
    /// `L x K'` search states (`K' = D` in feature space).
    pub states: Array2<f64>,
    /// `L x D` counterfactuals in feature space.
    pub counterfactuals: Array2<f64>,
    /// Decoded counterfactuals after every iteration, starting with the
    /// initial state; always `iterations + 1` entries.
    pub path: Vec<Array2<f64>>,
    pub converged_reason: Option<ConvergedReason>,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    factual: Vec<f64>,
    target: usize,
    generator: String,
    search_space: SearchSpace,
    counterfactuals: Vec<Vec<f64>>,
    path: Vec<Vec<Vec<f64>>>,
    converged_reason: Option<ConvergedReason>,
    iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valid: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factual_original: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counterfactuals_original: Option<Vec<Vec<f64>>>,
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> Result<Array2<f64>> {
    let n = r.len();
    let d = r.first().map_or(0, |x| x.len());
    if r.iter().any(|x| x.len() != d) {
        return Err(Error::Schema("ragged matrix in explanation JSON".into()));
    }
    Array2::from_shape_vec((n, d), r.concat()).map_err(|e| Error::Schema(e.to_string()))
}

impl ExplanationState {
    pub fn num_counterfactuals(&self) -> usize {
        self.counterfactuals.nrows()
    }

    /// Per-counterfactual validity: the predicted label equals the target.
    pub fn validity(&self, m: &dyn Classifier) -> Result<Vec<bool>> {
        let labels = argmax_rows(m.probs(self.counterfactuals.view())?.view());
        Ok(labels.into_iter().map(|l| l == self.target).collect())
    }

    /// Fraction of counterfactuals classified as the target.
    pub fn validity_fraction(&self, m: &dyn Classifier) -> Result<f64> {
        let v = self.validity(m)?;
        Ok(v.iter().filter(|b| **b).count() as f64 / v.len() as f64)
    }

    /// True when every counterfactual is classified as the target.
    pub fn is_valid(&self, m: &dyn Classifier) -> Result<bool> {
        Ok(self.validity(m)?.into_iter().all(|b| b))
    }

    /// Probability of the target class for each counterfactual.
    pub fn target_probs(&self, m: &dyn Classifier) -> Result<Array1<f64>> {
        Ok(m.probs(self.counterfactuals.view())?.column(self.target - 1).to_owned())
    }

    /// JSON export. With a model, per-counterfactual validity is included;
    /// with a standardizer, factual and counterfactuals are also reported in
    /// original units.
    pub fn to_json(&self, model: Option<&dyn Classifier>, standardizer: Option<&Standardizer>) -> Result<String> {
        let doc = StateJson {
            factual: self.factual.to_vec(),
            target: self.target,
            generator: self.generator.clone(),
            search_space: self.search_space,
            counterfactuals: rows(&self.counterfactuals),
            path: self.path.iter().map(rows).collect(),
            converged_reason: self.converged_reason,
            iterations: self.iterations,
            warnings: self.warnings.clone(),
            valid: model.map(|m| self.validity(m)).transpose()?,
            factual_original: standardizer.map(|s| s.inverse_row(&self.factual).to_vec()),
            counterfactuals_original: standardizer.map(|s| rows(&s.inverse(self.counterfactuals.view()))),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Reads an exported explanation. Search states are not exported, so for
    /// latent searches `states` is set to the counterfactuals.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StateJson = serde_json::from_str(text)?;
        let counterfactuals = from_rows(&doc.counterfactuals)?;
        let path = doc.path.iter().map(|p| from_rows(p)).collect::<Result<Vec<_>>>()?;
        if counterfactuals.ncols() != doc.factual.len() {
            return Err(Error::Dimension {
                expected: doc.factual.len(),
                got: counterfactuals.ncols(),
            });
        }
        Ok(ExplanationState {
            factual: Array1::from(doc.factual),
            target: doc.target,
            generator: doc.generator,
            search_space: doc.search_space,
            states: counterfactuals.clone(),
            counterfactuals,
            path,
            converged_reason: doc.converged_reason,
            iterations: doc.iterations,
            warnings: doc.warnings,
        })
    }

    /// Reads either one exported explanation or a JSON array of them.
    pub fn list_from_json(text: &str) -> Result<Vec<Self>> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(|v| Self::from_json(&v.to_string()))
                .collect(),
            v => Ok(vec![Self::from_json(&v.to_string())?]),
        }
    }
}
