// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Update rule for the search states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    Descent {
        learning_rate: f64,
    },
    Adam {
        learning_rate: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        epsilon: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl OptimizerConfig {
    pub fn descent(learning_rate: f64) -> Self {
        OptimizerConfig::Descent { learning_rate }
    }

    pub fn adam(learning_rate: f64) -> Self {
        OptimizerConfig::Adam {
            learning_rate,
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_eps(),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match self {
            OptimizerConfig::Descent { learning_rate } | OptimizerConfig::Adam { learning_rate, .. } => *learning_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lr = self.learning_rate();
        if lr <= 0.0 || !lr.is_finite() {
            return Err(Error::config(format!("learning rate must be positive, got {lr}")));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::descent(0.1)
    }
}

/// Optimizer with its per-counterfactual moment estimates.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    config: OptimizerConfig,
    t: i32,
    m: Array2<f64>,
    v: Array2<f64>,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, shape: (usize, usize)) -> Self {
        OptimizerState {
            config,
            t: 0,
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
        }
    }

    /// Returns the state change for one step against `grad`.
    pub fn step(&mut self, grad: &Array2<f64>) -> Array2<f64> {
        self.t += 1;
        match self.config {
            OptimizerConfig::Descent { learning_rate } => grad * -learning_rate,
            OptimizerConfig::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                let mut delta = Array2::zeros(grad.raw_dim());
                Zip::from(&mut delta)
                    .and(grad)
                    .and(&mut self.m)
                    .and(&mut self.v)
                    .for_each(|d, &g, m, v| {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        *d = -learning_rate * (*m / c1) / ((*v / c2).sqrt() + epsilon);
                    });
                delta
            }
        }
    }
}

/// One update from a fresh optimizer state.
pub fn optimizer_step(config: OptimizerConfig, grad: &Array2<f64>) -> Array2<f64> {
    OptimizerState::new(config, grad.dim()).step(grad)
}
