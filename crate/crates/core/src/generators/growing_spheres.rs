// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Mutability};
use crate::error::{Error, Result};
use crate::models::{argmax_rows, Classifier};
use crate::search::{ConvergedReason, ExplanationState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowingSpheresConfig {
    /// Points sampled per layer.
    pub n_samples: usize,
    /// Radius of the first ball.
    pub eta0: f64,
    /// Factor by which the outer radius grows every round.
    pub growth: f64,
    pub max_rounds: usize,
}

impl Default for GrowingSpheresConfig {
    fn default() -> Self {
        GrowingSpheresConfig {
            n_samples: 200,
            eta0: 0.1,
            growth: 1.5,
            max_rounds: 50,
        }
    }
}

impl GrowingSpheresConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.max_rounds == 0 {
            return Err(Error::config("growing_spheres needs n_samples and max_rounds of at least 1"));
        }
        if self.eta0 <= 0.0 || self.growth <= 1.0 || !self.eta0.is_finite() || !self.growth.is_finite() {
            return Err(Error::config("growing_spheres needs eta0 > 0 and growth > 1"));
        }
        Ok(())
    }
}

/// Uniform draw from the shell `inner <= ‖o‖ <= outer` in `dim` dimensions.
fn sample_shell(rng: &mut ChaCha8Rng, dim: usize, inner: f64, outer: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let ratio = (inner / outer).powi(dim as i32);
    let u: f64 = rng.random();
    let r = outer * (ratio + u * (1.0 - ratio)).powf(1.0 / dim as f64);
    dir.into_iter().map(|v| v / norm * r).collect()
}

fn l2(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

fn predicts(m: &dyn Classifier, x: &Array1<f64>, t: usize) -> Result<bool> {
    let row = x.view().insert_axis(Axis(0));
    Ok(argmax_rows(m.probs(row)?.view())[0] == t)
}

/// Model-agnostic search: sample points in growing spherical layers around
/// `x` until one is classified as `t`, take the closest such point, then
/// reset its smallest changes back to `x` while the prediction stays `t`.
///
/// Sampling covers the mutable features only. Immutable features keep their
/// factual value and `Increase`/`Decrease` features are sampled on their
/// allowed side only.
pub fn growing_spheres(
    x: &Array1<f64>,
    t: usize,
    m: &dyn Classifier,
    d: &Dataset,
    cfg: &GrowingSpheresConfig,
    seed: u64,
) -> Result<ExplanationState> {
    cfg.validate()?;
    let tags = d.mutability();
    let mut path = vec![x.clone()];
    if predicts(m, x, t)? {
        return Ok(ExplanationState::from_path(x, t, "growing_spheres", path, ConvergedReason::ThresholdReached));
    }
    let free: Vec<usize> = (0..x.len()).filter(|&j| tags[j].is_mutable()).collect();
    if free.is_empty() {
        return Ok(ExplanationState::from_path(x, t, "growing_spheres", path, ConvergedReason::MaxRounds));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inner = 0.0;
    let mut outer = cfg.eta0;
    let mut found = None;
    for _ in 0..cfg.max_rounds {
        let mut candidates = Array2::zeros((cfg.n_samples, x.len()));
        for mut row in candidates.rows_mut() {
            row.assign(x);
            let offset = sample_shell(&mut rng, free.len(), inner, outer);
            for (&j, o) in free.iter().zip(offset) {
                row[j] += match tags[j] {
                    Mutability::Increase => o.abs(),
                    Mutability::Decrease => -o.abs(),
                    _ => o,
                };
            }
        }
        let labels = argmax_rows(m.probs(candidates.view())?.view());
        let best = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == t)
            .map(|(i, _)| (i, l2(&candidates.row(i).to_owned(), x)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = best {
            found = Some(candidates.row(i).to_owned());
            break;
        }
        inner = outer;
        outer *= cfg.growth;
    }
    let Some(mut cf) = found else {
        return Ok(ExplanationState::from_path(x, t, "growing_spheres", path, ConvergedReason::MaxRounds));
    };
    path.push(cf.clone());

    // Sparsify: undo the smallest changes first, stopping at the first reset
    // that would lose the target label.
    let mut order: Vec<usize> = (0..x.len()).filter(|&j| cf[j] != x[j]).collect();
    order.sort_by(|&a, &b| (cf[a] - x[a]).abs().total_cmp(&(cf[b] - x[b]).abs()));
    for j in order {
        let mut trial = cf.clone();
        trial[j] = x[j];
        if !predicts(m, &trial, t)? {
            break;
        }
        cf = trial;
        path.push(cf.clone());
    }
    Ok(ExplanationState::from_path(x, t, "growing_spheres", path, ConvergedReason::ThresholdReached))
}
