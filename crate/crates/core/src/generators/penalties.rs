// SPDX-License-Identifier: MIT OR Apache-2.0

//! Penalty terms composable into a gradient search objective. Every penalty
//! acts on the decoded counterfactual matrix (one row per counterfactual).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Classifier, Loss};

/// Ridge added to the diagonal of the diversity kernel.
pub const DIVERSITY_RIDGE: f64 = 1e-8;

/// Coordinates with `|Δ| <= L0_THRESHOLD` count as unchanged.
pub const L0_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L0,
    L1,
    L2,
    Linf,
    Mad,
}

impl Norm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Norm::L0 => "l0",
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
            Norm::Mad => "mad",
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("distance_") {
            "l0" => Ok(Norm::L0),
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::Linf),
            "mad" => Ok(Norm::Mad),
            other => Err(Error::config(format!("unknown norm '{other}'"))),
        }
    }
}

/// Distance between a counterfactual and the factual.
///
/// `Mad` is the MAD-weighted L1 distance `Σ |Δ_k| / MAD_k` and needs the
/// per-feature MAD statistics.
pub fn penalty_distance(cf: ArrayView1<f64>, x: ArrayView1<f64>, norm: Norm, mad: Option<&[f64]>) -> Result<f64> {
    if cf.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: cf.len(),
        });
    }
    let delta = cf.iter().zip(x.iter()).map(|(a, b)| a - b);
    Ok(match norm {
        Norm::L0 => delta.filter(|d| d.abs() > L0_THRESHOLD).count() as f64,
        Norm::L1 => delta.map(f64::abs).sum(),
        Norm::L2 => delta.map(|d| d * d).sum::<f64>().sqrt(),
        Norm::Linf => delta.fold(0.0, |m, d| m.max(d.abs())),
        Norm::Mad => {
            let mad = check_mad(mad, x.len())?;
            delta.zip(mad).map(|(d, m)| d.abs() / m).sum()
        }
    })
}

/// (Sub)gradient of [`penalty_distance`] with respect to the counterfactual.
/// Kinks get the zero subgradient; `L0` has no gradient.
pub fn distance_gradient(cf: ArrayView1<f64>, x: ArrayView1<f64>, norm: Norm, mad: Option<&[f64]>) -> Result<Array1<f64>> {
    let delta = &cf - &x;
    Ok(match norm {
        Norm::L0 => return Err(Error::capability("the l0 distance has no gradient; use it for evaluation only")),
        Norm::L1 => delta.mapv(sign),
        Norm::L2 => {
            let n = delta.dot(&delta).sqrt();
            if n == 0.0 {
                Array1::zeros(delta.len())
            } else {
                delta / n
            }
        }
        Norm::Linf => {
            let mut g = Array1::zeros(delta.len());
            let mut best = 0;
            for (j, d) in delta.iter().enumerate() {
                if d.abs() > delta[best].abs() {
                    best = j;
                }
            }
            if delta[best] != 0.0 {
                g[best] = sign(delta[best]);
            }
            g
        }
        Norm::Mad => {
            let mad = check_mad(mad, x.len())?;
            Array1::from_iter(delta.iter().zip(mad).map(|(d, m)| sign(*d) / m))
        }
    })
}

fn check_mad(mad: Option<&[f64]>, d: usize) -> Result<&[f64]> {
    let mad = mad.ok_or_else(|| Error::config("the MAD distance needs dataset MAD statistics (compute them with with_mad)"))?;
    if mad.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: mad.len(),
        });
    }
    Ok(mad)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn diversity_kernel(cfs: ArrayView2<f64>) -> (DMatrix<f64>, Array2<f64>) {
    let l = cfs.nrows();
    let mut dist = Array2::zeros((l, l));
    let mut k = DMatrix::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            if i != j {
                let d = (&cfs.row(i) - &cfs.row(j)).mapv(|v| v * v).sum().sqrt();
                dist[[i, j]] = d;
            }
            k[(i, j)] = 1.0 / (1.0 + dist[[i, j]]);
        }
        k[(i, i)] += DIVERSITY_RIDGE;
    }
    (k, dist)
}

/// `-log det K` with `K_ij = 1 / (1 + ‖c_i − c_j‖₂)` plus a small ridge on
/// the diagonal. Lower values mean a more diverse set.
pub fn penalty_ddp_diversity(cfs: ArrayView2<f64>) -> Result<f64> {
    if cfs.nrows() == 0 {
        return Err(Error::config("diversity needs at least one counterfactual"));
    }
    let (k, _) = diversity_kernel(cfs);
    let chol = k
        .cholesky()
        .ok_or_else(|| Error::Numeric {
            iteration: 0,
            message: "diversity kernel is not positive definite".into(),
        })?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(-log_det)
}

/// Gradient of [`penalty_ddp_diversity`] with respect to every counterfactual.
pub fn ddp_diversity_gradient(cfs: ArrayView2<f64>) -> Result<Array2<f64>> {
    let l = cfs.nrows();
    let mut grad = Array2::zeros(cfs.raw_dim());
    if l < 2 {
        return Ok(grad);
    }
    let (k, dist) = diversity_kernel(cfs);
    let inv = k
        .cholesky()
        .ok_or_else(|| Error::Numeric {
            iteration: 0,
            message: "diversity kernel is not positive definite".into(),
        })?
        .inverse();
    // d(-log det K) = -tr(K⁻¹ dK); K_ij depends on c_i through ‖c_i − c_j‖.
    for i in 0..l {
        for j in 0..l {
            if i == j || dist[[i, j]] == 0.0 {
                continue;
            }
            let kij = 1.0 / (1.0 + dist[[i, j]]);
            let dk_dd = -kij * kij;
            let coef = -2.0 * inv[(i, j)] * dk_dd / dist[[i, j]];
            let diff = &cfs.row(i) - &cfs.row(j);
            grad.row_mut(i).scaled_add(coef, &diff);
        }
    }
    Ok(grad)
}

/// `½‖cf − centroid‖²`.
pub fn penalty_gravitational(cf: ArrayView1<f64>, centroid: ArrayView1<f64>) -> f64 {
    0.5 * (&cf - &centroid).mapv(|v| v * v).sum()
}

pub fn gravitational_gradient(cf: ArrayView1<f64>, centroid: ArrayView1<f64>) -> Array1<f64> {
    &cf - &centroid
}

/// The model's own classification loss at the counterfactual, treated as a
/// training point of the target class. Low values mean the counterfactual
/// sits in confidently classified territory.
pub fn penalty_claproar(m: &dyn Classifier, cf: ArrayView1<f64>, target: usize, loss: Loss) -> Result<f64> {
    if !m.is_differentiable() {
        return Err(Error::capability("the claproar penalty needs a differentiable model"));
    }
    m.loss(cf, target, loss)
}

/// Identifier of a composable penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    DistanceL1,
    DistanceL2,
    DistanceLinf,
    DistanceMad,
    DdpDiversity,
    Gravitational,
    Claproar,
}

impl Penalty {
    pub fn as_str(&self) -> &'static str {
        match self {
            Penalty::DistanceL1 => "distance_l1",
            Penalty::DistanceL2 => "distance_l2",
            Penalty::DistanceLinf => "distance_linf",
            Penalty::DistanceMad => "distance_mad",
            Penalty::DdpDiversity => "ddp_diversity",
            Penalty::Gravitational => "gravitational",
            Penalty::Claproar => "claproar",
        }
    }

    pub fn norm(&self) -> Option<Norm> {
        match self {
            Penalty::DistanceL1 => Some(Norm::L1),
            Penalty::DistanceL2 => Some(Norm::L2),
            Penalty::DistanceLinf => Some(Norm::Linf),
            Penalty::DistanceMad => Some(Norm::Mad),
            _ => None,
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches(':') {
            "distance_l1" => Ok(Penalty::DistanceL1),
            "distance_l2" => Ok(Penalty::DistanceL2),
            "distance_linf" => Ok(Penalty::DistanceLinf),
            "distance_mad" => Ok(Penalty::DistanceMad),
            "ddp_diversity" => Ok(Penalty::DdpDiversity),
            "gravitational" => Ok(Penalty::Gravitational),
            "claproar" => Ok(Penalty::Claproar),
            "distance_l0" => Err(Error::config("distance_l0 has no gradient and cannot be used as a search penalty")),
            other => Err(Error::config(format!("unknown penalty '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn distance_examples() {
        let x = array![0.0, 0.0];
        let cf = array![1.0, 2.0];
        assert_eq!(penalty_distance(cf.view(), x.view(), Norm::L1, None).unwrap(), 3.0);
        assert_eq!(penalty_distance(cf.view(), x.view(), Norm::Mad, Some(&[1.0, 2.0])).unwrap(), 2.0);
        for norm in [Norm::L0, Norm::L1, Norm::L2, Norm::Linf, Norm::Mad] {
            assert_eq!(penalty_distance(x.view(), x.view(), norm, Some(&[1.0, 1.0])).unwrap(), 0.0);
        }
        assert!(penalty_distance(cf.view(), x.view(), Norm::Mad, None).is_err());
    }

    #[test]
    fn single_counterfactual_has_no_diversity_penalty() {
        let v = penalty_ddp_diversity(array![[0.3, 0.4]].view()).unwrap();
        assert!(v.abs() <= 1e-6);
    }

    #[test]
    fn identical_pair_is_heavily_penalised() {
        let v = penalty_ddp_diversity(array![[1.0, 1.0], [1.0, 1.0]].view()).unwrap();
        // det [[1+r, 1], [1, 1+r]] = 2r + r² ≈ 2r
        let expected = -(2.0 * DIVERSITY_RIDGE).ln();
        assert!((v - expected).abs() < 1e-6, "{v} vs {expected}");
        assert!(v > 15.0);
    }

    #[test]
    fn diversity_decreases_with_distance() {
        let vals: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|d| penalty_ddp_diversity(array![[0.0, 0.0], [*d, 0.0]].view()).unwrap())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }

    #[test]
    fn gravitational_examples() {
        let c = array![1.0, 2.0];
        assert_eq!(penalty_gravitational(c.view(), c.view()), 0.0);
        assert_eq!(penalty_gravitational(array![2.0, 2.0].view(), c.view()), 0.5);
    }

    #[test]
    fn l0_is_rejected_as_penalty() {
        assert!("distance_l0".parse::<Penalty>().is_err());
        assert!("wiggle".parse::<Penalty>().is_err());
        assert_eq!("distance_mad".parse::<Penalty>().unwrap(), Penalty::DistanceMad);
    }
}
