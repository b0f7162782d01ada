// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification losses, always evaluated on raw logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    LogitBinaryCrossentropy,
    LogitCrossentropy,
    Hinge,
}

impl Loss {
    pub fn as_str(&self) -> &'static str {
        match self {
            Loss::LogitBinaryCrossentropy => "logit_binary_crossentropy",
            Loss::LogitCrossentropy => "logit_crossentropy",
            Loss::Hinge => "hinge",
        }
    }

    /// Loss value and its gradient with respect to the logits for a 1-based
    /// target label. A single logit is read as the log-odds of label 2.
    pub fn value_and_grad(&self, logits: ArrayView1<f64>, target: usize) -> Result<(f64, Array1<f64>)> {
        let k = logits.len();
        if k == 0 {
            return Err(Error::config("empty logit vector"));
        }
        let n_classes = k.max(2);
        if target == 0 || target > n_classes {
            return Err(Error::config(format!(
                "target label {target} outside 1..={n_classes}"
            )));
        }
        if k == 1 {
            let z = logits[0];
            let y = if target == 2 { 1.0 } else { 0.0 };
            return Ok(match self {
                Loss::LogitBinaryCrossentropy | Loss::LogitCrossentropy => {
                    let value = z.max(0.0) - y * z + (-z.abs()).exp().ln_1p();
                    (value, Array1::from_elem(1, sigmoid(z) - y))
                }
                Loss::Hinge => {
                    let s = 2.0 * y - 1.0;
                    let margin = 1.0 - s * z;
                    if margin > 0.0 {
                        (margin, Array1::from_elem(1, -s))
                    } else {
                        (0.0, Array1::zeros(1))
                    }
                }
            });
        }
        let t = target - 1;
        match self {
            Loss::LogitBinaryCrossentropy => Err(Error::config(format!(
                "logit_binary_crossentropy needs a single logit, model has {k}"
            ))),
            Loss::LogitCrossentropy => {
                let p = softmax(logits);
                let value = log_sum_exp(logits) - logits[t];
                let mut grad = p;
                grad[t] -= 1.0;
                Ok((value, grad))
            }
            Loss::Hinge => {
                let (j, zj) = logits
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != t)
                    .fold((usize::MAX, f64::NEG_INFINITY), |acc, (j, &v)| {
                        if v > acc.1 {
                            (j, v)
                        } else {
                            acc
                        }
                    });
                let margin = 1.0 + zj - logits[t];
                let mut grad = Array1::zeros(k);
                if margin > 0.0 {
                    grad[j] = 1.0;
                    grad[t] = -1.0;
                    Ok((margin, grad))
                } else {
                    Ok((0.0, grad))
                }
            }
        }
    }

    pub fn value(&self, logits: ArrayView1<f64>, target: usize) -> Result<f64> {
        self.value_and_grad(logits, target).map(|(v, _)| v)
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches(':').replace('-', "_").as_str() {
            "logit_binary_crossentropy" | "logitbinarycrossentropy" => Ok(Loss::LogitBinaryCrossentropy),
            "logit_crossentropy" | "logitcrossentropy" => Ok(Loss::LogitCrossentropy),
            "hinge" | "hinge_loss" => Ok(Loss::Hinge),
            other => Err(Error::config(format!("unknown loss '{other}'"))),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn log_sum_exp(z: ArrayView1<f64>) -> f64 {
    let m = z.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn softmax(z: ArrayView1<f64>) -> Array1<f64> {
    let m = z.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e = z.mapv(|v| (v - m).exp());
    let s = e.sum();
    e / s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fd(loss: Loss, z: &Array1<f64>, t: usize) -> Array1<f64> {
        let h = 1e-6;
        Array1::from_iter((0..z.len()).map(|i| {
            let mut p = z.clone();
            let mut m = z.clone();
            p[i] += h;
            m[i] -= h;
            (loss.value(p.view(), t).unwrap() - loss.value(m.view(), t).unwrap()) / (2.0 * h)
        }))
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases = [
            (Loss::LogitBinaryCrossentropy, array![0.7], 2),
            (Loss::LogitBinaryCrossentropy, array![-1.3], 1),
            (Loss::LogitCrossentropy, array![0.3, -0.2, 1.1], 2),
            (Loss::LogitCrossentropy, array![2.0], 1),
            (Loss::Hinge, array![0.3], 2),
            (Loss::Hinge, array![0.3, 0.9, -0.4], 1),
        ];
        for (loss, z, t) in cases {
            let (_, g) = loss.value_and_grad(z.view(), t).unwrap();
            let num = fd(loss, &z, t);
            for (a, b) in g.iter().zip(num.iter()) {
                assert!((a - b).abs() < 1e-6, "{loss}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn crossentropy_at_symmetric_point_is_log_two() {
        let v = Loss::LogitBinaryCrossentropy.value(array![0.0].view(), 2).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn extreme_logits_do_not_overflow() {
        let v = Loss::LogitCrossentropy.value(array![1000.0, 0.0].view(), 2).unwrap();
        assert!((v - 1000.0).abs() < 1e-9);
        let p = softmax(array![1000.0, 0.0].view());
        assert!(p[0] < 1.0 + 1e-15 && p[1] > 0.0 - 1e-15 && p.iter().all(|v| v.is_finite()));
        assert!(sigmoid(-800.0).is_finite());
    }

    #[test]
    fn binary_crossentropy_rejects_multiclass_logits() {
        assert!(Loss::LogitBinaryCrossentropy
            .value(array![0.0, 1.0, 2.0].view(), 1)
            .is_err());
    }

    #[test]
    fn parses_julia_style_names() {
        assert_eq!("logitcrossentropy".parse::<Loss>().unwrap(), Loss::LogitCrossentropy);
        assert_eq!(":hinge".parse::<Loss>().unwrap(), Loss::Hinge);
    }
}
