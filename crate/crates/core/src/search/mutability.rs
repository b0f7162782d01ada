// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::dataset::Mutability;

/// Clamps a proposed change so no counterfactual leaves the region its
/// mutability tags allow relative to the factual `x`: immutable features do
/// not move, `Increase` features never drop below `x`, `Decrease` features
/// never rise above it.
pub fn apply_mutability(delta: &Array2<f64>, tags: &[Mutability], x: ArrayView1<f64>, current: ArrayView2<f64>) -> Array2<f64> {
    let mut out = delta.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        for (j, d) in row.iter_mut().enumerate() {
            let s = current[[i, j]];
            match tags[j] {
                Mutability::Both => {}
                Mutability::None => *d = 0.0,
                Mutability::Increase => *d = d.max(x[j] - s),
                Mutability::Decrease => *d = d.min(x[j] - s),
            }
        }
    }
    out
}

/// Adds `delta` to `states` and pins tagged coordinates exactly, so rounding
/// in the addition can never break the envelope.
pub(crate) fn update_within_envelope(states: &mut Array2<f64>, delta: &Array2<f64>, tags: &[Mutability], x: ArrayView1<f64>) {
    *states += delta;
    for mut row in states.rows_mut() {
        for (j, s) in row.iter_mut().enumerate() {
            match tags[j] {
                Mutability::Both => {}
                Mutability::None => *s = x[j],
                Mutability::Increase => {
                    if *s < x[j] {
                        *s = x[j];
                    }
                }
                Mutability::Decrease => {
                    if *s > x[j] {
                        *s = x[j];
                    }
                }
            }
        }
    }
}
