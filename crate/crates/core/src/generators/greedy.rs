// SPDX-License-Identifier: MIT OR Apache-2.0

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::dataset::Mutability;

/// One greedy step: for each counterfactual, the eligible feature with the
/// largest absolute gradient moves by `step` against its gradient sign.
///
/// A feature is eligible while it is mutable, has been moved fewer than
/// `cap` times (`hits` counts moves per counterfactual and feature), has a
/// nonzero gradient, and its tag allows the move from the current position.
/// Returns `None` when no counterfactual has an eligible feature left.
pub fn greedy_perturbation(
    grad: ArrayView2<f64>,
    tags: &[Mutability],
    x: ArrayView1<f64>,
    current: ArrayView2<f64>,
    hits: &mut Array2<usize>,
    step: f64,
    cap: usize,
) -> Option<Array2<f64>> {
    let mut delta = Array2::zeros(grad.raw_dim());
    let mut moved = false;
    for (i, g) in grad.rows().into_iter().enumerate() {
        let mut best: Option<usize> = None;
        for (j, gj) in g.iter().enumerate() {
            if *gj == 0.0 || hits[[i, j]] >= cap {
                continue;
            }
            let up = *gj < 0.0;
            let allowed = match tags[j] {
                Mutability::Both => true,
                Mutability::None => false,
                Mutability::Increase => up || current[[i, j]] > x[j],
                Mutability::Decrease => !up || current[[i, j]] < x[j],
            };
            if allowed && best.is_none_or(|b| gj.abs() > g[b].abs()) {
                best = Some(j);
            }
        }
        if let Some(j) = best {
            delta[[i, j]] = -step * g[j].signum();
            hits[[i, j]] += 1;
            moved = true;
        }
    }
    moved.then_some(delta)
}
