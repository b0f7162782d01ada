// SPDX-License-Identifier: MIT OR Apache-2.0

//! Plots for 2-D data: a target-probability grid over the data range and an
//! SVG with the data, the 0.5 probability contour and counterfactual paths.

use std::fmt::Write as _;

use ndarray::Array2;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::models::Classifier;
use crate::search::ExplanationState;

pub const DEFAULT_GRID: usize = 100;

/// Target-class probabilities on an `r x r` lattice covering the data
/// bounds, padded by 10% of the range on every side.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `p[i][j]` is the probability at `(xs[i], ys[j])`.
    pub p: Array2<f64>,
}

fn check_2d(d: &Dataset) -> Result<()> {
    if d.n_features() != 2 {
        return Err(Error::config(format!(
            "plots need 2-D data, this dataset has {} features",
            d.n_features()
        )));
    }
    Ok(())
}

fn lattice(lo: f64, hi: f64, r: usize) -> Vec<f64> {
    let (mut lo, mut hi) = (lo, hi);
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.1 * (hi - lo);
    let (a, b) = (lo - pad, hi + pad);
    (0..r).map(|i| a + (b - a) * i as f64 / (r - 1) as f64).collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn probability_grid(d: &Dataset, m: &dyn Classifier, target: usize, r: usize) -> Result<ProbabilityGrid> {
    check_2d(d)?;
    if r < 2 {
        return Err(Error::config("grid resolution must be at least 2"));
    }
    if target < 1 || target > m.n_classes() {
        return Err(Error::config(format!("target label {target} is outside 1..={}", m.n_classes())));
    }
    let (x0, x1) = bounds(d.x().column(0).iter().copied());
    let (y0, y1) = bounds(d.x().column(1).iter().copied());
    let xs = lattice(x0, x1, r);
    let ys = lattice(y0, y1, r);
    let mut pts = Array2::zeros((r * r, 2));
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            pts[[i * r + j, 0]] = *x;
            pts[[i * r + j, 1]] = *y;
        }
    }
    let probs = m.probs(pts.view())?;
    let p = Array2::from_shape_fn((r, r), |(i, j)| probs[[i * r + j, target - 1]]);
    Ok(ProbabilityGrid { xs, ys, p })
}

impl ProbabilityGrid {
    /// `x1,x2,p_target` with one line per lattice point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,p_target\n");
        for (i, x) in self.xs.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                let _ = writeln!(out, "{x},{y},{}", self.p[[i, j]]);
            }
        }
        out
    }

    /// Line segments of the `level` contour by marching squares.
    pub fn contour(&self, level: f64) -> Vec<[(f64, f64); 2]> {
        let mut segs = Vec::new();
        let r = self.xs.len();
        let lerp = |a: (f64, f64, f64), b: (f64, f64, f64)| {
            let t = if b.2 == a.2 { 0.5 } else { (level - a.2) / (b.2 - a.2) };
            (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
        };
        for i in 0..r - 1 {
            for j in 0..r - 1 {
                let c = [
                    (self.xs[i], self.ys[j], self.p[[i, j]]),
                    (self.xs[i + 1], self.ys[j], self.p[[i + 1, j]]),
                    (self.xs[i + 1], self.ys[j + 1], self.p[[i + 1, j + 1]]),
                    (self.xs[i], self.ys[j + 1], self.p[[i, j + 1]]),
                ];
                let mut crossings = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (c[e], c[(e + 1) % 4]);
                    if (a.2 >= level) != (b.2 >= level) {
                        crossings.push(lerp(a, b));
                    }
                }
                for pair in crossings.chunks_exact(2) {
                    segs.push([pair[0], pair[1]]);
                }
            }
        }
        segs
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// SVG of the data points (coloured by label), a shaded target-probability
/// layer, the 0.5 contour, and each counterfactual's path from the factual
/// (hollow circle) to its final position (filled star).
pub fn render_svg(d: &Dataset, grid: &ProbabilityGrid, explanations: &[ExplanationState]) -> Result<String> {
    check_2d(d)?;
    let (w, h, margin) = (600.0, 600.0, 40.0);
    let (xa, xb) = (grid.xs[0], *grid.xs.last().expect("grid"));
    let (ya, yb) = (grid.ys[0], *grid.ys.last().expect("grid"));
    let sx = |x: f64| margin + (x - xa) / (xb - xa) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - ya) / (yb - ya) * (h - 2.0 * margin);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);

    let _ = writeln!(s, r#"<g id="probability">"#);
    let r = grid.xs.len();
    let cw = (w - 2.0 * margin) / (r - 1) as f64;
    let ch = (h - 2.0 * margin) / (r - 1) as f64;
    for i in 0..r {
        for j in 0..r {
            let p = grid.p[[i, j]];
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#2ca02c" fill-opacity="{:.3}"/>"##,
                sx(grid.xs[i]) - cw / 2.0,
                sy(grid.ys[j]) - ch / 2.0,
                cw,
                ch,
                0.35 * p
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="contour" stroke="black" stroke-width="1.5">"#);
    for [a, b] in grid.contour(0.5) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            sx(a.0),
            sy(a.1),
            sx(b.0),
            sy(b.1)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="data">"#);
    for (row, y) in d.x().rows().into_iter().zip(d.y()) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.6"/>"#,
            sx(row[0]),
            sy(row[1]),
            PALETTE[(y - 1) % PALETTE.len()]
        );
    }
    let _ = writeln!(s, "</g>");

    for (e, es) in explanations.iter().enumerate() {
        if es.factual.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: es.factual.len(),
            });
        }
        let _ = writeln!(s, r#"<g id="explanation-{e}">"#);
        for k in 0..es.num_counterfactuals() {
            let pts: Vec<String> = es
                .path
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p[[k, 0]]), sy(p[[k, 1]])))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="path" points="{}" fill="none" stroke="black" stroke-width="1.2"/>"#,
                pts.join(" ")
            );
            let last = es.counterfactuals.row(k);
            let (cx, cy) = (sx(last[0]), sy(last[1]));
            let star: Vec<String> = (0..10)
                .map(|i| {
                    let a = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
                    let rad = if i % 2 == 0 { 7.0 } else { 3.0 };
                    format!("{:.2},{:.2}", cx + rad * a.cos(), cy + rad * a.sin())
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon class="counterfactual" points="{}" fill="{}" stroke="black"/>"#,
                star.join(" "),
                PALETTE[(es.target - 1) % PALETTE.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<circle class="factual" cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="black" stroke-width="2"/>"#,
            sx(es.factual[0]),
            sy(es.factual[1])
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
