// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};

use super::Dataset;
use crate::error::{Error, Result};

/// Built-in two-dimensional toy problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Two unit-variance Gaussian blobs centred at (-2.5, 0) and (2.5, 0).
    LinearlySeparable,
    /// Two wide Gaussian blobs whose supports overlap.
    Overlapping,
    /// Four unit-variance blobs at (±2.5, ±2.5).
    MultiClass,
    /// An inner ring (class 1) inside an outer ring (class 2).
    Circles,
}

impl SyntheticKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SyntheticKind::LinearlySeparable => "linearly_separable",
            SyntheticKind::Overlapping => "overlapping",
            SyntheticKind::MultiClass => "multi_class",
            SyntheticKind::Circles => "circles",
        }
    }

    fn n_classes(&self) -> usize {
        match self {
            SyntheticKind::MultiClass => 4,
            _ => 2,
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linearly_separable" => Ok(SyntheticKind::LinearlySeparable),
            "overlapping" => Ok(SyntheticKind::Overlapping),
            "multi_class" => Ok(SyntheticKind::MultiClass),
            "circles" => Ok(SyntheticKind::Circles),
            other => Err(Error::config(format!(
                "unknown synthetic dataset '{other}' (expected linearly_separable, overlapping, multi_class or circles)"
            ))),
        }
    }
}

/// Draws `n` labelled points. Labels cycle through the classes so every class
/// gets `n / C` rows (the first `n % C` classes get one more).
pub fn load_synthetic(kind: SyntheticKind, n: usize, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::config(format!("synthetic datasets need n >= 4, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = kind.n_classes();
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    for i in 0..n {
        let label = i % c + 1;
        let (a, b) = match kind {
            SyntheticKind::LinearlySeparable => {
                let cx = if label == 1 { -2.5 } else { 2.5 };
                (cx + unit.sample(&mut rng), unit.sample(&mut rng))
            }
            SyntheticKind::Overlapping => {
                let cx = if label == 1 { -1.0 } else { 1.0 };
                (cx + 1.5 * unit.sample(&mut rng), 1.5 * unit.sample(&mut rng))
            }
            SyntheticKind::MultiClass => {
                let (cx, cy) = match label {
                    1 => (-2.5, -2.5),
                    2 => (2.5, -2.5),
                    3 => (-2.5, 2.5),
                    _ => (2.5, 2.5),
                };
                (cx + unit.sample(&mut rng), cy + unit.sample(&mut rng))
            }
            SyntheticKind::Circles => {
                let (r0, spread) = if label == 1 { (1.0, 0.15) } else { (3.0, 0.3) };
                let r = r0 + spread * unit.sample(&mut rng);
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                (r * theta.cos(), r * theta.sin())
            }
        };
        x[[i, 0]] = a;
        x[[i, 1]] = b;
        y.push(label);
    }
    Dataset::new(vec!["x1".into(), "x2".into()], x, y)
}

/// Column layout of the Give Me Some Credit training file (target first).
pub const GMSC_COLUMNS: [&str; 11] = [
    "SeriousDlqin2yrs",
    "RevolvingUtilizationOfUnsecuredLines",
    "age",
    "NumberOfTime30-59DaysPastDueNotWorse",
    "DebtRatio",
    "MonthlyIncome",
    "NumberOfOpenCreditLinesAndLoans",
    "NumberOfTimes90DaysLate",
    "NumberRealEstateLoansOrLines",
    "NumberOfTime60-89DaysPastDueNotWorse",
    "NumberOfDependents",
];

/// Renders a synthetic stand-in for the Give Me Some Credit CSV with the same
/// schema. Distress probability falls with age and income and rises with
/// utilisation and late payments; a few income/dependent cells are left empty
/// as in the real file.
pub fn gmsc_standin(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let age_dist = Normal::new(50.0, 14.0).expect("valid normal");
    let debt_dist = LogNormal::new(-1.0, 0.7).expect("valid lognormal");
    let income_dist = LogNormal::new(5500f64.ln(), 0.5).expect("valid lognormal");
    let late30 = Poisson::new(0.5).expect("valid poisson");
    let late60 = Poisson::new(0.25).expect("valid poisson");
    let late90 = Poisson::new(0.3).expect("valid poisson");
    let lines = Poisson::new(8.0).expect("valid poisson");
    let estate = Poisson::new(1.0).expect("valid poisson");
    let dependents = Poisson::new(0.8).expect("valid poisson");

    let mut out = GMSC_COLUMNS.join(",");
    out.push('\n');
    for _ in 0..n {
        let util: f64 = rng.random::<f64>().powf(1.3) * 1.2;
        let age: f64 = age_dist.sample(&mut rng);
        let age = age.clamp(21.0, 95.0).round();
        let l30: f64 = late30.sample(&mut rng);
        let debt: f64 = debt_dist.sample(&mut rng);
        let debt = debt.min(5.0);
        let income = income_dist.sample(&mut rng).round();
        let open: f64 = lines.sample(&mut rng);
        let l90: f64 = late90.sample(&mut rng);
        let re: f64 = estate.sample(&mut rng);
        let l60: f64 = late60.sample(&mut rng);
        let deps: f64 = dependents.sample(&mut rng);

        let logit = -0.9 + 2.2 * (util - 0.5) + 0.8 * l30 + 1.1 * l90 + 0.9 * l60
            - 0.045 * (age - 50.0)
            - 0.8 * (income / 5500.0).ln()
            + 0.4 * (debt - 0.4)
            + 0.1 * deps;
        let p = 1.0 / (1.0 + (-logit).exp());
        let label = u8::from(rng.random::<f64>() < p);

        let income_cell = if rng.random::<f64>() < 0.05 {
            String::new()
        } else {
            format!("{income}")
        };
        let deps_cell = if rng.random::<f64>() < 0.03 {
            String::new()
        } else {
            format!("{deps}")
        };
        let _ = writeln!(
            out,
            "{label},{util:.6},{age},{l30},{debt:.6},{income_cell},{open},{l90},{re},{l60},{deps_cell}"
        );
    }
    out
}

pub fn write_gmsc_standin(path: impl AsRef<Path>, n: usize, seed: u64) -> Result<()> {
    std::fs::write(path, gmsc_standin(n, seed))?;
    Ok(())
}
