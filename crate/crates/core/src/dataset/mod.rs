// SPDX-License-Identifier: MIT OR Apache-2.0

//! Tabular datasets: features, 1-based class labels, mutability tags and the
//! statistics the search and evaluation code needs (standardizer, MAD).

mod ingest;
mod synthetic;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{load_csv, load_csv_with_report, IngestionReport};
pub use synthetic::{gmsc_standin, load_synthetic, write_gmsc_standin, SyntheticKind, GMSC_COLUMNS};

/// MAD values below this are replaced so MAD-weighted distances never divide by zero.
pub const MAD_FLOOR: f64 = 1e-6;

/// Direction in which a feature may be perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mutability {
    #[default]
    Both,
    Increase,
    Decrease,
    None,
}

impl Mutability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mutability::Both => "both",
            Mutability::Increase => "increase",
            Mutability::Decrease => "decrease",
            Mutability::None => "none",
        }
    }

    pub fn is_mutable(&self) -> bool {
        !matches!(self, Mutability::None)
    }
}

impl fmt::Display for Mutability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mutability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches(':').to_ascii_lowercase().as_str() {
            "both" => Ok(Mutability::Both),
            "increase" => Ok(Mutability::Increase),
            "decrease" => Ok(Mutability::Decrease),
            "none" => Ok(Mutability::None),
            other => Err(Error::config(format!(
                "unknown mutability tag '{other}' (expected both, increase, decrease or none)"
            ))),
        }
    }
}

/// Per-feature affine transform `z = (x - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn transform_row(&self, x: &Array1<f64>) -> Array1<f64> {
        Array1::from_iter(
            x.iter()
                .zip(self.mean.iter().zip(&self.std))
                .map(|(v, (m, s))| (v - m) / s),
        )
    }

    pub fn inverse_row(&self, z: &Array1<f64>) -> Array1<f64> {
        Array1::from_iter(
            z.iter()
                .zip(self.mean.iter().zip(&self.std))
                .map(|(v, (m, s))| v * s + m),
        )
    }

    pub fn inverse(&self, z: ArrayView2<f64>) -> Array2<f64> {
        let mut out = z.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.std[j] + self.mean[j];
            }
        }
        out
    }
}

/// A labelled feature matrix. Rows are samples; labels are stored 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    x: Array2<f64>,
    y: Vec<usize>,
    label_names: Vec<String>,
    mutability: Vec<Mutability>,
    standardizer: Option<Standardizer>,
    mad: Option<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from features and 1-based labels. Label names default to
    /// the internal label numbers.
    pub fn new(feature_names: Vec<String>, x: Array2<f64>, y: Vec<usize>) -> Result<Self> {
        let n_classes = y.iter().copied().max().unwrap_or(0);
        let label_names = (1..=n_classes).map(|c| c.to_string()).collect();
        Self::with_label_names(feature_names, x, y, label_names)
    }

    pub fn with_label_names(
        feature_names: Vec<String>,
        x: Array2<f64>,
        y: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Dimension {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if feature_names.len() != x.ncols() {
            return Err(Error::Dimension {
                expected: x.ncols(),
                got: feature_names.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&l| l == 0 || l > label_names.len()) {
            return Err(Error::config(format!(
                "label {bad} outside 1..={}",
                label_names.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("feature matrix contains non-finite values"));
        }
        let d = x.ncols();
        Ok(Dataset {
            feature_names,
            x,
            y,
            label_names,
            mutability: vec![Mutability::Both; d],
            standardizer: None,
            mad: None,
        })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn mutability(&self) -> &[Mutability] {
        &self.mutability
    }

    pub fn standardizer(&self) -> Option<&Standardizer> {
        self.standardizer.as_ref()
    }

    pub fn mad(&self) -> Option<&[f64]> {
        self.mad.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Number of classes, taken from the label mapping.
    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Internal label for an original label name (e.g. `"0"` → 1).
    pub fn label_for_name(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|l| l == name).map(|i| i + 1)
    }

    /// Row indices with the given label.
    pub fn rows_with_label(&self, label: usize) -> Vec<usize> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Returns a copy of one row (0-based).
    pub fn select_factual(&self, index: usize) -> Result<Array1<f64>> {
        if index >= self.n_rows() {
            return Err(Error::Index {
                index,
                len: self.n_rows(),
            });
        }
        Ok(self.x.row(index).to_owned())
    }

    /// Replaces the mutability tags; one tag per feature.
    pub fn set_mutability(mut self, tags: Vec<Mutability>) -> Result<Self> {
        if tags.len() != self.n_features() {
            return Err(Error::config(format!(
                "expected {} mutability tags, got {}",
                self.n_features(),
                tags.len()
            )));
        }
        self.mutability = tags;
        Ok(self)
    }

    /// Standardizes every column to zero mean and unit (population) variance.
    ///
    /// If the dataset was already standardized the stored transform is
    /// composed, so [`Dataset::destandardize`] always maps back to the
    /// original units. Any stored MAD statistics are recomputed.
    pub fn standardize(mut self) -> Result<Self> {
        let n = self.n_rows() as f64;
        let mean = self
            .x
            .mean_axis(Axis(0))
            .ok_or_else(|| Error::config("cannot standardize an empty dataset"))?;
        let std: Array1<f64> = self.x.var_axis(Axis(0), 0.0).mapv(f64::sqrt);
        let degenerate: Vec<String> = std
            .iter()
            .zip(&self.feature_names)
            .filter(|(s, _)| **s <= 0.0 || !s.is_finite())
            .map(|(_, name)| name.clone())
            .collect();
        if !degenerate.is_empty() || n < 2.0 {
            return Err(Error::DegenerateFeatures(degenerate));
        }
        for mut row in self.x.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - mean[j]) / std[j];
            }
        }
        let composed = match self.standardizer.take() {
            Some(prev) => Standardizer {
                mean: (0..mean.len())
                    .map(|j| prev.mean[j] + prev.std[j] * mean[j])
                    .collect(),
                std: (0..std.len()).map(|j| prev.std[j] * std[j]).collect(),
            },
            None => Standardizer {
                mean: mean.to_vec(),
                std: std.to_vec(),
            },
        };
        self.standardizer = Some(composed);
        if self.mad.is_some() {
            self.mad = Some(mad_statistics(&self)?);
        }
        Ok(self)
    }

    /// Maps the features back to original units and drops the standardizer.
    pub fn destandardize(mut self) -> Self {
        if let Some(s) = self.standardizer.take() {
            self.x = s.inverse(self.x.view());
            if self.mad.is_some() {
                self.mad = mad_statistics(&self).ok();
            }
        }
        self
    }

    /// Computes and stores the per-feature MAD statistics.
    pub fn with_mad(mut self) -> Result<Self> {
        self.mad = Some(mad_statistics(&self)?);
        Ok(self)
    }

    /// Centroid of the rows carrying `label`.
    pub fn class_centroid(&self, label: usize) -> Result<Array1<f64>> {
        let rows = self.rows_with_label(label);
        if rows.is_empty() {
            return Err(Error::config(format!("no rows with label {label}")));
        }
        let sub = self.x.select(Axis(0), &rows);
        Ok(sub.mean_axis(Axis(0)).expect("non-empty selection"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DatasetJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DatasetJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Median absolute deviation of every column, floored at [`MAD_FLOOR`].
pub fn mad_statistics(d: &Dataset) -> Result<Vec<f64>> {
    if d.n_rows() < 2 {
        return Err(Error::config("MAD statistics need at least two rows"));
    }
    Ok(d.x
        .columns()
        .into_iter()
        .map(|col| {
            let values: Vec<f64> = col.to_vec();
            let med = median(&values);
            let dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
            let mad = median(&dev);
            if mad < MAD_FLOOR {
                MAD_FLOOR
            } else {
                mad
            }
        })
        .collect())
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    feature_names: Vec<String>,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    #[serde(default)]
    label_names: Option<Vec<String>>,
    mutability: Vec<Mutability>,
    standardizer: Option<Standardizer>,
    mad: Option<Vec<f64>>,
}

impl From<&Dataset> for DatasetJson {
    fn from(d: &Dataset) -> Self {
        DatasetJson {
            feature_names: d.feature_names.clone(),
            x: d.x.rows().into_iter().map(|r| r.to_vec()).collect(),
            y: d.y.clone(),
            label_names: Some(d.label_names.clone()),
            mutability: d.mutability.clone(),
            standardizer: d.standardizer.clone(),
            mad: d.mad.clone(),
        }
    }
}

impl TryFrom<DatasetJson> for Dataset {
    type Error = Error;

    fn try_from(raw: DatasetJson) -> Result<Self> {
        let d = raw.feature_names.len();
        let n = raw.x.len();
        let mut flat = Vec::with_capacity(n * d);
        for row in &raw.x {
            if row.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let x = Array2::from_shape_vec((n, d), flat).expect("shape checked");
        let mut ds = match raw.label_names {
            Some(names) => Dataset::with_label_names(raw.feature_names, x, raw.y, names)?,
            None => Dataset::new(raw.feature_names, x, raw.y)?,
        };
        ds = ds.set_mutability(raw.mutability)?;
        if let Some(s) = &raw.standardizer {
            if s.mean.len() != d || s.std.len() != d || s.std.iter().any(|v| v.is_nan() || *v <= 0.0) {
                return Err(Error::Schema("invalid standardizer".into()));
            }
        }
        if let Some(m) = &raw.mad {
            if m.len() != d || m.iter().any(|v| *v < 0.0) {
                return Err(Error::Schema("invalid MAD statistics".into()));
            }
        }
        ds.standardizer = raw.standardizer;
        ds.mad = raw.mad;
        Ok(ds)
    }
}
