// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use super::Dataset;
use crate::error::{Error, Result};

/// What happened while reading a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestionReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    /// 1-based data row numbers (header excluded) dropped for missing cells.
    pub dropped_rows: Vec<usize>,
    /// Original label values in internal order: `label_mapping[k]` is label `k + 1`.
    pub label_mapping: Vec<String>,
}

/// Reads a numeric CSV with a header row. See [`load_csv_with_report`].
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, drop_incomplete: bool) -> Result<Dataset> {
    load_csv_with_report(path, target_column, drop_incomplete).map(|(d, _)| d)
}

/// Reads a numeric CSV with a header row. The target column may hold any
/// values; they are mapped to 1-based labels in sorted order (numerically when
/// every value parses as a number). Every other column must be numeric.
/// Rows with empty cells are dropped when `drop_incomplete` is set and
/// rejected otherwise.
pub fn load_csv_with_report(
    path: impl AsRef<Path>,
    target_column: &str,
    drop_incomplete: bool,
) -> Result<(Dataset, IngestionReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(b',')
        .from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::Schema(format!("target column '{target_column}' not found")))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if feature_names.is_empty() {
        return Err(Error::Schema("no feature columns besides the target".into()));
    }

    let mut features: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut dropped = Vec::new();
    let mut rows_read = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = r + 1;
        rows_read += 1;
        if record.len() != headers.len() {
            return Err(Error::Ingestion {
                row: row_no,
                column: String::new(),
                message: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        if record.iter().any(|c| c.trim().is_empty() || c.trim().eq_ignore_ascii_case("na")) {
            if drop_incomplete {
                dropped.push(row_no);
                continue;
            }
            let col = record
                .iter()
                .position(|c| c.trim().is_empty() || c.trim().eq_ignore_ascii_case("na"))
                .unwrap_or(0);
            return Err(Error::Ingestion {
                row: row_no,
                column: headers[col].clone(),
                message: "missing value (enable dropping of incomplete rows)".into(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            if c == target_idx {
                raw_labels.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::Ingestion {
                row: row_no,
                column: headers[c].clone(),
                message: format!("non-numeric value '{}'", cell.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingestion {
                    row: row_no,
                    column: headers[c].clone(),
                    message: format!("non-finite value '{}'", cell.trim()),
                });
            }
            features.push(v);
        }
    }

    let mut mapping: Vec<String> = raw_labels.clone();
    let numeric: Option<Vec<f64>> = mapping.iter().map(|l| l.parse::<f64>().ok()).collect();
    if numeric.is_some() {
        mapping.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    } else {
        mapping.sort();
    }
    mapping.dedup();
    let y: Vec<usize> = raw_labels
        .iter()
        .map(|l| mapping.iter().position(|m| m == l).expect("label in mapping") + 1)
        .collect();

    let n = y.len();
    let x = Array2::from_shape_vec((n, feature_names.len()), features).expect("row-major features");
    let dataset = Dataset::with_label_names(feature_names, x, y, mapping.clone())?;
    let report = IngestionReport {
        rows_read,
        rows_kept: n,
        dropped_rows: dropped,
        label_mapping: mapping,
    };
    Ok((dataset, report))
}
