// SPDX-License-Identifier: MIT OR Apache-2.0

//! Evaluation measures and the benchmark harness.

mod benchmark;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

pub use benchmark::{benchmark, choose_factuals, BenchmarkConfig, BenchmarkRow, BenchmarkTable, ModelEntry, SummaryRow, BENCHMARK_HEADER};

use crate::dataset::{mad_statistics, Dataset};
use crate::error::{Error, Result};
use crate::generators::{penalty_distance, Norm};
use crate::models::Classifier;
use crate::search::{ConvergedReason, ExplanationState};

/// Default neighbour count for [`plausibility`].
pub const DEFAULT_PLAUSIBILITY_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Validity,
    DistanceL0,
    DistanceL1,
    DistanceL2,
    DistanceLinf,
    DistanceMad,
    Plausibility,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Validity,
        Measure::DistanceL0,
        Measure::DistanceL1,
        Measure::DistanceL2,
        Measure::DistanceLinf,
        Measure::DistanceMad,
        Measure::Plausibility,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Validity => "validity",
            Measure::DistanceL0 => "distance_l0",
            Measure::DistanceL1 => "distance_l1",
            Measure::DistanceL2 => "distance_l2",
            Measure::DistanceLinf => "distance_linf",
            Measure::DistanceMad => "distance_mad",
            Measure::Plausibility => "plausibility",
        }
    }

    fn norm(&self) -> Option<Norm> {
        match self {
            Measure::DistanceL0 => Some(Norm::L0),
            Measure::DistanceL1 => Some(Norm::L1),
            Measure::DistanceL2 => Some(Norm::L2),
            Measure::DistanceLinf => Some(Norm::Linf),
            Measure::DistanceMad => Some(Norm::Mad),
            _ => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches(':');
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.as_str().trim_start_matches("distance_") == s)
            .ok_or_else(|| Error::config(format!("unknown measure '{s}'")))
    }
}

/// True when every counterfactual is classified as the target.
pub fn validity(es: &ExplanationState, m: &dyn Classifier) -> Result<bool> {
    es.is_valid(m)
}

/// Mean Euclidean distance from `cf` to its `k` nearest training rows of
/// class `target`.
pub fn plausibility_of(cf: ArrayView1<f64>, target: usize, d: &Dataset, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::config("plausibility needs k >= 1"));
    }
    let rows = d.rows_with_label(target);
    if rows.len() < k {
        return Err(Error::config(format!(
            "plausibility with k = {k} needs at least {k} rows of label {target}, found {}",
            rows.len()
        )));
    }
    let mut dist: Vec<f64> = rows
        .iter()
        .map(|&i| {
            d.x()
                .row(i)
                .iter()
                .zip(cf.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    dist.sort_by(f64::total_cmp);
    Ok(dist[..k].iter().sum::<f64>() / k as f64)
}

/// [`plausibility_of`] averaged over the state's counterfactuals. Lower is
/// more plausible.
pub fn plausibility(es: &ExplanationState, d: &Dataset, k: usize) -> Result<f64> {
    let mut acc = 0.0;
    for cf in es.counterfactuals.rows() {
        acc += plausibility_of(cf, es.target, d, k)?;
    }
    Ok(acc / es.num_counterfactuals() as f64)
}

/// Measures of one explanation. With several counterfactuals each measure
/// is the mean over them (validity becomes the valid fraction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub validity: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measures: BTreeMap<Measure, f64>,
    pub iterations: usize,
    pub converged_reason: Option<ConvergedReason>,
}

impl EvaluationRow {
    pub fn get(&self, m: Measure) -> Option<f64> {
        if m == Measure::Validity {
            Some(self.validity)
        } else {
            self.measures.get(&m).copied()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Aggregate { mean: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Aggregate { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<EvaluationRow>,
    pub aggregates: BTreeMap<Measure, Aggregate>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per explanation: `index,validity,<measures...>,iterations,reason`.
    pub fn to_csv(&self) -> Result<String> {
        let columns: Vec<Measure> = self.aggregates.keys().copied().filter(|m| *m != Measure::Validity).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string(), "validity".to_string()];
        header.extend(columns.iter().map(|m| m.as_str().to_string()));
        header.extend(["iterations".to_string(), "reason".to_string()]);
        w.write_record(&header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec = vec![i.to_string(), r.validity.to_string()];
            rec.extend(columns.iter().map(|m| r.get(*m).map_or(String::new(), |v| v.to_string())));
            rec.push(r.iterations.to_string());
            rec.push(r.converged_reason.map_or(String::new(), |c| c.as_str().to_string()));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Scores one explanation on the given measures (validity is always included).
pub fn evaluate_one(es: &ExplanationState, m: &dyn Classifier, d: &Dataset, measures: &[Measure], k: usize) -> Result<EvaluationRow> {
    let mad = if measures.contains(&Measure::DistanceMad) {
        Some(match d.mad() {
            Some(v) => v.to_vec(),
            None => mad_statistics(d)?,
        })
    } else {
        None
    };
    evaluate_row(es, m, d, measures, k, mad.as_deref())
}

fn evaluate_row(
    es: &ExplanationState,
    m: &dyn Classifier,
    d: &Dataset,
    measures: &[Measure],
    k: usize,
    mad: Option<&[f64]>,
) -> Result<EvaluationRow> {
    let l = es.num_counterfactuals() as f64;
    let mut out = BTreeMap::new();
    for &measure in measures {
        let value = match measure {
            Measure::Validity => continue,
            Measure::Plausibility => plausibility(es, d, k)?,
            other => {
                let norm = other.norm().expect("distance measure");
                let mut acc = 0.0;
                for cf in es.counterfactuals.rows() {
                    acc += penalty_distance(cf, es.factual.view(), norm, mad)?;
                }
                acc / l
            }
        };
        out.insert(measure, value);
    }
    Ok(EvaluationRow {
        validity: es.validity_fraction(m)?,
        measures: out,
        iterations: es.iterations,
        converged_reason: es.converged_reason,
    })
}

/// Scores every explanation with plausibility neighbour count `k`.
pub fn evaluate_with(
    explanations: &[ExplanationState],
    m: &dyn Classifier,
    d: &Dataset,
    measures: &[Measure],
    k: usize,
) -> Result<EvaluationReport> {
    let mad = if measures.contains(&Measure::DistanceMad) {
        Some(match d.mad() {
            Some(v) => v.to_vec(),
            None => mad_statistics(d)?,
        })
    } else {
        None
    };
    let rows = explanations
        .iter()
        .map(|es| evaluate_row(es, m, d, measures, k, mad.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let mut keys: Vec<Measure> = measures.to_vec();
    keys.push(Measure::Validity);
    keys.sort();
    keys.dedup();
    let aggregates = keys
        .into_iter()
        .map(|key| {
            let values: Vec<f64> = rows.iter().filter_map(|r| r.get(key)).collect();
            (key, Aggregate::of(&values))
        })
        .collect();
    Ok(EvaluationReport { rows, aggregates })
}

/// Scores every explanation; plausibility uses `k = 5` neighbours.
pub fn evaluate(explanations: &[ExplanationState], m: &dyn Classifier, d: &Dataset, measures: &[Measure]) -> Result<EvaluationReport> {
    evaluate_with(explanations, m, d, measures, DEFAULT_PLAUSIBILITY_K)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LinearModel;
    use crate::search::SearchSpace;
    use ndarray::{array, Array1, Array2};

    fn state(x: Array1<f64>, cfs: Array2<f64>, target: usize) -> ExplanationState {
        ExplanationState {
            factual: x,
            target,
            generator: "test".into(),
            search_space: SearchSpace::Feature,
            states: cfs.clone(),
            counterfactuals: cfs.clone(),
            path: vec![cfs],
            converged_reason: None,
            iterations: 0,
            warnings: vec![],
        }
    }

    fn data() -> Dataset {
        Dataset::new(
            vec!["a".into(), "b".into()],
            array![[0.0, 0.0], [3.0, 4.0], [1.0, 0.0], [10.0, 0.0], [0.0, 2.0]],
            vec![2, 2, 1, 2, 1],
        )
        .unwrap()
    }

    #[test]
    fn measure_ids_parse() {
        assert_eq!("distance_mad".parse::<Measure>().unwrap(), Measure::DistanceMad);
        assert_eq!("l1".parse::<Measure>().unwrap(), Measure::DistanceL1);
        assert!("entropy".parse::<Measure>().is_err());
    }

    #[test]
    fn plausibility_examples() {
        let d = data();
        let es = state(array![5.0, 5.0], array![[3.0, 4.0]], 2);
        assert_eq!(plausibility(&es, &d, 1).unwrap(), 0.0);
        let es = state(array![5.0, 5.0], array![[0.0, -2.0]], 2);
        assert_eq!(plausibility(&es, &d, 1).unwrap(), 2.0);
        // Distances to the three label-2 rows: 2, sqrt(9 + 36), sqrt(100 + 4).
        let expected = (2.0 + 45f64.sqrt() + 104f64.sqrt()) / 3.0;
        assert!((plausibility(&es, &d, 3).unwrap() - expected).abs() < 1e-12);
        assert!(plausibility(&es, &d, 4).is_err());
    }

    #[test]
    fn empty_measure_list_reports_validity() {
        let d = data();
        let m = LinearModel::new(array![[1.0, 0.0]], array![0.0]).unwrap();
        let es = state(array![-1.0, 0.0], array![[0.7, 0.0]], 2);
        let r = evaluate(&[es], &m, &d, &[]).unwrap();
        assert_eq!(r.rows[0].validity, 1.0);
        assert!(r.rows[0].measures.is_empty());
        assert_eq!(r.aggregates.keys().copied().collect::<Vec<_>>(), vec![Measure::Validity]);
    }

    #[test]
    fn multi_counterfactual_validity_fraction() {
        let d = data();
        let m = LinearModel::new(array![[1.0, 0.0]], array![0.0]).unwrap();
        let es = state(array![-1.0, 0.0], array![[0.7, 0.0], [1.0, 0.0], [-0.1, 0.0]], 2);
        let r = evaluate(&[es], &m, &d, &[Measure::DistanceL1]).unwrap();
        assert!((r.rows[0].validity - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.rows[0].get(Measure::DistanceL1).unwrap() - (1.7 + 2.0 + 0.9) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn aggregates_match_rows() {
        let d = data();
        let m = LinearModel::new(array![[1.0, 0.0]], array![0.0]).unwrap();
        let list: Vec<_> = (0..10)
            .map(|i| state(array![-1.0, 0.0], array![[i as f64 * 0.3 - 1.0, 0.5]], 2))
            .collect();
        let r = evaluate_with(&list, &m, &d, &[Measure::DistanceL2, Measure::Plausibility], 2).unwrap();
        assert_eq!(r.rows.len(), 10);
        let manual: f64 = r.rows.iter().map(|r| r.get(Measure::DistanceL2).unwrap()).sum::<f64>() / 10.0;
        assert!((r.aggregates[&Measure::DistanceL2].mean - manual).abs() < 1e-12);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.starts_with("index,validity,distance_l2,plausibility,iterations,reason"));
    }
}
