// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_row, Measure, DEFAULT_PLAUSIBILITY_K};
use crate::dataset::{mad_statistics, Dataset};
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::models::{argmax_rows, Classifier};
use crate::search::{generate_counterfactual, SearchOptions};

pub const BENCHMARK_HEADER: &str = "dataset,model,generator,sample,seed,validity,l0,l1,l2,linf,mad,plausibility,iterations,reason";

/// A named model taking part in a benchmark.
pub struct ModelEntry<'a> {
    pub name: String,
    pub model: &'a dyn Classifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Dataset id written into every row.
    pub dataset: String,
    pub target: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Measures to compute; the others are left empty. Validity is always computed.
    pub measures: Vec<Measure>,
    pub plausibility_k: usize,
    /// Search settings; the seed is replaced per cell.
    pub search: SearchOptions,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            dataset: "data".into(),
            target: 2,
            n_samples: 50,
            seed: 0,
            measures: Measure::ALL.to_vec(),
            plausibility_k: DEFAULT_PLAUSIBILITY_K,
            search: SearchOptions::default(),
        }
    }
}

/// One (model, generator, factual) cell. `sample` is the 0-based dataset
/// row of the factual and `seed` the search seed used for the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub model: String,
    pub generator: String,
    pub sample: usize,
    pub seed: u64,
    pub validity: Option<f64>,
    pub l0: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub linf: Option<f64>,
    pub mad: Option<f64>,
    pub plausibility: Option<f64>,
    pub iterations: Option<usize>,
    /// Convergence reason, or `skipped: ...` when the cell could not run.
    pub reason: String,
}

impl BenchmarkRow {
    pub fn is_skipped(&self) -> bool {
        self.reason.starts_with("skipped")
    }
}

/// Mean measures of one (model, generator) pair over the cells that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub generator: String,
    pub runs: usize,
    pub skipped: usize,
    pub validity: f64,
    /// Mean l1 distance.
    pub cost: f64,
    /// Mean plausibility distance.
    pub implausibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

impl BenchmarkTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(BENCHMARK_HEADER.split(','))?;
        for r in &self.rows {
            w.write_record([
                r.dataset.clone(),
                r.model.clone(),
                r.generator.clone(),
                r.sample.to_string(),
                r.seed.to_string(),
                opt(r.validity),
                opt(r.l0),
                opt(r.l1),
                opt(r.l2),
                opt(r.linf),
                opt(r.mad),
                opt(r.plausibility),
                opt(r.iterations),
                r.reason.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }

    /// Per (model, generator) means, in first-appearance order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, String)> = Vec::new();
        for r in &self.rows {
            let k = (r.model.clone(), r.generator.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(model, generator)| {
                let cells: Vec<&BenchmarkRow> = self.rows.iter().filter(|r| r.model == model && r.generator == generator).collect();
                let ran: Vec<&&BenchmarkRow> = cells.iter().filter(|r| !r.is_skipped()).collect();
                SummaryRow {
                    runs: ran.len(),
                    skipped: cells.len() - ran.len(),
                    validity: mean_of(ran.iter().filter_map(|r| r.validity)),
                    cost: mean_of(ran.iter().filter_map(|r| r.l1)),
                    implausibility: mean_of(ran.iter().filter_map(|r| r.plausibility)),
                    model,
                    generator,
                }
            })
            .collect()
    }

    /// Plain-text cost versus implausibility table.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:<16} {:>5} {:>8} {:>9} {:>10} {:>15}",
            "model", "generator", "runs", "skipped", "validity", "cost (l1)", "implausibility"
        );
        for s in self.summary() {
            let _ = writeln!(
                out,
                "{:<14} {:<16} {:>5} {:>8} {:>9.3} {:>10.4} {:>15.4}",
                s.model, s.generator, s.runs, s.skipped, s.validity, s.cost, s.implausibility
            );
        }
        out
    }
}

/// Seeded choice of up to `n` rows the model does not predict as `target`.
pub fn choose_factuals(d: &Dataset, m: &dyn Classifier, target: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    let predicted = argmax_rows(m.probs(d.x().view())?.view());
    let mut candidates: Vec<usize> = predicted
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != target)
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return Err(Error::config(format!("no rows are predicted outside target label {target}")));
    }
    if candidates.len() < n {
        log::warn!("only {} factuals available, fewer than the {n} requested", candidates.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);
    candidates.truncate(n);
    Ok(candidates)
}

/// Runs every generator on `n_samples` seeded factuals per model and scores
/// the results. Cells run in parallel; the row order is fixed (model, then
/// generator, then factual), so output does not depend on scheduling.
/// Cells that cannot run (for example a gradient generator on a tree) are
/// kept as rows whose reason starts with `skipped:`.
pub fn benchmark(d: &Dataset, models: &[ModelEntry<'_>], generators: &[Generator], cfg: &BenchmarkConfig) -> Result<BenchmarkTable> {
    if cfg.n_samples == 0 {
        return Err(Error::config("benchmark needs n_samples >= 1"));
    }
    let mad = if cfg.measures.contains(&Measure::DistanceMad) {
        Some(match d.mad() {
            Some(v) => v.to_vec(),
            None => mad_statistics(d)?,
        })
    } else {
        None
    };
    let mut cells = Vec::new();
    for (mi, entry) in models.iter().enumerate() {
        let factuals = choose_factuals(d, entry.model, cfg.target, cfg.n_samples, cfg.seed)?;
        for gi in 0..generators.len() {
            for (pos, &row) in factuals.iter().enumerate() {
                cells.push((mi, gi, pos, row));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(mi, gi, pos, row)| {
            let entry = &models[mi];
            let g = &generators[gi];
            let seed = cfg.seed.wrapping_add(pos as u64);
            let mut out = BenchmarkRow {
                dataset: cfg.dataset.clone(),
                model: entry.name.clone(),
                generator: g.name().to_string(),
                sample: row,
                seed,
                validity: None,
                l0: None,
                l1: None,
                l2: None,
                linf: None,
                mad: None,
                plausibility: None,
                iterations: None,
                reason: String::new(),
            };
            let opts = SearchOptions { seed, ..cfg.search };
            let result = d
                .select_factual(row)
                .and_then(|x| generate_counterfactual(&x, cfg.target, d, entry.model, g, &opts))
                .and_then(|es| evaluate_row(&es, entry.model, d, &cfg.measures, cfg.plausibility_k, mad.as_deref()));
            match result {
                Ok(r) => {
                    out.validity = Some(r.validity);
                    out.l0 = r.get(Measure::DistanceL0);
                    out.l1 = r.get(Measure::DistanceL1);
                    out.l2 = r.get(Measure::DistanceL2);
                    out.linf = r.get(Measure::DistanceLinf);
                    out.mad = r.get(Measure::DistanceMad);
                    out.plausibility = r.get(Measure::Plausibility);
                    out.iterations = Some(r.iterations);
                    out.reason = r.converged_reason.map_or(String::new(), |c| c.as_str().to_string());
                }
                Err(e) => out.reason = format!("skipped: {e}"),
            }
            out
        })
        .collect();
    Ok(BenchmarkTable { rows })
}
