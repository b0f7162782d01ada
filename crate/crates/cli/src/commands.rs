// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use recourse::eval::{benchmark as run_benchmark, choose_factuals, evaluate_with, BenchmarkConfig, Measure, ModelEntry};
use recourse::models::{load_model, model_to_json, train as fit, Classifier, ModelSpec, TrainConfig};
use recourse::plot::{probability_grid, render_svg};
use recourse::search::{generate_counterfactual, ConvergenceConfig, ExplanationState, SearchOptions};
use recourse::Dataset;

use crate::input::{load_data, load_generator, parse_target, write_atomic};
use crate::{BenchmarkArgs, EvaluateArgs, GenerateArgs, PlotArgs, SearchArgs, TrainArgs};

pub enum Outcome {
    Success,
    SearchFailed(String),
}

fn model_spec(a: &TrainArgs) -> Result<ModelSpec> {
    let hidden = a.hidden.clone().unwrap_or_else(|| vec![32]);
    Ok(match a.model.as_str() {
        "linear" => ModelSpec::Linear,
        "mlp" => ModelSpec::Mlp {
            hidden,
            dropout: a.dropout,
        },
        "ensemble" => ModelSpec::Ensemble {
            members: a.members,
            hidden,
            dropout: a.dropout,
        },
        "tree" => ModelSpec::Tree {
            max_depth: a.max_depth,
            min_leaf: a.min_leaf,
        },
        "forest" => ModelSpec::Forest {
            n_trees: a.n_trees,
            max_depth: a.max_depth,
            min_leaf: a.min_leaf,
        },
        other => {
            let path = Path::new(other);
            if !path.is_file() {
                bail!("unknown model '{other}' (expected linear, mlp, ensemble, tree, forest or a spec file)");
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing model spec {}", path.display()))?
        }
    })
}

pub fn train(a: TrainArgs) -> Result<Outcome> {
    let data = load_data(&a.data, a.target.as_deref())?;
    let spec = model_spec(&a)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let (model, report) = fit(&spec, &data, &cfg)?;
    let text = model_to_json(&model)?;
    write_atomic(&a.out, &text)?;
    match report.loss_history.last() {
        Some(loss) => println!("model={} accuracy={:.4} loss={:.6}", model.kind(), report.accuracy, loss),
        None => println!("model={} accuracy={:.4}", model.kind(), report.accuracy),
    }
    Ok(Outcome::Success)
}

fn search_options(num_counterfactuals: Option<usize>, gamma: Option<f64>, max_iter: Option<usize>, seed: u64) -> SearchOptions {
    let mut convergence = ConvergenceConfig::default();
    if let Some(g) = gamma {
        convergence.decision_threshold = g;
    }
    if let Some(n) = max_iter {
        convergence.max_iter = n;
    }
    SearchOptions {
        num_counterfactuals,
        convergence,
        seed,
        ..SearchOptions::default()
    }
}

fn load_classifier(path: &Path, d: &Dataset) -> Result<recourse::Model> {
    let m = load_model(path).with_context(|| format!("loading model {}", path.display()))?;
    if m.input_dim() != d.n_features() {
        bail!(
            "model {} expects {} features but the data has {}",
            path.display(),
            m.input_dim(),
            d.n_features()
        );
    }
    Ok(m)
}

fn pick_factuals(d: &Dataset, m: &dyn Classifier, target: usize, index: Option<usize>, count: usize, seed: u64) -> Result<Vec<usize>> {
    if let Some(i) = index {
        if i >= d.n_rows() {
            bail!("--index {i} is out of range; the data has {} rows", d.n_rows());
        }
        return Ok(vec![i]);
    }
    choose_factuals(d, m, target, count.max(1), seed).map_err(|e| anyhow::anyhow!("no factual candidates: {e}"))
}

fn run_search(d: &Dataset, m: &dyn Classifier, s: &SearchArgs, rows: &[usize]) -> Result<Vec<ExplanationState>> {
    let target = parse_target(&s.target, d)?;
    let generator = load_generator(&s.generator, d, s.autoencoder.as_deref(), s.latent_dim, s.seed)?;
    let mut out = Vec::with_capacity(rows.len());
    for (pos, &row) in rows.iter().enumerate() {
        let x = d.select_factual(row)?;
        let opts = search_options(s.num_counterfactuals, s.gamma, s.max_iter, s.seed.wrapping_add(pos as u64));
        let es = generate_counterfactual(&x, target, d, m, &generator, &opts)
            .with_context(|| format!("searching from row {row}"))?;
        for w in &es.warnings {
            log::warn!("row {row}: {w}");
        }
        out.push(es);
    }
    Ok(out)
}

fn explanations_json(list: &[ExplanationState], m: &dyn Classifier, d: &Dataset) -> Result<String> {
    let values = list
        .iter()
        .map(|es| {
            let text = es.to_json(Some(m), d.standardizer())?;
            Ok(serde_json::from_str::<serde_json::Value>(&text)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = if values.len() == 1 {
        values.into_iter().next().expect("one value")
    } else {
        serde_json::Value::Array(values)
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn generate(a: GenerateArgs) -> Result<Outcome> {
    let data = load_data(&a.data, None)?;
    let model = load_classifier(&a.model, &data)?;
    let target = parse_target(&a.search.target, &data)?;
    let rows = pick_factuals(&data, &model, target, a.index, a.count, a.search.seed)?;
    let list = run_search(&data, &model, &a.search, &rows)?;
    let text = explanations_json(&list, &model, &data)?;
    match &a.out {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    if let Some(p) = &a.plot {
        let grid = probability_grid(&data, &model, target, recourse::plot::DEFAULT_GRID)?;
        write_atomic(p, &render_svg(&data, &grid, &list)?)?;
    }
    let mut failures = Vec::new();
    for (es, row) in list.iter().zip(&rows) {
        let failed = es.converged_reason.is_some_and(|r| r.is_failure());
        if failed || !es.is_valid(&model)? {
            let reason = es.converged_reason.map_or("unknown".to_string(), |r| r.to_string());
            failures.push(format!("row {row} ({reason})"));
        }
    }
    if failures.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::SearchFailed(failures.join(", ")))
    }
}

fn parse_measures(raw: &[String]) -> Result<Vec<Measure>> {
    if raw.is_empty() {
        return Ok(Measure::ALL.to_vec());
    }
    raw.iter()
        .map(|s| s.trim().parse::<Measure>().map_err(Into::into))
        .collect()
}

pub fn evaluate(a: EvaluateArgs) -> Result<Outcome> {
    let data = load_data(&a.data, None)?;
    let model = load_classifier(&a.model, &data)?;
    let text = std::fs::read_to_string(&a.explanations).with_context(|| format!("reading {}", a.explanations.display()))?;
    let list = ExplanationState::list_from_json(&text).with_context(|| format!("parsing {}", a.explanations.display()))?;
    if list.is_empty() {
        bail!("{} holds no explanations", a.explanations.display());
    }
    let measures = parse_measures(&a.measure)?;
    let report = evaluate_with(&list, &model, &data, &measures, a.k)?;
    let csv = report.to_csv()?;
    match &a.out {
        Some(p) => write_atomic(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &a.json {
        write_atomic(p, &(report.to_json()? + "\n"))?;
    }
    Ok(Outcome::Success)
}

fn model_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn benchmark(a: BenchmarkArgs) -> Result<Outcome> {
    let data = load_data(&a.data, None)?;
    let target = parse_target(&a.target, &data)?;
    let models = a
        .model
        .iter()
        .map(|p| Ok((model_name(p), load_classifier(p, &data)?)))
        .collect::<Result<Vec<(String, recourse::Model)>>>()?;
    let entries: Vec<ModelEntry<'_>> = models
        .iter()
        .map(|(name, m)| ModelEntry {
            name: name.clone(),
            model: m,
        })
        .collect();
    let generators = a
        .generator
        .iter()
        .map(|g| load_generator(g, &data, a.autoencoder.as_deref(), a.latent_dim, a.seed))
        .collect::<Result<Vec<_>>>()?;
    let cfg = BenchmarkConfig {
        dataset: a.data.data.clone(),
        target,
        n_samples: a.n_samples,
        seed: a.seed,
        plausibility_k: a.k,
        search: search_options(a.num_counterfactuals, a.gamma, a.max_iter, a.seed),
        ..BenchmarkConfig::default()
    };
    let table = run_benchmark(&data, &entries, &generators, &cfg)?;
    write_atomic(&a.out, &table.to_csv()?)?;
    if let Some(p) = &a.json {
        write_atomic(p, &(table.to_json()? + "\n"))?;
    }
    let summary = table.summary_text();
    print!("{summary}");
    if let Some(p) = &a.summary {
        write_atomic(p, &summary)?;
    }
    Ok(Outcome::Success)
}

pub fn plot(a: PlotArgs) -> Result<Outcome> {
    let data = load_data(&a.data, None)?;
    let model = load_classifier(&a.model, &data)?;
    let target = parse_target(&a.target, &data)?;
    let list = match &a.explanations {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExplanationState::list_from_json(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Vec::new(),
    };
    let grid = probability_grid(&data, &model, target, a.grid)?;
    let svg = render_svg(&data, &grid, &list)?;
    let grid_out = a.grid_out.clone().unwrap_or_else(|| with_csv_extension(&a.out));
    write_atomic(&a.out, &svg)?;
    write_atomic(&grid_out, &grid.to_csv())?;
    Ok(Outcome::Success)
}

fn with_csv_extension(p: &Path) -> PathBuf {
    let mut out = p.to_path_buf();
    out.set_extension("csv");
    out
}
