// SPDX-License-Identifier: MIT OR Apache-2.0

//! `recourse`: train classifiers, generate and evaluate counterfactual
//! explanations, benchmark generators and plot search paths.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "recourse", version, about = "Counterfactual explanations and algorithmic recourse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier and write it as JSON.
    Train(TrainArgs),
    /// Search counterfactuals for factuals the model does not assign to the target.
    Generate(GenerateArgs),
    /// Score saved explanations.
    Evaluate(EvaluateArgs),
    /// Run several generators on the same seeded factuals.
    Benchmark(BenchmarkArgs),
    /// Write a probability grid and an SVG of the data and search paths (2-D data only).
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
pub struct DataArgs {
    /// `synthetic:<kind>[:<n>[:<seed>]]` or a CSV file.
    #[arg(long)]
    pub data: String,
    /// Target column of a CSV file.
    #[arg(long = "target-column")]
    pub target_column: Option<String>,
    /// Keep raw feature units instead of standardizing.
    #[arg(long)]
    pub no_standardize: bool,
    /// Mutability tags: `none,both` (one per feature) or `age=increase,...`.
    #[arg(long)]
    pub mutability: Option<String>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Target column of a CSV file (same as --target-column).
    #[arg(long)]
    pub target: Option<String>,
    /// linear, mlp, ensemble, tree, forest, or a JSON model spec file.
    #[arg(long, default_value = "linear")]
    pub model: String,
    /// Hidden layer widths for mlp and ensemble, e.g. `32` or `64,32`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    #[arg(long, default_value_t = 5)]
    pub members: usize,
    #[arg(long = "max-depth", default_value_t = 5)]
    pub max_depth: usize,
    #[arg(long = "min-leaf", default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long = "n-trees", default_value_t = 20)]
    pub n_trees: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long = "learning-rate", default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long = "batch-size", default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, env = "RECOURSE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SearchArgs {
    /// Generator preset name or a generator config JSON file.
    #[arg(long, default_value = "generic")]
    pub generator: String,
    /// Target label (label name as in the data, e.g. `0`, or 1-based index).
    #[arg(long)]
    pub target: String,
    #[arg(long = "num-counterfactuals")]
    pub num_counterfactuals: Option<usize>,
    /// Decision threshold on the target probability.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Autoencoder JSON for latent-space generators; trained on the data when absent.
    #[arg(long)]
    pub autoencoder: Option<PathBuf>,
    /// Latent dimension when an autoencoder has to be trained.
    #[arg(long = "latent-dim")]
    pub latent_dim: Option<usize>,
    #[arg(long, env = "RECOURSE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// 0-based row of the factual; by default factuals are drawn at random.
    #[arg(long)]
    pub index: Option<usize>,
    /// Number of factuals drawn when --index is absent.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Output JSON (stdout when absent).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG of the search paths (2-D data only).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Explanation JSON written by `generate`.
    #[arg(long)]
    pub explanations: PathBuf,
    /// Measures, e.g. `distance_mad,plausibility`; repeatable.
    #[arg(long, value_delimiter = ',')]
    pub measure: Vec<String>,
    /// Neighbour count for plausibility.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// CSV report (stdout when absent).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model JSON files; repeatable. Each model is named after its file stem.
    #[arg(long, required = true, value_delimiter = ',')]
    pub model: Vec<PathBuf>,
    /// Generators (preset names or config files); repeatable.
    #[arg(long, value_delimiter = ',', default_value = "generic")]
    pub generator: Vec<String>,
    #[arg(long)]
    pub target: String,
    #[arg(long = "n-samples", default_value_t = 50)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long = "num-counterfactuals")]
    pub num_counterfactuals: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub autoencoder: Option<PathBuf>,
    #[arg(long = "latent-dim")]
    pub latent_dim: Option<usize>,
    #[arg(long, env = "RECOURSE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Benchmark CSV.
    #[arg(short, long)]
    pub out: PathBuf,
    /// JSON mirror of the CSV.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Tradeoff summary text file (always printed to stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Label whose probability is shaded and contoured.
    #[arg(long)]
    pub target: String,
    /// Explanation JSON whose paths are drawn.
    #[arg(long)]
    pub explanations: Option<PathBuf>,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = recourse::plot::DEFAULT_GRID)]
    pub grid: usize,
    /// SVG output.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Grid CSV output; defaults to the SVG path with a `.csv` extension.
    #[arg(long = "grid-out")]
    pub grid_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Generate(a) => commands::generate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::Plot(a) => commands::plot(a),
    };
    match result {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::SearchFailed(msg)) => {
            eprintln!("search finished without a valid counterfactual: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
