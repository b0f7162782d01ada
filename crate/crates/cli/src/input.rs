// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use recourse::dataset::{load_csv_with_report, load_synthetic, Dataset, Mutability, SyntheticKind};
use recourse::models::{load_autoencoder, train_autoencoder, AutoencoderConfig};
use recourse::{Autoencoder, Generator};

use crate::DataArgs;

/// Loads the dataset described by `--data`, standardizes it unless told
/// not to, and applies `--mutability`.
pub fn load_data(a: &DataArgs, target_column: Option<&str>) -> Result<Dataset> {
    let data = if let Some(rest) = a.data.strip_prefix("synthetic:") {
        let mut parts = rest.split(':');
        let kind: SyntheticKind = parts.next().unwrap_or_default().parse()?;
        let n = match parts.next() {
            Some(s) => s.parse().with_context(|| format!("bad sample count '{s}' in --data"))?,
            None => 1000,
        };
        let seed = match parts.next() {
            Some(s) => s.parse().with_context(|| format!("bad seed '{s}' in --data"))?,
            None => 1,
        };
        load_synthetic(kind, n, seed)?
    } else {
        let column = target_column
            .or(a.target_column.as_deref())
            .ok_or_else(|| anyhow!("CSV data needs --target-column"))?;
        let path = Path::new(&a.data);
        if !path.is_file() {
            bail!("data file {} does not exist", path.display());
        }
        let (d, report) = load_csv_with_report(path, column, true)?;
        if !report.dropped_rows.is_empty() {
            log::info!("dropped {} incomplete rows of {}", report.dropped_rows.len(), report.rows_read);
        }
        d
    };
    let data = if a.no_standardize { data } else { data.standardize()? };
    match &a.mutability {
        Some(spec) => Ok(data.clone().set_mutability(parse_mutability(spec, &data)?)?),
        None => Ok(data),
    }
}

/// `none,both` (one tag per feature) or `name=tag,...` (others stay `both`).
pub fn parse_mutability(spec: &str, d: &Dataset) -> Result<Vec<Mutability>> {
    let items: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.iter().any(|s| s.contains('=')) {
        let mut tags = vec![Mutability::Both; d.n_features()];
        for item in items {
            let (name, tag) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("mix of positional and named mutability tags in '{spec}'"))?;
            let j = d
                .feature_index(name.trim())
                .ok_or_else(|| anyhow!("unknown feature '{}' in --mutability", name.trim()))?;
            tags[j] = tag.parse()?;
        }
        Ok(tags)
    } else {
        Ok(items.into_iter().map(|s| s.parse()).collect::<recourse::Result<Vec<_>>>()?)
    }
}

/// Resolves a label given by name (as in the data) or 1-based index.
pub fn parse_target(s: &str, d: &Dataset) -> Result<usize> {
    if let Some(l) = d.label_for_name(s.trim()) {
        return Ok(l);
    }
    match s.trim().parse::<usize>() {
        Ok(l) if (1..=d.n_classes()).contains(&l) => Ok(l),
        _ => bail!(
            "unknown target label '{s}'; labels are {}",
            d.label_names().join(", ")
        ),
    }
}

/// Loads the generator and, for latent-space generators, attaches an
/// autoencoder (loaded, or trained on the data).
pub fn load_generator(spec: &str, d: &Dataset, autoencoder: Option<&Path>, latent_dim: Option<usize>, seed: u64) -> Result<Generator> {
    let g = Generator::resolve(spec).with_context(|| format!("loading generator '{spec}'"))?;
    if !g.needs_autoencoder() {
        return Ok(g);
    }
    let ae: Autoencoder = match autoencoder {
        Some(p) => load_autoencoder(p).with_context(|| format!("loading autoencoder {}", p.display()))?,
        None => {
            let k = latent_dim.unwrap_or(d.n_features().div_ceil(2));
            log::info!("training a {k}-dimensional autoencoder for '{}'", g.name());
            let cfg = AutoencoderConfig {
                seed,
                ..AutoencoderConfig::default()
            };
            train_autoencoder(d, k, &cfg)?
        }
    };
    Ok(g.with_autoencoder(Arc::new(ae))?)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
