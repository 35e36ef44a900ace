//! Config-file and environment merging.
//!
//! Every flag can also be supplied by a JSON config file (`--config`),
//! keyed by the flag name with underscores. Precedence: flag, then config
//! file, then `LCA_SEED` (seed only), then built-in default. An unset seed
//! is generated from entropy and echoed so the run can be repeated.

use anyhow::{bail, Context, Result};
use lca_core::EmConfig;
use rand::Rng;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub classes: Option<usize>,
    pub class_range: Option<String>,
    pub criterion: Option<String>,
    pub format: Option<String>,
    pub delimiter: Option<String>,
    pub restarts: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub floor: Option<f64>,
    pub n: Option<usize>,
    pub threshold: Option<f64>,
    pub labels: Option<Vec<String>>,
    pub optimist_class: Option<usize>,
    pub pessimist_class: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))
            }
        }
    }
}

/// Seed precedence: flag, config file, LCA_SEED, fresh entropy.
/// Returns the seed and whether it had to be generated.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<(u64, bool)> {
    if let Some(seed) = flag.or(file) {
        return Ok((seed, false));
    }
    if let Ok(text) = std::env::var("LCA_SEED") {
        let seed = text
            .trim()
            .parse::<u64>()
            .with_context(|| format!("LCA_SEED '{text}' is not an unsigned integer"))?;
        return Ok((seed, false));
    }
    Ok((rand::thread_rng().gen(), true))
}

pub fn build_em_config(
    em: &crate::EmArgs,
    file: &FileConfig,
    seed: u64,
) -> EmConfig {
    let defaults = EmConfig::default();
    EmConfig {
        max_iterations: em.max_iter.or(file.max_iter).unwrap_or(defaults.max_iterations),
        tolerance: em.tol.or(file.tol).unwrap_or(defaults.tolerance),
        n_restarts: em.restarts.or(file.restarts).unwrap_or(defaults.n_restarts),
        seed,
        probability_floor: em.floor.or(file.floor).unwrap_or(defaults.probability_floor),
    }
}

pub fn resolve_delimiter(flag: Option<&str>, file: Option<&str>) -> Result<char> {
    let choice = flag.or(file).unwrap_or("comma");
    match choice.to_ascii_lowercase().as_str() {
        "comma" | "," => Ok(','),
        "tab" | "\t" | "\\t" => Ok('\t'),
        other => bail!("unsupported delimiter '{other}' (expected comma or tab)"),
    }
}

/// Inclusive range written as LO..HI, LO-HI, or LO:HI; a single number
/// means a one-element range.
pub fn parse_class_range(text: &str) -> Result<(usize, usize)> {
    let text = text.trim();
    for sep in ["..", "-", ":"] {
        if let Some((lo, hi)) = text.split_once(sep) {
            let lo: usize = lo.trim().parse().context("class range start")?;
            let hi: usize = hi.trim().parse().context("class range end")?;
            if lo == 0 || hi < lo {
                bail!("class range {lo}..{hi} is not a nonempty range of positive integers");
            }
            return Ok((lo, hi));
        }
    }
    let single: usize = text.parse().context("class range")?;
    if single == 0 {
        bail!("class count must be at least 1");
    }
    Ok((single, single))
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("missing required --{flag} (flag or config file)"))
}
