//! Command implementations.
//!
//! Every command prints enough to standard output to reproduce the run
//! (seed, inputs in effect) and exits nonzero when its postcondition
//! cannot be met. File outputs contain no timestamps or machine state, so
//! a command repeated with the same seed and inputs writes identical bytes.

use crate::config::{
    build_em_config, parse_class_range, require, resolve_delimiter, resolve_seed, FileConfig,
};
use crate::{ClassifyArgs, FitArgs, ReportArgs, SimulateArgs, SweepArgs};
use anyhow::{bail, Context, Result};
use lca_core::{
    build_report, drop_incomplete, fit_em, information_criteria, load_responses, posterior,
    sweep_classes, Criterion, ModelDocument, ReportOptions, ResponseMatrix, SurveySchema,
    TruthDocument,
};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

fn load_schema(path: &Path) -> Result<Arc<SurveySchema>> {
    Ok(Arc::new(
        SurveySchema::from_path(path)
            .with_context(|| format!("loading schema {}", path.display()))?,
    ))
}

/// Load a data file and apply listwise deletion; reports dropped rows.
fn load_complete(
    path: &Path,
    schema: &Arc<SurveySchema>,
    delimiter: char,
) -> Result<(ResponseMatrix, usize)> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let matrix = load_responses(BufReader::new(file), Arc::clone(schema), delimiter)
        .with_context(|| format!("loading {}", path.display()))?;
    let loaded = matrix.n_rows();
    let complete = if matrix.is_complete() { matrix } else { drop_incomplete(&matrix)? };
    let dropped = loaded - complete.n_rows();
    Ok((complete, dropped))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn file_extension(delimiter: char) -> &'static str {
    if delimiter == '\t' {
        "tsv"
    } else {
        "csv"
    }
}

pub fn fit(args: FitArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let delimiter = resolve_delimiter(args.common.delimiter.as_deref(), file.delimiter.as_deref())?;
    let data_path = require(args.data.or(file.data.clone()), "data")?;
    let schema_path = require(args.schema.or(file.schema.clone()), "schema")?;
    let classes = require(args.classes.or(file.classes), "classes")?;
    let out = require(args.out.or(file.out.clone()), "out")?;
    let format = args.format.or(file.format.clone()).unwrap_or_else(|| "json".into());
    let (seed, generated) = resolve_seed(args.em.seed, file.seed)?;
    let config = build_em_config(&args.em, &file, seed);

    println!("seed = {seed}{}", if generated { " (generated)" } else { "" });
    let schema = load_schema(&schema_path)?;
    let (data, dropped) = load_complete(&data_path, &schema, delimiter)?;
    println!("n = {} complete cases ({} dropped)", data.n_rows(), dropped);

    let fit = fit_em(&data, classes, &config)?;
    let document = ModelDocument::from_fit(&fit, data.n_rows());
    let (aic, bic) = information_criteria(fit.log_likelihood, fit.n_params, data.n_rows() as f64);

    let d = delimiter.to_string();
    println!("{}", ["classes", "p", "log_likelihood", "aic", "bic"].join(&d));
    println!(
        "{}",
        [
            classes.to_string(),
            fit.n_params.to_string(),
            format!("{:.6}", fit.log_likelihood),
            format!("{aic:.6}"),
            format!("{bic:.6}"),
        ]
        .join(&d)
    );
    println!("converged = {} after {} iterations", fit.converged, fit.iterations_used);

    match format.as_str() {
        "json" => write_text(&out, &document.to_json())?,
        "delimited" => {
            let mut text = ["classes", "p", "log_likelihood", "aic", "bic", "converged"].join(&d);
            text.push('\n');
            text.push_str(
                &[
                    classes.to_string(),
                    fit.n_params.to_string(),
                    format!("{:.6}", fit.log_likelihood),
                    format!("{aic:.6}"),
                    format!("{bic:.6}"),
                    fit.converged.to_string(),
                ]
                .join(&d),
            );
            text.push('\n');
            write_text(&out, &text)?;
        }
        other => bail!("unknown format '{other}' (expected json or delimited)"),
    }
    println!("wrote {}", out.display());
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let delimiter = resolve_delimiter(args.common.delimiter.as_deref(), file.delimiter.as_deref())?;
    let data_path = require(args.data.or(file.data.clone()), "data")?;
    let schema_path = require(args.schema.or(file.schema.clone()), "schema")?;
    let range_text = require(args.class_range.or(file.class_range.clone()), "class-range")?;
    let (lo, hi) = parse_class_range(&range_text)?;
    let criterion: Criterion = args
        .criterion
        .or(file.criterion.clone())
        .unwrap_or_else(|| "bic".into())
        .parse()?;
    let (seed, generated) = resolve_seed(args.em.seed, file.seed)?;
    let config = build_em_config(&args.em, &file, seed);

    println!("seed = {seed}{}", if generated { " (generated)" } else { "" });
    let schema = load_schema(&schema_path)?;
    let (data, dropped) = load_complete(&data_path, &schema, delimiter)?;
    println!("n = {} complete cases ({} dropped)", data.n_rows(), dropped);

    let result = sweep_classes(&data, lo..=hi, &config, criterion)?;
    print!("{}", result.to_delimited_table(delimiter));
    println!("selected R = {} by {}", result.selected_r, criterion);

    if let Some(out) = args.out.or(file.out.clone()) {
        let format = args.format.or(file.format).unwrap_or_else(|| "json".into());
        match format.as_str() {
            "json" => write_text(&out, &serde_json::to_string_pretty(&result)?)?,
            "delimited" => write_text(&out, &result.to_delimited_table(delimiter))?,
            other => bail!("unknown format '{other}' (expected json or delimited)"),
        }
        println!("wrote {}", out.display());
    }
    Ok(())
}

pub fn classify(args: ClassifyArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let delimiter = resolve_delimiter(args.common.delimiter.as_deref(), file.delimiter.as_deref())?;
    let data_path = require(args.data.or(file.data.clone()), "data")?;
    let schema_path = require(args.schema.or(file.schema.clone()), "schema")?;
    let model_path = require(args.model.or(file.model.clone()), "model")?;
    let out = require(args.out.or(file.out.clone()), "out")?;

    let schema = load_schema(&schema_path)?;
    let document = ModelDocument::from_path(&model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let params = document.parameters()?;
    params
        .check_schema(&schema.category_counts())
        .context("model document does not match the schema")?;

    let file_handle =
        fs::File::open(&data_path).with_context(|| format!("opening {}", data_path.display()))?;
    let matrix = load_responses(BufReader::new(file_handle), Arc::clone(&schema), delimiter)
        .with_context(|| format!("loading {}", data_path.display()))?;

    // keep original row numbers; incomplete rows are skipped
    let complete_rows: Vec<usize> = (0..matrix.n_rows())
        .filter(|&i| matrix.row_is_complete(i))
        .collect();
    if complete_rows.is_empty() {
        bail!("no complete cases to classify");
    }
    let kept = if complete_rows.len() == matrix.n_rows() {
        matrix.clone()
    } else {
        drop_incomplete(&matrix)?
    };
    let post = posterior(&kept, &params)?;

    let d = delimiter.to_string();
    let mut header = vec!["row".to_string()];
    header.extend((1..=params.n_classes()).map(|r| format!("posterior_{r}")));
    header.push("modal_class".to_string());
    let mut text = header.join(&d);
    text.push('\n');
    for (kept_idx, &orig_row) in complete_rows.iter().enumerate() {
        let row = &post[kept_idx];
        let mut best = 0usize;
        for (r, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = r;
            }
        }
        let mut cells = vec![(orig_row + 1).to_string()];
        cells.extend(row.iter().map(|p| format!("{p:.12}")));
        cells.push((best + 1).to_string());
        text.push_str(&cells.join(&d));
        text.push('\n');
    }
    write_text(&out, &text)?;
    println!(
        "classified {} rows ({} skipped as incomplete)",
        complete_rows.len(),
        matrix.n_rows() - complete_rows.len()
    );
    println!("wrote {}", out.display());
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let delimiter = resolve_delimiter(args.common.delimiter.as_deref(), file.delimiter.as_deref())?;
    let model_path = require(args.model.or(file.model.clone()), "model")?;
    let schema_path = require(args.schema.or(file.schema.clone()), "schema")?;
    let out = require(args.out.or(file.out.clone()), "out")?;

    let schema = load_schema(&schema_path)?;
    let document = ModelDocument::from_path(&model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    if document.converged == Some(false) && !args.allow_unconverged {
        bail!("model document is marked non-converged; pass --allow-unconverged to proceed");
    }
    let params = document.parameters()?;

    let labels = match args.labels {
        Some(text) => Some(text.split(',').map(|s| s.trim().to_string()).collect()),
        None => file.labels.clone(),
    };
    let options = ReportOptions {
        threshold: args.threshold.or(file.threshold),
        labels,
        optimist_class: args.optimist_class.or(file.optimist_class),
        pessimist_class: args.pessimist_class.or(file.pessimist_class),
    };
    let report = build_report(&params, &schema, &options)?;

    let json_path = sibling(&out, "json");
    write_text(&json_path, &report.to_json())?;
    println!("wrote {}", json_path.display());

    let ext = file_extension(delimiter);
    let profiles_path = sibling(&out, &format!("profiles.{ext}"));
    write_text(&profiles_path, &report.profile_table(delimiter))?;
    println!("wrote {}", profiles_path.display());

    match report.bias_table(delimiter) {
        Some(table) => {
            let bias_path = sibling(&out, &format!("bias.{ext}"));
            write_text(&bias_path, &table)?;
            println!("wrote {}", bias_path.display());
            let designation = report.designation.expect("bias table implies designation");
            println!(
                "designated optimist class = {}, pessimist class = {}",
                designation.optimist_class, designation.pessimist_class
            );
        }
        None => {
            eprintln!("no bias designation (single class or inseparable); profile-only report");
        }
    }
    Ok(())
}

fn sibling(stem: &Path, suffix: &str) -> PathBuf {
    stem.with_file_name(format!(
        "{}.{suffix}",
        stem.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ))
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let delimiter = resolve_delimiter(args.common.delimiter.as_deref(), file.delimiter.as_deref())?;
    let truth_path = require(args.truth.or(file.truth.clone()), "truth")?;
    let schema_path = require(args.schema.or(file.schema.clone()), "schema")?;
    let n = require(args.n.or(file.n), "n")?;
    let out = require(args.out.or(file.out.clone()), "out")?;
    let (seed, generated) = resolve_seed(args.seed, file.seed)?;

    println!("seed = {seed}{}", if generated { " (generated)" } else { "" });
    let schema = load_schema(&schema_path)?;
    let document = ModelDocument::from_path(&truth_path)
        .with_context(|| format!("loading truth {}", truth_path.display()))?;
    let params = document.parameters()?;

    let dataset = lca_core::sample_dataset(&params, &schema, n, seed)?;
    write_text(&out, &lca_core::write_responses(&dataset.responses, delimiter))?;
    println!("wrote {}", out.display());

    let truth = TruthDocument::new(&dataset.true_params, &dataset.true_classes, seed);
    let sidecar = out.with_file_name(format!(
        "{}.truth.json",
        out.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    write_text(&sidecar, &truth.to_json())?;
    println!("wrote {}", sidecar.display());
    Ok(())
}
