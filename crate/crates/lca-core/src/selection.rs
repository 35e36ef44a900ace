//! Parameter counting, identifiability bounds, information criteria, and
//! the sweep over candidate class counts.

use crate::data::ResponseMatrix;
use crate::em::{fit_em, FitResult};
use crate::error::{LcaError, Result};
use crate::params::EmConfig;
use crate::schema::SurveySchema;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Free parameters of an R-class model: R * sum_j (K_j - 1) + (R - 1).
pub fn count_parameters(n_classes: usize, schema: &SurveySchema) -> usize {
    let per_class: usize = schema.category_counts().iter().map(|&k| k - 1).sum();
    n_classes * per_class + (n_classes - 1)
}

/// Result of the identifiability bounds check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Identifiability {
    Pass,
    Fail { reason: String },
}

impl Identifiability {
    pub fn passed(&self) -> bool {
        matches!(self, Identifiability::Pass)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Identifiability::Pass => Ok(()),
            Identifiability::Fail { reason } => Err(LcaError::Unidentifiable(reason)),
        }
    }
}

/// The parameter count may exceed neither the sample size nor the number
/// of cross-classification cells minus one.
pub fn identifiability_check(
    n_classes: usize,
    schema: &SurveySchema,
    n: usize,
) -> Identifiability {
    let p = count_parameters(n_classes, schema);
    let cell_bound = schema.n_cells().saturating_sub(1);
    let mut reasons = Vec::new();
    if p as u128 > n as u128 {
        reasons.push(format!("{p} parameters exceed the sample size {n}"));
    }
    if p as u128 > cell_bound {
        reasons.push(format!(
            "{p} parameters exceed the cell bound {cell_bound} (cells - 1)"
        ));
    }
    if reasons.is_empty() {
        Identifiability::Pass
    } else {
        Identifiability::Fail { reason: reasons.join("; ") }
    }
}

/// AIC and BIC in the penalized-deviance form:
/// AIC = -2 LL + 2 p, BIC = -2 LL + p ln(n).
///
/// `n` is real-valued so the criteria stay defined for algebraic checks;
/// callers pass the sample size.
pub fn information_criteria(log_likelihood: f64, n_params: usize, n: f64) -> (f64, f64) {
    let deviance = -2.0 * log_likelihood;
    let p = n_params as f64;
    (deviance + 2.0 * p, deviance + p * n.ln())
}

/// Which criterion drives selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    pub fn value(&self, record: &SweepRecord) -> f64 {
        match self {
            Criterion::Aic => record.aic,
            Criterion::Bic => record.bic,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Aic => write!(f, "AIC"),
            Criterion::Bic => write!(f, "BIC"),
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = LcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            other => Err(LcaError::InvalidArgument(format!(
                "unknown criterion '{other}' (expected AIC or BIC)"
            ))),
        }
    }
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n_classes: usize,
    pub n_params: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
}

impl SweepRecord {
    pub fn from_fit(log_likelihood: f64, n_params: usize, n: usize, n_classes: usize, converged: bool) -> Self {
        let (aic, bic) = information_criteria(log_likelihood, n_params, n as f64);
        Self { n_classes, n_params, log_likelihood, aic, bic, converged }
    }
}

/// Sweep summary plus the selected class count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub selected_r: usize,
    pub criterion: Criterion,
    /// Fit of the selected class count (dropped in serialized form).
    #[serde(skip)]
    pub selected_fit: Option<FitResult>,
}

impl SweepResult {
    /// Delimited table with the summary columns
    /// (classes, p, log-likelihood, AIC, BIC), one row per candidate.
    pub fn to_delimited_table(&self, delimiter: char) -> String {
        let d = delimiter.to_string();
        let mut out = ["classes", "p", "log_likelihood", "aic", "bic"].join(&d);
        out.push('\n');
        for rec in &self.records {
            out.push_str(
                &[
                    rec.n_classes.to_string(),
                    rec.n_params.to_string(),
                    format!("{:.6}", rec.log_likelihood),
                    format!("{:.6}", rec.aic),
                    format!("{:.6}", rec.bic),
                ]
                .join(&d),
            );
            out.push('\n');
        }
        out
    }
}

/// Pick the class count minimizing the criterion among converged records;
/// ties go to the smaller class count. Non-converged records never win.
pub fn select_best(records: &[SweepRecord], criterion: Criterion) -> Result<usize> {
    let mut best: Option<&SweepRecord> = None;
    for rec in records.iter().filter(|r| r.converged) {
        let better = match best {
            None => true,
            Some(incumbent) => criterion.value(rec) < criterion.value(incumbent),
        };
        if better {
            best = Some(rec);
        }
    }
    best.map(|r| r.n_classes).ok_or(LcaError::NoConvergedFit)
}

/// Fit every class count in `r_range` (inclusive) and select by criterion.
///
/// Candidates may be fitted concurrently; records are merged in ascending
/// class-count order and each fit uses the same master seed, so the result
/// does not depend on scheduling.
pub fn sweep_classes(
    data: &ResponseMatrix,
    r_range: std::ops::RangeInclusive<usize>,
    config: &EmConfig,
    criterion: Criterion,
) -> Result<SweepResult> {
    let candidates: Vec<usize> = r_range.collect();
    if candidates.is_empty() {
        return Err(LcaError::InvalidArgument("empty class-count range".into()));
    }
    for &r in &candidates {
        if r == 0 {
            return Err(LcaError::InvalidArgument("class count must be at least 1".into()));
        }
        identifiability_check(r, data.schema(), data.n_rows())
            .into_result()
            .map_err(|e| LcaError::Unidentifiable(format!("{r} classes: {e}")))?;
    }

    let n = data.n_rows();
    let fits: Vec<Result<FitResult>> = candidates
        .par_iter()
        .map(|&r| fit_em(data, r, config))
        .collect();

    let mut records = Vec::with_capacity(candidates.len());
    let mut fit_by_r = Vec::with_capacity(candidates.len());
    for (r, fit) in candidates.iter().zip(fits) {
        let fit = fit?;
        records.push(SweepRecord::from_fit(fit.log_likelihood, fit.n_params, n, *r, fit.converged));
        fit_by_r.push(fit);
    }
    records.sort_by_key(|rec| rec.n_classes);

    let selected_r = select_best(&records, criterion)?;
    let selected_fit = candidates
        .iter()
        .position(|&r| r == selected_r)
        .map(|idx| fit_by_r.swap_remove(idx));

    Ok(SweepResult { records, selected_r, criterion, selected_fit })
}
