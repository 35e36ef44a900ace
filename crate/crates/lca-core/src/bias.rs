//! Class characterization and extreme-response-bias reporting.
//!
//! All class and outcome indices on these report types are 1-based, the
//! convention used by every external surface. The report header string
//! spells out the implemented definitions:
//!
//! * extreme false negative per indicator: the optimist class's conditional
//!   probability of the extreme "deteriorate" outcome;
//! * extreme false positive per indicator: the pessimist class's conditional
//!   probability of the extreme "improve" outcome;
//! * consistent classification per indicator: the share-weighted modal
//!   conditional probability, summed over classes;
//! * misclassification per indicator: the share-weighted sum, over the two
//!   designated bias classes, of the extreme-outcome probability that
//!   contradicts the class's sentiment.

use crate::error::{LcaError, Result};
use crate::params::LcaParameters;
use crate::schema::SurveySchema;
use serde::{Deserialize, Serialize};

/// Dominance threshold used to call out a class's characteristic outcomes.
pub const DEFAULT_DOMINANCE_THRESHOLD: f64 = 0.70;

const DEFINITIONS: &str = "extreme_false_negative[j] = pi[optimist][j][extreme_positive]; \
extreme_false_positive[j] = pi[pessimist][j][extreme_negative]; \
consistent_classification[j] = sum_r share[r] * max_k pi[r][j][k]; \
misclassification[j] = share[optimist] * pi[optimist][j][extreme_positive] + \
share[pessimist] * pi[pessimist][j][extreme_negative]";

/// Summary of one fitted class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    /// 1-based class index.
    pub class_index: usize,
    pub share: f64,
    /// User-assigned display name; never interpreted by the engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Per indicator: the 1-based outcome whose conditional probability
    /// exceeds the threshold, if any.
    pub dominant_outcomes: Vec<Option<usize>>,
}

/// The two classes read as uniform response styles (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasDesignation {
    pub optimist_class: usize,
    pub pessimist_class: usize,
}

/// Per-indicator extreme-response probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeBiasProbabilities {
    pub false_negative: Vec<f64>,
    pub false_positive: Vec<f64>,
}

/// Per-indicator consistency summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyProbabilities {
    pub consistent: Vec<f64>,
    pub misclassified: Vec<f64>,
}

/// Full bias report: profiles, designation, per-indicator probabilities,
/// and the conditional-probability matrix (indicator x class x outcome)
/// the delimited tables are rendered from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub definitions: String,
    pub threshold: f64,
    pub indicators: Vec<String>,
    pub outcome_labels: Vec<Vec<String>>,
    /// 1-based extreme outcome per indicator, copied from the schema.
    pub extreme_positive_outcomes: Vec<usize>,
    pub extreme_negative_outcomes: Vec<usize>,
    pub class_shares: Vec<f64>,
    pub profiles: Vec<ClassProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designation: Option<BiasDesignation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extreme_false_negative: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extreme_false_positive: Option<Vec<f64>>,
    pub consistent_classification: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub misclassification: Option<Vec<f64>>,
    /// indicator x class x outcome.
    pub conditionals: Vec<Vec<Vec<f64>>>,
}

/// Options controlling `build_report`.
#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Dominance threshold; defaults to [`DEFAULT_DOMINANCE_THRESHOLD`].
    pub threshold: Option<f64>,
    /// Class display names, in class order.
    pub labels: Option<Vec<String>>,
    /// 1-based designation overrides.
    pub optimist_class: Option<usize>,
    pub pessimist_class: Option<usize>,
}

/// One profile per class: share plus the outcomes whose conditional
/// probability strictly exceeds the threshold.
pub fn characterize_classes(params: &LcaParameters, threshold: f64) -> Vec<ClassProfile> {
    (0..params.n_classes())
        .map(|r| ClassProfile {
            class_index: r + 1,
            share: params.class_shares()[r],
            label: None,
            dominant_outcomes: (0..params.n_indicators())
                .map(|j| {
                    let vector = params.conditional(r, j);
                    let k = argmax(vector);
                    (vector[k] > threshold).then_some(k + 1)
                })
                .collect(),
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Mean over indicators of the class's mass on the extreme "deteriorate"
/// outcome; the maximizing class is the pessimist candidate.
fn pessimist_metric(params: &LcaParameters, schema: &SurveySchema, class: usize) -> f64 {
    let j = params.n_indicators();
    (0..j)
        .map(|jj| params.conditional(class, jj)[schema.indicators[jj].extreme_positive_idx()])
        .sum::<f64>()
        / j as f64
}

/// Mean over indicators of the class's mass on the "improve"-leaning
/// outcomes; the maximizing class is the optimist candidate.
fn optimist_metric(params: &LcaParameters, schema: &SurveySchema, class: usize) -> f64 {
    let j = params.n_indicators();
    (0..j)
        .map(|jj| {
            schema.indicators[jj]
                .optimistic_outcome_idxs()
                .iter()
                .map(|&k| params.conditional(class, jj)[k])
                .sum::<f64>()
        })
        .sum::<f64>()
        / j as f64
}

fn best_class(metric: impl Fn(usize) -> f64, n_classes: usize) -> usize {
    let mut best = 0usize;
    let mut best_value = metric(0);
    for r in 1..n_classes {
        let value = metric(r);
        if value > best_value {
            best = r;
            best_value = value;
        }
    }
    best
}

/// Automatic designation by mean extreme-outcome mass; ties go to the
/// lowest class index.
pub fn designate_bias_classes(
    params: &LcaParameters,
    schema: &SurveySchema,
) -> Result<BiasDesignation> {
    params.check_schema(&schema.category_counts())?;
    if params.n_classes() < 2 {
        return Err(LcaError::InvalidArgument(
            "bias designation needs at least 2 classes".into(),
        ));
    }
    let optimist = best_class(|r| optimist_metric(params, schema, r), params.n_classes());
    let pessimist = best_class(|r| pessimist_metric(params, schema, r), params.n_classes());
    if optimist == pessimist {
        return Err(LcaError::BiasClassesNotSeparable { class: optimist + 1 });
    }
    Ok(BiasDesignation { optimist_class: optimist + 1, pessimist_class: pessimist + 1 })
}

/// Per-indicator extreme false-negative and false-positive probabilities
/// for the designated classes.
pub fn extreme_bias_probabilities(
    params: &LcaParameters,
    schema: &SurveySchema,
    designation: BiasDesignation,
) -> Result<ExtremeBiasProbabilities> {
    params.check_schema(&schema.category_counts())?;
    check_designation(params, designation)?;
    let opt = designation.optimist_class - 1;
    let pess = designation.pessimist_class - 1;
    let mut false_negative = Vec::with_capacity(params.n_indicators());
    let mut false_positive = Vec::with_capacity(params.n_indicators());
    for (j, ind) in schema.indicators.iter().enumerate() {
        false_negative.push(params.conditional(opt, j)[ind.extreme_positive_idx()]);
        false_positive.push(params.conditional(pess, j)[ind.extreme_negative_idx()]);
    }
    Ok(ExtremeBiasProbabilities { false_negative, false_positive })
}

/// Share-weighted modal agreement and extreme-contradiction sums.
pub fn consistency_probabilities(
    params: &LcaParameters,
    schema: &SurveySchema,
    designation: BiasDesignation,
) -> Result<ConsistencyProbabilities> {
    params.check_schema(&schema.category_counts())?;
    check_designation(params, designation)?;
    let shares = params.class_shares();
    let opt = designation.optimist_class - 1;
    let pess = designation.pessimist_class - 1;
    let mut consistent = Vec::with_capacity(params.n_indicators());
    let mut misclassified = Vec::with_capacity(params.n_indicators());
    for (j, ind) in schema.indicators.iter().enumerate() {
        let agree: f64 = (0..params.n_classes())
            .map(|r| {
                let vector = params.conditional(r, j);
                shares[r] * vector[argmax(vector)]
            })
            .sum();
        consistent.push(agree);
        misclassified.push(
            shares[opt] * params.conditional(opt, j)[ind.extreme_positive_idx()]
                + shares[pess] * params.conditional(pess, j)[ind.extreme_negative_idx()],
        );
    }
    Ok(ConsistencyProbabilities { consistent, misclassified })
}

fn check_designation(params: &LcaParameters, designation: BiasDesignation) -> Result<()> {
    for class in [designation.optimist_class, designation.pessimist_class] {
        if class == 0 || class > params.n_classes() {
            return Err(LcaError::InvalidArgument(format!(
                "designated class {class} outside 1..={}",
                params.n_classes()
            )));
        }
    }
    if designation.optimist_class == designation.pessimist_class {
        return Err(LcaError::InvalidArgument(
            "optimist and pessimist designations coincide".into(),
        ));
    }
    Ok(())
}

/// Resolve the designation for a report: overrides win; automatic
/// designation applies when classes allow it; a degenerate automatic
/// designation yields no designation rather than an error.
fn resolve_designation(
    params: &LcaParameters,
    schema: &SurveySchema,
    options: &ReportOptions,
) -> Result<Option<BiasDesignation>> {
    let overridden = options.optimist_class.is_some() || options.pessimist_class.is_some();
    if params.n_classes() < 2 {
        if overridden {
            return Err(LcaError::InvalidArgument(
                "designation overrides need at least 2 classes".into(),
            ));
        }
        return Ok(None);
    }
    let optimist = match options.optimist_class {
        Some(c) => c,
        None => best_class(|r| optimist_metric(params, schema, r), params.n_classes()) + 1,
    };
    let pessimist = match options.pessimist_class {
        Some(c) => c,
        None => best_class(|r| pessimist_metric(params, schema, r), params.n_classes()) + 1,
    };
    let designation = BiasDesignation { optimist_class: optimist, pessimist_class: pessimist };
    match check_designation(params, designation) {
        Ok(()) => Ok(Some(designation)),
        Err(err) if overridden => Err(err),
        Err(_) => Ok(None),
    }
}

/// Assemble the full report from fitted (or injected) parameters.
pub fn build_report(
    params: &LcaParameters,
    schema: &SurveySchema,
    options: &ReportOptions,
) -> Result<BiasReport> {
    params.check_schema(&schema.category_counts())?;
    let threshold = options.threshold.unwrap_or(DEFAULT_DOMINANCE_THRESHOLD);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(LcaError::InvalidArgument(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    if let Some(labels) = &options.labels {
        if labels.len() != params.n_classes() {
            return Err(LcaError::InvalidArgument(format!(
                "{} labels for {} classes",
                labels.len(),
                params.n_classes()
            )));
        }
    }

    let mut profiles = characterize_classes(params, threshold);
    if let Some(labels) = &options.labels {
        for (profile, label) in profiles.iter_mut().zip(labels) {
            profile.label = Some(label.clone());
        }
    }

    let designation = resolve_designation(params, schema, options)?;
    let (extreme, misclassification) = match designation {
        Some(d) => {
            let extreme = extreme_bias_probabilities(params, schema, d)?;
            let consistency = consistency_probabilities(params, schema, d)?;
            (Some(extreme), Some(consistency.misclassified))
        }
        None => (None, None),
    };
    let consistent_classification = (0..params.n_indicators())
        .map(|j| {
            (0..params.n_classes())
                .map(|r| {
                    let vector = params.conditional(r, j);
                    params.class_shares()[r] * vector[argmax(vector)]
                })
                .sum()
        })
        .collect();

    // indicator x class x outcome, the shape the tables are printed in
    let conditionals = (0..params.n_indicators())
        .map(|j| {
            (0..params.n_classes())
                .map(|r| params.conditional(r, j).to_vec())
                .collect()
        })
        .collect();

    Ok(BiasReport {
        definitions: DEFINITIONS.to_string(),
        threshold,
        indicators: schema.indicators.iter().map(|i| i.name.clone()).collect(),
        outcome_labels: schema.indicators.iter().map(|i| i.outcomes.clone()).collect(),
        extreme_positive_outcomes: schema
            .indicators
            .iter()
            .map(|i| i.extreme_positive_outcome)
            .collect(),
        extreme_negative_outcomes: schema
            .indicators
            .iter()
            .map(|i| i.extreme_negative_outcome)
            .collect(),
        class_shares: params.class_shares().to_vec(),
        profiles,
        designation,
        extreme_false_negative: extreme.as_ref().map(|e| e.false_negative.clone()),
        extreme_false_positive: extreme.as_ref().map(|e| e.false_positive.clone()),
        consistent_classification,
        misclassification,
        conditionals,
    })
}

impl BiasReport {
    pub fn n_classes(&self) -> usize {
        self.class_shares.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Conditional-probability matrix as a delimited table: one row per
    /// (indicator, outcome), one column per class. Dominant entries carry
    /// a `+` suffix; the extreme false-negative cells are starred `**` and
    /// the extreme false-positive cells `*`.
    pub fn profile_table(&self, delimiter: char) -> String {
        let d = delimiter.to_string();
        let mut header = vec!["indicator".to_string(), "outcome".to_string()];
        header.extend((1..=self.n_classes()).map(|r| format!("class_{r}")));
        let mut out = header.join(&d);
        out.push('\n');
        for (j, name) in self.indicators.iter().enumerate() {
            let k_j = self.outcome_labels[j].len();
            for k in 0..k_j {
                let mut row = vec![name.clone(), (k + 1).to_string()];
                for r in 0..self.n_classes() {
                    let value = self.conditionals[j][r][k];
                    let mut cell = format!("{value:.6}");
                    if value > self.threshold {
                        cell.push('+');
                    }
                    if let Some(designation) = self.designation {
                        let starred_fn = r + 1 == designation.optimist_class
                            && self.is_extreme_positive(j, k);
                        let starred_fp = r + 1 == designation.pessimist_class
                            && self.is_extreme_negative(j, k);
                        if starred_fn {
                            cell.push_str("**");
                        } else if starred_fp {
                            cell.push('*');
                        }
                    }
                    row.push(cell);
                }
                out.push_str(&row.join(&d));
                out.push('\n');
            }
        }
        out
    }

    /// Per-indicator bias and consistency columns, one row per indicator;
    /// `None` when the report has no designation.
    pub fn bias_table(&self, delimiter: char) -> Option<String> {
        self.designation?;
        let fn_col = self.extreme_false_negative.as_ref()?;
        let fp_col = self.extreme_false_positive.as_ref()?;
        let mis_col = self.misclassification.as_ref()?;
        let d = delimiter.to_string();
        let mut out = [
            "indicator",
            "extreme_false_negative",
            "extreme_false_positive",
            "consistent_classification",
            "misclassification",
        ]
        .join(&d);
        out.push('\n');
        for (j, name) in self.indicators.iter().enumerate() {
            out.push_str(
                &[
                    name.clone(),
                    format!("{:.6}", fn_col[j]),
                    format!("{:.6}", fp_col[j]),
                    format!("{:.6}", self.consistent_classification[j]),
                    format!("{:.6}", mis_col[j]),
                ]
                .join(&d),
            );
            out.push('\n');
        }
        Some(out)
    }

    fn is_extreme_positive(&self, indicator: usize, outcome: usize) -> bool {
        self.extreme_positive_outcomes.get(indicator) == Some(&(outcome + 1))
    }

    fn is_extreme_negative(&self, indicator: usize, outcome: usize) -> bool {
        self.extreme_negative_outcomes.get(indicator) == Some(&(outcome + 1))
    }
}
