//! On-disk JSON documents: fitted models and synthetic-truth sidecars.
//!
//! A model document written by a fit carries the full field set; hand-built
//! documents (for example probability tables transcribed from a published
//! analysis) may omit everything except `r`, `class_shares`, and
//! `conditionals`. Probability vectors are renormalized on load when they
//! only sum to 1 at print precision.

use crate::em::FitResult;
use crate::error::Result;
use crate::params::LcaParameters;
use crate::selection::information_criteria;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Serialized form of a fitted latent class model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    /// Number of classes.
    pub r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_params: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bic: Option<f64>,
    pub class_shares: Vec<f64>,
    /// Nested class -> indicator -> outcome probabilities.
    pub conditionals: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations_used: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ModelDocument {
    /// Document for a completed fit; `n` is the fitted sample size.
    pub fn from_fit(fit: &FitResult, n: usize) -> Self {
        let (aic, bic) = information_criteria(fit.log_likelihood, fit.n_params, n as f64);
        Self {
            r: fit.parameters.n_classes(),
            log_likelihood: Some(fit.log_likelihood),
            n_params: Some(fit.n_params),
            aic: Some(aic),
            bic: Some(bic),
            class_shares: fit.parameters.class_shares().to_vec(),
            conditionals: fit.parameters.conditionals().to_vec(),
            converged: Some(fit.converged),
            iterations_used: Some(fit.iterations_used),
            seed: Some(fit.seed),
        }
    }

    /// Parameters carried by the document, renormalized if print-rounded.
    pub fn parameters(&self) -> Result<LcaParameters> {
        if self.class_shares.len() != self.r {
            return Err(crate::error::LcaError::InvalidParameters(format!(
                "document declares r = {} but has {} class shares",
                self.r,
                self.class_shares.len()
            )));
        }
        LcaParameters::from_rounded(self.class_shares.clone(), self.conditionals.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Sidecar describing how a synthetic dataset was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub seed: u64,
    pub class_shares: Vec<f64>,
    pub conditionals: Vec<Vec<Vec<f64>>>,
    /// 1-based generating class per data row.
    pub true_classes: Vec<usize>,
}

impl TruthDocument {
    pub fn new(params: &LcaParameters, true_classes_zero_based: &[usize], seed: u64) -> Self {
        Self {
            seed,
            class_shares: params.class_shares().to_vec(),
            conditionals: params.conditionals().to_vec(),
            true_classes: true_classes_zero_based.iter().map(|&c| c + 1).collect(),
        }
    }

    pub fn parameters(&self) -> Result<LcaParameters> {
        LcaParameters::from_rounded(self.class_shares.clone(), self.conditionals.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("truth document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
