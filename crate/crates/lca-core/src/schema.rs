//! Survey schema: the list of categorical indicators, their outcome labels,
//! and which outcomes count as the extreme answers for bias reporting.
//!
//! Outcome indices are 1-based on every external surface (schema files,
//! data files, reports); accessor methods ending in `_idx` return the
//! 0-based positions used internally.

use crate::error::{LcaError, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

/// One categorical survey question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicator {
    /// Column name, matched against the data-file header.
    pub name: String,
    /// Optional free-text description (not used by the engine).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Ordered outcome labels; the number of categories is their count.
    pub outcomes: Vec<String>,
    /// 1-based outcome signalling the extreme "deteriorate" answer.
    pub extreme_positive_outcome: usize,
    /// 1-based outcome signalling the extreme "improve" answer.
    pub extreme_negative_outcome: usize,
}

impl Indicator {
    /// Number of outcome categories K_j.
    pub fn n_categories(&self) -> usize {
        self.outcomes.len()
    }

    /// 0-based index of the extreme "deteriorate" outcome.
    pub fn extreme_positive_idx(&self) -> usize {
        self.extreme_positive_outcome - 1
    }

    /// 0-based index of the extreme "improve" outcome.
    pub fn extreme_negative_idx(&self) -> usize {
        self.extreme_negative_outcome - 1
    }

    /// 0-based outcomes counted as "improve"-leaning when scoring optimism:
    /// the extreme negative outcome plus its neighbour one step toward the
    /// extreme positive outcome (when that neighbour is not the extreme
    /// positive outcome itself).
    pub fn optimistic_outcome_idxs(&self) -> Vec<usize> {
        let eno = self.extreme_negative_idx();
        let epo = self.extreme_positive_idx();
        let mut set = vec![eno];
        let neighbour = if epo < eno { eno.checked_sub(1) } else { eno.checked_add(1) };
        if let Some(k) = neighbour {
            if k < self.n_categories() && k != epo {
                set.push(k);
            }
        }
        set.sort_unstable();
        set
    }

    fn validate(&self) -> Result<()> {
        let k = self.n_categories();
        if k < 2 {
            return Err(LcaError::InvalidSchema(format!(
                "indicator '{}' has {} outcomes; at least 2 required",
                self.name, k
            )));
        }
        for bound in [self.extreme_positive_outcome, self.extreme_negative_outcome] {
            if bound == 0 || bound > k {
                return Err(LcaError::InvalidSchema(format!(
                    "indicator '{}': extreme outcome {} outside 1..={}",
                    self.name, bound, k
                )));
            }
        }
        if self.extreme_positive_outcome == self.extreme_negative_outcome {
            return Err(LcaError::InvalidSchema(format!(
                "indicator '{}': extreme positive and negative outcomes coincide",
                self.name
            )));
        }
        let mut seen = HashSet::new();
        for label in &self.outcomes {
            if label.trim().is_empty() {
                return Err(LcaError::InvalidSchema(format!(
                    "indicator '{}' has an empty outcome label",
                    self.name
                )));
            }
            if label.trim().parse::<i64>().is_ok() {
                return Err(LcaError::InvalidSchema(format!(
                    "indicator '{}': outcome label '{}' would be ambiguous with integer codes",
                    self.name, label
                )));
            }
            if !seen.insert(label.trim()) {
                return Err(LcaError::InvalidSchema(format!(
                    "indicator '{}': duplicate outcome label '{}'",
                    self.name, label
                )));
            }
        }
        Ok(())
    }
}

/// Ordered set of indicators defining one survey instrument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveySchema {
    pub indicators: Vec<Indicator>,
}

impl SurveySchema {
    /// Build a schema, checking every invariant.
    pub fn new(indicators: Vec<Indicator>) -> Result<Self> {
        if indicators.is_empty() {
            return Err(LcaError::InvalidSchema("no indicators".into()));
        }
        let mut names = HashSet::new();
        for ind in &indicators {
            ind.validate()?;
            if !names.insert(ind.name.as_str()) {
                return Err(LcaError::InvalidSchema(format!(
                    "duplicate indicator name '{}'",
                    ind.name
                )));
            }
        }
        Ok(Self { indicators })
    }

    pub fn n_indicators(&self) -> usize {
        self.indicators.len()
    }

    /// K_j for each indicator, in order.
    pub fn category_counts(&self) -> Vec<usize> {
        self.indicators.iter().map(|i| i.n_categories()).collect()
    }

    /// Number of cells in the full cross-classification table, saturating.
    pub fn n_cells(&self) -> u128 {
        self.indicators
            .iter()
            .fold(1u128, |acc, i| acc.saturating_mul(i.n_categories() as u128))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: SurveySchema = serde_json::from_str(text)?;
        Self::new(parsed.indicators)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}
