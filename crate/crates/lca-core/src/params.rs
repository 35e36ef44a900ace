//! Mixture parameters and EM configuration.

use crate::error::{LcaError, Result};
use serde::{Deserialize, Serialize};

/// Probability-vector tolerance for the strict constructor.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Slack allowed when loading externally produced (e.g. print-rounded)
/// probability vectors before renormalizing.
const ROUNDED_SUM_SLACK: f64 = 0.02;

/// Class shares p_r and class-conditional outcome probabilities.
///
/// `conditionals[r][j][k]` is the probability that a member of class `r`
/// gives outcome `k` (0-based) on indicator `j`. Classes keep the order
/// they were constructed with; see [`canonical_order`] for the
/// label-switching-stable ordering used on fit output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcaParameters {
    class_shares: Vec<f64>,
    conditionals: Vec<Vec<Vec<f64>>>,
}

impl LcaParameters {
    /// Strict constructor: every vector must already sum to 1 within 1e-12.
    pub fn new(class_shares: Vec<f64>, conditionals: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let params = Self { class_shares, conditionals };
        params.validate()?;
        Ok(params)
    }

    /// Lenient constructor for vectors rounded at print precision: accepts
    /// sums within 2% of 1 and renormalizes each vector exactly.
    pub fn from_rounded(
        mut class_shares: Vec<f64>,
        mut conditionals: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        renormalize("class shares", &mut class_shares)?;
        for (r, class) in conditionals.iter_mut().enumerate() {
            for (j, vector) in class.iter_mut().enumerate() {
                renormalize(&format!("conditionals[class {}][indicator {}]", r + 1, j + 1), vector)?;
            }
        }
        Self::new(class_shares, conditionals)
    }

    fn validate(&self) -> Result<()> {
        let r = self.class_shares.len();
        if r == 0 {
            return Err(LcaError::InvalidParameters("no classes".into()));
        }
        if self.conditionals.len() != r {
            return Err(LcaError::InvalidParameters(format!(
                "{} classes in shares but {} in conditionals",
                r,
                self.conditionals.len()
            )));
        }
        check_probability_vector("class shares", &self.class_shares)?;
        let j = self.conditionals[0].len();
        if j == 0 {
            return Err(LcaError::InvalidParameters("no indicators".into()));
        }
        for (class, per_class) in self.conditionals.iter().enumerate() {
            if per_class.len() != j {
                return Err(LcaError::InvalidParameters(format!(
                    "class {} has {} indicators, expected {}",
                    class + 1,
                    per_class.len(),
                    j
                )));
            }
            for (ind, vector) in per_class.iter().enumerate() {
                if vector.len() != self.conditionals[0][ind].len() {
                    return Err(LcaError::InvalidParameters(format!(
                        "class {} indicator {} has {} outcomes, class 1 has {}",
                        class + 1,
                        ind + 1,
                        vector.len(),
                        self.conditionals[0][ind].len()
                    )));
                }
                check_probability_vector(
                    &format!("conditionals[class {}][indicator {}]", class + 1, ind + 1),
                    vector,
                )?;
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.class_shares.len()
    }

    pub fn n_indicators(&self) -> usize {
        self.conditionals[0].len()
    }

    /// K_j implied by the conditional vectors.
    pub fn category_counts(&self) -> Vec<usize> {
        self.conditionals[0].iter().map(|v| v.len()).collect()
    }

    pub fn class_shares(&self) -> &[f64] {
        &self.class_shares
    }

    pub fn conditionals(&self) -> &[Vec<Vec<f64>>] {
        &self.conditionals
    }

    /// Conditional outcome vector for (class, indicator).
    pub fn conditional(&self, class: usize, indicator: usize) -> &[f64] {
        &self.conditionals[class][indicator]
    }

    /// Reorder classes by an explicit permutation: entry `i` of the result
    /// is class `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_classes() {
            return Err(LcaError::ShapeMismatch(format!(
                "permutation of length {} applied to {} classes",
                perm.len(),
                self.n_classes()
            )));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || seen[p] {
                return Err(LcaError::InvalidArgument("not a permutation".into()));
            }
            seen[p] = true;
        }
        Ok(Self {
            class_shares: perm.iter().map(|&p| self.class_shares[p]).collect(),
            conditionals: perm.iter().map(|&p| self.conditionals[p].clone()).collect(),
        })
    }

    /// Shape check against a schema's (J, K_j).
    pub fn check_schema(&self, counts: &[usize]) -> Result<()> {
        if self.category_counts() != counts {
            return Err(LcaError::ShapeMismatch(format!(
                "parameters expect category counts {:?}, schema has {:?}",
                self.category_counts(),
                counts
            )));
        }
        Ok(())
    }
}

fn check_probability_vector(what: &str, v: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &x in v {
        if !x.is_finite() || x < 0.0 {
            return Err(LcaError::InvalidParameters(format!(
                "{what}: entry {x} is not a probability"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(LcaError::InvalidParameters(format!(
            "{what}: sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn renormalize(what: &str, v: &mut [f64]) -> Result<()> {
    let mut sum = 0.0;
    for &x in v.iter() {
        if !x.is_finite() || x < 0.0 {
            return Err(LcaError::InvalidParameters(format!(
                "{what}: entry {x} is not a probability"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > ROUNDED_SUM_SLACK {
        return Err(LcaError::InvalidParameters(format!(
            "{what}: sums to {sum}, too far from 1 to renormalize"
        )));
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        for x in v.iter_mut() {
            *x /= sum;
        }
    }
    Ok(())
}

/// Permute classes into the canonical order: descending class share, ties
/// broken by lexicographically ascending flattened conditionals. Pure
/// relabeling; densities are unchanged.
pub fn canonical_order(params: &LcaParameters) -> LcaParameters {
    let r = params.n_classes();
    let flat: Vec<Vec<f64>> = (0..r)
        .map(|c| params.conditionals()[c].iter().flatten().copied().collect())
        .collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        params.class_shares()[b]
            .total_cmp(&params.class_shares()[a])
            .then_with(|| {
                for (x, y) in flat[a].iter().zip(flat[b].iter()) {
                    match x.total_cmp(y) {
                        std::cmp::Ordering::Equal => continue,
                        other => return other,
                    }
                }
                std::cmp::Ordering::Equal
            })
    });
    params.permuted(&order).expect("identity-size permutation")
}

/// Knobs for the EM fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    /// Hard cap on EM update steps per restart.
    pub max_iterations: usize,
    /// Convergence threshold on |dLL| / (1 + |LL|).
    pub tolerance: f64,
    /// Independent random restarts.
    pub n_restarts: usize,
    /// Master seed; per-restart streams are derived from it.
    pub seed: u64,
    /// Conditionals are clamped to at least this after every M-step.
    pub probability_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-10,
            n_restarts: 10,
            seed: 0,
            probability_floor: 1e-12,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(LcaError::InvalidArgument("max_iterations must be positive".into()));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(LcaError::InvalidArgument("tolerance must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(LcaError::InvalidArgument("n_restarts must be positive".into()));
        }
        if !self.probability_floor.is_finite() || self.probability_floor <= 0.0 {
            return Err(LcaError::InvalidArgument("probability_floor must be positive".into()));
        }
        Ok(())
    }
}
