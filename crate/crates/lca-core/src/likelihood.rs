//! Density, log-likelihood, and posterior computations for the latent
//! class model.
//!
//! Per-row work runs in the log domain: with J indicators the per-class
//! joint density is a product of J probabilities, which underflows quickly
//! in linear space. `joint_class_density` and `mixture_density` keep the
//! plain product form for direct evaluation of single rows.

use crate::data::ResponseMatrix;
use crate::error::{LcaError, Result};
use crate::params::LcaParameters;

/// Probability that one complete response row is produced by a single
/// class with the given per-indicator outcome vectors.
pub fn joint_class_density(row: &[usize], class_conditionals: &[Vec<f64>]) -> f64 {
    row.iter()
        .zip(class_conditionals)
        .map(|(&code, vector)| vector[code])
        .product()
}

/// Share-weighted mixture density of one complete response row.
pub fn mixture_density(row: &[usize], params: &LcaParameters) -> f64 {
    params
        .class_shares()
        .iter()
        .zip(params.conditionals())
        .map(|(&share, cond)| share * joint_class_density(row, cond))
        .sum()
}

/// Log-space view of the parameters, shared by the likelihood, posterior,
/// and EM paths. Conditionals are flattened per class with per-indicator
/// offsets so a row evaluation is J indexed adds.
pub(crate) struct LogModel {
    pub n_classes: usize,
    pub offsets: Vec<usize>,
    pub ln_shares: Vec<f64>,
    /// Per class: ln pi over the flattened outcome axis (length sum K_j).
    pub ln_cond: Vec<Vec<f64>>,
}

impl LogModel {
    pub fn new(params: &LcaParameters) -> Self {
        let counts = params.category_counts();
        let mut offsets = Vec::with_capacity(counts.len());
        let mut total = 0usize;
        for &k in &counts {
            offsets.push(total);
            total += k;
        }
        let ln_shares = params.class_shares().iter().map(|&p| p.ln()).collect();
        let ln_cond = params
            .conditionals()
            .iter()
            .map(|per_class| {
                per_class
                    .iter()
                    .flat_map(|v| v.iter().map(|&p| p.ln()))
                    .collect()
            })
            .collect();
        Self { n_classes: params.n_classes(), offsets, ln_shares, ln_cond }
    }

    /// ln(share_r * f(row | class r)) for every class, into `scores`.
    #[inline]
    pub fn class_scores(&self, flat_codes: &[usize], scores: &mut [f64]) {
        for (r, score) in scores.iter_mut().enumerate() {
            let ln_cond = &self.ln_cond[r];
            let mut s = self.ln_shares[r];
            for &idx in flat_codes {
                s += ln_cond[idx];
            }
            *score = s;
        }
    }
}

/// Row codes with the per-indicator flattening offsets pre-applied.
pub(crate) fn flatten_codes(data: &ResponseMatrix, offsets: &[usize]) -> Vec<usize> {
    let j = data.n_indicators();
    let mut flat = Vec::with_capacity(data.n_rows() * j);
    for i in 0..data.n_rows() {
        for (jj, &code) in data.raw_row(i).iter().enumerate() {
            flat.push(offsets[jj] + code as usize);
        }
    }
    flat
}

#[inline]
fn log_sum_exp(scores: &[f64]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
    max + sum.ln()
}

fn check_shapes(data: &ResponseMatrix, params: &LcaParameters) -> Result<()> {
    data.require_complete()?;
    params.check_schema(&data.schema().category_counts())
}

/// Sum over rows of ln mixture_density, accumulated in the log domain.
pub fn log_likelihood(data: &ResponseMatrix, params: &LcaParameters) -> Result<f64> {
    check_shapes(data, params)?;
    let model = LogModel::new(params);
    let flat = flatten_codes(data, &model.offsets);
    let j = data.n_indicators();
    let mut scores = vec![0.0; model.n_classes];
    let mut total = 0.0;
    for i in 0..data.n_rows() {
        model.class_scores(&flat[i * j..(i + 1) * j], &mut scores);
        let ln_density = log_sum_exp(&scores);
        if ln_density == f64::NEG_INFINITY {
            return Err(LcaError::ImpossibleObservation { row: i + 1 });
        }
        total += ln_density;
    }
    Ok(total)
}

/// Posterior class-membership matrix: entry (i, r) is the probability that
/// row i belongs to class r given its responses. Rows sum to 1.
pub fn posterior(data: &ResponseMatrix, params: &LcaParameters) -> Result<Vec<Vec<f64>>> {
    check_shapes(data, params)?;
    let model = LogModel::new(params);
    let flat = flatten_codes(data, &model.offsets);
    let j = data.n_indicators();
    let mut scores = vec![0.0; model.n_classes];
    let mut out = Vec::with_capacity(data.n_rows());
    for i in 0..data.n_rows() {
        model.class_scores(&flat[i * j..(i + 1) * j], &mut scores);
        out.push(normalized_posterior_row(&scores, i)?);
    }
    Ok(out)
}

#[inline]
pub(crate) fn normalized_posterior_row(scores: &[f64], row: usize) -> Result<Vec<f64>> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(LcaError::ImpossibleObservation { row: row + 1 });
    }
    let mut row_post: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = row_post.iter().sum();
    for v in &mut row_post {
        *v /= sum;
    }
    Ok(row_post)
}

/// Modal assignment per row; ties go to the lowest class index.
pub fn modal_classes(posterior: &[Vec<f64>]) -> Vec<usize> {
    posterior
        .iter()
        .map(|row| {
            let mut best = 0usize;
            for (r, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = r;
                }
            }
            best
        })
        .collect()
}
