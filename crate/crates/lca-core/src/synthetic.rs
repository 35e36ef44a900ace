//! Dataset generation from known parameters and recovery measurement.
//!
//! Sampling follows the generative reading of the mixture: draw a class
//! from the shares, then each indicator outcome independently from that
//! class's conditional vector. One RNG stream per dataset, row-major, so a
//! (params, n, seed) triple always produces the same data.

use crate::data::ResponseMatrix;
use crate::error::{LcaError, Result};
use crate::params::LcaParameters;
use crate::schema::SurveySchema;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use std::sync::Arc;

/// A generated dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub responses: ResponseMatrix,
    /// 0-based generating class per row.
    pub true_classes: Vec<usize>,
    pub true_params: LcaParameters,
    pub seed: u64,
}

/// Draw `n` rows from the mixture defined by `params`.
pub fn sample_dataset(
    params: &LcaParameters,
    schema: &Arc<SurveySchema>,
    n: usize,
    seed: u64,
) -> Result<SyntheticDataset> {
    params.check_schema(&schema.category_counts())?;
    if n == 0 {
        return Err(LcaError::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut rows: Vec<Vec<Option<usize>>> = Vec::with_capacity(n);
    let mut true_classes = Vec::with_capacity(n);
    for _ in 0..n {
        let class = sample_categorical(params.class_shares(), &mut rng);
        true_classes.push(class);
        rows.push(
            (0..params.n_indicators())
                .map(|j| Some(sample_categorical(params.conditional(class, j), &mut rng)))
                .collect(),
        );
    }
    let responses = ResponseMatrix::from_codes(Arc::clone(schema), &rows)?;
    Ok(SyntheticDataset { responses, true_classes, true_params: params.clone(), seed })
}

fn sample_categorical(probabilities: &[f64], rng: &mut Xoshiro256StarStar) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (k, &p) in probabilities.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return k;
        }
    }
    probabilities.len() - 1
}

/// Total variation distance between two class profiles, summed over
/// indicators.
fn profile_distance(a: &LcaParameters, class_a: usize, b: &LcaParameters, class_b: usize) -> f64 {
    (0..a.n_indicators())
        .map(|j| {
            a.conditional(class_a, j)
                .iter()
                .zip(b.conditional(class_b, j))
                .map(|(x, y)| (x - y).abs())
                .sum::<f64>()
                * 0.5
        })
        .sum()
}

/// Match estimated classes to true classes by minimizing the summed total
/// variation distance between conditional profiles. Returns `perm` with
/// `perm[true_class] = estimated_class`. Exhaustive search up to 8 classes,
/// greedy beyond.
pub fn align_labels(true_params: &LcaParameters, estimated: &LcaParameters) -> Result<Vec<usize>> {
    let r = true_params.n_classes();
    if estimated.n_classes() != r {
        return Err(LcaError::ShapeMismatch(format!(
            "{} true classes vs {} estimated",
            r,
            estimated.n_classes()
        )));
    }
    if true_params.category_counts() != estimated.category_counts() {
        return Err(LcaError::ShapeMismatch(
            "true and estimated parameters have different outcome shapes".into(),
        ));
    }
    let cost: Vec<Vec<f64>> = (0..r)
        .map(|t| (0..r).map(|e| profile_distance(true_params, t, estimated, e)).collect())
        .collect();

    if r <= 8 {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut perm: Vec<usize> = (0..r).collect();
        permute(&mut perm, 0, &mut |candidate| {
            let total: f64 = candidate.iter().enumerate().map(|(t, &e)| cost[t][e]).sum();
            match &best {
                Some((incumbent, _)) if total >= *incumbent => {}
                _ => best = Some((total, candidate.to_vec())),
            }
        });
        Ok(best.expect("at least one permutation").1)
    } else {
        // greedy: repeatedly take the cheapest unmatched (true, estimated) pair
        let mut perm = vec![usize::MAX; r];
        let mut used_true = vec![false; r];
        let mut used_est = vec![false; r];
        for _ in 0..r {
            let mut best = (f64::INFINITY, 0usize, 0usize);
            for t in 0..r {
                if used_true[t] {
                    continue;
                }
                for e in 0..r {
                    if used_est[e] {
                        continue;
                    }
                    if cost[t][e] < best.0 {
                        best = (cost[t][e], t, e);
                    }
                }
            }
            perm[best.1] = best.2;
            used_true[best.1] = true;
            used_est[best.2] = true;
        }
        Ok(perm)
    }
}

fn permute(items: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// Largest absolute error over all conditional cells and over shares,
/// after applying the alignment permutation to the estimate.
pub fn recovery_error(
    true_params: &LcaParameters,
    estimated: &LcaParameters,
    perm: &[usize],
) -> Result<(f64, f64)> {
    if perm.len() != true_params.n_classes() {
        return Err(LcaError::ShapeMismatch("permutation length mismatch".into()));
    }
    let mut conditionals_linf = 0.0f64;
    let mut shares_linf = 0.0f64;
    for (t, &e) in perm.iter().enumerate() {
        shares_linf =
            shares_linf.max((true_params.class_shares()[t] - estimated.class_shares()[e]).abs());
        for j in 0..true_params.n_indicators() {
            for (x, y) in true_params.conditional(t, j).iter().zip(estimated.conditional(e, j)) {
                conditionals_linf = conditionals_linf.max((x - y).abs());
            }
        }
    }
    Ok((conditionals_linf, shares_linf))
}
