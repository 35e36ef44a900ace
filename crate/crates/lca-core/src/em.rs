//! EM estimation of the latent class model.
//!
//! Each restart draws fresh starting values from its own pre-assigned RNG
//! stream, so running restarts in parallel gives the same answer as running
//! them one after another. The winning restart is the one with the highest
//! final log-likelihood, ties broken by restart index.

use crate::data::ResponseMatrix;
use crate::error::{LcaError, Result};
use crate::likelihood::{flatten_codes, modal_classes, LogModel};
use crate::params::{canonical_order, EmConfig, LcaParameters};
use crate::selection;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of one EM restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    /// Final log-likelihood; `None` when the restart died (empty class).
    pub log_likelihood: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// A converged (or capped) EM fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Canonically ordered parameter estimates.
    pub parameters: LcaParameters,
    pub log_likelihood: f64,
    /// n x R posterior membership matrix for the fitted data.
    pub posterior: Vec<Vec<f64>>,
    /// Modal class per row (0-based; ties to the lowest index).
    pub modal_class: Vec<usize>,
    pub n_params: usize,
    pub iterations_used: usize,
    pub converged: bool,
    /// One record per restart, in restart order.
    pub restart_log: Vec<RestartRecord>,
    /// Master seed the fit was run with.
    pub seed: u64,
}

/// One E-step followed by one M-step.
///
/// The M-step turns posterior weights into new shares and posterior-weighted
/// outcome frequencies; conditionals are clamped to `probability_floor` and
/// renormalized. A class whose posterior mass reaches exactly zero is
/// reported as an error so callers can restart.
pub fn em_iterate(
    data: &ResponseMatrix,
    params: &LcaParameters,
    probability_floor: f64,
) -> Result<LcaParameters> {
    data.require_complete()?;
    params.check_schema(&data.schema().category_counts())?;
    let model = LogModel::new(params);
    let flat = flatten_codes(data, &model.offsets);
    let state = EmState::new(data, params.category_counts());
    let (posterior, _ll) = state.e_step(&model, &flat)?;
    state.m_step(&posterior, &flat, probability_floor)
}

/// Fit an R-class model with random restarts.
pub fn fit_em(data: &ResponseMatrix, n_classes: usize, config: &EmConfig) -> Result<FitResult> {
    config.validate()?;
    data.require_complete()?;
    if data.n_rows() == 0 {
        return Err(LcaError::EmptyDataset);
    }
    if n_classes == 0 {
        return Err(LcaError::InvalidArgument("class count must be at least 1".into()));
    }
    selection::identifiability_check(n_classes, data.schema(), data.n_rows()).into_result()?;

    let counts = data.schema().category_counts();
    let state = EmState::new(data, counts.clone());
    let offsets = offsets_of(&counts);
    let flat = flatten_codes(data, &offsets);

    // Pre-assign one seed per restart so parallel order cannot matter.
    let mut master = Xoshiro256StarStar::seed_from_u64(config.seed);
    let restart_seeds: Vec<u64> = (0..config.n_restarts).map(|_| master.gen()).collect();

    let runs: Vec<Result<ChainOutcome>> = restart_seeds
        .par_iter()
        .map(|&seed| run_chain(&state, &flat, n_classes, &counts, seed, config))
        .collect();

    let mut restart_log = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, ChainOutcome)> = None;
    let mut first_error: Option<LcaError> = None;
    for (idx, run) in runs.into_iter().enumerate() {
        match run {
            Ok(outcome) => {
                restart_log.push(RestartRecord {
                    log_likelihood: Some(outcome.log_likelihood),
                    converged: outcome.converged,
                    iterations: outcome.iterations,
                });
                let better = match &best {
                    None => true,
                    Some((_, incumbent)) => outcome.log_likelihood > incumbent.log_likelihood,
                };
                if better {
                    best = Some((idx, outcome));
                }
            }
            Err(err) => {
                restart_log.push(RestartRecord {
                    log_likelihood: None,
                    converged: false,
                    iterations: 0,
                });
                if first_error.is_none() {
                    first_error = Some(err);
                }
            }
        }
    }

    let (_, winner) = match best {
        Some(found) => found,
        None => return Err(first_error.expect("at least one restart ran")),
    };

    let parameters = canonical_order(&winner.params);
    let model = LogModel::new(&parameters);
    let (posterior, log_likelihood) = state.e_step(&model, &flat)?;
    let modal_class = modal_classes(&posterior);
    let n_params = selection::count_parameters(n_classes, data.schema());

    Ok(FitResult {
        parameters,
        log_likelihood,
        posterior,
        modal_class,
        n_params,
        iterations_used: winner.iterations,
        converged: winner.converged,
        restart_log,
        seed: config.seed,
    })
}

struct ChainOutcome {
    params: LcaParameters,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
}

fn run_chain(
    state: &EmState<'_>,
    flat: &[usize],
    n_classes: usize,
    counts: &[usize],
    seed: u64,
    config: &EmConfig,
) -> Result<ChainOutcome> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut params = random_start(n_classes, counts, &mut rng);
    let mut ll_prev = f64::NEG_INFINITY;
    let mut iterations = 0usize;
    let mut converged = false;
    loop {
        let model = LogModel::new(&params);
        let (posterior, ll) = state.e_step(&model, flat)?;
        if (ll - ll_prev).abs() / (1.0 + ll.abs()) < config.tolerance {
            converged = true;
            return Ok(ChainOutcome { params, log_likelihood: ll, iterations, converged });
        }
        if iterations >= config.max_iterations {
            return Ok(ChainOutcome { params, log_likelihood: ll, iterations, converged });
        }
        params = state.m_step(&posterior, flat, config.probability_floor)?;
        iterations += 1;
        ll_prev = ll;
    }
}

/// Flat-Dirichlet-style start: normalized uniform positives for the shares
/// and every conditional vector.
fn random_start(
    n_classes: usize,
    counts: &[usize],
    rng: &mut Xoshiro256StarStar,
) -> LcaParameters {
    let shares = random_simplex(n_classes, rng);
    let conditionals = (0..n_classes)
        .map(|_| counts.iter().map(|&k| random_simplex(k, rng)).collect())
        .collect();
    LcaParameters::new(shares, conditionals).expect("random start is valid")
}

fn random_simplex(len: usize, rng: &mut Xoshiro256StarStar) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen::<f64>().max(1e-6)).collect();
    let sum: f64 = v.iter().sum();
    for x in &mut v {
        *x /= sum;
    }
    v
}

fn offsets_of(counts: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(counts.len());
    let mut total = 0usize;
    for &k in counts {
        offsets.push(total);
        total += k;
    }
    offsets
}

/// Data-dependent scratch shared by every chain of a fit.
struct EmState<'a> {
    data: &'a ResponseMatrix,
    counts: Vec<usize>,
    flat_len: usize,
}

impl<'a> EmState<'a> {
    fn new(data: &'a ResponseMatrix, counts: Vec<usize>) -> Self {
        let flat_len = counts.iter().sum();
        Self { data, counts, flat_len }
    }

    /// Posterior matrix and total log-likelihood for the given parameters.
    fn e_step(&self, model: &LogModel, flat: &[usize]) -> Result<(Vec<Vec<f64>>, f64)> {
        let n = self.data.n_rows();
        let j = self.data.n_indicators();
        let mut scores = vec![0.0; model.n_classes];
        let mut posterior = Vec::with_capacity(n);
        let mut total = 0.0;
        for i in 0..n {
            model.class_scores(&flat[i * j..(i + 1) * j], &mut scores);
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(LcaError::ImpossibleObservation { row: i + 1 });
            }
            let mut sum = 0.0;
            let mut row: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
            for v in &row {
                sum += v;
            }
            for v in &mut row {
                *v /= sum;
            }
            total += max + sum.ln();
            posterior.push(row);
        }
        Ok((posterior, total))
    }

    /// Share and conditional updates from posterior weights.
    fn m_step(
        &self,
        posterior: &[Vec<f64>],
        flat: &[usize],
        probability_floor: f64,
    ) -> Result<LcaParameters> {
        let n = self.data.n_rows();
        let j = self.data.n_indicators();
        let n_classes = posterior[0].len();

        let mut class_mass = vec![0.0f64; n_classes];
        let mut weighted = vec![vec![0.0f64; self.flat_len]; n_classes];
        for i in 0..n {
            let row_codes = &flat[i * j..(i + 1) * j];
            for (r, &w) in posterior[i].iter().enumerate() {
                class_mass[r] += w;
                if w > 0.0 {
                    let wrow = &mut weighted[r];
                    for &idx in row_codes {
                        wrow[idx] += w;
                    }
                }
            }
        }

        let mut shares: Vec<f64> = Vec::with_capacity(n_classes);
        for (r, &mass) in class_mass.iter().enumerate() {
            if mass == 0.0 {
                return Err(LcaError::EmptyClass { class: r + 1 });
            }
            shares.push(mass / n as f64);
        }
        let share_sum: f64 = shares.iter().sum();
        for s in &mut shares {
            *s /= share_sum;
        }

        let mut conditionals = Vec::with_capacity(n_classes);
        for r in 0..n_classes {
            let mut per_class = Vec::with_capacity(j);
            let mut offset = 0usize;
            for &k in &self.counts {
                let mut vector: Vec<f64> = weighted[r][offset..offset + k]
                    .iter()
                    .map(|&w| (w / class_mass[r]).max(probability_floor))
                    .collect();
                let sum: f64 = vector.iter().sum();
                for v in &mut vector {
                    *v /= sum;
                }
                per_class.push(vector);
                offset += k;
            }
            conditionals.push(per_class);
        }
        LcaParameters::new(shares, conditionals)
    }
}
