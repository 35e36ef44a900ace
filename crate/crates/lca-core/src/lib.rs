//! Latent class analysis for polytomous categorical survey data.
//!
//! The crate estimates finite mixtures of independent categorical
//! indicators by maximum likelihood (EM with random restarts), selects the
//! number of classes by AIC/BIC, classifies respondents by posterior
//! membership, and summarizes extreme-response-style bias from the fitted
//! class-conditional probabilities. A synthetic-data module generates
//! datasets from known parameters and measures how well a fit recovers
//! them, which is the main correctness harness for the estimator.
//!
//! Everything user-facing is deterministic: fits, sweeps, and samples are
//! fully reproducible from their seed and inputs.

pub mod bias;
pub mod data;
pub mod document;
pub mod em;
pub mod error;
pub mod likelihood;
pub mod params;
pub mod schema;
pub mod selection;
pub mod synthetic;

pub use bias::{
    build_report, characterize_classes, consistency_probabilities, designate_bias_classes,
    extreme_bias_probabilities, BiasDesignation, BiasReport, ClassProfile, ReportOptions,
    DEFAULT_DOMINANCE_THRESHOLD,
};
pub use data::{drop_incomplete, load_responses, tabulate, write_responses, ResponseMatrix};
pub use document::{ModelDocument, TruthDocument};
pub use em::{em_iterate, fit_em, FitResult, RestartRecord};
pub use error::{LcaError, Result};
pub use likelihood::{joint_class_density, log_likelihood, mixture_density, posterior};
pub use params::{canonical_order, EmConfig, LcaParameters};
pub use schema::{Indicator, SurveySchema};
pub use selection::{
    count_parameters, identifiability_check, information_criteria, select_best, sweep_classes,
    Criterion, Identifiability, SweepRecord, SweepResult,
};
pub use synthetic::{align_labels, recovery_error, sample_dataset, SyntheticDataset};
