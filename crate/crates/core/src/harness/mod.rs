//! Experiment harness: oblivious adversaries, the exact hindsight oracle,
//! regret traces, slope fitting, and the estimator lemma checks.

mod adversary;
mod experiment;
pub mod fixtures;
mod hindsight;
mod lemmas;
mod slope;
mod trace;

pub use adversary::{Adversary, AdversaryKind, AdversaryStream};
pub use experiment::{
    mean_final_regret, resolve, run_experiment, run_trial, Algorithm, ExperimentParams, Overrides,
    Resolved,
};
pub use hindsight::{best_fixed_set, HindsightAccumulator};
pub use lemmas::{
    exact_estimator_moments, orthogonality_statistic, verify_lemma_suite, verify_lemma_suite_with,
    Estimator, EstimatorMoments, LemmaCheck, LemmaReport, LemmaSuiteConfig,
};
pub use slope::fit_regret_slope;
pub use trace::{RegretTrace, RoundRecord, TraceMetadata, TRACE_SCHEMA};
