//! Experiments, metrics, schema-independence checks, random definitions
//! and the bundled datasets.

pub mod counterexample;
mod experiment;
mod independence;
mod metrics;
mod randdefs;
pub mod uwcse;

pub use experiment::{
    across_schemas, assign_folds, cross_validate, run_experiment, table_csv, ExperimentConfig, ExperimentReport,
    FoldReport, Loaded, Meta,
};
pub use independence::{check_schema_independence, ClauseVerdict, IndependenceReport, Overall};
pub use metrics::{metrics, sample_negatives, Metrics, SampledNegatives};
pub use randdefs::{
    cross_schema_definition_suite, generate_random_definition, preserves_evaluation, SuiteParams, SuiteReport,
    SuiteRow,
};
