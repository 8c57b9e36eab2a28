//! Seeded end-to-end experiments: configuration, trials and reports.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{load_config, parse_config, save_config, ExperimentConfig, SampleSource};
pub use experiment::{
    attack_sample_set, generate_samples, run_experiment, run_experiment_with, GeneratedSamples, RunOptions, SampleAttackOptions,
    SampleAttackReport,
};
pub use report::{load_report, save_report, AttackPlan, ExperimentReport, TrialError, TrialRecord};
