//! Distinguishing attacks through a root of f modulo q.

pub mod algorithms;
pub mod error_set;
pub mod guess;
pub mod histogram;
pub mod outcome;

pub use algorithms::{
    attack_ringlwe, attack_small_error, attack_small_set, continue_attack, evaluate_samples, residuals, small_error_on,
    small_set_on, transport_samples,
};
pub use error_set::{build_error_set, ErrorValueSet};
pub use guess::{AttackOptions, EvaluatedSamples, Progress, ProgressFn, SurvivorTest};
pub use histogram::{histogram_mod_q, HistogramModQ, NamedHistogram};
pub use outcome::{AttackKind, AttackOutcome, ChainRecord, SurvivorTrace, Verdict};
