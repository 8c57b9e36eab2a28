use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{write_atomic, ExperimentConfig};
use crate::attack::{AttackKind, AttackOutcome, NamedHistogram};
use crate::error::{Error, Result};
use crate::sampling::lattice::NormStats;

/// How the guess loop is run for every trial of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub kind: AttackKind,
    #[serde(with = "crate::serde_dec")]
    pub alpha: u64,
    #[serde(with = "crate::serde_dec::opt", default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
    /// Samples are transported from the embedding before the loop.
    pub transported: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialTimings {
    pub generate_secs: f64,
    pub histogram_secs: f64,
    pub attack_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub kind: String,
    pub message: String,
    pub budget_exceeded: bool,
}

impl TrialError {
    pub fn from_error(e: &Error) -> Self {
        let dbg = format!("{e:?}");
        let kind = dbg.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        TrialError {
            kind,
            message: e.to_string(),
            budget_exceeded: e.is_budget_exceeded(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    #[serde(with = "crate::serde_dec")]
    pub seed: u64,
    /// s(α) of the planted secret; absent for uniform controls.
    #[serde(with = "crate::serde_dec::opt", default, skip_serializing_if = "Option::is_none")]
    pub planted_residue: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_commitment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sanity_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub histograms: Vec<NamedHistogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<AttackOutcome>,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<TrialError>,
    pub timings: TrialTimings,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub available_parallelism: usize,
    pub worker_threads: usize,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            available_parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            worker_threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    /// Embedding construction, σ rescaling and the norm smoke test.
    pub setup_secs: f64,
    pub total_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub plan: AttackPlan,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_root: Option<f64>,
    /// τ, reported when f = xⁿ + q − 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// q / (2√2·w·n·(q − 1)^((n−1)/2n)) for the configured f; above 1 the
    /// attack is expected to work.
    pub feasibility_quantity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_smoke_test: Option<NormStats>,
    pub trials: Vec<TrialRecord>,
    pub successes: usize,
    pub verdict_counts: BTreeMap<String, usize>,
    pub timings: RunTimings,
    pub environment: Environment,
}

impl ExperimentReport {
    /// Success count recomputed from the trial records.
    pub fn recount(&self) -> usize {
        self.trials.iter().filter(|t| is_success(t)).count()
    }

    /// Copy with timing and environment fields zeroed, for comparing runs.
    pub fn without_volatile(&self) -> Self {
        let mut r = self.clone();
        r.timings = RunTimings::default();
        r.environment = Environment::default();
        for t in &mut r.trials {
            t.timings = TrialTimings::default();
            if let Some(o) = &mut t.outcome {
                o.elapsed_secs = 0.0;
            }
        }
        r
    }
}

pub(crate) fn is_success(t: &TrialRecord) -> bool {
    match (&t.outcome, t.planted_residue) {
        (Some(o), Some(p)) => o.guess() == Some(p),
        _ => false,
    }
}

pub(crate) fn verdict_key(t: &TrialRecord) -> String {
    match (&t.outcome, &t.error) {
        (Some(o), _) => match o.verdict {
            crate::attack::Verdict::Guess { .. } => "guess",
            crate::attack::Verdict::NotPLWE => "not_plwe",
            crate::attack::Verdict::InsufficientSamples { .. } => "insufficient_samples",
        }
        .to_string(),
        (None, Some(_)) => "error".to_string(),
        (None, None) => "none".to_string(),
    }
}

pub fn save_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(report)?.as_bytes())
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
