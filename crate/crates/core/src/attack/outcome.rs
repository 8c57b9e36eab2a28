use serde::{Deserialize, Serialize};

use super::histogram::NamedHistogram;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Guess {
        #[serde(with = "crate::serde_dec")]
        residue: u64,
    },
    #[serde(rename = "not_plwe")]
    NotPLWE,
    InsufficientSamples {
        #[serde(with = "crate::serde_dec::vec")]
        survivors: Vec<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Membership in the error value set S.
    SmallSet,
    /// Membership in the window around zero.
    SmallError,
}

/// A guess whose chain of passed samples beat every earlier guess.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    #[serde(with = "crate::serde_dec")]
    pub guess: u64,
    pub chain: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivorTrace {
    pub longest_chain: usize,
    /// New longest chains in ascending guess order.
    pub records: Vec<ChainRecord>,
    /// Entry k: guesses that passed the first k + 1 samples.
    pub passed_by_depth: Vec<u64>,
}

impl SurvivorTrace {
    /// Appends `later` (covering larger guesses) to this trace.
    pub(crate) fn merge(&mut self, later: SurvivorTrace) {
        for rec in later.records {
            if rec.chain > self.longest_chain || self.records.is_empty() {
                self.longest_chain = self.longest_chain.max(rec.chain);
                self.records.push(rec);
            }
        }
        if self.passed_by_depth.len() < later.passed_by_depth.len() {
            self.passed_by_depth.resize(later.passed_by_depth.len(), 0);
        }
        for (a, b) in self.passed_by_depth.iter_mut().zip(later.passed_by_depth) {
            *a += b;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub kind: AttackKind,
    #[serde(with = "crate::serde_dec")]
    pub q: u64,
    #[serde(with = "crate::serde_dec")]
    pub alpha: u64,
    pub verdict: Verdict,
    /// Exact number of guesses that passed every sample.
    pub survivor_count: u64,
    /// True when the stored survivor list was cut at the survivor cap.
    pub survivors_truncated: bool,
    pub survivor_trace: SurvivorTrace,
    pub samples_consumed: usize,
    /// Individual residue tests performed by the guess loop.
    pub sample_tests: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_size: Option<usize>,
    pub elapsed_secs: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub histograms: Vec<NamedHistogram>,
}

impl AttackOutcome {
    pub fn guess(&self) -> Option<u64> {
        match self.verdict {
            Verdict::Guess { residue } => Some(residue),
            _ => None,
        }
    }

    /// Stored survivors (all of them unless `survivors_truncated`).
    pub fn survivors(&self) -> Vec<u64> {
        match &self.verdict {
            Verdict::Guess { residue } => vec![*residue],
            Verdict::NotPLWE => Vec::new(),
            Verdict::InsufficientSamples { survivors } => survivors.clone(),
        }
    }
}

pub(crate) fn verdict_for(survivors: Vec<u64>, count: u64) -> Verdict {
    match count {
        0 => Verdict::NotPLWE,
        1 => Verdict::Guess { residue: survivors[0] },
        _ => Verdict::InsufficientSamples { survivors },
    }
}
