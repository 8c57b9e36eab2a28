use serde::{Deserialize, Serialize};

/// Resource limits shared by the number-theoretic and attack routines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Trial division bound used before Pollard rho.
    #[serde(with = "crate::serde_dec")]
    pub trial_division_bound: u64,
    /// Total Pollard rho iterations allowed for one factorisation.
    #[serde(with = "crate::serde_dec")]
    pub factoring_steps: u64,
    /// Largest error value set the small-set attack will enumerate.
    #[serde(with = "crate::serde_dec")]
    pub set_size_cap: u64,
    /// Largest modulus the guess loop will sweep.
    #[serde(with = "crate::serde_dec")]
    pub max_attack_q: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            trial_division_bound: 1_000_000,
            factoring_steps: 100_000_000,
            set_size_cap: 1 << 26,
            max_attack_q: 1 << 40,
        }
    }
}
