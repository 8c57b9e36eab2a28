use std::collections::BTreeMap;
use std::path::PathBuf;

use rug::Integer;
use serde::{Deserialize, Serialize};

use super::family::check_family_conditions;
use crate::budget::Budgets;
use crate::embedding::{build_embedding, spectral_stats, tau, EmbeddingData, DEFAULT_PRECISION_BITS};
use crate::ring::roots::{find_roots_with, power_of_two_cyclotomic_index, DEFAULT_ROOT_SEED};
use crate::ring::{poly_eval_mod, splits_completely, IntPolynomial, PrimeModulus, RootInfo, TriState};
use crate::sampling::gaussian::sqrt_2pi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Polylwe,
    Ringlwe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VetVerdict {
    VulnerablePolylwe,
    VulnerableRinglwe,
    NotVulnerableByTheseTests,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSource {
    /// Power iteration on the embedding matrix.
    Numeric,
    /// √max{|a|, |b|} for xⁿ + a·x + b.
    HeuristicTrinomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub value: f64,
    pub source: RhoSource,
}

/// One of the attack inequalities evaluated at a specific root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    #[serde(with = "crate::serde_dec")]
    pub root: Integer,
    pub order: u64,
    /// Left-hand side; compared against q.
    pub lhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityReport {
    pub f: IntPolynomial,
    pub q: PrimeModulus,
    pub w: f64,
    pub variant: Variant,
    pub roots_of_small_order: Vec<RootInfo>,
    pub orders_available: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_prime_estimate: Option<RhoEstimate>,
    /// ρ′ < q/(4wn) from the numeric spectral norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem1_bound_met: Option<bool>,
    pub inequalities: Vec<InequalityCheck>,
    /// Keys: R, R_prime, Q, M, S.
    pub conditions: BTreeMap<String, TriState>,
    pub verdict: VetVerdict,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct VetOptions {
    pub order_bound: u64,
    pub spectral_degree_cap: usize,
    pub precision_bits: u32,
    pub budgets: Budgets,
    pub embedding_cache: Option<PathBuf>,
}

impl Default for VetOptions {
    fn default() -> Self {
        VetOptions {
            order_bound: 16,
            spectral_degree_cap: 256,
            precision_bits: DEFAULT_PRECISION_BITS,
            budgets: Budgets::default(),
            embedding_cache: None,
        }
    }
}

/// ln((α^(2r) − 1)/(α² − 1)) for the integer α, computed without overflow.
fn ln_geometric(alpha: f64, r: u64) -> f64 {
    let a2 = alpha * alpha;
    if a2 <= 1.0 {
        return (r as f64).ln();
    }
    let la2 = a2.ln();
    // α^(2r) − 1 = α^(2r)(1 − α^(−2r))
    r as f64 * la2 + (-(-(r as f64) * la2).exp()).ln_1p() - (a2 - 1.0).ln()
}

/// Least absolute representative of a residue, as a float.
fn centered(v: &Integer, q: &PrimeModulus) -> f64 {
    let half = Integer::from(q.value() >> 1u32);
    if v > &half {
        Integer::from(v - q.value()).to_f64()
    } else {
        v.to_f64()
    }
}

pub fn vet_parameters(f: &IntPolynomial, q: &PrimeModulus, w: f64, variant: Variant, opts: &VetOptions) -> VulnerabilityReport {
    let n = f.degree();
    let sigma = w / sqrt_2pi();
    let qf = q.value().to_f64();
    let mut notes = Vec::new();
    let mut conditions = BTreeMap::new();

    // roots
    let (roots, orders_available) = match find_roots_with(f, q, &opts.budgets, DEFAULT_ROOT_SEED) {
        Ok(s) => (s.roots, s.orders_available),
        Err(e) => {
            notes.push(format!("root finding failed: {e}"));
            (Vec::new(), false)
        }
    };
    if !orders_available {
        notes.push("factorisation of q − 1 incomplete; orders other than ±1 unknown".into());
    }
    let small: Vec<RootInfo> = roots
        .iter()
        .filter(|r| r.is_one || r.is_minus_one || r.order_u64().is_some_and(|o| o <= opts.order_bound))
        .cloned()
        .collect();
    let order_of = |r: &RootInfo| -> u64 {
        if r.is_one {
            1
        } else if r.is_minus_one {
            2
        } else {
            r.order_u64().unwrap_or(u64::MAX)
        }
    };

    let r_holds = poly_eval_mod(f, &Integer::from(1), q) == 0;
    conditions.insert("R".to_string(), TriState::from_bool(r_holds));
    let r_prime = if !small.is_empty() {
        TriState::Holds
    } else if orders_available || roots.is_empty() {
        TriState::Fails
    } else {
        TriState::Unknown
    };
    conditions.insert("R_prime".to_string(), r_prime);
    let q_ok = q.as_u64().is_some_and(|v| v <= opts.budgets.max_attack_q);
    conditions.insert("Q".to_string(), TriState::from_bool(q_ok));

    // monogenicity hypotheses
    let family_c = f.as_binomial().and_then(|(_, c)| (Integer::from(c + 1u32) == *q.value()).then_some(()));
    let mono = if family_c.is_some() {
        let rep = check_family_conditions(n, q, w, &opts.budgets);
        notes.push(format!(
            "family xⁿ + q − 1: n prime power {:?}, q − 1 squarefree {:?}, p² condition {:?}",
            rep.n_is_prime_power, rep.q_minus_1_squarefree, rep.p_squared_condition
        ));
        rep.monogenic
    } else if power_of_two_cyclotomic_index(f).is_some() {
        TriState::Holds
    } else {
        TriState::Unknown
    };
    conditions.insert("M".to_string(), mono);
    let split = match splits_completely(f, q) {
        Ok(v) => TriState::from_bool(v.splits()),
        Err(e) => {
            notes.push(format!("splitting test failed: {e}"));
            TriState::Unknown
        }
    };
    conditions.insert("S".to_string(), split);

    // inequalities
    let mut inequalities = Vec::new();
    for r in &small {
        let order = order_of(r);
        if order <= 2 {
            let lhs = 8.0 * sigma * (n as f64).sqrt();
            inequalities.push(InequalityCheck {
                name: "small_error_pm1".into(),
                root: r.root.clone(),
                order,
                lhs,
                holds: lhs < qf,
            });
        } else {
            let rf = order as f64;
            let lhs = (4.0 * sigma * n as f64 / rf).powf(rf);
            inequalities.push(InequalityCheck {
                name: "small_set".into(),
                root: r.root.clone(),
                order,
                lhs,
                holds: lhs < qf,
            });
            let a = centered(&r.root, q);
            let ln_lhs = (8.0 * sigma).ln() + 0.5 * ((n as f64).ln() - rf.ln()) + 0.5 * ln_geometric(a, order);
            let lhs = ln_lhs.exp();
            inequalities.push(InequalityCheck {
                name: "small_error_order_r".into(),
                root: r.root.clone(),
                order,
                lhs,
                holds: lhs < qf,
            });
        }
    }

    // τ and ρ′
    let tau_v = family_c.map(|_| tau(n, q.value(), w));
    let mut theorem1_bound_met = None;
    let mut rho = None;
    if n <= opts.spectral_degree_cap {
        let emb = match &opts.embedding_cache {
            Some(dir) => EmbeddingData::load_or_build(dir, f, opts.precision_bits),
            None => build_embedding(f, opts.precision_bits),
        };
        match emb.and_then(|e| spectral_stats(&e, Some(w), Some(q))) {
            Ok(s) => {
                rho = Some(RhoEstimate {
                    value: s.rho_prime,
                    source: RhoSource::Numeric,
                });
                theorem1_bound_met = s.theorem1_bound_met;
            }
            Err(e) => notes.push(format!("spectral statistics unavailable: {e}")),
        }
    } else {
        notes.push(format!(
            "spectral statistics skipped: degree {n} above cap {}",
            opts.spectral_degree_cap
        ));
        let ab = f
            .as_trinomial()
            .map(|(_, a, b)| Integer::from(a.abs_ref()).max(Integer::from(b.abs_ref())))
            .or_else(|| f.as_binomial().map(|(_, c)| Integer::from(c.abs_ref())));
        if let Some(m) = ab {
            rho = Some(RhoEstimate {
                value: m.to_f64().sqrt(),
                source: RhoSource::HeuristicTrinomial,
            });
        }
    }

    let poly_ok = q_ok && inequalities.iter().any(|c| c.holds);
    let ring_ok = q_ok && r_holds && theorem1_bound_met == Some(true);
    let verdict = match variant {
        Variant::Ringlwe if ring_ok => VetVerdict::VulnerableRinglwe,
        _ if poly_ok => VetVerdict::VulnerablePolylwe,
        _ => VetVerdict::NotVulnerableByTheseTests,
    };
    if variant == Variant::Ringlwe && verdict == VetVerdict::VulnerablePolylwe {
        notes.push("Poly-LWE conditions hold but the Ring-LWE transport bound is not certified".into());
    }

    VulnerabilityReport {
        f: f.clone(),
        q: q.clone(),
        w,
        variant,
        roots_of_small_order: small,
        orders_available,
        tau: tau_v,
        rho_prime_estimate: rho,
        theorem1_bound_met,
        inequalities,
        conditions,
        verdict,
        notes,
    }
}
