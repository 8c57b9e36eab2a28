use rug::ops::RemRounding;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::embedding::tau;
use crate::error::{Error, Result};
use crate::ring::factor::is_squarefree;
use crate::ring::roots::{power_of_two_cyclotomic_index, root_residues, DEFAULT_ROOT_SEED};
use crate::ring::{
    cyclotomic_poly, factor, multiplicative_order, poly_eval_mod, splits_completely, IntPolynomial, PrimeModulus,
    RootInfo, SplitVerdict, TriState,
};

/// (p, e) with n = p^e, if n is a prime power.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let fac = factor(&Integer::from(n), &Budgets::default());
    match fac.factors.as_slice() {
        [(p, e)] if fac.is_complete() => Some((p.to_u64()?, *e)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub n: usize,
    pub q: PrimeModulus,
    pub w: f64,
    pub f: IntPolynomial,
    /// The prime p when n = p^e.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    pub n_is_prime_power: TriState,
    pub q_minus_1_squarefree: TriState,
    /// p² ∤ ((1 − q)ⁿ − (1 − q)).
    pub p_squared_condition: TriState,
    pub tau: f64,
    pub tau_exceeds_one: TriState,
    /// Conditions 1–3 together: f_{n,q} is monogenic.
    pub monogenic: TriState,
    /// All four conditions.
    pub attack_guaranteed: TriState,
}

fn all(states: &[TriState]) -> TriState {
    if states.contains(&TriState::Fails) {
        TriState::Fails
    } else if states.contains(&TriState::Unknown) {
        TriState::Unknown
    } else {
        TriState::Holds
    }
}

/// Conditions under which f_{n,q} = xⁿ + q − 1 is provably attackable.
pub fn check_family_conditions(n: usize, q: &PrimeModulus, w: f64, budgets: &Budgets) -> FamilyReport {
    let f = IntPolynomial::binomial(n, Integer::from(q.value() - 1u32));
    let pp = prime_power(n as u64);
    let n_is_prime_power = TriState::from_bool(pp.is_some());
    let q_minus_1_squarefree = is_squarefree(q.q_minus_1_factorization(budgets));
    let p_squared_condition = match pp {
        None => TriState::Unknown,
        Some((p, _)) => {
            let p2 = Integer::from(p) * p;
            let t = Integer::from(1 - q.value()).rem_euc(&p2);
            let tn = t.clone().pow_mod(&Integer::from(n), &p2).expect("positive modulus");
            TriState::from_bool(Integer::from(tn - &t).rem_euc(&p2) != 0)
        }
    };
    let tau_v = tau(n, q.value(), w);
    let tau_exceeds_one = TriState::from_bool(tau_v > 1.0);
    let monogenic = all(&[n_is_prime_power, q_minus_1_squarefree, p_squared_condition]);
    let attack_guaranteed = all(&[monogenic, tau_exceeds_one]);
    FamilyReport {
        n,
        q: q.clone(),
        w,
        f,
        prime: pp.map(|p| p.0),
        n_is_prime_power,
        q_minus_1_squarefree,
        p_squared_condition,
        tau: tau_v,
        tau_exceeds_one,
        monogenic,
        attack_guaranteed,
    }
}

/// (k, q, label): primes q dividing 2^(2^(k−1)) + 1, so that 2 is a root of
/// x^(2^(k−1)) + 1 modulo q.
pub const FERMAT_FAMILY: &[(u32, &str, &str)] = &[
    (2, "5", "5"),
    (3, "17", "17"),
    (4, "257", "257"),
    (5, "65537", "65537"),
    (6, "6700417", "6700417"),
    (7, "274177", "274177"),
    (7, "67280421310721", "q5"),
    (8, "59649589127497217", "q6"),
    (8, "5704689200685129054721", "q1"),
    (9, "1238926361552897", "q7"),
    (9, "93461639715357977769163558199606896584051237541638188580280321", "q2"),
    (10, "2424833", "2424833"),
    (10, "7455602825647884208337395736200454918783366342657", "q3"),
    (
        10,
        "741640062627530801524787141901937474059940781097519023905821316144415759504705008092818711693940737",
        "q4",
    ),
    (11, "45592577", "q8"),
    (11, "6487031809", "q9"),
    (11, "4659775785220018543264560743076778192897", "q10"),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FermatCheck {
    pub k: u32,
    pub label: String,
    pub q: PrimeModulus,
    pub f: IntPolynomial,
    pub f_at_2_vanishes: bool,
    pub split: SplitVerdict,
}

/// f = x^(2^(k−1)) + 1 against q: f(2) mod q and the splitting verdict.
pub fn fermat_check(k: u32, q: &PrimeModulus, label: &str) -> Result<FermatCheck> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let f = IntPolynomial::binomial(1usize << (k - 1), 1);
    debug_assert_eq!(power_of_two_cyclotomic_index(&f), Some(k));
    let f_at_2_vanishes = poly_eval_mod(&f, &Integer::from(2), q) == 0;
    let split = splits_completely(&f, q)?;
    Ok(FermatCheck {
        k,
        label: label.to_string(),
        q: q.clone(),
        f,
        f_at_2_vanishes,
        split,
    })
}

/// Checks the table entries with q below `bound`.
pub fn fermat_family_checks(bound: &Integer) -> Result<Vec<FermatCheck>> {
    FERMAT_FAMILY
        .iter()
        .filter_map(|(k, q, label)| {
            let q: Integer = q.parse().expect("table constant");
            (&q < bound).then(|| fermat_check(*k, &PrimeModulus::new(q)?, label))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicReport {
    pub m: u64,
    pub q: PrimeModulus,
    pub roots: Vec<RootInfo>,
    #[serde(with = "crate::serde_dec")]
    pub min_order: Integer,
    pub all_of_order_m: bool,
}

/// Every root of Φ_m mod a split prime q has order exactly m.
pub fn cyclotomic_immunity_check(m: u64, q: &PrimeModulus, budgets: &Budgets) -> Result<CyclotomicReport> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    if Integer::from(q.value() % m) != 1 {
        return Err(Error::DoesNotSplit {
            m,
            q: q.to_string(),
        });
    }
    let phi = cyclotomic_poly(m);
    let mut roots = Vec::new();
    for r in root_residues(&phi, q, DEFAULT_ROOT_SEED)? {
        let o = multiplicative_order(&r, q, budgets)?;
        roots.push(RootInfo::new(r, Some(o), q));
    }
    if roots.len() != phi.degree() {
        return Err(Error::InvalidInput(format!(
            "found {} roots of a degree-{} cyclotomic polynomial mod {q}",
            roots.len(),
            phi.degree()
        )));
    }
    let min_order = roots.iter().filter_map(|r| r.order.clone()).min().unwrap_or_default();
    let all_of_order_m = roots.iter().all(|r| r.order.as_ref() == Some(&Integer::from(m)));
    Ok(CyclotomicReport {
        m,
        q: q.clone(),
        roots,
        min_order,
        all_of_order_m,
    })
}
