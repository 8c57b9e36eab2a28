use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Integer;
use serde::{Deserialize, Serialize};

use super::field::{self, BigField, Modulus, PrimeField, SmallField};
use super::modulus::PrimeModulus;
use super::poly::IntPolynomial;
use crate::budget::Budgets;
use crate::error::{Error, Result};

/// Default seed for the randomised equal-degree splitting.
pub const DEFAULT_ROOT_SEED: u64 = 0x5eed_0f_a11_5eed;

/// A root of a polynomial modulo q together with its multiplicative order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootInfo {
    #[serde(with = "crate::serde_dec")]
    pub root: Integer,
    /// `None` when q - 1 could not be factored, or for the root 0.
    #[serde(with = "crate::serde_dec::opt")]
    pub order: Option<Integer>,
    pub is_one: bool,
    pub is_minus_one: bool,
}

impl RootInfo {
    pub fn new(root: Integer, order: Option<Integer>, q: &PrimeModulus) -> Self {
        let is_one = root == 1;
        let is_minus_one = Integer::from(&root + 1u32) == *q.value();
        RootInfo {
            root,
            order,
            is_one,
            is_minus_one,
        }
    }

    /// The order as a machine word, if known and small enough.
    pub fn order_u64(&self) -> Option<u64> {
        self.order.as_ref().and_then(|o| o.to_u64())
    }

    /// Re-checks `f(root) = 0` and the minimality of the order by direct powering.
    pub fn verify(&self, f: &IntPolynomial, q: &PrimeModulus) -> bool {
        if poly_eval_mod(f, &self.root, q) != 0 {
            return false;
        }
        let Some(order) = &self.order else {
            return true;
        };
        let qv = q.value();
        let pow = |e: &Integer| Integer::from(self.root.pow_mod_ref(e, qv).unwrap());
        if pow(order) != 1 {
            return false;
        }
        let fac = super::factor::factor(order, &Budgets::default());
        fac.factors
            .iter()
            .all(|(p, _)| pow(&Integer::from(order / p)) != 1)
    }
}

/// f(alpha) mod q by Horner's rule, reduced at every step.
pub fn poly_eval_mod(f: &IntPolynomial, alpha: &Integer, q: &PrimeModulus) -> Integer {
    match q.as_u64() {
        Some(qs) => {
            let k = SmallField::new(qs);
            let a = k.from_integer(alpha);
            let mut acc = 0u64;
            for c in f.coeffs().iter().rev() {
                acc = k.add(&k.mul(&acc, &a), &k.from_integer(c));
            }
            Integer::from(acc)
        }
        None => {
            let k = BigField::new(q.value().clone());
            let a = k.from_integer(alpha);
            let mut acc = Integer::new();
            for c in f.coeffs().iter().rev() {
                acc = k.add(&k.mul(&acc, &a), &k.from_integer(c));
            }
            acc
        }
    }
}

/// Exact multiplicative order of `alpha` modulo q by descent over the
/// factorisation of q - 1.
pub fn multiplicative_order(alpha: &Integer, q: &PrimeModulus, budgets: &Budgets) -> Result<Integer> {
    let a = q.reduce(alpha);
    if a == 0 {
        return Err(Error::InvalidInput(format!("0 has no multiplicative order mod {q}")));
    }
    let fac = q.q_minus_1_factorization(budgets);
    if !fac.is_complete() {
        return Err(Error::FactorizationUnavailable(q.to_string()));
    }
    let qv = q.value();
    let mut order = Integer::from(qv - 1u32);
    for (p, _) in &fac.factors {
        while order.is_divisible(p) {
            let cand = Integer::from(order.div_exact_ref(p));
            if Integer::from(a.pow_mod_ref(&cand, qv).unwrap()) == 1 {
                order = cand;
            } else {
                break;
            }
        }
    }
    Ok(order)
}

/// Roots found by [`find_roots_with`]; orders are present only when q - 1
/// was factored within budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSearch {
    pub roots: Vec<RootInfo>,
    pub orders_available: bool,
}

/// All distinct roots of `f` in F_q with their orders.
///
/// Fails with `ModulusTooLargeForOrderComputation` if q - 1 resists
/// factoring; [`find_roots_with`] returns the roots regardless.
pub fn find_roots_mod(f: &IntPolynomial, q: &PrimeModulus) -> Result<Vec<RootInfo>> {
    let search = find_roots_with(f, q, &Budgets::default(), DEFAULT_ROOT_SEED)?;
    if !search.orders_available {
        return Err(Error::ModulusTooLargeForOrderComputation(q.to_string()));
    }
    Ok(search.roots)
}

pub fn find_roots_with(f: &IntPolynomial, q: &PrimeModulus, budgets: &Budgets, seed: u64) -> Result<RootSearch> {
    let residues = root_residues(f, q, seed)?;
    let mut orders_available = true;
    let roots = residues
        .into_iter()
        .map(|r| {
            let order = if r == 0 {
                None
            } else {
                match multiplicative_order(&r, q, budgets) {
                    Ok(o) => Some(o),
                    Err(_) => {
                        orders_available = false;
                        None
                    }
                }
            };
            RootInfo::new(r, order, q)
        })
        .collect();
    Ok(RootSearch {
        roots,
        orders_available,
    })
}

/// Distinct roots of `f` mod q, ascending, without orders.
pub fn root_residues(f: &IntPolynomial, q: &PrimeModulus, seed: u64) -> Result<Vec<Integer>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match q.as_u64() {
        Some(qs) => {
            let k = SmallField::new(qs);
            let fp = field::reduce_coeffs(&k, f.coeffs());
            if fp.is_empty() {
                return Err(Error::InvalidInput(format!("{f} vanishes modulo {q}")));
            }
            Ok(roots_generic(&k, &fp, &mut rng).into_iter().map(Integer::from).collect())
        }
        None => {
            let k = BigField::new(q.value().clone());
            let fp = field::reduce_coeffs(&k, f.coeffs());
            if fp.is_empty() {
                return Err(Error::InvalidInput(format!("{f} vanishes modulo {q}")));
            }
            Ok(roots_generic(&k, &fp, &mut rng))
        }
    }
}

fn roots_generic<F: PrimeField>(k: &F, f: &[F::Elem], rng: &mut ChaCha8Rng) -> Vec<F::Elem>
where
    F::Elem: Ord,
{
    let mut g = field::make_monic(k, f);
    let mut found = Vec::new();
    let q = k.modulus();

    // cheap candidates first: 1, -1, 2
    let candidates = [k.one(), k.neg(&k.one()), k.from_u64(2)];
    for c in candidates {
        if g.len() < 2 || found.contains(&c) {
            continue;
        }
        let mut hit = false;
        while g.len() >= 2 && k.is_zero(&field::eval(k, &g, &c)) {
            let (quot, _) = field::div_rem(k, &g, &[k.neg(&c), k.one()]);
            g = quot;
            hit = true;
        }
        if hit {
            found.push(c);
        }
    }

    if g.len() >= 2 {
        let m = Modulus::new(k, g.clone());
        let xq = m.pow_x(k, &q);
        let xq_minus_x = field::poly_sub(k, &xq, &m.reduce(k, vec![k.zero(), k.one()]));
        let h = field::gcd(k, &g, &xq_minus_x);
        split_linear(k, &h, rng, &mut found);
    }

    found.sort();
    found.dedup();
    found
}

/// Collects the roots of a monic product of distinct linear factors.
fn split_linear<F: PrimeField>(k: &F, h: &[F::Elem], rng: &mut ChaCha8Rng, out: &mut Vec<F::Elem>) {
    let deg = h.len().saturating_sub(1);
    if deg == 0 {
        return;
    }
    if deg == 1 {
        out.push(k.neg(&h[0]));
        return;
    }
    let q = k.modulus();
    if q == 2 {
        for c in [k.zero(), k.one()] {
            if k.is_zero(&field::eval(k, h, &c)) {
                out.push(c);
            }
        }
        return;
    }
    let e = Integer::from(&q - 1u32) >> 1u32;
    let m = Modulus::new(k, h.to_vec());
    loop {
        let delta = k.random(rng);
        let t = m.powmod(k, &[delta, k.one()], &e);
        let t = field::poly_sub(k, &t, &[k.one()]);
        let d = field::gcd(k, h, &t);
        let dd = d.len().saturating_sub(1);
        if dd > 0 && dd < deg {
            let (rest, _) = field::div_rem(k, h, &d);
            split_linear(k, &d, rng, out);
            split_linear(k, &field::make_monic(k, &rest), rng, out);
            return;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitVerdict {
    Splits,
    DoesNotSplit,
    SplitsByEasysplit,
}

impl SplitVerdict {
    pub fn splits(self) -> bool {
        self != SplitVerdict::DoesNotSplit
    }
}

/// If `f = x^(2^(k-1)) + 1`, returns k.
pub fn power_of_two_cyclotomic_index(f: &IntPolynomial) -> Option<u32> {
    let (n, c) = f.as_binomial()?;
    (*c == 1 && n.is_power_of_two()).then(|| n.trailing_zeros() + 1)
}

/// Whether f splits into distinct linear factors modulo q.
pub fn splits_completely(f: &IntPolynomial, q: &PrimeModulus) -> Result<SplitVerdict> {
    f.require_monic()?;
    if power_of_two_cyclotomic_index(f).is_some() && poly_eval_mod(f, &Integer::from(2), q) == 0 {
        return Ok(SplitVerdict::SplitsByEasysplit);
    }
    let verdict = match q.as_u64() {
        Some(qs) => splits_generic(&SmallField::new(qs), f),
        None => splits_generic(&BigField::new(q.value().clone()), f),
    };
    Ok(if verdict {
        SplitVerdict::Splits
    } else {
        SplitVerdict::DoesNotSplit
    })
}

fn splits_generic<F: PrimeField>(k: &F, f: &IntPolynomial) -> bool {
    let fp = field::reduce_coeffs(k, f.coeffs());
    if fp.len() < 2 {
        return fp.len() == 1;
    }
    let m = Modulus::new(k, fp.clone());
    let x = m.reduce(k, vec![k.zero(), k.one()]);
    if m.pow_x(k, &k.modulus()) != x {
        return false;
    }
    let g = field::gcd(k, &fp, &field::derivative(k, &fp));
    g.len() == 1
}
