//! Integer factorisation: trial division followed by Brent's variant of
//! Pollard rho, under an explicit iteration budget.

use std::sync::OnceLock;

use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use super::prime::{is_prime, is_prime_u64, mul_mod};
use crate::budget::Budgets;

/// Outcome of a budgeted factorisation.
///
/// `factors` holds proven prime factors with multiplicity; `unfactored`
/// holds composite cofactors the budget did not allow splitting. The product
/// of both always equals the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    #[serde(with = "factor_list")]
    pub factors: Vec<(Integer, u32)>,
    #[serde(with = "crate::serde_dec::vec")]
    pub unfactored: Vec<Integer>,
}

mod factor_list {
    use rug::Integer;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[(Integer, u32)], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(String, u32)> = v.iter().map(|(p, e)| (p.to_string(), *e)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(Integer, u32)>, D::Error> {
        let pairs = Vec::<(String, u32)>::deserialize(d)?;
        pairs
            .into_iter()
            .map(|(p, e)| {
                p.parse::<Integer>()
                    .map(|p| (p, e))
                    .map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }

    pub fn largest_prime(&self) -> Option<&Integer> {
        self.factors.iter().map(|(p, _)| p).max()
    }

    pub fn product(&self) -> Integer {
        let mut acc = Integer::from(1);
        for (p, e) in &self.factors {
            acc *= p.clone().pow(*e);
        }
        for c in &self.unfactored {
            acc *= c;
        }
        acc
    }
}

/// Tri-state answer for properties that depend on a possibly partial factorisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    Holds,
    Fails,
    Unknown,
}

impl TriState {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriState::Holds
        } else {
            TriState::Fails
        }
    }
}

/// Squarefreeness of `n` given its budgeted factorisation.
pub fn is_squarefree(fac: &Factorization) -> TriState {
    if fac.factors.iter().any(|(_, e)| *e > 1) {
        return TriState::Fails;
    }
    if fac.is_complete() {
        return TriState::Holds;
    }
    if fac.unfactored.iter().any(|c| c.is_perfect_square()) {
        return TriState::Fails;
    }
    TriState::Unknown
}

pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(1_000_000))
}

/// Primes up to and including `limit`.
pub fn sieve(limit: u32) -> Vec<u32> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Factorises `|n|` within the given budgets.
pub fn factor(n: &Integer, budgets: &Budgets) -> Factorization {
    let mut rest = Integer::from(n.abs_ref());
    let mut factors: Vec<(Integer, u32)> = Vec::new();
    let mut unfactored = Vec::new();
    if rest <= 1 {
        return Factorization { factors, unfactored };
    }

    let bound = budgets.trial_division_bound.min(1_000_000);
    for &p in small_primes() {
        if u64::from(p) > bound {
            break;
        }
        let pz = Integer::from(p);
        if Integer::from(&pz * &pz) > rest {
            break;
        }
        let mut e = 0;
        while rest.is_divisible_u(p) {
            rest.div_exact_u_mut(p);
            e += 1;
        }
        if e > 0 {
            factors.push((pz, e));
        }
    }

    let mut steps_left = budgets.factoring_steps;
    let mut stack = Vec::new();
    if rest > 1 {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if is_prime(&m) {
            push_factor(&mut factors, m);
            continue;
        }
        if m.is_perfect_square() {
            let r = Integer::from(m.sqrt_ref());
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        match split(&m, &mut steps_left) {
            Some(d) => {
                let other = Integer::from(m.div_exact_ref(&d));
                stack.push(d);
                stack.push(other);
            }
            None => unfactored.push(m),
        }
    }

    factors.sort();
    unfactored.sort();
    Factorization { factors, unfactored }
}

fn push_factor(factors: &mut Vec<(Integer, u32)>, p: Integer) {
    if let Some(entry) = factors.iter_mut().find(|(q, _)| *q == p) {
        entry.1 += 1;
    } else {
        factors.push((p, 1));
    }
}

/// Finds a nontrivial divisor of the composite `n`, or `None` when the budget runs out.
fn split(n: &Integer, steps_left: &mut u64) -> Option<Integer> {
    if n.is_even() {
        return Some(Integer::from(2));
    }
    if let Some(small) = n.to_u64() {
        return split_u64(small, steps_left).map(Integer::from);
    }
    split_big(n, steps_left)
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn split_u64(n: u64, steps_left: &mut u64) -> Option<u64> {
    debug_assert!(!is_prime_u64(n));
    for c in 1u64.. {
        if *steps_left == 0 {
            return None;
        }
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let m = 128u64;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let lim = m.min(r - k);
                for _ in 0..lim {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                *steps_left = steps_left.saturating_sub(lim);
                g = gcd_u64(q, n);
                k += m;
                if *steps_left == 0 && g == 1 {
                    return None;
                }
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn split_big(n: &Integer, steps_left: &mut u64) -> Option<Integer> {
    let mut c = Integer::from(1);
    loop {
        if *steps_left == 0 {
            return None;
        }
        let f = |x: &Integer, c: &Integer| -> Integer {
            let mut v = Integer::from(x.square_ref());
            v += c;
            v %= n;
            v
        };
        let mut y = Integer::from(2);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = Integer::from(1);
        let mut g = Integer::from(1);
        let mut r: u64 = 1;
        let m: u64 = 128;
        while g == 1 {
            x.clone_from(&y);
            for _ in 0..r {
                y = f(&y, &c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys.clone_from(&y);
                let lim = m.min(r - k);
                for _ in 0..lim {
                    y = f(&y, &c);
                    let diff = Integer::from(&x - &y).abs();
                    q *= diff;
                    q %= n;
                }
                *steps_left = steps_left.saturating_sub(lim);
                g = Integer::from(q.gcd_ref(n));
                k += m;
                if *steps_left == 0 && g == 1 {
                    return None;
                }
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys, &c);
                g = Integer::from(Integer::from(&x - &ys).abs().gcd_ref(n));
                if g > 1 {
                    break;
                }
            }
        }
        if g != *n {
            return Some(g);
        }
        c += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fac(n: u64) -> Vec<(u64, u32)> {
        let f = factor(&Integer::from(n), &Budgets::default());
        assert!(f.is_complete());
        f.factors.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn small_factorisations() {
        assert!(fac(1).is_empty());
        assert_eq!(fac(2), vec![(2, 1)]);
        assert_eq!(fac(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(fac(2147483646), vec![(2, 1), (3, 2), (7, 1), (11, 1), (31, 1), (151, 1), (331, 1)]);
    }

    #[test]
    fn pollard_splits_semiprimes_beyond_trial_bound() {
        // 1000003 * 1000033
        assert_eq!(fac(1_000_003 * 1_000_033), vec![(1_000_003, 1), (1_000_033, 1)]);
        // F5 = 641 * 6700417
        assert_eq!(fac(4294967297), vec![(641, 1), (6700417, 1)]);
        // square of a large prime
        assert_eq!(fac(1_000_003 * 1_000_003), vec![(1_000_003, 2)]);
    }

    #[test]
    fn big_integer_path() {
        // F6 = 274177 * 67280421310721 times a 64-bit prime pushes past u64
        let p = Integer::from(18446744073709551557u64);
        let n = Integer::from(274177u64) * Integer::from(67280421310721u64) * &p;
        let f = factor(&n, &Budgets::default());
        assert!(f.is_complete());
        assert_eq!(f.product(), n);
        assert_eq!(f.largest_prime().unwrap(), &p);
    }

    #[test]
    fn budget_exhaustion_leaves_cofactor() {
        let budgets = Budgets {
            trial_division_bound: 100,
            factoring_steps: 10,
            ..Budgets::default()
        };
        let n = Integer::from(1_000_003u64 * 1_000_033u64);
        let f = factor(&n, &budgets);
        assert!(!f.is_complete());
        assert_eq!(f.product(), n);
        assert_eq!(is_squarefree(&f), TriState::Unknown);
    }

    #[test]
    fn squarefree_tristate() {
        let b = Budgets::default();
        assert_eq!(is_squarefree(&factor(&Integer::from(30), &b)), TriState::Holds);
        assert_eq!(is_squarefree(&factor(&Integer::from(12), &b)), TriState::Fails);
    }
}
