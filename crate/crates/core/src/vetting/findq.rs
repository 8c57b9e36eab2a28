use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::ring::field::{self, PrimeField, SmallField, BigField};
use crate::ring::{cyclotomic_poly, factor, Factorization, IntPolynomial, PrimeModulus};

type QPoly = Vec<Rational>;

fn trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
}

fn to_q(f: &IntPolynomial) -> QPoly {
    f.coeffs().iter().map(Rational::from).collect()
}

fn sub_mul(a: &QPoly, q: &QPoly, b: &QPoly) -> QPoly {
    // a − q·b
    let mut out = a.clone();
    if !q.is_empty() && !b.is_empty() {
        let len = q.len() + b.len() - 1;
        if out.len() < len {
            out.resize(len, Rational::new());
        }
        for (i, x) in q.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] -= Rational::from(x * y);
            }
        }
    }
    trim(&mut out);
    out
}

fn div_rem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut r = a.clone();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quo = vec![Rational::new(); r.len() - db];
    for i in (db..r.len()).rev() {
        if r[i] == 0 {
            continue;
        }
        let c = Rational::from(&r[i] / &lead);
        for (j, bj) in b.iter().enumerate() {
            let idx = i - db + j;
            r[idx] -= Rational::from(&c * bj);
        }
        quo[i - db] = c;
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut quo);
    (quo, r)
}

/// a, b with a·f + b·g = 1 over Q, or `NotCoprime`.
pub fn rational_bezout(f: &IntPolynomial, g: &IntPolynomial) -> Result<(QPoly, QPoly)> {
    let (mut r0, mut r1) = (to_q(f), to_q(g));
    let (mut s0, mut s1): (QPoly, QPoly) = (vec![Rational::from(1)], Vec::new());
    let (mut t0, mut t1): (QPoly, QPoly) = (Vec::new(), vec![Rational::from(1)]);
    while !r1.is_empty() {
        let (quo, rem) = div_rem(&r0, &r1);
        let s2 = sub_mul(&s0, &quo, &s1);
        let t2 = sub_mul(&t0, &quo, &t1);
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.len() != 1 {
        return Err(Error::NotCoprime);
    }
    let c = r0[0].clone();
    let scale = |p: QPoly| -> QPoly { p.into_iter().map(|x| x / &c).collect() };
    Ok((scale(s0), scale(t0)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindqResult {
    pub q: PrimeModulus,
    /// lcm of the Bézout coefficient denominators.
    #[serde(with = "crate::serde_dec")]
    pub d: Integer,
    pub factorization: Factorization,
    /// The factorisation of d was incomplete; q is only the largest prime
    /// factor found.
    pub lower_bound_only: bool,
    /// Degree of gcd(f mod q, Φ_m mod q).
    pub shared_degree: usize,
}

/// Prime q such that f and Φ_m share a root mod q: the largest prime factor
/// of the common denominator of the Bézout identity a·f + b·Φ_m = 1.
pub fn findq(f: &IntPolynomial, m: u64, budgets: &Budgets) -> Result<FindqResult> {
    f.require_monic()?;
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let phi = cyclotomic_poly(m);
    let (a, b) = rational_bezout(f, &phi)?;
    let mut d = Integer::from(1);
    for c in a.iter().chain(&b) {
        d.lcm_mut(c.denom());
    }
    let fac = factor(&d, budgets);
    let lower_bound_only = !fac.is_complete();
    let mut primes: Vec<&Integer> = fac.factors.iter().map(|(p, _)| p).collect();
    primes.sort_by(|x, y| y.cmp(x));
    if primes.is_empty() {
        return Err(if lower_bound_only {
            Error::FactoringBudgetExceeded(format!("no prime factor of d = {d} found within budget"))
        } else {
            Error::InvalidInput(format!("d = {d} has no prime factor"))
        });
    }
    for p in primes {
        let q = PrimeModulus::new(p.clone())?;
        let deg = shared_root_degree(f, &phi, &q);
        if deg >= 1 {
            return Ok(FindqResult {
                q,
                d: d.clone(),
                factorization: fac.clone(),
                lower_bound_only,
                shared_degree: deg,
            });
        }
        log::warn!("prime factor {p} of d does not give a shared factor; trying the next");
    }
    Err(Error::InvalidInput("no prime factor of d gives a common factor of f and the cyclotomic polynomial".into()))
}

/// deg gcd(f mod q, g mod q).
pub fn shared_root_degree(f: &IntPolynomial, g: &IntPolynomial, q: &PrimeModulus) -> usize {
    fn go<F: PrimeField>(k: &F, f: &IntPolynomial, g: &IntPolynomial) -> usize {
        let a = field::reduce_coeffs(k, f.coeffs());
        let b = field::reduce_coeffs(k, g.coeffs());
        field::gcd(k, &a, &b).len().saturating_sub(1)
    }
    match q.as_u64() {
        Some(v) => go(&SmallField::new(v), f, g),
        None => go(&BigField::new(q.value().clone()), f, g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fq(s: &str, m: u64) -> FindqResult {
        findq(&IntPolynomial::parse(s).unwrap(), m, &Budgets::default()).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(fq("x^2 + 2", 1).q.value(), &3);
        assert_eq!(fq("x^2 + 2", 2).q.value(), &3);
    }

    #[test]
    fn bezout_identity_holds() {
        let f = IntPolynomial::parse("x^5 + 3*x^2 - 7").unwrap();
        let g = cyclotomic_poly(7);
        let (a, b) = rational_bezout(&f, &g).unwrap();
        let mut acc = sub_mul(&Vec::new(), &a, &to_q(&f));
        acc = sub_mul(&acc, &b, &to_q(&g));
        // acc = −(a·f + b·g) = −1
        assert_eq!(acc, vec![Rational::from(-1)]);
    }

    #[test]
    fn not_coprime() {
        let f = IntPolynomial::parse("x^2 + x + 1").unwrap();
        assert!(matches!(findq(&f, 3, &Budgets::default()), Err(Error::NotCoprime)));
    }

    #[test]
    fn degree_1024_trinomial_order_three() {
        // x^1024 + (2^20+2)x − 2^20: the resultant with Φ₃ is 3·1099514773507
        let r = fq("x^1024 + (2^20+2)*x - 2^20", 3);
        assert_eq!(r.q.value(), &1099514773507u64);
        assert!(r.shared_degree >= 1);
        assert!(!r.lower_bound_only);
    }
}
