//! Polynomial arithmetic over a prime field F_q.
//!
//! Word-size moduli use `u64` residues with 128-bit products; larger moduli
//! fall back to arbitrary-precision residues. Algorithms are written once
//! against the [`PrimeField`] trait. Polynomials are dense coefficient
//! vectors, lowest degree first, kept trimmed.

use std::fmt::Debug;

use rand::Rng;
use rug::Integer;

use super::prime::{add_mod, inv_mod, mul_mod, sub_mod};

pub trait PrimeField: Clone + Send + Sync {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn modulus(&self) -> Integer;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_u64(&self, v: u64) -> Self::Elem;
    fn from_integer(&self, v: &Integer) -> Self::Elem;
    fn to_integer(&self, a: &Self::Elem) -> Integer;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, e: &Integer) -> Self::Elem {
        let mut acc = self.one();
        for i in (0..e.significant_bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.get_bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// Schoolbook product; implementations may override.
    fn poly_mul(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Vec<Self::Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = self.mul(x, y);
                out[i + j] = self.add(&out[i + j], &t);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallField {
    q: u64,
    /// Number of products that can be summed in a `u128` without overflow.
    lazy_terms: u128,
}

impl SmallField {
    pub fn new(q: u64) -> Self {
        assert!(q >= 2);
        let m = (q - 1) as u128;
        let lazy_terms = if m == 0 { u128::MAX } else { u128::MAX / (m * m) };
        SmallField { q, lazy_terms }
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

impl PrimeField for SmallField {
    type Elem = u64;

    fn modulus(&self) -> Integer {
        Integer::from(self.q)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.q
    }
    fn from_u64(&self, v: u64) -> u64 {
        v % self.q
    }
    fn from_integer(&self, v: &Integer) -> u64 {
        let mut t = Integer::from(v % self.q);
        if t < 0 {
            t += self.q;
        }
        t.to_u64().unwrap()
    }
    fn to_integer(&self, a: &u64) -> Integer {
        Integer::from(*a)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        add_mod(*a, *b, self.q)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        sub_mod(*a, *b, self.q)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.q)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        inv_mod(*a, self.q)
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.q)
    }

    fn poly_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let q = self.q as u128;
        if (short.len() as u128) <= self.lazy_terms {
            let mut acc = vec![0u128; a.len() + b.len() - 1];
            for (i, &x) in short.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let x = x as u128;
                for (slot, &y) in acc[i..i + long.len()].iter_mut().zip(long) {
                    *slot += x * y as u128;
                }
            }
            acc.into_iter().map(|v| (v % q) as u64).collect()
        } else {
            let mut out = vec![0u64; a.len() + b.len() - 1];
            for (i, &x) in short.iter().enumerate() {
                for (j, &y) in long.iter().enumerate() {
                    out[i + j] = add_mod(out[i + j], mul_mod(x, y, self.q), self.q);
                }
            }
            out
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigField {
    q: Integer,
}

impl BigField {
    pub fn new(q: Integer) -> Self {
        assert!(q >= 2);
        BigField { q }
    }

    fn norm(&self, mut v: Integer) -> Integer {
        v %= &self.q;
        if v < 0 {
            v += &self.q;
        }
        v
    }
}

impl PrimeField for BigField {
    type Elem = Integer;

    fn modulus(&self) -> Integer {
        self.q.clone()
    }
    fn zero(&self) -> Integer {
        Integer::new()
    }
    fn one(&self) -> Integer {
        Integer::from(1)
    }
    fn from_u64(&self, v: u64) -> Integer {
        self.norm(Integer::from(v))
    }
    fn from_integer(&self, v: &Integer) -> Integer {
        self.norm(v.clone())
    }
    fn to_integer(&self, a: &Integer) -> Integer {
        a.clone()
    }
    fn is_zero(&self, a: &Integer) -> bool {
        *a == 0
    }
    fn add(&self, a: &Integer, b: &Integer) -> Integer {
        let mut s = Integer::from(a + b);
        if s >= self.q {
            s -= &self.q;
        }
        s
    }
    fn sub(&self, a: &Integer, b: &Integer) -> Integer {
        let mut s = Integer::from(a - b);
        if s < 0 {
            s += &self.q;
        }
        s
    }
    fn mul(&self, a: &Integer, b: &Integer) -> Integer {
        self.norm(Integer::from(a * b))
    }
    fn neg(&self, a: &Integer) -> Integer {
        if *a == 0 {
            Integer::new()
        } else {
            Integer::from(&self.q - a)
        }
    }
    fn inv(&self, a: &Integer) -> Integer {
        a.clone().invert(&self.q).expect("element not invertible")
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Integer {
        // rejection sampling on uniformly random bit strings
        let bits = self.q.significant_bits();
        loop {
            let mut v = Integer::new();
            let mut remaining = bits;
            while remaining > 0 {
                let take = remaining.min(64);
                let mut word: u64 = rng.gen();
                if take < 64 {
                    word &= (1u64 << take) - 1;
                }
                v <<= take;
                v += word;
                remaining -= take;
            }
            if v < self.q {
                return v;
            }
        }
    }

    fn pow(&self, a: &Integer, e: &Integer) -> Integer {
        Integer::from(a.pow_mod_ref(e, &self.q).expect("nonnegative exponent"))
    }
}

// ---------------------------------------------------------------------------
// Generic polynomial operations

pub fn trim<F: PrimeField>(k: &F, p: &mut Vec<F::Elem>) {
    while p.last().map_or(false, |c| k.is_zero(c)) {
        p.pop();
    }
}

pub fn reduce_coeffs<F: PrimeField>(k: &F, coeffs: &[Integer]) -> Vec<F::Elem> {
    let mut v: Vec<F::Elem> = coeffs.iter().map(|c| k.from_integer(c)).collect();
    trim(k, &mut v);
    v
}

pub fn degree<F: PrimeField>(p: &[F::Elem]) -> Option<usize> {
    p.len().checked_sub(1)
}

pub fn poly_add<F: PrimeField>(k: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let z = k.zero();
    let mut out: Vec<F::Elem> = (0..n)
        .map(|i| k.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(k, &mut out);
    out
}

pub fn poly_sub<F: PrimeField>(k: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let n = a.len().max(b.len());
    let z = k.zero();
    let mut out: Vec<F::Elem> = (0..n)
        .map(|i| k.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    trim(k, &mut out);
    out
}

pub fn poly_scale<F: PrimeField>(k: &F, a: &[F::Elem], c: &F::Elem) -> Vec<F::Elem> {
    let mut out: Vec<F::Elem> = a.iter().map(|x| k.mul(x, c)).collect();
    trim(k, &mut out);
    out
}

pub fn poly_mul<F: PrimeField>(k: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let mut out = k.poly_mul(a, b);
    trim(k, &mut out);
    out
}

pub fn eval<F: PrimeField>(k: &F, p: &[F::Elem], x: &F::Elem) -> F::Elem {
    let mut acc = k.zero();
    for c in p.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

pub fn derivative<F: PrimeField>(k: &F, p: &[F::Elem]) -> Vec<F::Elem> {
    let mut out: Vec<F::Elem> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| k.mul(c, &k.from_u64(i as u64)))
        .collect();
    trim(k, &mut out);
    out
}

pub fn make_monic<F: PrimeField>(k: &F, p: &[F::Elem]) -> Vec<F::Elem> {
    match p.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = k.inv(lead);
            poly_scale(k, p, &inv)
        }
    }
}

/// Quotient and remainder of `a` by a nonzero `b`.
pub fn div_rem<F: PrimeField>(k: &F, a: &[F::Elem], b: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
    assert!(!b.is_empty(), "division by the zero polynomial");
    let db = b.len() - 1;
    if a.len() <= db {
        return (Vec::new(), a.to_vec());
    }
    let inv_lead = k.inv(&b[db]);
    let mut rem = a.to_vec();
    let mut quot = vec![k.zero(); a.len() - db];
    for i in (db..rem.len()).rev() {
        if k.is_zero(&rem[i]) {
            continue;
        }
        let c = k.mul(&rem[i], &inv_lead);
        for (j, bj) in b.iter().enumerate().take(db) {
            if !k.is_zero(bj) {
                let t = k.mul(&c, bj);
                rem[i - db + j] = k.sub(&rem[i - db + j], &t);
            }
        }
        rem[i] = k.zero();
        quot[i - db] = c;
    }
    rem.truncate(db);
    trim(k, &mut rem);
    trim(k, &mut quot);
    (quot, rem)
}

pub fn gcd<F: PrimeField>(k: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(k, &mut a);
    trim(k, &mut b);
    while !b.is_empty() {
        let (_, r) = div_rem(k, &a, &b);
        a = b;
        b = r;
    }
    make_monic(k, &a)
}

/// A monic modulus polynomial prepared for repeated reductions; only its
/// nonzero lower terms are visited, which keeps sparse moduli cheap.
#[derive(Clone, Debug)]
pub struct Modulus<F: PrimeField> {
    pub poly: Vec<F::Elem>,
    terms: Vec<(usize, F::Elem)>,
    deg: usize,
}

impl<F: PrimeField> Modulus<F> {
    pub fn new(k: &F, poly: Vec<F::Elem>) -> Self {
        let poly = make_monic(k, &poly);
        assert!(!poly.is_empty(), "zero modulus");
        let deg = poly.len() - 1;
        let terms = poly[..deg]
            .iter()
            .enumerate()
            .filter(|(_, c)| !k.is_zero(c))
            .map(|(i, c)| (i, c.clone()))
            .collect();
        Modulus { poly, terms, deg }
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn reduce(&self, k: &F, mut a: Vec<F::Elem>) -> Vec<F::Elem> {
        if a.len() > self.deg {
            for i in (self.deg..a.len()).rev() {
                if k.is_zero(&a[i]) {
                    continue;
                }
                let c = std::mem::replace(&mut a[i], k.zero());
                for (j, mj) in &self.terms {
                    let idx = i - self.deg + j;
                    let t = k.mul(&c, mj);
                    a[idx] = k.sub(&a[idx], &t);
                }
            }
            a.truncate(self.deg);
        }
        trim(k, &mut a);
        a
    }

    pub fn mulmod(&self, k: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        self.reduce(k, k.poly_mul(a, b))
    }

    pub fn powmod(&self, k: &F, base: &[F::Elem], e: &Integer) -> Vec<F::Elem> {
        let base = self.reduce(k, base.to_vec());
        let mut acc = self.reduce(k, vec![k.one()]);
        for i in (0..e.significant_bits()).rev() {
            acc = self.mulmod(k, &acc, &acc);
            if e.get_bit(i) {
                acc = self.mulmod(k, &acc, &base);
            }
        }
        acc
    }

    /// x^e modulo this polynomial.
    pub fn pow_x(&self, k: &F, e: &Integer) -> Vec<F::Elem> {
        self.powmod(k, &[k.zero(), k.one()], e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(q: u64) -> SmallField {
        SmallField::new(q)
    }

    #[test]
    fn lazy_and_eager_products_agree() {
        let k = small(18446744073709551557);
        let a: Vec<u64> = (1..40).map(|i| u64::MAX - 100 - i).collect();
        let b: Vec<u64> = (1..30).map(|i| u64::MAX - 300 - 7 * i).collect();
        let fast = k.poly_mul(&a, &b);
        let big = BigField::new(Integer::from(18446744073709551557u64));
        let ai: Vec<Integer> = a.iter().map(|&x| big.from_u64(x)).collect();
        let bi: Vec<Integer> = b.iter().map(|&x| big.from_u64(x)).collect();
        let slow = big.poly_mul(&ai, &bi);
        assert_eq!(fast.len(), slow.len());
        for (x, y) in fast.iter().zip(&slow) {
            assert_eq!(Integer::from(*x), *y);
        }
    }

    #[test]
    fn gcd_of_products() {
        let k = small(101);
        // (x - 3)(x - 5) and (x - 3)(x - 7)
        let a = poly_mul(&k, &[98, 1], &[96, 1]);
        let b = poly_mul(&k, &[98, 1], &[94, 1]);
        assert_eq!(gcd(&k, &a, &b), vec![98, 1]);
    }

    #[test]
    fn sparse_reduction_matches_division() {
        let k = small(257);
        let m = Modulus::new(&k, {
            let mut v = vec![0u64; 9];
            v[0] = 5;
            v[8] = 1;
            v
        });
        let a: Vec<u64> = (0..30).map(|i| (i * i + 3) % 257).collect();
        let (_, r) = div_rem(&k, &a, &m.poly);
        assert_eq!(m.reduce(&k, a), r);
    }

    #[test]
    fn frobenius_is_identity_on_prime_field_residues() {
        // x^q = x mod (x - c) for every c
        let k = small(97);
        for c in 0..97u64 {
            let m = Modulus::new(&k, vec![k.neg(&c), 1]);
            let r = m.pow_x(&k, &Integer::from(97));
            let mut expect = vec![c];
            trim(&k, &mut expect);
            assert_eq!(r, expect);
        }
    }
}
