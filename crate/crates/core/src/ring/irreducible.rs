use rug::Integer;
use serde::{Deserialize, Serialize};

use super::factor::small_primes;
use super::field::{self, Modulus, SmallField};
use super::poly::IntPolynomial;
use super::prime::is_prime;

/// Odd primes tried by the modular sweep.
pub const SWEEP_PRIMES: [u64; 8] = [3, 5, 7, 11, 13, 17, 19, 23];

/// Degree above which the modular sweep is skipped; each sweep costs
/// about n/2 Frobenius steps of O(n^2) work.
pub const DEFAULT_SWEEP_DEGREE_CAP: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IrreducibilityVerdict {
    /// Irreducible modulo `prime`, hence over the integers.
    IrreducibleCertified { prime: u64 },
    EisensteinCertified {
        #[serde(with = "crate::serde_dec")]
        prime: Integer,
    },
    /// No certificate found. Says nothing about reducibility.
    Unknown,
}

impl IrreducibilityVerdict {
    pub fn is_certified(&self) -> bool {
        !matches!(self, IrreducibilityVerdict::Unknown)
    }
}

pub fn is_probably_irreducible(f: &IntPolynomial) -> IrreducibilityVerdict {
    is_probably_irreducible_with(f, DEFAULT_SWEEP_DEGREE_CAP)
}

pub fn is_probably_irreducible_with(f: &IntPolynomial, sweep_degree_cap: usize) -> IrreducibilityVerdict {
    if !f.is_monic() || f.degree() == 0 {
        return IrreducibilityVerdict::Unknown;
    }
    if f.degree() == 1 {
        return IrreducibilityVerdict::IrreducibleCertified { prime: SWEEP_PRIMES[0] };
    }
    if let Some(p) = eisenstein_prime(f) {
        return IrreducibilityVerdict::EisensteinCertified { prime: p };
    }
    if f.degree() <= sweep_degree_cap {
        for p in SWEEP_PRIMES {
            if irreducible_mod_p(f, p) {
                return IrreducibilityVerdict::IrreducibleCertified { prime: p };
            }
        }
    }
    IrreducibilityVerdict::Unknown
}

/// Smallest prime p dividing every non-leading coefficient with p^2 not
/// dividing the constant term, among the primes found by trial division.
fn eisenstein_prime(f: &IntPolynomial) -> Option<Integer> {
    let n = f.degree();
    let c0 = f.coeff(0);
    if c0 == 0 {
        return None;
    }
    let mut g = Integer::new();
    for c in &f.coeffs()[..n] {
        g.gcd_mut(c);
    }
    if g <= 1 {
        return None;
    }
    let works = |p: &Integer| !c0.is_divisible(&Integer::from(p.square_ref()));
    let mut rest = g;
    for &p in small_primes() {
        if rest == 1 {
            break;
        }
        if rest.is_divisible_u(p) {
            let pz = Integer::from(p);
            if works(&pz) {
                return Some(pz);
            }
            while rest.is_divisible_u(p) {
                rest.div_exact_u_mut(p);
            }
        }
    }
    (rest > 1 && is_prime(&rest) && works(&rest)).then_some(rest)
}

/// Distinct-degree test: f is irreducible mod p iff it has no factor of
/// degree at most n/2 modulo p.
pub fn irreducible_mod_p(f: &IntPolynomial, p: u64) -> bool {
    let k = SmallField::new(p);
    let fp = field::reduce_coeffs(&k, f.coeffs());
    let n = f.degree();
    if fp.len() != n + 1 {
        return false;
    }
    let m = Modulus::new(&k, fp.clone());
    let x = m.reduce(&k, vec![0, 1]);
    let pz = Integer::from(p);
    let mut h = x.clone();
    for _ in 1..=n / 2 {
        h = m.powmod(&k, &h, &pz);
        let g = field::gcd(&k, &fp, &field::poly_sub(&k, &h, &x));
        if g.len() > 1 {
            return false;
        }
    }
    true
}
