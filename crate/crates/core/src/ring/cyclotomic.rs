use std::collections::BTreeMap;

use super::poly::IntPolynomial;

/// Divisors of m in ascending order.
pub fn divisors(m: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m % d == 0 {
            small.push(d);
            if d * d != m {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn euler_phi(mut m: u64) -> u64 {
    let mut result = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// The m-th cyclotomic polynomial, by exact division of x^m - 1 by the
/// cyclotomic factors of every proper divisor.
pub fn cyclotomic_poly(m: u64) -> IntPolynomial {
    assert!(m >= 1, "cyclotomic index must be positive");
    let mut cache = BTreeMap::new();
    cyclo_cached(m, &mut cache)
}

fn cyclo_cached(m: u64, cache: &mut BTreeMap<u64, IntPolynomial>) -> IntPolynomial {
    if let Some(p) = cache.get(&m) {
        return p.clone();
    }
    let mut acc = IntPolynomial::binomial(m as usize, -1);
    for d in divisors(m) {
        if d == m {
            break;
        }
        let phi_d = cyclo_cached(d, cache);
        acc = acc
            .div_exact(&phi_d)
            .expect("cyclotomic factors are monic")
            .expect("cyclotomic factor divides x^m - 1");
    }
    cache.insert(m, acc.clone());
    acc
}
