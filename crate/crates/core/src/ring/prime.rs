//! Word-size modular arithmetic and primality testing.

use rug::integer::IsPrime;
use rug::Integer;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let (s, over) = a.overflowing_add(b);
    if over || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `p`; `a` must be nonzero mod `p`.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "{a} is not invertible mod {p}");
    if t < 0 {
        t += p as i128;
    }
    t as u64
}

/// Deterministic Miller-Rabin; the first twelve primes as witnesses settle
/// every 64-bit input.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Probabilistic rounds used above 2^64.
pub const PROBABILISTIC_ROUNDS: u32 = 64;

pub fn is_prime(n: &Integer) -> bool {
    if *n < 2 {
        return false;
    }
    match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None => n.is_probably_prime(PROBABILISTIC_ROUNDS) != IsPrime::No,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_sieve_below_ten_thousand() {
        let primes = crate::ring::factor::sieve(10_000);
        let mut it = primes.iter().peekable();
        for n in 0..=10_000u64 {
            let expect = it.peek().map_or(false, |&&p| u64::from(p) == n);
            if expect {
                it.next();
            }
            assert_eq!(is_prime_u64(n), expect, "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // strong pseudoprimes to several small bases
        for n in [2047u64, 1373653, 25326001, 3215031751, 2152302898747, 3474749660383, 341550071728321] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64(4294967311));
        assert!(is_prime_u64(1099514773507));
        assert!(is_prime_u64(18446744073709551557));
    }

    #[test]
    fn big_primes() {
        let m127 = (Integer::from(1) << 127u32) - 1u32;
        assert!(is_prime(&m127));
        let composite = Integer::from(&m127 * &m127);
        assert!(!is_prime(&composite));
    }

    #[test]
    fn inverses() {
        for a in 1..257u64 {
            assert_eq!(mul_mod(a, inv_mod(a, 257), 257), 1);
        }
    }
}
