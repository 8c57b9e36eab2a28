#![allow(dead_code)]

use rug::Integer;
use weakring::IntPolynomial;

/// Determinant of an integer matrix by fraction-free Bareiss elimination.
pub fn bareiss_det(mut a: Vec<Vec<Integer>>) -> Integer {
    let n = a.len();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Res(f, g) from the Sylvester matrix.
pub fn resultant(f: &IntPolynomial, g: &IntPolynomial) -> Integer {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n;
    let mut s = vec![vec![Integer::new(); size]; size];
    let fc: Vec<Integer> = f.coeffs().iter().rev().cloned().collect();
    let gc: Vec<Integer> = g.coeffs().iter().rev().cloned().collect();
    for i in 0..n {
        for (j, c) in fc.iter().enumerate() {
            s[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in gc.iter().enumerate() {
            s[n + i][i + j] = c.clone();
        }
    }
    bareiss_det(s)
}

/// |disc f| = |Res(f, f′)| for monic f.
pub fn disc_abs_exact(f: &IntPolynomial) -> Integer {
    resultant(f, &f.derivative()).abs()
}

/// Odd primes below 10⁴.
pub fn small_primes() -> Vec<u64> {
    (3..10_000u64).filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

pub fn prime_at_or_below(mut p: u64) -> u64 {
    while !(p >= 2 && (2..).take_while(|d: &u64| d * d <= p).all(|d| p % d != 0)) {
        p -= 1;
    }
    p
}

#[test]
fn resultant_oracle_examples() {
    // disc(x² + 2) = −8, disc(x³ + x + 1) = −31
    assert_eq!(disc_abs_exact(&IntPolynomial::parse("x^2 + 2").unwrap()), 8);
    assert_eq!(disc_abs_exact(&IntPolynomial::parse("x^3 + x + 1").unwrap()), 31);
    // n^n c^(n−1) for x^n + c
    assert_eq!(disc_abs_exact(&IntPolynomial::parse("x^5 + 3").unwrap()), 3125 * 81);
}
