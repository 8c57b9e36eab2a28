//! Shared fixtures for the benchmarks.

use weakring::sampling::{gen_polylwe_samples, random_secret, GaussianSpec, LweSampleSet, Truncation};
use weakring::{IntPolynomial, PrimeModulus};

pub const SEED: u64 = 0xbe_7c4;

/// x^n + q - 1, which has the root 1 mod q.
pub fn family_poly(n: usize, q: u64) -> IntPolynomial {
    IntPolynomial::binomial(n, q - 1)
}

/// Genuine Poly-LWE samples for x^n + q - 1 with σ = 3.192/√(2π).
pub fn family_samples(n: usize, q: u64, ell: usize) -> LweSampleSet {
    let q = PrimeModulus::new(q).expect("prime");
    let f = IntPolynomial::binomial(n, q.value().clone() - 1u32);
    let spec = GaussianSpec::from_width(3.192, Truncation::Hard2sigma).unwrap();
    let secret = random_secret(&q, n, SEED).unwrap();
    gen_polylwe_samples(&f, &q, &spec, &secret, ell, SEED + 1).unwrap()
}
