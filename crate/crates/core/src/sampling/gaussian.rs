use rand::Rng;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{IntPolynomial, PrimeModulus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Coefficients are redrawn until |e_i| ≤ ⌈2σ⌉.
    Hard2sigma,
    /// No truncation; oversized norms are only reported.
    NormWarnOnly,
}

/// Gaussian error parameters. `sigma` is the standard deviation and
/// `width_w = √(2π)·sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub sigma: f64,
    pub width_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_prime: Option<f64>,
    pub truncation: Truncation,
}

pub fn sqrt_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).sqrt()
}

impl GaussianSpec {
    /// σ = 0 is accepted and gives the point mass at zero.
    pub fn from_sigma(sigma: f64, truncation: Truncation) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidInput(format!("sigma must be a finite non-negative real, got {sigma}")));
        }
        Ok(GaussianSpec {
            sigma,
            width_w: sqrt_2pi() * sigma,
            sigma_prime: None,
            truncation,
        })
    }

    pub fn from_width(w: f64, truncation: Truncation) -> Result<Self> {
        Self::from_sigma(w / sqrt_2pi(), truncation)
    }

    /// Sets σ′ = σ·det_root.
    pub fn with_det_root(mut self, det_root: f64) -> Self {
        self.sigma_prime = Some(self.sigma * det_root);
        self
    }

    /// The parameter the lattice sampler draws with.
    pub fn effective_sigma(&self) -> f64 {
        self.sigma_prime.unwrap_or(self.sigma)
    }

    /// ⌈2σ⌉.
    pub fn bound(&self) -> i64 {
        (2.0 * self.sigma).ceil() as i64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::schema("spec.sigma", "must be a finite non-negative real"));
        }
        let expect = sqrt_2pi() * self.sigma;
        if (self.width_w - expect).abs() > 1e-12 * expect.max(f64::MIN_POSITIVE) {
            return Err(Error::schema("spec.width_w", "must equal sqrt(2*pi)*sigma"));
        }
        if let Some(sp) = self.sigma_prime {
            if !(sp.is_finite() && sp >= 0.0) {
                return Err(Error::schema("spec.sigma_prime", "must be a finite non-negative real"));
            }
        }
        Ok(())
    }
}

/// Cumulative table for the integer-rounded Gaussian on [−⌈6σ⌉, ⌈6σ⌉],
/// P(k) = Φ((k + ½)/σ) − Φ((k − ½)/σ).
#[derive(Clone, Debug)]
pub struct CoeffSampler {
    lo: i64,
    cdf: Vec<f64>,
    bound: i64,
    truncate: bool,
}

impl CoeffSampler {
    pub fn new(spec: &GaussianSpec) -> Self {
        let sigma = spec.sigma;
        let truncate = spec.truncation == Truncation::Hard2sigma;
        if sigma == 0.0 {
            return CoeffSampler {
                lo: 0,
                cdf: vec![1.0],
                bound: 0,
                truncate,
            };
        }
        let t = (6.0 * sigma).ceil() as i64;
        let phi = |x: f64| {
            let z = Float::with_val(64, x / (sigma * std::f64::consts::SQRT_2));
            0.5 * (1.0 + z.erf().to_f64())
        };
        let mut cdf = Vec::with_capacity((2 * t + 1) as usize);
        let base = phi(-t as f64 - 0.5);
        let total = phi(t as f64 + 0.5) - base;
        for k in -t..=t {
            cdf.push((phi(k as f64 + 0.5) - base) / total);
        }
        *cdf.last_mut().unwrap() = 1.0;
        CoeffSampler {
            lo: -t,
            cdf,
            bound: spec.bound(),
            truncate,
        }
    }

    /// Probability mass of k in the untruncated table.
    pub fn table_mass(&self, k: i64) -> f64 {
        let i = k - self.lo;
        if i < 0 || i as usize >= self.cdf.len() {
            return 0.0;
        }
        let i = i as usize;
        self.cdf[i] - if i == 0 { 0.0 } else { self.cdf[i - 1] }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        loop {
            let u: f64 = rng.gen();
            let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
            let k = self.lo + i as i64;
            if !self.truncate || k.abs() <= self.bound {
                return k;
            }
        }
    }

    pub fn draw_vec<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<i64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// n coefficients of the integer-rounded Gaussian, truncated per `spec`.
pub fn sample_coeff_gaussian<R: Rng + ?Sized>(spec: &GaussianSpec, n: usize, rng: &mut R) -> IntPolynomial {
    let v = CoeffSampler::new(spec).draw_vec(n, rng);
    IntPolynomial::new(v.into_iter().map(Integer::from).collect())
}

pub fn uniform_residues<R: Rng + ?Sized>(q: u64, n: usize, rng: &mut R) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

/// A uniform residue in [0, q) for arbitrary q, by rejection on bit strings.
pub fn uniform_integer<R: Rng + ?Sized>(q: &Integer, rng: &mut R) -> Integer {
    if let Some(q) = q.to_u64() {
        return Integer::from(rng.gen_range(0..q));
    }
    let bits = q.significant_bits();
    let words = bits.div_ceil(64) as usize;
    let top = bits - 64 * (words as u32 - 1);
    loop {
        let mut digits: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
        if top < 64 {
            digits[words - 1] &= (1u64 << top) - 1;
        }
        let v = Integer::from_digits(&digits, rug::integer::Order::Lsf);
        if &v < q {
            return v;
        }
    }
}

/// n coefficients uniform in [0, q).
pub fn sample_uniform_poly<R: Rng + ?Sized>(q: &PrimeModulus, n: usize, rng: &mut R) -> IntPolynomial {
    IntPolynomial::new((0..n).map(|_| uniform_integer(q.value(), rng)).collect())
}
