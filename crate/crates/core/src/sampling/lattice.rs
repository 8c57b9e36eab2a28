use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::gaussian::{sqrt_2pi, GaussianSpec};
use super::rng::derive_stream;
use crate::embedding::{EmbeddingData, FloatMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    BabaiRoundOff,
}

#[derive(Clone, Debug)]
pub struct LatticeDraw {
    /// M·⌊c⌉.
    pub vector: Vec<Float>,
    /// ⌊c⌉, the power-basis coordinates of the error.
    pub coords: Vec<Integer>,
}

/// Spherical continuous Gaussian of standard deviation σ′ (σ when no σ′ is
/// set), discretised to the lattice M·Zⁿ by Babai round-off.
pub fn sample_lattice_gaussian<R: Rng + ?Sized>(emb: &EmbeddingData, spec: &GaussianSpec, rng: &mut R) -> Result<LatticeDraw> {
    round_off_sample(&emb.m, &emb.m_inv, spec.effective_sigma(), rng)
}

pub fn round_off_sample<R: Rng + ?Sized>(m: &FloatMatrix, m_inv: &FloatMatrix, sigma: f64, rng: &mut R) -> Result<LatticeDraw> {
    let n = m.rows();
    let prec = m.prec();
    let x: Vec<Float> = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            Float::with_val(prec, z * sigma)
        })
        .collect();
    let c = m_inv.mul_vec(&x);

    let back = m.mul_vec(&c);
    let mut err = Float::new(prec);
    let mut norm = Float::new(prec);
    for (b, xi) in back.iter().zip(&x) {
        err += Float::with_val(prec, b - xi).square();
        norm += Float::with_val(prec, xi * xi);
    }
    let tol = Float::with_val(prec, 1) >> (prec / 2);
    if err.sqrt() > Float::with_val(prec, norm.sqrt() * &tol) {
        return Err(Error::PrecisionInsufficient(format!(
            "lattice round trip exceeds 2^-{} relative at {prec} bits",
            prec / 2
        )));
    }

    let coords: Vec<Integer> = c
        .iter()
        .map(|ci| Float::with_val(prec, ci.round_ref()).to_integer().expect("finite"))
        .collect();
    let vector = m.mul_int_vec(&coords);
    Ok(LatticeDraw { vector, coords })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub draws: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    /// Fraction of draws with ratio above 1.
    pub fraction_over: f64,
    pub warn: bool,
}

/// Norms of `draws` lattice samples relative to √n·σ·√(2π).
pub fn error_norm_stats(draws: usize, emb: &EmbeddingData, spec: &GaussianSpec, seed: u64) -> Result<NormStats> {
    norm_stats_for(&emb.m, &emb.m_inv, spec.effective_sigma(), draws, seed)
}

pub fn norm_stats_for(m: &FloatMatrix, m_inv: &FloatMatrix, sigma: f64, draws: usize, seed: u64) -> Result<NormStats> {
    if draws == 0 {
        return Err(Error::InvalidInput("error_norm_stats needs at least one draw".into()));
    }
    let n = m.rows();
    let scale = (n as f64).sqrt() * sigma * sqrt_2pi();
    let norms = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, "norm-test", i as u64);
            let d = round_off_sample(m, m_inv, sigma, &mut rng)?;
            let sq = d.vector.iter().fold(Float::new(m.prec()), |acc, v| acc + Float::with_val(m.prec(), v * v));
            Ok(sq.sqrt().to_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = norms.iter().map(|&v| if scale > 0.0 { v / scale } else { 0.0 }).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let over = ratios.iter().filter(|&&r| r > 1.0).count();
    Ok(NormStats {
        draws,
        mean_ratio: ratios.iter().sum::<f64>() / draws as f64,
        max_ratio,
        fraction_over: over as f64 / draws as f64,
        warn: max_ratio > 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_embedding;
    use crate::ring::IntPolynomial;
    use crate::sampling::gaussian::Truncation;

    #[test]
    fn identity_lattice_is_coordinatewise_rounding() {
        let prec = 128;
        let id = FloatMatrix::identity(6, prec);
        let mut r1 = derive_stream(9, "t", 0);
        let mut r2 = derive_stream(9, "t", 0);
        let d = round_off_sample(&id, &id, 1.0, &mut r1).unwrap();
        for (v, c) in d.vector.iter().zip(&d.coords) {
            let z: f64 = r2.sample(StandardNormal);
            assert_eq!(*c, z.round() as i64);
            assert_eq!(*v, *c);
        }
    }

    #[test]
    fn zero_sigma_gives_zero() {
        let id = FloatMatrix::identity(4, 64);
        let s = norm_stats_for(&id, &id, 0.0, 5, 1).unwrap();
        assert_eq!(s.mean_ratio, 0.0);
        assert_eq!(s.max_ratio, 0.0);
        assert!(!s.warn);
    }

    #[test]
    fn identity_mean_ratio() {
        let id = FloatMatrix::identity(4, 64);
        let s = norm_stats_for(&id, &id, 1.0, 20_000, 3).unwrap();
        // E‖N(0, I₄)‖ = √2·Γ(5/2)/Γ(2)
        let chi = 2f64.sqrt() * 0.75 * std::f64::consts::PI.sqrt();
        let chi_oracle = chi / (2.0 * sqrt_2pi());
        // rounded coordinates: exact expectation over the rounded mass
        let p = |k: i64| {
            let phi = |x: f64| 0.5 * (1.0 + Float::with_val(64, x / 2f64.sqrt()).erf().to_f64());
            phi(k as f64 + 0.5) - phi(k as f64 - 0.5)
        };
        let mut rounded = 0.0;
        let r = 7i64;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        let norm = ((a * a + b * b + c * c + d * d) as f64).sqrt();
                        rounded += norm * p(a) * p(b) * p(c) * p(d);
                    }
                }
            }
        }
        let rounded_oracle = rounded / (2.0 * sqrt_2pi());
        assert!((s.mean_ratio - rounded_oracle).abs() < 0.02 * rounded_oracle, "{} vs {}", s.mean_ratio, rounded_oracle);
        // rounding adds variance 1/12 per coordinate over the continuous chi value
        assert!((s.mean_ratio - chi_oracle).abs() < 0.06 * chi_oracle);
    }

    #[test]
    fn x2_plus_2_covariance() {
        let emb = build_embedding(&IntPolynomial::parse("x^2 + 2").unwrap(), 128).unwrap();
        let spec = GaussianSpec::from_sigma(10.0, Truncation::NormWarnOnly).unwrap();
        let draws = 10_000;
        let mut cov = [[0.0f64; 2]; 2];
        for i in 0..draws {
            let mut rng = derive_stream(11, "cov", i);
            let v: Vec<f64> = sample_lattice_gaussian(&emb, &spec, &mut rng)
                .unwrap()
                .vector
                .iter()
                .map(|x| x.to_f64())
                .collect();
            for a in 0..2 {
                for b in 0..2 {
                    cov[a][b] += v[a] * v[b] / draws as f64;
                }
            }
        }
        assert!((cov[0][0] - 100.0).abs() < 15.0, "{cov:?}");
        assert!((cov[1][1] - 100.0).abs() < 15.0, "{cov:?}");
        assert!(cov[0][1].abs() < 15.0, "{cov:?}");
    }

    #[test]
    fn n128_norm_check() {
        // Round-off on the power-of-two cyclotomic lattice, which is a scaled
        // orthogonal basis, so the discretised norm tracks the continuous one.
        let emb = build_embedding(&IntPolynomial::binomial(128, 1), 200).unwrap();
        let spec = GaussianSpec::from_width(8.0, Truncation::NormWarnOnly)
            .unwrap()
            .with_det_root(emb.det_root().to_f64());
        let s = error_norm_stats(1000, &emb, &spec, 5).unwrap();
        assert!(s.fraction_over < 0.01, "{s:?}");
    }
}
