use rug::ops::Pow;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::data::EmbeddingData;
use crate::error::{Error, Result};
use crate::ring::PrimeModulus;

pub const POWER_ITERATION_TOL: f64 = 1e-10;
pub const POWER_ITERATION_MAX: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Largest singular value of M⁻¹.
    pub rho: f64,
    /// ρ·det(M)^(1/n).
    pub rho_prime: f64,
    /// Largest singular value of M.
    pub norm_m: f64,
    /// ‖M‖₂‖M⁻¹‖₂.
    pub condition_number: f64,
    pub tau: Option<f64>,
    /// ρ′ < q/(4wn), when w and q were supplied.
    pub theorem1_bound_met: Option<bool>,
    pub iterations: usize,
}

/// Largest singular value of the row-major `rows x cols` matrix `a`, by
/// power iteration on AᵀA. Returns the value and the iteration count.
pub fn largest_singular_value(a: &[f64], rows: usize, cols: usize) -> Result<(f64, usize)> {
    assert_eq!(a.len(), rows * cols);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok((0.0, 0));
    }
    let a: Vec<f64> = a.iter().map(|x| x / scale).collect();
    // deterministic start with no special alignment to any basis vector
    let mut v: Vec<f64> = (0..cols).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64).collect();
    normalize(&mut v);
    let mut u = vec![0.0; rows];
    let mut prev = 0.0f64;
    let mut trace = Vec::new();
    for it in 1..=POWER_ITERATION_MAX {
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = a[i * cols..(i + 1) * cols].iter().zip(&v).map(|(x, y)| x * y).sum();
        }
        let lambda: f64 = u.iter().map(|x| x * x).sum();
        let mut w = vec![0.0; cols];
        for (i, ui) in u.iter().enumerate() {
            for (wj, aij) in w.iter_mut().zip(&a[i * cols..(i + 1) * cols]) {
                *wj += aij * ui;
            }
        }
        normalize(&mut w);
        v = w;
        let change = if lambda > 0.0 { (lambda - prev).abs() / lambda } else { 0.0 };
        trace.push(change);
        if trace.len() > 16 {
            trace.remove(0);
        }
        if it > 1 && change < POWER_ITERATION_TOL {
            return Ok((lambda.sqrt() * scale, it));
        }
        prev = lambda;
    }
    Err(Error::PowerIterationDiverged {
        iterations: POWER_ITERATION_MAX,
        last_change: *trace.last().unwrap_or(&f64::NAN),
        trace,
    })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Spectral metrics from explicit M, M⁻¹ and |det M|.
pub fn spectral_from_parts(m: &[f64], m_inv: &[f64], n: usize, det_root: f64) -> Result<SpectralReport> {
    let (norm_m, it1) = largest_singular_value(m, n, n)?;
    let (rho, it2) = largest_singular_value(m_inv, n, n)?;
    Ok(SpectralReport {
        rho,
        rho_prime: rho * det_root,
        norm_m,
        condition_number: norm_m * rho,
        tau: None,
        theorem1_bound_met: None,
        iterations: it1 + it2,
    })
}

pub fn spectral_stats(emb: &EmbeddingData, w: Option<f64>, q: Option<&PrimeModulus>) -> Result<SpectralReport> {
    let n = emb.n();
    let mut rep = spectral_from_parts(&emb.m.to_f64(), &emb.m_inv.to_f64(), n, emb.det_root().to_f64())?;
    if let (Some(w), Some(q)) = (w, q) {
        let qf = q.value().to_f64();
        rep.tau = Some(tau(n, q.value(), w));
        rep.theorem1_bound_met = Some(rep.rho_prime < qf / (4.0 * w * n as f64));
    }
    Ok(rep)
}

/// Closed form for the normalised spectral norm of x^n + q − 1, exactly as
/// printed: 2^(−r2/n)·√((q−1)^(1−1/n)), with r2 = ⌊n/2⌋.
pub fn family_rho_prime(n: usize, q: &Integer) -> f64 {
    let prec = 128;
    let r2 = (n / 2) as f64;
    let nf = n as f64;
    let qm1 = Float::with_val(prec, Integer::from(q - 1u32));
    let lhs = Float::with_val(prec, 2).pow(Float::with_val(prec, -r2 / nf));
    let rhs = qm1.pow(Float::with_val(prec, (1.0 - 1.0 / nf) / 2.0));
    Float::with_val(prec, lhs * rhs).to_f64()
}

/// τ = q / (2√2·w·n·(q−1)^(1/2 − 1/(2n))).
pub fn tau(n: usize, q: &Integer, w: f64) -> f64 {
    let prec = 128;
    let nf = Float::with_val(prec, n);
    let qf = Float::with_val(prec, q);
    let qm1 = Float::with_val(prec, Integer::from(q - 1u32));
    let exponent = Float::with_val(prec, 0.5) - Float::with_val(prec, 1) / Float::with_val(prec, 2 * n);
    let mut denom = Float::with_val(prec, 8).sqrt();
    denom *= Float::with_val(prec, w);
    denom *= nf;
    denom *= qm1.pow(exponent);
    Float::with_val(prec, qf / denom).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_embedding;
    use crate::ring::IntPolynomial;

    #[test]
    fn scaled_identity() {
        let n = 5;
        let c = 3.0;
        let mut m = vec![0.0; n * n];
        let mut mi = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = c;
            mi[i * n + i] = 1.0 / c;
        }
        let r = spectral_from_parts(&m, &mi, n, c).unwrap();
        assert!((r.rho - 1.0 / c).abs() < 1e-12);
        assert!((r.rho_prime - 1.0).abs() < 1e-12);
        assert!((r.condition_number - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x2_plus_2() {
        let e = build_embedding(&IntPolynomial::parse("x^2 + 2").unwrap(), 300).unwrap();
        let r = spectral_stats(&e, None, None).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-9);
        assert!((r.rho_prime - 2f64.powf(0.25)).abs() < 1e-9);
    }

    #[test]
    fn tau_table() {
        let cases = [
            (192usize, 4093u64, 8.87, 0.0136),
            (256, 4093, 8.35, 0.0108),
            (320, 4093, 8.00, 0.0090),
            (512, 12289, 12.18, 0.0063),
            (1024, 2147483647, 3.192, 5.0654),
        ];
        for (n, q, w, expect) in cases {
            let t = tau(n, &Integer::from(q), w);
            assert!((t - expect).abs() <= 1e-4, "tau({n}, {q}, {w}) = {t}");
        }
    }

    #[test]
    fn family_closed_form_as_printed() {
        assert!((family_rho_prime(2, &Integer::from(3)) - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((family_rho_prime(3, &Integer::from(3)) - 1.0).abs() < 1e-15);
    }
}
