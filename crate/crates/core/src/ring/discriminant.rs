use rug::ops::Pow;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::poly::IntPolynomial;
use crate::embedding::bigfloat::BigComplex;
use crate::embedding::complex_roots;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminantMode {
    /// n^n·|c|^(n−1) for f = x^n + c.
    ExactFamily,
    /// ∏_{i<j} |α_i − α_j|² over high-precision complex roots.
    Numeric,
}

/// Largest relative error bound accepted in numeric mode.
pub const NUMERIC_TOLERANCE: f64 = 1.0 / 4_294_967_296.0;

#[derive(Clone, Debug)]
pub struct DiscriminantAbs {
    pub value: Float,
    pub relative_error_bound: f64,
    pub exact: Option<Integer>,
}

pub fn discriminant_abs(f: &IntPolynomial, mode: DiscriminantMode, precision_bits: u32) -> Result<DiscriminantAbs> {
    f.require_monic()?;
    match mode {
        DiscriminantMode::ExactFamily => {
            let (n, c) = f
                .as_binomial()
                .ok_or_else(|| Error::InvalidInput(format!("{f} is not of the form x^n + c")))?;
            let n32 = n as u32;
            let exact = Integer::from(n).pow(n32) * Integer::from(c.abs_ref()).pow(n32 - 1);
            Ok(DiscriminantAbs {
                value: Float::with_val(precision_bits, &exact),
                relative_error_bound: 0.0,
                exact: Some(exact),
            })
        }
        DiscriminantMode::Numeric => numeric(f, precision_bits),
    }
}

fn numeric(f: &IntPolynomial, prec: u32) -> Result<DiscriminantAbs> {
    let n = f.degree();
    let roots = complex_roots(f, prec)?.all_roots();
    let df = f.derivative();

    // inclusion radii n·|f(z)/f'(z)|
    let radii: Vec<f64> = roots
        .iter()
        .map(|z| {
            let fz = eval(f, z).abs();
            let dz = eval(&df, z).abs();
            Float::with_val(prec, fz / dz).to_f64() * n as f64
        })
        .collect();

    let mut value = Float::with_val(prec, 1);
    let mut rel = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = roots[i].sub(&roots[j]).norm_sqr();
            let d = d2.to_f64().sqrt();
            rel += 2.0 * (radii[i] + radii[j]) / d;
            value *= d2;
        }
    }
    rel += (n * n) as f64 * 2f64.powi(-(prec as i32) + 4);
    if !(rel <= NUMERIC_TOLERANCE) {
        return Err(Error::PrecisionInsufficient(format!(
            "discriminant relative error bound {rel:.3e} exceeds 2^-32"
        )));
    }
    Ok(DiscriminantAbs {
        value,
        relative_error_bound: rel,
        exact: None,
    })
}

fn eval(f: &IntPolynomial, z: &BigComplex) -> BigComplex {
    let prec = z.prec();
    let mut acc = BigComplex::zero(prec);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(z).add_real(&Float::with_val(prec, c));
    }
    acc
}
