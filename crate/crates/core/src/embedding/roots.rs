//! Complex roots of an integer polynomial at a requested precision.
//!
//! Aberth-Ehrlich iteration in double precision locates all roots; each is
//! then refined by Newton's method in MPFR arithmetic. Near the unit circle
//! and beyond, the f64 stage evaluates the reversed polynomial at 1/z so that
//! z^n never overflows.

use std::cmp::Ordering;

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::bigfloat::BigComplex;
use crate::error::{Error, Result};
use crate::ring::IntPolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Real,
    ComplexRe,
    ComplexIm,
}

/// Roots ordered for the embedding: real roots ascending, then one root
/// from each conjugate pair (positive imaginary part), ordered by real part
/// and then imaginary part.
#[derive(Clone, Debug)]
pub struct OrderedRoots {
    pub roots: Vec<BigComplex>,
    pub r1: usize,
    pub r2: usize,
    pub row_key: Vec<RowKind>,
}

impl OrderedRoots {
    /// All n roots, with the conjugates of the stored upper-half roots appended.
    pub fn all_roots(&self) -> Vec<BigComplex> {
        let mut v = self.roots.clone();
        v.extend(self.roots[self.r1..].iter().map(|z| z.conj()));
        v
    }
}

fn two_pow(prec: u32, e: i32) -> Float {
    let one = Float::with_val(prec, 1);
    if e >= 0 {
        one << e as u32
    } else {
        one >> (-e) as u32
    }
}

struct Sparse {
    /// (exponent, coefficient), exponents descending.
    terms: Vec<(usize, Float)>,
    dterms: Vec<(usize, Float)>,
}

impl Sparse {
    fn new(f: &IntPolynomial, prec: u32) -> Self {
        let mut terms: Vec<(usize, Float)> = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| (i, Float::with_val(prec, c)))
            .collect();
        terms.reverse();
        let dterms = terms
            .iter()
            .filter(|(i, _)| *i > 0)
            .map(|(i, c)| (i - 1, Float::with_val(prec, c * (*i as u32))))
            .collect();
        Sparse { terms, dterms }
    }

    fn eval(terms: &[(usize, Float)], z: &BigComplex) -> BigComplex {
        let p = z.prec();
        let Some((top, c)) = terms.first() else {
            return BigComplex::zero(p);
        };
        let mut acc = BigComplex::from_real(c.clone());
        let mut prev = *top;
        for (e, c) in &terms[1..] {
            acc = acc.mul(&z.pow(prev - e)).add_real(c);
            prev = *e;
        }
        if prev > 0 {
            acc = acc.mul(&z.pow(prev));
        }
        acc
    }
}

/// All complex roots of the squarefree polynomial `f` to `prec` bits.
pub fn complex_roots(f: &IntPolynomial, prec: u32) -> Result<OrderedRoots> {
    f.require_monic()?;
    let n = f.degree();
    if n == 0 {
        return Err(Error::InvalidInput("constant polynomial has no roots".into()));
    }
    let approx = aberth_f64(f)?;
    let sparse = Sparse::new(f, prec);
    let l1 = Float::with_val(prec, f.l1_norm());
    let residual_tol = Float::with_val(prec, &l1 * &two_pow(prec, -(prec as i32) / 2));

    let mut polished = Vec::with_capacity(n);
    for z0 in &approx {
        polished.push(newton_polish(&sparse, z0, prec, &residual_tol)?);
    }

    check_separation(&polished, prec)?;
    order_roots(polished, prec)
}

fn newton_polish(s: &Sparse, z0: &Complex64, prec: u32, residual_tol: &Float) -> Result<BigComplex> {
    let mut z = BigComplex::from_f64(prec, z0.re, z0.im);
    let step_tol = two_pow(prec, -(prec as i32) + 8);
    for _ in 0..64 {
        let fz = Sparse::eval(&s.terms, &z);
        let dz = Sparse::eval(&s.dterms, &z);
        if dz.norm_sqr().is_zero() {
            return Err(Error::PrecisionInsufficient(format!(
                "derivative vanishes near root {z0}; repeated root?"
            )));
        }
        let step = fz.div(&dz);
        z = z.sub(&step);
        let scale = Float::with_val(prec, z.abs().max(&Float::with_val(prec, 1)));
        if step.abs() <= Float::with_val(prec, &step_tol * &scale) {
            break;
        }
    }
    let fz = Sparse::eval(&s.terms, &z);
    if fz.abs() > *residual_tol {
        return Err(Error::PrecisionInsufficient(format!(
            "residual at root near {z0} is {:.3e}",
            fz.abs().to_f64()
        )));
    }
    Ok(z)
}

fn check_separation(roots: &[BigComplex], prec: u32) -> Result<()> {
    let approx: Vec<Complex64> = roots.iter().map(|z| z.to_f64()).collect();
    let tol = two_pow(prec, -(prec as i32) / 4);
    for i in 0..approx.len() {
        for j in i + 1..approx.len() {
            let d = (approx[i] - approx[j]).norm();
            let scale = approx[i].norm().max(1.0);
            if d < 1e-6 * scale {
                let exact = roots[i].sub(&roots[j]).abs();
                if exact < Float::with_val(prec, &tol * scale) {
                    return Err(Error::RepeatedRootSuspected(i, j));
                }
            }
        }
    }
    Ok(())
}

fn order_roots(roots: Vec<BigComplex>, prec: u32) -> Result<OrderedRoots> {
    let n = roots.len();
    let real_tol = two_pow(prec, -(prec as i32) / 2);
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for mut z in roots {
        let scale = z.abs().max(&Float::with_val(prec, 1));
        let t = Float::with_val(prec, &real_tol * &scale);
        if Float::with_val(prec, z.im.abs_ref()) < t {
            z.im = Float::new(prec);
            reals.push(z);
        } else if z.im > 0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::PrecisionInsufficient(format!(
            "{} roots above the real axis but {} below",
            upper.len(),
            lower.len()
        )));
    }
    // every upper root must have its conjugate among the lower ones
    let mut used = vec![false; lower.len()];
    for u in &upper {
        let uc = u.conj().to_f64();
        let best = lower
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| {
                let da = (a.1.to_f64() - uc).norm();
                let db = (b.1.to_f64() - uc).norm();
                da.partial_cmp(&db).unwrap_or(Ordering::Equal)
            })
            .map(|(i, _)| i);
        let Some(i) = best else {
            return Err(Error::PrecisionInsufficient("conjugate pairing failed".into()));
        };
        let d = u.conj().sub(&lower[i]).abs();
        let scale = u.abs().max(&Float::with_val(prec, 1));
        if d > Float::with_val(prec, &real_tol * &scale) {
            return Err(Error::PrecisionInsufficient(format!(
                "conjugate of root {} not found within tolerance",
                u.to_f64()
            )));
        }
        used[i] = true;
    }

    reals.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal));
    upper.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    });
    let r1 = reals.len();
    let r2 = upper.len();
    debug_assert_eq!(r1 + 2 * r2, n);
    let mut row_key = vec![RowKind::Real; r1];
    row_key.extend(std::iter::repeat(RowKind::ComplexRe).take(r2));
    row_key.extend(std::iter::repeat(RowKind::ComplexIm).take(r2));
    reals.extend(upper);
    Ok(OrderedRoots {
        roots: reals,
        r1,
        r2,
        row_key,
    })
}

/// Newton correction p(z)/p'(z) in double precision.
fn newton_ratio(c: &[f64], z: Complex64) -> Complex64 {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = Complex64::new(c[n], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for i in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + c[i];
        }
        p / dp
    } else {
        // p(z) = z^n rev(1/z), rev(w) = sum c_{n-k} w^k
        let w = z.inv();
        let mut r = Complex64::new(c[0], 0.0);
        let mut dr = Complex64::new(0.0, 0.0);
        for k in (0..n).rev() {
            dr = dr * w + r;
            r = r * w + c[n - k];
        }
        // p'/p = n/z - w^2 rev'(w)/rev(w)
        let logd = (n as f64) * w - w * w * dr / r;
        logd.inv()
    }
}

fn aberth_f64(f: &IntPolynomial) -> Result<Vec<Complex64>> {
    let n = f.degree();
    let c: Vec<f64> = f.coeffs().iter().map(|x| x.to_f64()).collect();
    if n == 1 {
        return Ok(vec![Complex64::new(-c[0], 0.0)]);
    }
    // Fujiwara-type radius estimate
    let mut radius: f64 = 0.0;
    for (i, ci) in c.iter().enumerate().take(n) {
        if *ci != 0.0 {
            radius = radius.max(ci.abs().powf(1.0 / (n - i) as f64));
        }
    }
    if radius == 0.0 {
        return Err(Error::InvalidInput(format!("{f} has a repeated root at 0")));
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..2000 {
        let mut all = true;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let ratio = newton_ratio(&c, z[i]);
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[i] -= w;
            if w.norm() <= 1e-15 * z[i].norm().max(1.0) {
                converged[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    // the high-precision stage decides whether the approximations are usable
    Ok(z)
}

/// Integer discriminant-free sanity: product of all roots equals (-1)^n f(0).
pub fn root_product_check(roots: &OrderedRoots, f: &IntPolynomial, prec: u32) -> Float {
    let all = roots.all_roots();
    let mut p = BigComplex::from_f64(prec, 1.0, 0.0);
    for z in &all {
        p = p.mul(z);
    }
    let n = f.degree();
    let mut expect = Float::with_val(prec, f.coeff(0));
    if n % 2 == 1 {
        expect = -expect;
    }
    let diff = Float::with_val(prec, &p.re - &expect);
    let denom = Float::with_val(prec, expect.abs_ref()).max(&Float::with_val(prec, 1));
    Float::with_val(prec, diff.abs() / denom)
}
