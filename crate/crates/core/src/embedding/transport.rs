use rug::{Float, Integer};

use super::data::EmbeddingData;
use crate::error::{Error, Result};
use crate::ring::PrimeModulus;

/// Lattice coordinates of an embedded vector: round(M⁻¹·v).
///
/// Fails with `RoundingAmbiguous` if a coordinate sits within
/// 2^(−precision/4) of a half-integer.
pub fn lattice_coordinates(v: &[Float], emb: &EmbeddingData) -> Result<Vec<Integer>> {
    let prec = emb.precision_bits;
    let c = emb.m_inv.mul_vec(v);
    let limit = Float::with_val(prec, 0.5) - (Float::with_val(prec, 1) >> (prec / 4));
    c.into_iter()
        .enumerate()
        .map(|(index, ci)| {
            let r = Float::with_val(prec, ci.round_ref());
            let dist = Float::with_val(prec, &ci - &r).abs();
            if dist >= limit {
                return Err(Error::RoundingAmbiguous {
                    index,
                    distance: dist.to_f64(),
                });
            }
            Ok(r.to_integer().expect("finite coordinate"))
        })
        .collect()
}

/// Σ ⌊c_i⌉·α^i mod q where c = M⁻¹·v.
pub fn transport_to_residue(v: &[Float], emb: &EmbeddingData, alpha: &Integer, q: &PrimeModulus) -> Result<Integer> {
    let coords = lattice_coordinates(v, emb)?;
    Ok(eval_coords(&coords, alpha, q))
}

/// Evaluates the polynomial with the given coefficients at alpha mod q.
pub fn eval_coords(coords: &[Integer], alpha: &Integer, q: &PrimeModulus) -> Integer {
    let qv = q.value();
    let mut acc = Integer::new();
    for c in coords.iter().rev() {
        acc *= alpha;
        acc += c;
        acc %= qv;
    }
    if acc < 0 {
        acc += qv;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_embedding;
    use crate::ring::IntPolynomial;

    #[test]
    fn unit_maps_to_one() {
        let f = IntPolynomial::parse("x^4 + 256").unwrap();
        let e = build_embedding(&f, 200).unwrap();
        let q = PrimeModulus::new(257u32).unwrap();
        let mut one = vec![Integer::new(); 4];
        one[0] = Integer::from(1);
        let v = e.embed(&one);
        assert_eq!(transport_to_residue(&v, &e, &Integer::from(1), &q).unwrap(), 1);
    }

    #[test]
    fn half_integer_coordinate_rejected() {
        let f = IntPolynomial::parse("x^2 + 2").unwrap();
        let e = build_embedding(&f, 200).unwrap();
        // θ(1/2) = (1/2, 0)
        let v = vec![Float::with_val(200, 0.5), Float::new(200)];
        assert!(matches!(
            lattice_coordinates(&v, &e),
            Err(Error::RoundingAmbiguous { index: 0, .. })
        ));
    }
}
