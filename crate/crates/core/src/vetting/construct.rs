use rayon::prelude::*;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::ring::roots::{root_residues, DEFAULT_ROOT_SEED};
use crate::ring::{
    cyclotomic_poly, euler_phi, factor, is_probably_irreducible, multiplicative_order, poly_eval_mod, IntPolynomial,
    IrreducibilityVerdict, PrimeModulus, RootInfo,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constructed {
    pub f: IntPolynomial,
    /// Roots of f mod q of order exactly m.
    pub roots: Vec<RootInfo>,
}

/// f = Φ_m·g + q, which reduces to Φ_m·g mod q and so inherits every
/// root of Φ_m mod q. `g` defaults to x^(n − φ(m)).
pub fn construct_with_root(m: u64, n: usize, q: &PrimeModulus, g: Option<&IntPolynomial>) -> Result<Constructed> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let phi_m = euler_phi(m) as usize;
    if n < phi_m {
        return Err(Error::DegreeMismatch(format!("n = {n} is below φ({m}) = {phi_m}")));
    }
    let default_g = IntPolynomial::monomial(n - phi_m, 1);
    let g = g.unwrap_or(&default_g);
    if !g.is_monic() || g.degree() != n - phi_m {
        return Err(Error::DegreeMismatch(format!(
            "g must be monic of degree {} = n − φ(m), got {g}",
            n - phi_m
        )));
    }
    let cyc = cyclotomic_poly(m);
    let f = &(&cyc * g) + &IntPolynomial::constant(q.value().clone());

    let budgets = Budgets::default();
    let mut roots = Vec::new();
    for r in root_residues(&cyc, q, DEFAULT_ROOT_SEED)? {
        let order = multiplicative_order(&r, q, &budgets)?;
        if poly_eval_mod(&f, &r, q) == 0 && order == m {
            roots.push(RootInfo::new(r, Some(order), q));
        }
    }
    if roots.is_empty() {
        return Err(Error::DoesNotSplit {
            m,
            q: q.to_string(),
        });
    }
    Ok(Constructed { f, roots })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootTarget {
    One,
    MinusOne,
}

impl RootTarget {
    pub fn value(self) -> i64 {
        match self {
            RootTarget::One => 1,
            RootTarget::MinusOne => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrinomialHit {
    pub f: IntPolynomial,
    #[serde(with = "crate::serde_dec")]
    pub a: Integer,
    #[serde(with = "crate::serde_dec")]
    pub b: Integer,
    /// f(±1).
    #[serde(with = "crate::serde_dec")]
    pub value: Integer,
    pub q: PrimeModulus,
    pub irreducibility: IrreducibilityVerdict,
}

/// Trinomials xⁿ + a·x + b (a, then b ascending) whose value at the target
/// root has a prime factor q ≥ q_min; q is the largest such factor.
pub fn search_trinomials(
    n: usize,
    target: RootTarget,
    a_range: std::ops::RangeInclusive<i64>,
    b_range: std::ops::RangeInclusive<i64>,
    q_min: &Integer,
    budgets: &Budgets,
) -> Result<Vec<TrinomialHit>> {
    if n < 2 {
        return Err(Error::InvalidInput("trinomials need n ≥ 2".into()));
    }
    let grid: Vec<(i64, i64)> = a_range
        .flat_map(|a| b_range.clone().map(move |b| (a, b)))
        .collect();
    let t = Integer::from(target.value());
    let hits: Vec<Option<TrinomialHit>> = grid
        .par_iter()
        .map(|&(a, b)| {
            let f = IntPolynomial::trinomial(n, a, b);
            let value = f.eval(&t);
            if value == 0 {
                return None;
            }
            let fac = factor(&Integer::from(value.abs_ref()), budgets);
            if !fac.is_complete() {
                log::debug!("skipping ({a}, {b}): factoring budget exceeded");
                return None;
            }
            let p = fac.largest_prime()?.clone();
            if &p < q_min {
                return None;
            }
            let q = PrimeModulus::new(p).ok()?;
            debug_assert_eq!(poly_eval_mod(&f, &t, &q), 0);
            let irreducibility = is_probably_irreducible(&f);
            Some(TrinomialHit {
                f,
                a: a.into(),
                b: b.into(),
                value,
                q,
                irreducibility,
            })
        })
        .collect();
    Ok(hits.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(q: u64) -> PrimeModulus {
        PrimeModulus::new(q).unwrap()
    }

    #[test]
    fn order_one() {
        let c = construct_with_root(1, 1, &pm(5), Some(&IntPolynomial::constant(1))).unwrap();
        assert_eq!(c.f.to_string(), "x + 4");
        assert_eq!(c.roots.len(), 1);
        assert_eq!(c.roots[0].root, 1);
    }

    #[test]
    fn order_three_mod_7() {
        let c = construct_with_root(3, 4, &pm(7), None).unwrap();
        assert_eq!(c.f, IntPolynomial::parse("x^4 + x^3 + x^2 + 7").unwrap());
        let brute: Vec<u64> = (1..7u64).filter(|&r| r * r % 7 * r % 7 == 1 && r != 1).collect();
        let got: Vec<u64> = c.roots.iter().map(|r| r.root.to_u64().unwrap()).collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn minus_one_at_degree_1024() {
        let q = pm(4294967311);
        let c = construct_with_root(2, 1024, &q, None).unwrap();
        assert_eq!(c.f.degree(), 1024);
        assert_eq!(poly_eval_mod(&c.f, &Integer::from(4294967310u64), &q), 0);
        assert!(c.roots[0].is_minus_one);
    }

    #[test]
    fn errors() {
        assert!(matches!(construct_with_root(8, 3, &pm(17), None), Err(Error::DegreeMismatch(_))));
        let g = IntPolynomial::parse("2*x").unwrap();
        assert!(matches!(construct_with_root(3, 3, &pm(7), Some(&g)), Err(Error::DegreeMismatch(_))));
        assert!(matches!(construct_with_root(3, 4, &pm(5), None), Err(Error::DoesNotSplit { .. })));
    }

    #[test]
    fn trinomial_examples() {
        let q_min = Integer::from(1u64 << 32);
        let b: i64 = 1 << 31;
        let hits = search_trinomials(1024, RootTarget::One, b + 14..=b + 14, b..=b, &q_min, &Budgets::default()).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].q.value(), &4294967311u64);

        let hits = search_trinomials(
            1024,
            RootTarget::MinusOne,
            b + 9..=b + 9,
            -(b + 7)..=-(b + 7),
            &q_min,
            &Budgets::default(),
        )
        .unwrap();
        assert_eq!(hits[0].value, -4294967311i64);
        assert_eq!(hits[0].q.value(), &4294967311u64);
    }

    #[test]
    fn trinomial_grid_is_ordered_and_verified() {
        let hits = search_trinomials(8, RootTarget::One, -3..=3, -4..=4, &Integer::from(5), &Budgets::default()).unwrap();
        assert!(hits.iter().all(|h| h.value != 0));
        assert!(hits.windows(2).all(|w| (&w[0].a, &w[0].b) < (&w[1].a, &w[1].b)));
        for h in &hits {
            assert_eq!(poly_eval_mod(&h.f, &Integer::from(1), &h.q), 0);
            assert!(h.q.value() >= &5);
        }
        // 1 + a + b = 0 entries are absent
        assert!(!hits.iter().any(|h| h.a == -1 && h.b == 0));
    }
}
