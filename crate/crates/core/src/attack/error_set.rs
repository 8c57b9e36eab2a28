use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::ring::prime::{add_mod, mul_mod};
use crate::ring::{PrimeModulus, RootInfo};

/// The residues e(α) mod q can take when α has order r and every error
/// coefficient is bounded by ⌈2σ⌉: e(α) = Σ_{j<r} c_j·α^j where c_j sums
/// the coefficients in residue class j mod r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorValueSet {
    pub alpha: RootInfo,
    pub q: u64,
    /// Sorted, deduplicated.
    pub values: Vec<u64>,
    /// Bound on |c_j| per coordinate group.
    pub group_bounds: Vec<u64>,
}

impl ErrorValueSet {
    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.values.binary_search(&v).is_ok()
    }

    /// ⌈2σ⌉·⌈n/r⌉, the bound of the largest group.
    pub fn group_bound(&self) -> u64 {
        self.group_bounds.iter().copied().max().unwrap_or(0)
    }
}

/// Sizes of the residue classes mod r among 0..n.
pub fn group_sizes(n: usize, r: usize) -> Vec<usize> {
    let groups = r.min(n);
    (0..groups).map(|j| (n - j).div_ceil(r)).collect()
}

/// ∏(2B_j + 1), saturating.
pub fn estimated_cardinality(bounds: &[u64]) -> u128 {
    bounds
        .iter()
        .fold(1u128, |acc, &b| acc.saturating_mul(2 * b as u128 + 1))
}

pub fn build_error_set(alpha: &RootInfo, sigma: f64, n: usize, q: &PrimeModulus, budgets: &Budgets) -> Result<ErrorValueSet> {
    let qv = q
        .as_u64()
        .ok_or_else(|| Error::AttackInfeasible(format!("q = {q} does not fit the guess loop")))?;
    let r = alpha
        .order_u64()
        .ok_or_else(|| Error::ModulusTooLargeForOrderComputation(q.to_string()))?;
    let per_coeff = (2.0 * sigma).ceil() as u64;
    let group_bounds: Vec<u64> = group_sizes(n, r.min(n as u64) as usize)
        .into_iter()
        .map(|s| per_coeff * s as u64)
        .collect();
    let estimated = estimated_cardinality(&group_bounds);
    if estimated > budgets.set_size_cap as u128 {
        return Err(Error::SetTooLarge {
            estimated,
            cap: budgets.set_size_cap,
        });
    }
    let alpha_v = alpha
        .root
        .to_u64()
        .filter(|&v| v < qv)
        .ok_or_else(|| Error::InvalidInput("root is not a residue mod q".into()))?;

    let mut values = vec![0u64];
    let mut pw = 1 % qv;
    for &b in &group_bounds {
        let mut next = Vec::with_capacity(values.len() * (2 * b as usize + 1));
        for c in -(b as i64)..=(b as i64) {
            let cm = signed_mod(c, qv);
            let t = mul_mod(cm, pw, qv);
            next.extend(values.iter().map(|&v| add_mod(v, t, qv)));
        }
        next.sort_unstable();
        next.dedup();
        values = next;
        pw = mul_mod(pw, alpha_v, qv);
    }
    Ok(ErrorValueSet {
        alpha: alpha.clone(),
        q: qv,
        values,
        group_bounds,
    })
}

pub(crate) fn signed_mod(c: i64, q: u64) -> u64 {
    let m = c.unsigned_abs() % q;
    if c < 0 && m != 0 {
        q - m
    } else {
        m
    }
}
