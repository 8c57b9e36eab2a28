use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramModQ {
    /// Bucket k counts values v with ⌊10v/q⌋ = k.
    pub buckets: [u64; 10],
    pub zero_count: u64,
}

impl HistogramModQ {
    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }

    pub fn add(&mut self, v: u64, q: u64) {
        debug_assert!(v < q);
        let k = (v as u128 * 10 / q as u128) as usize;
        self.buckets[k.min(9)] += 1;
        if v == 0 {
            self.zero_count += 1;
        }
    }
}

pub fn histogram_mod_q(values: impl IntoIterator<Item = u64>, q: u64) -> HistogramModQ {
    let mut h = HistogramModQ::default();
    for v in values {
        h.add(v, q);
    }
    h
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedHistogram {
    pub name: String,
    #[serde(flatten)]
    pub histogram: HistogramModQ,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn single_zero() {
        let h = histogram_mod_q([0], 257);
        assert_eq!(h.buckets[0], 1);
        assert_eq!(h.zero_count, 1);
        assert_eq!(h.total(), 1);
    }

    #[test]
    fn uniform_is_flat() {
        let q = 4093;
        let mut rng = crate::sampling::derive_stream(1, "hist", 0);
        let h = histogram_mod_q((0..100_000).map(|_| rng.gen_range(0..q)), q);
        assert_eq!(h.total(), 100_000);
        assert!(h.buckets.iter().all(|&c| (c as f64 - 1e4).abs() < 500.0), "{h:?}");
    }

    #[test]
    fn edge_buckets() {
        let q = 1000;
        let h = histogram_mod_q([1, 99, 100, 999, 500], q);
        assert_eq!(h.buckets, [2, 1, 0, 0, 0, 1, 0, 0, 0, 1]);
    }
}
