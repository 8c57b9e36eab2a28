use std::fmt;
use std::sync::{Arc, OnceLock};

use rug::Integer;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::factor::{factor, Factorization};
use super::prime::is_prime;
use crate::budget::Budgets;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalityCertainty {
    /// Deterministic Miller-Rabin, q < 2^64.
    Deterministic,
    /// Probabilistic rounds, q >= 2^64.
    Probabilistic,
}

/// A prime modulus q with a lazily computed factorisation of q - 1.
///
/// Clones share the cached factorisation.
#[derive(Clone)]
pub struct PrimeModulus {
    value: Integer,
    small: Option<u64>,
    certainty: PrimalityCertainty,
    q_minus_1: Arc<OnceLock<Factorization>>,
}

impl PrimeModulus {
    pub fn new(q: impl Into<Integer>) -> Result<Self> {
        let value: Integer = q.into();
        if !is_prime(&value) {
            return Err(Error::NotPrime(value.to_string()));
        }
        let small = value.to_u64();
        let certainty = if small.is_some() {
            PrimalityCertainty::Deterministic
        } else {
            PrimalityCertainty::Probabilistic
        };
        Ok(PrimeModulus {
            value,
            small,
            certainty,
            q_minus_1: Arc::new(OnceLock::new()),
        })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let v: Integer = s
            .trim()
            .parse()
            .map_err(|e| Error::InvalidInput(format!("modulus `{s}`: {e}")))?;
        Self::new(v)
    }

    pub fn value(&self) -> &Integer {
        &self.value
    }

    /// The modulus as a machine word when it fits.
    pub fn as_u64(&self) -> Option<u64> {
        self.small
    }

    pub fn certainty(&self) -> PrimalityCertainty {
        self.certainty
    }

    pub fn bits(&self) -> u32 {
        self.value.significant_bits()
    }

    /// Factorisation of q - 1 under `budgets`. The first call fixes the
    /// cached value; later calls return it regardless of their budgets.
    pub fn q_minus_1_factorization(&self, budgets: &Budgets) -> &Factorization {
        self.q_minus_1
            .get_or_init(|| factor(&Integer::from(&self.value - 1u32), budgets))
    }

    /// The cached factorisation if one has been computed.
    pub fn cached_factorization(&self) -> Option<&Factorization> {
        self.q_minus_1.get()
    }

    /// Reduces an integer into [0, q).
    pub fn reduce(&self, v: &Integer) -> Integer {
        let mut r = Integer::from(v % &self.value);
        if r < 0 {
            r += &self.value;
        }
        r
    }
}

impl PartialEq for PrimeModulus {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for PrimeModulus {}

impl fmt::Debug for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeModulus({})", self.value)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

impl std::str::FromStr for PrimeModulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for PrimeModulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.value.to_string())
    }
}

impl<'de> Deserialize<'de> for PrimeModulus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(D::Error::custom)
    }
}
