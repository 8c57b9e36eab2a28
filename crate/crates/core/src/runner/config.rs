use std::path::{Path, PathBuf};

use rug::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::budget::Budgets;
use crate::embedding::DEFAULT_PRECISION_BITS;
use crate::error::{Error, Result};
use crate::ring::{poly_eval_mod, IntPolynomial, PrimeModulus};
use crate::sampling::Truncation;
use crate::vetting::Variant;

/// Where the b-components of the samples come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    #[default]
    Genuine,
    /// Both components uniform; a control run that should never produce a guess.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(with = "poly_text")]
    pub f: IntPolynomial,
    pub q: PrimeModulus,
    /// Gaussian width w = √(2π)·σ.
    pub w: f64,
    pub variant: Variant,
    #[serde(with = "crate::serde_dec")]
    pub ell: usize,
    #[serde(with = "crate::serde_dec")]
    pub trials: usize,
    #[serde(with = "crate::serde_dec")]
    pub seed: u64,
    #[serde(with = "crate::serde_dec", default = "default_precision")]
    pub precision_bits: u32,
    #[serde(with = "crate::serde_dec::opt", default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "default_truncation")]
    pub truncation: Truncation,
    #[serde(default)]
    pub samples: SampleSource,
    /// Root to attack through (Poly-LWE only); chosen automatically when absent.
    #[serde(with = "crate::serde_dec::opt", default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Integer>,
    #[serde(with = "crate::serde_dec", default = "default_order_bound")]
    pub order_bound: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_cache: Option<PathBuf>,
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION_BITS
}

fn default_truncation() -> Truncation {
    Truncation::Hard2sigma
}

fn default_order_bound() -> u64 {
    16
}

/// Accepts `"x^4 + 256"` or `{"coeffs": [...], "var": "x"}`; writes the text form.
mod poly_text {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either {
        Text(String),
        Doc(IntPolynomial),
    }

    pub fn serialize<S: Serializer>(f: &IntPolynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&f.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<IntPolynomial, D::Error> {
        use serde::de::Error as _;
        match Either::deserialize(d)? {
            Either::Text(t) => IntPolynomial::parse(&t).map_err(D::Error::custom),
            Either::Doc(p) => Ok(p),
        }
    }
}

impl ExperimentConfig {
    pub fn new(f: IntPolynomial, q: PrimeModulus, w: f64, variant: Variant, ell: usize, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            name: None,
            f,
            q,
            w,
            variant,
            ell,
            trials,
            seed,
            precision_bits: DEFAULT_PRECISION_BITS,
            workers: None,
            budgets: Budgets::default(),
            truncation: Truncation::Hard2sigma,
            samples: SampleSource::Genuine,
            alpha: None,
            order_bound: default_order_bound(),
            embedding_cache: None,
        }
    }

    pub fn n(&self) -> usize {
        self.f.degree()
    }

    pub fn validate(&self) -> Result<()> {
        if self.f.degree() < 1 || !self.f.is_monic() {
            return Err(Error::schema("f", "f must be monic of degree at least 1"));
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return Err(Error::schema("w", "width must be finite and non-negative"));
        }
        if self.ell < 1 {
            return Err(Error::schema("ell", "ell must be at least 1"));
        }
        if self.trials < 1 {
            return Err(Error::schema("trials", "trials must be at least 1"));
        }
        if self.precision_bits < 53 {
            return Err(Error::schema("precision_bits", "precision below 53 bits"));
        }
        if self.workers == Some(0) {
            return Err(Error::schema("workers", "worker count must be positive"));
        }
        if self.variant == Variant::Ringlwe && poly_eval_mod(&self.f, &Integer::from(1), &self.q) != 0 {
            return Err(Error::schema(
                "variant",
                "ringlwe requires 1 to be a root of f mod q (f(1) ≢ 0 mod q)",
            ));
        }
        if let Some(a) = &self.alpha {
            if self.variant == Variant::Ringlwe {
                return Err(Error::schema("alpha", "alpha is fixed to 1 for ringlwe"));
            }
            if *a < 0 || a >= self.q.value() || poly_eval_mod(&self.f, a, &self.q) != 0 {
                return Err(Error::schema("alpha", format!("{a} is not a root of f mod q")));
            }
        }
        Ok(())
    }
}

/// Strict parse: unknown keys and type errors come back as `SchemaViolation`
/// with the offending path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(if path == "." { String::new() } else { path }, e.inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(cfg)?.as_bytes())
}

/// Write to a temporary sibling and rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(name);
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROW1: &str = r#"{
        "f": "x^1024 + 2147483646",
        "q": "2147483647",
        "w": 3.192,
        "variant": "polylwe",
        "ell": "40",
        "trials": "1",
        "seed": "1"
    }"#;

    #[test]
    fn row_one_fixture() {
        let c = parse_config(ROW1).unwrap();
        assert_eq!(c.n(), 1024);
        assert_eq!(c.q.value(), &Integer::from(2147483647u32));
        assert_eq!(c.w, 3.192);
        assert_eq!(c.ell, 40);
        assert_eq!(c.precision_bits, 300);
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        let c = parse_config(ROW1).unwrap();
        save_config(&c, &p).unwrap();
        let d = load_config(&p).unwrap();
        assert_eq!(c, d);
        save_config(&d, &p).unwrap();
        assert_eq!(load_config(&p).unwrap(), c);
    }

    #[test]
    fn coefficient_document_accepted() {
        let t = ROW1.replace(r#""x^1024 + 2147483646""#, r#"{"coeffs": ["3", "0", "1"], "var": "x"}"#);
        let c = parse_config(&t).unwrap();
        assert_eq!(c.f, IntPolynomial::from_i64s(&[3, 0, 1]));
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let t = ROW1.replace(r#""seed": "1""#, r#""seed": "1", "budgets": {"bogus": "1"}"#);
        match parse_config(&t) {
            Err(Error::SchemaViolation { path, message }) => {
                assert_eq!(path, "budgets.bogus");
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integers_must_be_strings() {
        let t = ROW1.replace(r#""ell": "40""#, r#""ell": 40"#);
        assert!(matches!(parse_config(&t), Err(Error::SchemaViolation { path, .. }) if path == "ell"));
    }

    #[test]
    fn ringlwe_needs_root_one() {
        let t = ROW1.replace("polylwe", "ringlwe").replace("2147483646", "5");
        match parse_config(&t) {
            Err(Error::SchemaViolation { path, message }) => {
                assert_eq!(path, "variant");
                assert!(message.contains("root"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_counts_rejected() {
        let t = ROW1.replace(r#""trials": "1""#, r#""trials": "0""#);
        assert!(matches!(parse_config(&t), Err(Error::SchemaViolation { path, .. }) if path == "trials"));
    }

    #[test]
    fn composite_q_rejected() {
        let t = ROW1.replace(r#""q": "2147483647""#, r#""q": "2147483649""#);
        assert!(matches!(parse_config(&t), Err(Error::SchemaViolation { path, .. }) if path == "q"));
    }
}
