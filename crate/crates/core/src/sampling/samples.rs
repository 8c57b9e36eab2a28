use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::gaussian::{uniform_residues, CoeffSampler, GaussianSpec};
use super::lattice::{sample_lattice_gaussian, Discretization};
use super::rng::derive_stream;
use crate::embedding::data::parse_hex_float;
use crate::embedding::EmbeddingData;
use crate::error::{Error, Result};
use crate::ring::field::{reduce_coeffs, Modulus, PrimeField, SmallField};
use crate::ring::{IntPolynomial, PrimeModulus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleVariant {
    PolylweCoefficient,
    RinglweEmbedded,
}

/// One Poly-LWE pair; coefficient vectors of length n with entries in [0, q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySample {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

/// One Ring-LWE pair of embedded vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct RingSample {
    pub a: Vec<Float>,
    pub b: Vec<Float>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Samples {
    Poly(Vec<PolySample>),
    Ring(Vec<RingSample>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Poly(v) => v.len(),
            Samples::Ring(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LweSampleSet {
    pub variant: SampleVariant,
    pub f: IntPolynomial,
    pub modulus: PrimeModulus,
    pub gaussian: GaussianSpec,
    pub secret_commitment: String,
    pub seed: u64,
    pub precision_bits: Option<u32>,
    pub discretization: Option<Discretization>,
    pub samples: Samples,
}

impl LweSampleSet {
    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn n(&self) -> usize {
        self.f.degree()
    }

    pub fn poly_samples(&self) -> Result<&[PolySample]> {
        match &self.samples {
            Samples::Poly(v) => Ok(v),
            Samples::Ring(_) => Err(Error::SampleVariantMismatch("expected Poly-LWE samples".into())),
        }
    }

    pub fn ring_samples(&self) -> Result<&[RingSample]> {
        match &self.samples {
            Samples::Ring(v) => Ok(v),
            Samples::Poly(_) => Err(Error::SampleVariantMismatch("expected Ring-LWE samples".into())),
        }
    }

    /// Same metadata, sample list replaced.
    pub fn with_samples(&self, samples: Samples) -> Self {
        LweSampleSet {
            samples,
            ..self.clone()
        }
    }
}

/// SHA-256 over the decimal coefficient list.
pub fn commit_secret<T: ToString>(coeffs: &[T]) -> String {
    let mut h = Sha256::new();
    for (i, c) in coeffs.iter().enumerate() {
        if i > 0 {
            h.update(b",");
        }
        h.update(c.to_string().as_bytes());
    }
    hex::encode(h.finalize())
}

pub(crate) fn small_q(q: &PrimeModulus) -> Result<u64> {
    q.as_u64()
        .ok_or_else(|| Error::InvalidInput(format!("sample generation needs q < 2^64, got {q}")))
}

/// Uniform secret coefficients (or lattice coordinates) in [0, q).
pub fn random_secret(q: &PrimeModulus, n: usize, seed: u64) -> Result<Vec<u64>> {
    let q = small_q(q)?;
    Ok(uniform_residues(q, n, &mut derive_stream(seed, "secret", 0)))
}

/// Arithmetic in F_q[x]/(f) on coefficient vectors of length n.
#[derive(Clone, Debug)]
pub struct QuotientRing {
    pub k: SmallField,
    pub modulus: Modulus<SmallField>,
    pub n: usize,
}

impl QuotientRing {
    pub fn new(f: &IntPolynomial, q: u64) -> Result<Self> {
        f.require_monic()?;
        let k = SmallField::new(q);
        let modulus = Modulus::new(&k, reduce_coeffs(&k, f.coeffs()));
        Ok(QuotientRing {
            k,
            modulus,
            n: f.degree(),
        })
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        self.pad(self.modulus.mulmod(&self.k, a, b))
    }

    pub fn pad(&self, mut v: Vec<u64>) -> Vec<u64> {
        v.resize(self.n, 0);
        v
    }
}

fn check_secret(secret: &[u64], n: usize, q: u64) -> Result<()> {
    if secret.len() != n {
        return Err(Error::DegreeMismatch(format!("secret has {} coefficients, f has degree {n}", secret.len())));
    }
    if secret.iter().any(|&c| c >= q) {
        return Err(Error::InvalidInput("secret coefficients must lie in [0, q)".into()));
    }
    Ok(())
}

/// ℓ Poly-LWE samples (a, a·s + e mod (f, q)); sample i uses its own stream
/// derived from (seed, i).
pub fn gen_polylwe_samples(
    f: &IntPolynomial,
    q: &PrimeModulus,
    spec: &GaussianSpec,
    secret: &[u64],
    ell: usize,
    seed: u64,
) -> Result<LweSampleSet> {
    let qv = small_q(q)?;
    let ring = QuotientRing::new(f, qv)?;
    let n = ring.n;
    check_secret(secret, n, qv)?;
    let sampler = CoeffSampler::new(spec);
    let samples: Vec<PolySample> = (0..ell)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, "polylwe-sample", i as u64);
            polylwe_sample(&ring, &sampler, secret, &mut rng)
        })
        .collect();
    Ok(LweSampleSet {
        variant: SampleVariant::PolylweCoefficient,
        f: f.clone(),
        modulus: q.clone(),
        gaussian: spec.clone(),
        secret_commitment: commit_secret(secret),
        seed,
        precision_bits: None,
        discretization: None,
        samples: Samples::Poly(samples),
    })
}

fn polylwe_sample<R: Rng + ?Sized>(ring: &QuotientRing, sampler: &CoeffSampler, secret: &[u64], rng: &mut R) -> PolySample {
    let q = ring.k.q();
    let a = uniform_residues(q, ring.n, rng);
    let e = sampler.draw_vec(ring.n, rng);
    let mut b = ring.mul(&a, secret);
    for (bi, ei) in b.iter_mut().zip(e) {
        *bi = ring.k.add(bi, &ring.k.from_integer(&Integer::from(ei)));
    }
    PolySample { a, b }
}

/// ℓ uniform pairs with the metadata of a Poly-LWE set (control input).
pub fn gen_uniform_polylwe_samples(f: &IntPolynomial, q: &PrimeModulus, spec: &GaussianSpec, ell: usize, seed: u64) -> Result<LweSampleSet> {
    let qv = small_q(q)?;
    let n = f.degree();
    let samples = (0..ell)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, "uniform-sample", i as u64);
            PolySample {
                a: uniform_residues(qv, n, &mut rng),
                b: uniform_residues(qv, n, &mut rng),
            }
        })
        .collect();
    Ok(LweSampleSet {
        variant: SampleVariant::PolylweCoefficient,
        f: f.clone(),
        modulus: q.clone(),
        gaussian: spec.clone(),
        secret_commitment: commit_secret::<u64>(&[]),
        seed,
        precision_bits: None,
        discretization: None,
        samples: Samples::Poly(samples),
    })
}

/// ℓ Ring-LWE samples. `secret` holds the lattice coordinates of s in
/// [0, q). Each a is M·(uniform coordinates), each error is a round-off
/// lattice Gaussian with parameter σ′, and b = M·((a·s mod f) + e mod q)
/// with the reduction taken coordinate-wise.
pub fn gen_ringlwe_samples(
    emb: &EmbeddingData,
    q: &PrimeModulus,
    spec: &GaussianSpec,
    secret: &[u64],
    ell: usize,
    seed: u64,
) -> Result<LweSampleSet> {
    if spec.sigma_prime.is_none() {
        return Err(Error::InvalidInput("Ring-LWE sampling needs sigma_prime".into()));
    }
    let qv = small_q(q)?;
    let ring = QuotientRing::new(&emb.f, qv)?;
    check_secret(secret, ring.n, qv)?;
    let samples = (0..ell)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, "ringlwe-sample", i as u64);
            let a = uniform_residues(qv, ring.n, &mut rng);
            let err = sample_lattice_gaussian(emb, spec, &mut rng)?;
            let prod = ring.mul(&a, secret);
            let b: Vec<Integer> = prod
                .iter()
                .zip(&err.coords)
                .map(|(p, c)| {
                    let mut v = Integer::from(*p) + c;
                    v %= qv;
                    if v < 0 {
                        v += qv;
                    }
                    v
                })
                .collect();
            let a: Vec<Integer> = a.into_iter().map(Integer::from).collect();
            Ok(RingSample {
                a: emb.embed(&a),
                b: emb.embed(&b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LweSampleSet {
        variant: SampleVariant::RinglweEmbedded,
        f: emb.f.clone(),
        modulus: q.clone(),
        gaussian: spec.clone(),
        secret_commitment: commit_secret(secret),
        seed,
        precision_bits: Some(emb.precision_bits),
        discretization: Some(Discretization::BabaiRoundOff),
        samples: Samples::Ring(samples),
    })
}

/// ℓ embedded pairs with both components M·(uniform coordinates).
pub fn gen_uniform_ringlwe_samples(emb: &EmbeddingData, q: &PrimeModulus, spec: &GaussianSpec, ell: usize, seed: u64) -> Result<LweSampleSet> {
    let qv = small_q(q)?;
    let n = emb.n();
    let samples = (0..ell)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, "uniform-sample", i as u64);
            let mut draw = || -> Vec<Integer> { uniform_residues(qv, n, &mut rng).into_iter().map(Integer::from).collect() };
            let a = draw();
            let b = draw();
            RingSample {
                a: emb.embed(&a),
                b: emb.embed(&b),
            }
        })
        .collect();
    Ok(LweSampleSet {
        variant: SampleVariant::RinglweEmbedded,
        f: emb.f.clone(),
        modulus: q.clone(),
        gaussian: spec.clone(),
        secret_commitment: commit_secret::<u64>(&[]),
        seed,
        precision_bits: Some(emb.precision_bits),
        discretization: Some(Discretization::BabaiRoundOff),
        samples: Samples::Ring(samples),
    })
}

// ---------------------------------------------------------------------
// JSON-lines

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    variant: SampleVariant,
    q: PrimeModulus,
    n: usize,
    f: IntPolynomial,
    spec: GaussianSpec,
    seed: u64,
    secret_commitment: String,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discretization: Option<Discretization>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    i: usize,
    a: Vec<String>,
    b: Vec<String>,
}

fn hex_float(x: &Float) -> String {
    x.to_string_radix(16, None)
}

pub fn write_jsonl<W: Write>(set: &LweSampleSet, mut w: W) -> Result<()> {
    let header = Header {
        variant: set.variant,
        q: set.modulus.clone(),
        n: set.n(),
        f: set.f.clone(),
        spec: set.gaussian.clone(),
        seed: set.seed,
        secret_commitment: set.secret_commitment.clone(),
        count: set.count(),
        precision_bits: set.precision_bits,
        discretization: set.discretization,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut emit = |i: usize, a: Vec<String>, b: Vec<String>| -> Result<()> {
        serde_json::to_writer(&mut w, &Line { i, a, b })?;
        w.write_all(b"\n")?;
        Ok(())
    };
    match &set.samples {
        Samples::Poly(v) => {
            for (i, s) in v.iter().enumerate() {
                emit(i, s.a.iter().map(u64::to_string).collect(), s.b.iter().map(u64::to_string).collect())?;
            }
        }
        Samples::Ring(v) => {
            for (i, s) in v.iter().enumerate() {
                emit(i, s.a.iter().map(hex_float).collect(), s.b.iter().map(hex_float).collect())?;
            }
        }
    }
    Ok(())
}

pub fn to_jsonl_string(set: &LweSampleSet) -> String {
    let mut buf = Vec::new();
    write_jsonl(set, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<LweSampleSet> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| Error::Malformed("empty sample file".into()))??;
    let h: Header = serde_json::from_str(&first).map_err(|e| Error::schema("header", e.to_string()))?;
    h.spec.validate()?;
    if h.f.degree() != h.n {
        return Err(Error::schema("header.n", "does not match the degree of f"));
    }
    let qv = small_q(&h.q)?;
    let mut poly = Vec::new();
    let mut ring = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Line = serde_json::from_str(&line).map_err(|e| Error::schema(format!("line {}", idx + 2), e.to_string()))?;
        if l.i != idx || l.a.len() != h.n || l.b.len() != h.n {
            return Err(Error::schema(format!("line {}", idx + 2), "index or vector length mismatch"));
        }
        match h.variant {
            SampleVariant::PolylweCoefficient => {
                let parse = |v: &[String]| -> Result<Vec<u64>> {
                    v.iter()
                        .map(|s| match s.parse::<u64>() {
                            Ok(c) if c < qv => Ok(c),
                            _ => Err(Error::schema(format!("line {}", idx + 2), format!("`{s}` is not a residue mod q"))),
                        })
                        .collect()
                };
                poly.push(PolySample {
                    a: parse(&l.a)?,
                    b: parse(&l.b)?,
                });
            }
            SampleVariant::RinglweEmbedded => {
                let prec = h
                    .precision_bits
                    .ok_or_else(|| Error::schema("header.precision_bits", "required for Ring-LWE"))?;
                let parse = |v: &[String]| -> Result<Vec<Float>> { v.iter().map(|s| parse_hex_float(s, prec)).collect() };
                ring.push(RingSample {
                    a: parse(&l.a)?,
                    b: parse(&l.b)?,
                });
            }
        }
    }
    let samples = match h.variant {
        SampleVariant::PolylweCoefficient => Samples::Poly(poly),
        SampleVariant::RinglweEmbedded => Samples::Ring(ring),
    };
    if samples.len() != h.count {
        return Err(Error::schema("header.count", format!("header says {}, file has {}", h.count, samples.len())));
    }
    Ok(LweSampleSet {
        variant: h.variant,
        f: h.f,
        modulus: h.q,
        gaussian: h.spec,
        secret_commitment: h.secret_commitment,
        seed: h.seed,
        precision_bits: h.precision_bits,
        discretization: h.discretization,
        samples,
    })
}

pub fn load_samples(path: &std::path::Path) -> Result<LweSampleSet> {
    read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn save_samples(set: &LweSampleSet, path: &std::path::Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        write_jsonl(set, &mut w)?;
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::build_embedding;
    use crate::embedding::transport::{eval_coords, transport_to_residue};
    use crate::ring::roots::poly_eval_mod;
    use crate::sampling::gaussian::Truncation;

    fn spec(sigma: f64) -> GaussianSpec {
        GaussianSpec::from_sigma(sigma, Truncation::Hard2sigma).unwrap()
    }

    fn eval_u64(v: &[u64], alpha: u64, q: u64) -> u64 {
        let k = SmallField::new(q);
        v.iter().rev().fold(0, |acc, c| k.add(&k.mul(&acc, &alpha), c))
    }

    #[test]
    fn zero_error_is_exact_product() {
        let f = IntPolynomial::parse("x^4 + 256").unwrap();
        let q = PrimeModulus::new(257u32).unwrap();
        let s = random_secret(&q, 4, 1).unwrap();
        let set = gen_polylwe_samples(&f, &q, &spec(0.0), &s, 5, 2).unwrap();
        let ring = QuotientRing::new(&f, 257).unwrap();
        for p in set.poly_samples().unwrap() {
            assert_eq!(p.b, ring.mul(&p.a, &s));
        }
    }

    #[test]
    fn errors_are_truncated_and_reduced() {
        let f = IntPolynomial::parse("x^4 + 256").unwrap();
        let q = PrimeModulus::new(257u32).unwrap();
        let s = random_secret(&q, 4, 3).unwrap();
        let set = gen_polylwe_samples(&f, &q, &spec(3.0), &s, 200, 4).unwrap();
        let ring = QuotientRing::new(&f, 257).unwrap();
        for p in set.poly_samples().unwrap() {
            assert!(p.a.iter().chain(&p.b).all(|&c| c < 257));
            let as_ = ring.mul(&p.a, &s);
            for (b, x) in p.b.iter().zip(as_) {
                let e = (*b as i64 - x as i64).rem_euclid(257);
                let e = if e > 128 { e - 257 } else { e };
                assert!(e.abs() <= 6);
            }
        }
    }

    #[test]
    fn samples_are_individually_reconstructible() {
        let f = IntPolynomial::parse("x^8 + 3*x + 5").unwrap();
        let q = PrimeModulus::new(10007u32).unwrap();
        let s = random_secret(&q, 8, 5).unwrap();
        let full = gen_polylwe_samples(&f, &q, &spec(2.0), &s, 10, 6).unwrap();
        let ring = QuotientRing::new(&f, 10007).unwrap();
        let sampler = CoeffSampler::new(&spec(2.0));
        let seventh = polylwe_sample(&ring, &sampler, &s, &mut derive_stream(6, "polylwe-sample", 7));
        assert_eq!(full.poly_samples().unwrap()[7], seventh);
    }

    #[test]
    fn jsonl_round_trip_and_determinism() {
        let f = IntPolynomial::parse("x^4 + 256").unwrap();
        let q = PrimeModulus::new(257u32).unwrap();
        let s = random_secret(&q, 4, 7).unwrap();
        let a = gen_polylwe_samples(&f, &q, &spec(3.0), &s, 6, 8).unwrap();
        let b = gen_polylwe_samples(&f, &q, &spec(3.0), &s, 6, 8).unwrap();
        let text = to_jsonl_string(&a);
        assert_eq!(text, to_jsonl_string(&b));
        assert_eq!(text.lines().count(), 7);
        let back = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn jsonl_rejects_bad_count() {
        let f = IntPolynomial::parse("x^2 + 1").unwrap();
        let q = PrimeModulus::new(13u32).unwrap();
        let set = gen_polylwe_samples(&f, &q, &spec(1.0), &[1, 2], 3, 1).unwrap();
        let text = to_jsonl_string(&set);
        let cut: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_jsonl(cut.as_bytes()), Err(Error::SchemaViolation { .. })));
    }

    #[test]
    fn ringlwe_zero_error_transports_multiplicatively() {
        let f = IntPolynomial::parse("x^4 + 256").unwrap();
        let q = PrimeModulus::new(257u32).unwrap();
        let emb = build_embedding(&f, 200).unwrap();
        let s = random_secret(&q, 4, 9).unwrap();
        let sp = spec(0.0).with_det_root(emb.det_root().to_f64());
        let set = gen_ringlwe_samples(&emb, &q, &sp, &s, 5, 10).unwrap();
        let one = Integer::from(1);
        let s_int: Vec<Integer> = s.iter().map(|&c| Integer::from(c)).collect();
        let s_bar = eval_coords(&s_int, &one, &q);
        for r in set.ring_samples().unwrap() {
            let a_bar = transport_to_residue(&r.a, &emb, &one, &q).unwrap();
            let b_bar = transport_to_residue(&r.b, &emb, &one, &q).unwrap();
            assert_eq!(b_bar, Integer::from(&a_bar * &s_bar) % 257u32);
        }
        let text = to_jsonl_string(&set);
        assert_eq!(read_jsonl(text.as_bytes()).unwrap(), set);
        assert_eq!(poly_eval_mod(&f, &one, &q), 0);
    }

    #[test]
    fn ringlwe_requires_sigma_prime() {
        let f = IntPolynomial::parse("x^2 + 2").unwrap();
        let emb = build_embedding(&f, 128).unwrap();
        let q = PrimeModulus::new(3u32).unwrap();
        assert!(gen_ringlwe_samples(&emb, &q, &spec(1.0), &[0, 1], 1, 0).is_err());
    }

    #[test]
    fn evaluation_helper() {
        assert_eq!(eval_u64(&[1, 2, 3], 2, 1000), 17);
    }
}
