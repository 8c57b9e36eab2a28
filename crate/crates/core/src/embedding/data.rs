use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rug::Float;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::bigfloat::{BigComplex, FloatMatrix};
use super::roots::{complex_roots, RowKind};
use crate::error::{Error, Result};
use crate::ring::IntPolynomial;

pub const DEFAULT_PRECISION_BITS: u32 = 300;

/// Canonical embedding data of Z[x]/f at a fixed precision.
///
/// Column i of `m` is θ(α^i): the real embeddings first, then the real
/// parts of one embedding from each complex-conjugate pair, then the
/// matching imaginary parts. No √2 scaling is applied to complex rows.
#[derive(Clone, Debug)]
pub struct EmbeddingData {
    pub f: IntPolynomial,
    pub precision_bits: u32,
    pub roots: Vec<BigComplex>,
    pub row_key: Vec<RowKind>,
    pub r1: usize,
    pub r2: usize,
    pub m: FloatMatrix,
    pub m_inv: FloatMatrix,
    pub det_abs: Float,
}

fn two_pow_neg(prec: u32, e: u32) -> Float {
    Float::with_val(prec, 1) >> e
}

pub fn build_embedding(f: &IntPolynomial, precision_bits: u32) -> Result<EmbeddingData> {
    let prec = precision_bits;
    let ordered = complex_roots(f, prec)?;
    let n = f.degree();
    let (r1, r2) = (ordered.r1, ordered.r2);
    let mut m = FloatMatrix::zeros(n, n, prec);
    for (j, z) in ordered.roots.iter().enumerate() {
        let mut pw = BigComplex::from_f64(prec, 1.0, 0.0);
        for i in 0..n {
            if j < r1 {
                *m.get_mut(j, i) = pw.re.clone();
            } else {
                let k = j - r1;
                *m.get_mut(r1 + k, i) = pw.re.clone();
                *m.get_mut(r1 + r2 + k, i) = pw.im.clone();
            }
            pw = pw.mul(z);
        }
    }
    let lu = m.lu()?;
    let det_abs = lu.det_abs();
    let m_inv = lu.inverse();
    let emb = EmbeddingData {
        f: f.clone(),
        precision_bits,
        roots: ordered.roots,
        row_key: ordered.row_key,
        r1,
        r2,
        m,
        m_inv,
        det_abs,
    };
    emb.check_round_trip()?;
    Ok(emb)
}

impl EmbeddingData {
    pub fn n(&self) -> usize {
        self.m.rows()
    }

    /// Enforces ‖M·M⁻¹ − I‖_max < 2^(−precision/2).
    pub fn check_round_trip(&self) -> Result<()> {
        let d = self.m.mul(&self.m_inv).distance_from_identity();
        let tol = two_pow_neg(self.precision_bits, self.precision_bits / 2);
        if d >= tol {
            return Err(Error::PrecisionInsufficient(format!(
                "M·M⁻¹ differs from the identity by {:.3e} at {} bits",
                d.to_f64(),
                self.precision_bits
            )));
        }
        Ok(())
    }

    /// det(M)^(1/n).
    pub fn det_root(&self) -> Float {
        let n = self.n() as u32;
        Float::with_val(self.precision_bits, self.det_abs.clone().root(n))
    }

    /// θ of a polynomial given by integer coordinates in the power basis.
    pub fn embed(&self, coords: &[rug::Integer]) -> Vec<Float> {
        self.m.mul_int_vec(coords)
    }

    /// A short JSON-friendly summary (reals at 30 significant digits).
    pub fn summary(&self) -> EmbeddingSummary {
        EmbeddingSummary {
            f: self.f.clone(),
            precision_bits: self.precision_bits,
            n: self.n(),
            r1: self.r1,
            r2: self.r2,
            det_abs: self.det_abs.clone(),
            det_root: self.det_root(),
        }
    }

    // -----------------------------------------------------------------
    // on-disk cache

    pub fn cache_key(f: &IntPolynomial, precision_bits: u32) -> String {
        let mut h = Sha256::new();
        h.update(f.to_string().as_bytes());
        format!("{}-{}", hex::encode(&h.finalize()[..16]), precision_bits)
    }

    pub fn cache_path(dir: &Path, f: &IntPolynomial, precision_bits: u32) -> PathBuf {
        dir.join(format!("emb-{}.bin", Self::cache_key(f, precision_bits)))
    }

    /// Loads a cached embedding or builds and stores one.
    pub fn load_or_build(dir: &Path, f: &IntPolynomial, precision_bits: u32) -> Result<Self> {
        let path = Self::cache_path(dir, f, precision_bits);
        if path.exists() {
            match Self::read_blob(&path) {
                Ok(e) if e.f == *f && e.precision_bits == precision_bits => return Ok(e),
                Ok(_) => log::warn!("cache entry {} does not match; rebuilding", path.display()),
                Err(e) => log::warn!("unreadable cache entry {}: {e}; rebuilding", path.display()),
            }
        }
        let e = build_embedding(f, precision_bits)?;
        std::fs::create_dir_all(dir)?;
        e.write_blob(&path)?;
        Ok(e)
    }

    const MAGIC: &'static [u8; 4] = b"WREM";
    const VERSION: u32 = 1;

    pub fn write_blob(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(Self::MAGIC);
        out.extend_from_slice(&Self::VERSION.to_le_bytes());
        out.extend_from_slice(&self.precision_bits.to_le_bytes());
        put_str(&mut out, &self.f.to_string());
        out.extend_from_slice(&(self.r1 as u32).to_le_bytes());
        out.extend_from_slice(&(self.r2 as u32).to_le_bytes());
        for z in &self.roots {
            put_float(&mut out, &z.re);
            put_float(&mut out, &z.im);
        }
        for x in self.m.data().iter().chain(self.m_inv.data()) {
            put_float(&mut out, x);
        }
        put_float(&mut out, &self.det_abs);
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&out)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_blob(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let mut r = Cursor { buf: &buf, pos: 0 };
        if r.take(4)? != Self::MAGIC {
            return Err(Error::Malformed("not an embedding cache blob".into()));
        }
        let version = r.u32()?;
        if version != Self::VERSION {
            return Err(Error::Malformed(format!("unsupported cache version {version}")));
        }
        let prec = r.u32()?;
        let f = IntPolynomial::parse(&r.string()?)?;
        let r1 = r.u32()? as usize;
        let r2 = r.u32()? as usize;
        let n = f.degree();
        if r1 + 2 * r2 != n {
            return Err(Error::Malformed("signature does not match degree".into()));
        }
        let mut roots = Vec::with_capacity(r1 + r2);
        for _ in 0..r1 + r2 {
            let re = r.float(prec)?;
            let im = r.float(prec)?;
            roots.push(BigComplex { re, im });
        }
        let read_matrix = |r: &mut Cursor| -> Result<FloatMatrix> {
            let data = (0..n * n).map(|_| r.float(prec)).collect::<Result<Vec<_>>>()?;
            Ok(FloatMatrix::from_data(n, n, prec, data))
        };
        let m = read_matrix(&mut r)?;
        let m_inv = read_matrix(&mut r)?;
        let det_abs = r.float(prec)?;
        let mut row_key = vec![RowKind::Real; r1];
        row_key.extend(std::iter::repeat(RowKind::ComplexRe).take(r2));
        row_key.extend(std::iter::repeat(RowKind::ComplexIm).take(r2));
        Ok(EmbeddingData {
            f,
            precision_bits: prec,
            roots,
            row_key,
            r1,
            r2,
            m,
            m_inv,
            det_abs,
        })
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_float(out: &mut Vec<u8>, x: &Float) {
    put_str(out, &x.to_string_radix(16, None));
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.pos + k > self.buf.len() {
            return Err(Error::Malformed("truncated cache blob".into()));
        }
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let b = self.take(len)?;
        String::from_utf8(b.to_vec()).map_err(|e| Error::Malformed(e.to_string()))
    }

    fn float(&mut self, prec: u32) -> Result<Float> {
        let s = self.string()?;
        parse_hex_float(&s, prec)
    }
}

pub fn parse_hex_float(s: &str, prec: u32) -> Result<Float> {
    Float::parse_radix(s, 16)
        .map(|v| Float::with_val(prec, v))
        .map_err(|e| Error::Malformed(format!("bad float `{s}`: {e}")))
}

/// Serialises a float as a decimal string with 30 significant digits.
pub fn serialize_real30<S: Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string_radix(10, Some(30)))
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingSummary {
    pub f: IntPolynomial,
    pub precision_bits: u32,
    pub n: usize,
    pub r1: usize,
    pub r2: usize,
    #[serde(serialize_with = "serialize_real30")]
    pub det_abs: Float,
    #[serde(serialize_with = "serialize_real30")]
    pub det_root: Float,
}
