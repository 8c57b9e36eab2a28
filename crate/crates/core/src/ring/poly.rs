use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Assign, Integer};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense polynomial with arbitrary-precision integer coefficients.
///
/// `coeffs()[i]` is the coefficient of `x^i`. The representation is kept
/// canonical: no trailing zero coefficients, so the zero polynomial has an
/// empty coefficient vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<Integer>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().map_or(false, |c| *c == 0) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<Integer>) -> Self {
        Self::new(vec![c.into()])
    }

    /// `c * x^degree`
    pub fn monomial(degree: usize, c: impl Into<Integer>) -> Self {
        let mut coeffs = vec![Integer::new(); degree + 1];
        coeffs[degree] = c.into();
        Self::new(coeffs)
    }

    pub fn x() -> Self {
        Self::monomial(1, 1)
    }

    /// `x^n + c`
    pub fn binomial(n: usize, c: impl Into<Integer>) -> Self {
        let mut p = Self::monomial(n, 1);
        p.coeffs[0] += c.into();
        Self::new(p.coeffs)
    }

    /// `x^n + a x + b`, `n >= 2`.
    pub fn trinomial(n: usize, a: impl Into<Integer>, b: impl Into<Integer>) -> Self {
        assert!(n >= 2, "trinomial degree must be at least 2");
        let mut coeffs = vec![Integer::new(); n + 1];
        coeffs[n] = Integer::from(1);
        coeffs[1] = a.into();
        coeffs[0] = b.into();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Integer {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().map_or(false, |c| *c == 1)
    }

    pub fn require_monic(&self) -> Result<()> {
        if self.is_monic() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("polynomial {self} is not monic")))
        }
    }

    /// If the polynomial is `x^n + c` with `n >= 1`, returns `(n, c)`.
    pub fn as_binomial(&self) -> Option<(usize, &Integer)> {
        let n = self.degree();
        if n == 0 || !self.is_monic() {
            return None;
        }
        if self.coeffs[1..n].iter().all(|c| *c == 0) {
            Some((n, &self.coeffs[0]))
        } else {
            None
        }
    }

    /// If the polynomial is `x^n + a x + b` with `n >= 2`, returns `(n, a, b)`.
    pub fn as_trinomial(&self) -> Option<(usize, &Integer, &Integer)> {
        let n = self.degree();
        if n < 2 || !self.is_monic() {
            return None;
        }
        if self.coeffs[2..n].iter().all(|c| *c == 0) {
            Some((n, &self.coeffs[1], &self.coeffs[0]))
        } else {
            None
        }
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c * i as u64))
                .collect(),
        )
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> Integer {
        self.coeffs.iter().map(|c| c.clone().abs()).sum()
    }

    /// Division with remainder by a monic divisor; exact over the integers.
    pub fn div_rem_monic(&self, divisor: &Self) -> Result<(Self, Self)> {
        if !divisor.is_monic() {
            return Err(Error::InvalidInput(format!("divisor {divisor} is not monic")));
        }
        let d = divisor.degree();
        if self.coeffs.len() <= d {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Integer::new(); rem.len() - d];
        let mut t = Integer::new();
        for i in (d..rem.len()).rev() {
            if rem[i] == 0 {
                continue;
            }
            let c = std::mem::take(&mut rem[i]);
            for (j, dc) in divisor.coeffs[..d].iter().enumerate() {
                if *dc != 0 {
                    t.assign(&c * dc);
                    rem[i - d + j] -= &t;
                }
            }
            quot[i - d] = c;
        }
        rem.truncate(d);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Exact quotient by a monic divisor, `None` if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Self) -> Result<Option<Self>> {
        let (q, r) = self.div_rem_monic(divisor)?;
        Ok(r.is_zero().then_some(q))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::constant(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Parses expressions such as `x^1024 + (2^31+14)*x + 2^31`.
    ///
    /// Grammar: sums and differences of products of powers of integers, `x`,
    /// and parenthesised sub-expressions. Juxtaposition (`3x`) is accepted as
    /// multiplication.
    pub fn parse(s: &str) -> Result<Self> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}

impl<'a> Add<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPolynomial::new(
            (0..n)
                .map(|i| {
                    let mut c = self.coeff(i);
                    if let Some(r) = rhs.coeffs.get(i) {
                        c += r;
                    }
                    c
                })
                .collect(),
        )
    }
}

impl<'a> Sub<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| Integer::from(-c)).collect(),
        }
    }
}

impl<'a> Mul<&'a IntPolynomial> for &'a IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if *b != 0 {
                    out[i + j] += a * b;
                }
            }
        }
        IntPolynomial::new(out)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let mag = Integer::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag == 1) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyDoc {
    coeffs: Vec<String>,
    var: String,
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyDoc {
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
            var: "x".into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PolyDoc::deserialize(d)?;
        if doc.var != "x" {
            return Err(D::Error::custom(format!("unsupported variable `{}`", doc.var)));
        }
        let coeffs = doc
            .coeffs
            .iter()
            .map(|s| {
                Integer::from_str_radix(s.trim(), 10)
                    .map_err(|e| D::Error::custom(format!("bad coefficient `{s}`: {e}")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(IntPolynomial::new(coeffs))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidInput(format!(
            "polynomial parse error at byte {}: {msg} in `{}`",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<IntPolynomial> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<IntPolynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(b'x') | Some(b'(') => acc = &acc * &self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<IntPolynomial> {
        let (base, is_x) = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.exponent()?;
            if is_x {
                return Ok(IntPolynomial::monomial(e as usize, 1));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err("expected a non-negative exponent"))
    }

    fn atom(&mut self) -> Result<(IntPolynomial, bool)> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok((IntPolynomial::x(), true))
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok((v, false))
            }
            Some(b'-') => {
                self.pos += 1;
                let (v, _) = self.atom()?;
                Ok((-&v, false))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v = Integer::from_str_radix(s, 10).map_err(|_| self.err("bad integer"))?;
                Ok((IntPolynomial::constant(v), false))
            }
            _ => Err(self.err("expected an integer, `x` or `(`")),
        }
    }
}

impl std::str::FromStr for IntPolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
