//! Arbitrary-precision complex numbers and dense real matrices on top of MPFR.

use rug::{Assign, Float};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        BigComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec();
        BigComplex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec();
        BigComplex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= Float::with_val(p, &self.im * &o.im);
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += Float::with_val(p, &self.im * &o.re);
        BigComplex { re, im }
    }

    pub fn add_real(&self, c: &Float) -> Self {
        BigComplex {
            re: Float::with_val(self.prec(), &self.re + c),
            im: self.im.clone(),
        }
    }

    pub fn scale(&self, c: &Float) -> Self {
        let p = self.prec();
        BigComplex {
            re: Float::with_val(p, &self.re * c),
            im: Float::with_val(p, &self.im * c),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut n = Float::with_val(p, self.re.square_ref());
        n += Float::with_val(p, self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, o: &Self) -> Self {
        let p = self.prec();
        let d = o.norm_sqr();
        let conj = o.conj();
        let num = self.mul(&conj);
        BigComplex {
            re: Float::with_val(p, &num.re / &d),
            im: Float::with_val(p, &num.im / &d),
        }
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: Float::with_val(self.prec(), -&self.im),
        }
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let p = self.prec();
        let mut base = self.clone();
        let mut acc = BigComplex::from_f64(p, 1.0, 0.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn to_f64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<Float>,
}

impl FloatMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        FloatMatrix {
            rows,
            cols,
            prec,
            data: vec![Float::new(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m.data[i * n + i].assign(1);
        }
        m
    }

    pub fn from_rows(prec: u32, rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c, prec);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m.data[i * c + j].assign(*v);
            }
        }
        m
    }

    pub fn from_data(rows: usize, cols: usize, prec: u32, data: Vec<Float>) -> Self {
        assert_eq!(data.len(), rows * cols);
        FloatMatrix { rows, cols, prec, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn data(&self) -> &[Float] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Float] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Float> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i].assign(self.get(i, j));
            }
        }
        t
    }

    pub fn scale(&self, c: &Float) -> Self {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= c;
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, o.cols, self.prec);
        let mut t = Float::new(self.prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    t.assign(a * o.get(k, j));
                    out.data[i * o.cols + j] += &t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Float]) -> Vec<Float> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut t = Float::new(self.prec);
        (0..self.rows)
            .map(|i| {
                let mut acc = Float::new(self.prec);
                for (a, x) in self.row(i).iter().zip(v) {
                    t.assign(a * x);
                    acc += &t;
                }
                acc
            })
            .collect()
    }

    /// Product with an integer vector, exact up to the working precision.
    pub fn mul_int_vec(&self, v: &[rug::Integer]) -> Vec<Float> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut t = Float::new(self.prec);
        (0..self.rows)
            .map(|i| {
                let mut acc = Float::new(self.prec);
                for (a, x) in self.row(i).iter().zip(v) {
                    if *x != 0 {
                        t.assign(a * x);
                        acc += &t;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|x| x.to_f64()).collect()
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec);
        for x in &self.data {
            let a = Float::with_val(self.prec, x.abs_ref());
            if a > m {
                m = a;
            }
        }
        m
    }

    /// max |A - I| entrywise.
    pub fn distance_from_identity(&self) -> Float {
        let mut d = self.clone();
        for i in 0..self.rows.min(self.cols) {
            *d.get_mut(i, i) -= 1;
        }
        d.max_abs()
    }

    pub fn lu(&self) -> Result<Lu> {
        assert_eq!(self.rows, self.cols, "LU needs a square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1i32;
        let mut t = Float::new(self.prec);
        for k in 0..n {
            let mut piv = k;
            let mut best = Float::with_val(self.prec, a[k * n + k].abs_ref());
            for i in k + 1..n {
                let v = Float::with_val(self.prec, a[i * n + k].abs_ref());
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best.is_zero() {
                return Err(Error::PrecisionInsufficient(format!(
                    "matrix is singular at working precision (column {k})"
                )));
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let pivot = a[k * n + k].clone();
            for i in k + 1..n {
                if a[i * n + k].is_zero() {
                    continue;
                }
                a[i * n + k] /= &pivot;
                let l = a[i * n + k].clone();
                for j in k + 1..n {
                    t.assign(&l * &a[k * n + j]);
                    a[i * n + j] -= &t;
                }
            }
        }
        Ok(Lu {
            n,
            prec: self.prec,
            lu: a,
            perm,
            sign,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(self.lu()?.inverse())
    }
}

/// PA = LU with unit lower-triangular L.
pub struct Lu {
    n: usize,
    prec: u32,
    lu: Vec<Float>,
    perm: Vec<usize>,
    sign: i32,
}

impl Lu {
    pub fn det(&self) -> Float {
        let mut d = Float::with_val(self.prec, self.sign);
        for i in 0..self.n {
            d *= &self.lu[i * self.n + i];
        }
        d
    }

    pub fn det_abs(&self) -> Float {
        self.det().abs()
    }

    pub fn solve(&self, b: &[Float]) -> Vec<Float> {
        let n = self.n;
        let mut t = Float::new(self.prec);
        let mut y: Vec<Float> = self.perm.iter().map(|&p| Float::with_val(self.prec, &b[p])).collect();
        for i in 0..n {
            for j in 0..i {
                t.assign(&self.lu[i * n + j] * &y[j]);
                y[i] -= &t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                t.assign(&self.lu[i * n + j] * &y[j]);
                y[i] -= &t;
            }
            y[i] /= &self.lu[i * n + i];
        }
        y
    }

    pub fn inverse(&self) -> FloatMatrix {
        let n = self.n;
        let mut inv = FloatMatrix::zeros(n, n, self.prec);
        for j in 0..n {
            let mut e = vec![Float::new(self.prec); n];
            e[j].assign(1);
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                *inv.get_mut(i, j) = v;
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arithmetic() {
        let a = BigComplex::from_f64(128, 1.0, 2.0);
        let b = BigComplex::from_f64(128, 3.0, -1.0);
        let p = a.mul(&b);
        assert_eq!((p.re.to_f64(), p.im.to_f64()), (5.0, 5.0));
        let q = p.div(&b);
        assert!((q.re.to_f64() - 1.0).abs() < 1e-30 && (q.im.to_f64() - 2.0).abs() < 1e-30);
        let i = BigComplex::from_f64(128, 0.0, 1.0);
        let i4 = i.pow(4);
        assert_eq!((i4.re.to_f64(), i4.im.to_f64()), (1.0, 0.0));
    }

    #[test]
    fn inverse_and_determinant() {
        let m = FloatMatrix::from_rows(200, &[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]);
        let lu = m.lu().unwrap();
        // det = 0*(1) - 2*(1 - 0) + 1*(0 - 3) = -5
        assert_eq!(lu.det().to_f64(), -5.0);
        let inv = lu.inverse();
        let d = m.mul(&inv).distance_from_identity();
        assert!(d < Float::with_val(200, 1) >> 190u32);
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = FloatMatrix::from_rows(64, &[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(m.lu().is_err());
    }
}
