//! Dense complex matrices at working precision.

use std::ops::{Index, IndexMut};

use rug::Float;

use super::complex::Complex;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.cols + c]
    }
}

impl CMatrix {
    pub fn zeros(bits: u32, rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(bits); rows * cols] }
    }

    pub fn identity(bits: u32, n: usize) -> Self {
        let mut m = Self::zeros(bits, n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one(bits);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[Complex]) -> Self {
        let n = entries.len();
        let bits = entries.first().map_or(64, Complex::prec);
        let mut m = Self::zeros(bits, n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_columns(cols: &[Vec<Complex>]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        Self::from_fn(nrows, ncols, |r, c| cols[c][r].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map_or(64, Complex::prec)
    }

    pub fn column(&self, c: usize) -> Vec<Complex> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[Complex]) {
        for (r, x) in v.iter().enumerate() {
            self[(r, c)] = x.clone();
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let bits = self.prec();
        let mut out = Self::zeros(bits, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if b.is_zero() {
                        continue;
                    }
                    out.data[r * other.cols + c].add_mul(a, b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let bits = self.prec();
        (0..self.rows)
            .map(|r| {
                let mut acc = Complex::zero(bits);
                for (c, x) in v.iter().enumerate() {
                    let a = &self[(r, c)];
                    if !a.is_zero() && !x.is_zero() {
                        acc.add_mul(a, x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: &Complex) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Kronecker product; the basis of the result is ordered `(i, j) -> i * n_other + j`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            let (r1, r2) = (r / other.rows, r % other.rows);
            let (c1, c2) = (c / other.cols, c % other.cols);
            &self[(r1, c1)] * &other[(r2, c2)]
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for x in &self.data {
            let a = x.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Frobenius norm.
    pub fn norm(&self) -> Float {
        let mut s = Float::new(self.prec());
        for x in &self.data {
            s += x.norm_sqr();
        }
        s.sqrt()
    }

    /// Induced 1-norm (maximum column sum).
    pub fn norm1(&self) -> Float {
        let mut best = Float::new(self.prec());
        for c in 0..self.cols {
            let mut s = Float::new(self.prec());
            for r in 0..self.rows {
                s += self[(r, c)].abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        Ok(lu.solve_matrix(&Self::identity(self.prec(), self.rows)))
    }

    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        Ok(self.lu()?.solve_matrix(rhs))
    }

    pub fn det(&self) -> Complex {
        match Lu::factor(self) {
            Ok(lu) => lu.det(),
            Err(_) => Complex::zero(self.prec()),
        }
    }

    /// 1-norm condition number `||A||_1 ||A^{-1}||_1`.
    pub fn condition_number(&self) -> Result<Float> {
        let inv = self.inverse()?;
        Ok(self.norm1() * inv.norm1())
    }

    /// Complex least squares `min ||A x - b||` through the normal equations.
    /// Adequate at multiprecision for the small, well-scaled systems used here.
    pub fn least_squares(&self, rhs: &Self) -> Result<Self> {
        let ah = Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj());
        let normal = ah.matmul(self);
        normal.solve(&ah.matmul(rhs))
    }

    pub fn map(&self, f: impl Fn(&Complex) -> Complex) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    /// `exp(A)` via scaling and squaring with a Taylor kernel.
    pub fn exp(&self) -> Self {
        assert!(self.is_square());
        let bits = self.prec();
        let n = self.rows;
        let norm = self.norm().to_f64();
        let mut squarings = 0u32;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
        }
        let mut scale = Float::with_val(bits, 1);
        scale >>= squarings;
        let a = self.scale(&Complex::from_real(scale));
        let eps = {
            let mut e = Float::with_val(bits, 1);
            e >>= bits;
            e
        };
        let mut term = Self::identity(bits, n);
        let mut sum = Self::identity(bits, n);
        for k in 1..10_000u32 {
            term = term.matmul(&a).scale(&Complex::from_real(Float::with_val(bits, 1) / k));
            sum = sum.add(&term);
            if term.max_abs() < eps {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }
}

/// Partial-pivoting LU factorization `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
    sign: i32,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Domain("LU requires a square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[(k, k)].abs();
            for r in k + 1..n {
                let v = lu[(r, k)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best.is_zero() {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if piv != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let pivot = lu[(k, k)].clone();
            for r in k + 1..n {
                if lu[(r, k)].is_zero() {
                    continue;
                }
                let f = &lu[(r, k)] / &pivot;
                for c in k + 1..n {
                    let t = &f * &lu[(k, c)];
                    lu[(r, c)] -= &t;
                }
                lu[(r, k)] = f;
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn det(&self) -> Complex {
        let bits = self.lu.prec();
        let mut d = Complex::from_i64(bits, i64::from(self.sign));
        for i in 0..self.n {
            d = &d * &self.lu[(i, i)];
        }
        d
    }

    pub fn solve_vec(&self, b: &[Complex]) -> Vec<Complex> {
        let n = self.n;
        let mut x: Vec<Complex> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let t = &self.lu[(i, j)] * &x[j];
                x[i] -= &t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = &self.lu[(i, j)] * &x[j];
                x[i] -= &t;
            }
            x[i] = &x[i] / &self.lu[(i, i)];
        }
        x
    }

    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(b.prec(), b.rows, b.cols);
        for c in 0..b.cols {
            let x = self.solve_vec(&b.column(c));
            out.set_column(c, &x);
        }
        out
    }
}

pub fn vec_norm(v: &[Complex]) -> Float {
    let bits = v.first().map_or(64, Complex::prec);
    let mut s = Float::new(bits);
    for x in v {
        s += x.norm_sqr();
    }
    s.sqrt()
}

pub fn vec_sub(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_scale(a: &[Complex], s: &Complex) -> Vec<Complex> {
    a.iter().map(|x| x * s).collect()
}

/// Hermitian inner product `sum conj(a_i) b_i`.
pub fn hermitian_dot(a: &[Complex], b: &[Complex]) -> Complex {
    let bits = a.first().map_or(64, Complex::prec);
    let mut acc = Complex::zero(bits);
    for (x, y) in a.iter().zip(b) {
        acc.add_mul(&x.conj(), y);
    }
    acc
}

/// Fubini-Study angle between the complex lines spanned by `a` and `b`.
///
/// The sine comes from the component of `a` orthogonal to `b`, so tiny angles keep
/// full relative accuracy.
pub fn fubini_study_angle(a: &[Complex], b: &[Complex]) -> Float {
    let na = vec_norm(a);
    let nb = vec_norm(b);
    let bits = na.prec();
    let ab = hermitian_dot(b, a);
    let coef = &ab / &Complex::from_real(Float::with_val(bits, nb.square_ref()));
    let resid: Vec<Complex> = a.iter().zip(b).map(|(x, y)| x - &(&coef * y)).collect();
    let sin = Float::with_val(bits, vec_norm(&resid) / &na);
    let cos = Float::with_val(bits, ab.abs() / Float::with_val(bits, &na * &nb));
    Float::with_val(bits, sin.atan2_ref(&cos))
}
