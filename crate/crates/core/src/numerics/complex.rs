//! Multiprecision complex scalars on top of MPFR floats.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rug::float::Constant;
use rug::Float;

#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6e} {:+.6e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = Some(decimal_digits(self.prec()));
        write!(
            f,
            "{}{}{}i",
            self.re.to_string_radix(10, digits),
            if self.im.is_sign_negative() { "" } else { "+" },
            self.im.to_string_radix(10, digits)
        )
    }
}

pub(crate) fn decimal_digits(bits: u32) -> usize {
    (f64::from(bits) / std::f64::consts::LOG2_10).floor() as usize
}

pub fn float_from_bigint(bits: u32, v: &BigInt) -> Float {
    match v.to_i64() {
        Some(x) => Float::with_val(bits, x),
        None => {
            let parsed = Float::parse(v.to_string()).expect("integer literal parses");
            Float::with_val(bits, parsed)
        }
    }
}

pub fn float_from_rational(bits: u32, r: &BigRational) -> Float {
    let num = float_from_bigint(bits, r.numer());
    let den = float_from_bigint(bits, r.denom());
    Float::with_val(bits, &num / &den)
}

impl Complex {
    pub fn zero(bits: u32) -> Self {
        Self { re: Float::new(bits), im: Float::new(bits) }
    }

    pub fn one(bits: u32) -> Self {
        Self::from_f64(bits, 1.0, 0.0)
    }

    pub fn i(bits: u32) -> Self {
        Self::from_f64(bits, 0.0, 1.0)
    }

    pub fn from_f64(bits: u32, re: f64, im: f64) -> Self {
        Self { re: Float::with_val(bits, re), im: Float::with_val(bits, im) }
    }

    pub fn from_i64(bits: u32, re: i64) -> Self {
        Self { re: Float::with_val(bits, re), im: Float::new(bits) }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn from_rational(bits: u32, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero(bits);
        }
        Self::from_real(float_from_rational(bits, r))
    }

    /// `e^{i theta}` for a real angle.
    pub fn cis(theta: &Float) -> Self {
        let (s, c) = theta.clone().sin_cos(Float::new(theta.prec()));
        Self { re: c, im: s }
    }

    /// `r e^{i theta}`.
    pub fn from_polar(r: &Float, theta: &Float) -> Self {
        let c = Self::cis(theta);
        c.scale(r)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let a = Float::with_val(p, self.re.square_ref());
        let b = Float::with_val(p, self.im.square_ref());
        a + b
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        Self { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn scale_i64(&self, s: i64) -> Self {
        let p = self.prec();
        Self { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        let p = self.prec();
        Self { re: Float::with_val(p, &self.re / &d), im: Float::with_val(p, -Float::with_val(p, &self.im / &d)) }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Self { re: Float::with_val(p, &m * &c), im: Float::with_val(p, &m * &s) }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        Self { re: Float::with_val(p, self.abs().ln_ref()), im: self.arg() }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Self::zero(p);
        }
        let r = self.abs();
        let half = Float::with_val(p, 0.5);
        let re = Float::with_val(p, Float::with_val(p, &r + &self.re) * &half).sqrt();
        let im_mag = Float::with_val(p, Float::with_val(p, &r - &self.re) * &half).sqrt();
        let im = if self.im.is_sign_negative() { -im_mag } else { im_mag };
        Self { re, im }
    }

    pub fn powi(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.prec());
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Decimal strings `(re, im)` at full working precision.
    pub fn to_decimal_strings(&self) -> (String, String) {
        let digits = Some(decimal_digits(self.prec()));
        (self.re.to_string_radix(10, digits), self.im.to_string_radix(10, digits))
    }

    /// Nearest Gaussian integer's real part and the distance to it.
    pub fn nearest_integer(&self) -> (i64, Float) {
        let p = self.prec();
        let r = Float::with_val(p, self.re.round_ref());
        let k = r.to_f64() as i64;
        let d = Complex { re: Float::with_val(p, &self.re - &r), im: self.im.clone() };
        (k, d.abs())
    }
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a Complex> for &'a Complex {
            type Output = Complex;
            fn $method(self, rhs: &'a Complex) -> Complex {
                let f: fn(&Complex, &Complex) -> Complex = $body;
                f(self, rhs)
            }
        }
        impl $trait<Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: Complex) -> Complex {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Complex> for Complex {
            type Output = Complex;
            fn $method(self, rhs: &'a Complex) -> Complex {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let p = a.prec();
    Complex { re: Float::with_val(p, &a.re + &b.re), im: Float::with_val(p, &a.im + &b.im) }
});

binop!(Sub, sub, |a, b| {
    let p = a.prec();
    Complex { re: Float::with_val(p, &a.re - &b.re), im: Float::with_val(p, &a.im - &b.im) }
});

binop!(Mul, mul, |a, b| {
    let p = a.prec();
    let ac = Float::with_val(p, &a.re * &b.re);
    let bd = Float::with_val(p, &a.im * &b.im);
    let ad = Float::with_val(p, &a.re * &b.im);
    let bc = Float::with_val(p, &a.im * &b.re);
    Complex { re: ac - bd, im: ad + bc }
});

binop!(Div, div, |a, b| {
    let p = a.prec();
    let d = b.norm_sqr();
    let ac = Float::with_val(p, &a.re * &b.re);
    let bd = Float::with_val(p, &a.im * &b.im);
    let bc = Float::with_val(p, &a.im * &b.re);
    let ad = Float::with_val(p, &a.re * &b.im);
    Complex { re: Float::with_val(p, Float::with_val(p, ac + bd) / &d), im: Float::with_val(p, Float::with_val(p, bc - ad) / &d) }
});

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        let p = self.prec();
        Complex { re: Float::with_val(p, -&self.re), im: Float::with_val(p, -&self.im) }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Complex> for Complex {
    fn mul_assign(&mut self, rhs: &Complex) {
        *self = &*self * rhs;
    }
}

impl Complex {
    /// `self += a * b` without an intermediate allocation for the sum.
    pub fn add_mul(&mut self, a: &Complex, b: &Complex) {
        let p = self.prec();
        let ac = Float::with_val(p, &a.re * &b.re);
        let bd = Float::with_val(p, &a.im * &b.im);
        let ad = Float::with_val(p, &a.re * &b.im);
        let bc = Float::with_val(p, &a.im * &b.re);
        self.re += ac;
        self.re -= bd;
        self.im += ad;
        self.im += bc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 200;

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn exp_ln_roundtrip() {
        let z = Complex::from_f64(P, 0.3, -2.1);
        assert!(close(&z.ln().exp(), &z, 1e-55));
    }

    #[test]
    fn sqrt_is_principal() {
        let z = Complex::from_f64(P, -4.0, 0.0);
        let r = z.sqrt();
        assert!(close(&r, &Complex::from_f64(P, 0.0, 2.0), 1e-55));
        let w = Complex::from_f64(P, -4.0, -1e-30);
        assert!(w.sqrt().im < 0.0);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Complex::from_f64(P, 1.5, 2.5);
        let b = Complex::from_f64(P, -0.25, 3.0);
        assert!(close(&(&(&a * &b) / &b), &a, 1e-55));
        assert!(close(&(&b.recip() * &b), &Complex::one(P), 1e-55));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let a = Complex::from_f64(P, 0.7, -0.2);
        let mut acc = Complex::one(P);
        for _ in 0..7 {
            acc = &acc * &a;
        }
        assert!(close(&a.powi(7), &acc, 1e-55));
    }

    #[test]
    fn big_rationals_convert() {
        let big: BigInt = BigInt::from(10).pow(30) + 7;
        let r = BigRational::new(big, BigInt::from(3));
        let c = Complex::from_rational(P, &r);
        let expect = Float::with_val(P, Float::parse("333333333333333333333333333335.6666666666666666666666666666666").unwrap());
        assert!(Float::with_val(P, &c.re - &expect).abs() < 1e-20);
    }
}
