//! Points on the universal cover of the punctured plane.

use rug::Float;
use serde::{Deserialize, Serialize};

use super::complex::{pi, Complex};
use super::matrix::CMatrix;

/// A nonzero complex number together with a chosen, unreduced argument.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPoint {
    pub abs: Float,
    pub arg: Float,
}

impl ZPoint {
    pub fn new(abs: Float, arg: Float) -> Self {
        assert!(abs > 0, "ZPoint requires a positive modulus");
        Self { abs, arg }
    }

    pub fn from_f64(bits: u32, abs: f64, arg: f64) -> Self {
        Self::new(Float::with_val(bits, abs), Float::with_val(bits, arg))
    }

    /// Principal lift of a nonzero complex number.
    pub fn principal(z: &Complex) -> Self {
        Self::new(z.abs(), z.arg())
    }

    pub fn prec(&self) -> u32 {
        self.abs.prec()
    }

    pub fn value(&self) -> Complex {
        Complex::from_polar(&self.abs, &self.arg)
    }

    /// `log z = log|z| + i arg z` on the tracked branch.
    pub fn log(&self) -> Complex {
        let p = self.prec();
        Complex::new(Float::with_val(p, self.abs.ln_ref()), self.arg.clone())
    }

    /// Same modulus, argument shifted by `k * pi`.
    pub fn rotate_pi(&self, k: i32) -> Self {
        let p = self.prec();
        let shift = Float::with_val(p, pi(p) * k);
        Self { abs: self.abs.clone(), arg: Float::with_val(p, &self.arg + &shift) }
    }

    pub fn rotate(&self, angle: &Float) -> Self {
        Self { abs: self.abs.clone(), arg: Float::with_val(self.prec(), &self.arg + angle) }
    }

    pub fn with_abs(&self, abs: Float) -> Self {
        Self::new(abs, self.arg.clone())
    }

    /// `z^a` on this branch for complex `a`.
    pub fn pow(&self, a: &Complex) -> Complex {
        (&self.log() * a).exp()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.abs.to_f64(), self.arg.to_f64())
    }
}

/// Vector data attached to a point of the universal cover.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedValue {
    pub value: Vec<Complex>,
    pub z: ZPoint,
}

/// Serializable summary of a branched point for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZPointRecord {
    pub abs: String,
    pub arg: String,
}

impl From<&ZPoint> for ZPointRecord {
    fn from(z: &ZPoint) -> Self {
        let d = Some(super::complex::decimal_digits(z.prec()));
        Self { abs: z.abs.to_string_radix(10, d), arg: z.arg.to_string_radix(10, d) }
    }
}

fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.rows()).all(|r| (0..m.cols()).all(|c| r == c || m[(r, c)].is_zero()))
}

/// `exp(exponent * log z)` on the branch carried by `z`.
pub fn branch_power(z: &ZPoint, exponent: &CMatrix) -> CMatrix {
    let logz = z.log();
    if is_diagonal(exponent) {
        let d: Vec<Complex> = (0..exponent.rows()).map(|i| (&exponent[(i, i)] * &logz).exp()).collect();
        return CMatrix::diagonal(&d);
    }
    exponent.scale(&logz).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 200;

    #[test]
    fn zero_exponent_is_identity() {
        let z = ZPoint::from_f64(P, 2.5, 7.0);
        let m = branch_power(&z, &CMatrix::zeros(P, 3, 3));
        assert!(m.sub(&CMatrix::identity(P, 3)).max_abs() < 1e-55);
    }

    #[test]
    fn diagonal_exponent_at_e() {
        let e = Float::with_val(P, 1).exp();
        let z = ZPoint::new(e.clone(), Float::new(P));
        let mu = CMatrix::diagonal(&[Complex::from_i64(P, -1), Complex::zero(P), Complex::from_i64(P, 1)]);
        let m = branch_power(&z, &mu.scale(&Complex::from_i64(P, -1)));
        assert!((&m[(0, 0)] - &Complex::from_real(e.clone())).abs() < 1e-55);
        assert!((&m[(2, 2)] - &Complex::from_real(Float::with_val(P, 1) / &e)).abs() < 1e-55);
    }

    #[test]
    fn full_turn_multiplies_by_monodromy() {
        let mut n = CMatrix::zeros(P, 2, 2);
        n[(1, 0)] = Complex::from_i64(P, 2);
        let z0 = ZPoint::from_f64(P, 0.7, 0.3);
        let z1 = z0.rotate_pi(2);
        let two_pi_i = Complex::new(Float::new(P), Float::with_val(P, pi(P) * 2));
        let mono = n.scale(&two_pi_i).exp();
        let lhs = branch_power(&z1, &n);
        let rhs = branch_power(&z0, &n).matmul(&mono);
        assert!(lhs.sub(&rhs).max_abs() < 1e-55);
    }
}
