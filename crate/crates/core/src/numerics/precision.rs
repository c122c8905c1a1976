use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard digits carried on top of the requested decimal precision.
pub const GUARD_DIGITS: u32 = 20;

/// Working precision and tolerances shared by every computation.
///
/// `digits` is the number of decimal digits the caller wants to trust; all
/// arithmetic runs at `digits + GUARD_DIGITS` decimal digits. Tolerances are
/// stored as base-10 exponents so that they are exactly reproducible at any
/// working precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub digits: u32,
    /// Relative truncation tolerance for series, as `10^-series_tol_exp`.
    pub series_tol_exp: u32,
    /// Local error tolerance for the ODE integrator, as `10^-ode_tol_exp`.
    pub ode_tol_exp: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::with_digits(50).expect("50 digits is valid")
    }
}

impl PrecisionContext {
    pub const MIN_DIGITS: u32 = 30;

    pub fn new(digits: u32, series_tol_exp: u32, ode_tol_exp: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::Domain(format!("precision of {digits} digits is below the minimum of {}", Self::MIN_DIGITS)));
        }
        let max_exp = digits + GUARD_DIGITS;
        if series_tol_exp == 0 || ode_tol_exp == 0 {
            return Err(Error::Domain("tolerances must be strictly below 1".into()));
        }
        if series_tol_exp > max_exp || ode_tol_exp > max_exp {
            return Err(Error::Domain(format!("tolerance exponent exceeds the working precision of {max_exp} digits")));
        }
        Ok(Self { digits, series_tol_exp, ode_tol_exp })
    }

    /// Default tolerances: five digits beyond the requested precision.
    pub fn with_digits(digits: u32) -> Result<Self> {
        Self::new(digits, digits + 5, digits + 5)
    }

    pub fn working_digits(&self) -> u32 {
        self.digits + GUARD_DIGITS
    }

    /// Binary precision of every `Float` created under this context.
    pub fn bits(&self) -> u32 {
        (f64::from(self.working_digits()) * std::f64::consts::LOG2_10).ceil() as u32 + 4
    }

    pub fn series_tol(&self) -> Float {
        pow10(self.bits(), -(self.series_tol_exp as i32))
    }

    pub fn ode_tol(&self) -> Float {
        pow10(self.bits(), -(self.ode_tol_exp as i32))
    }

    /// Unit roundoff at the working precision.
    pub fn epsilon(&self) -> Float {
        let mut e = Float::with_val(self.bits(), 1);
        e >>= self.bits() - 1;
        e
    }

    /// `10^-k` at the working precision.
    pub fn tol(&self, k: i32) -> Float {
        pow10(self.bits(), -k)
    }

    pub fn with_ode_tol_exp(&self, exp: u32) -> Result<Self> {
        Self::new(self.digits, self.series_tol_exp, exp)
    }
}

pub(crate) fn pow10(bits: u32, exp: i32) -> Float {
    let ten = Float::with_val(bits, 10);
    Float::with_val(bits, ten.pow(exp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(PrecisionContext::with_digits(29).is_err());
        assert!(PrecisionContext::with_digits(30).is_ok());
    }

    #[test]
    fn rejects_unrepresentable_tolerance() {
        assert!(PrecisionContext::new(40, 0, 10).is_err());
        assert!(PrecisionContext::new(40, 61, 10).is_err());
        assert!(PrecisionContext::new(40, 60, 60).is_ok());
    }

    #[test]
    fn tolerances_are_pure_functions_of_fields() {
        let a = PrecisionContext::with_digits(50).unwrap();
        let b = PrecisionContext::with_digits(50).unwrap();
        assert_eq!(a.series_tol(), b.series_tol());
        assert_eq!(a.bits(), b.bits());
        assert!(a.series_tol() < 1e-54 && a.series_tol() > 1e-56);
    }
}
