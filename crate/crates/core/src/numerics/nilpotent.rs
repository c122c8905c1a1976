//! Transcendental functions of nilpotent cohomology classes.

use rug::Float;

use super::complex::Complex;
use super::constants::Constants;
use crate::cohomology::{CohClass, GradedFrobeniusAlgebra};
use crate::error::{Error, Result};

/// `Γ(1 + x) = exp(-γ x + Σ_{k≥2} (-1)^k ζ(k) x^k / k)` for nilpotent `x`,
/// summed up to `x^order`; `x^{order+1}` must vanish.
pub fn gamma_of_one_plus_nilpotent(alg: &GradedFrobeniusAlgebra, x: &CohClass, order: usize) -> Result<CohClass> {
    if !alg.is_nilpotent(x) {
        return Err(Error::Domain("Γ(1+x) needs x without a degree-0 component".into()));
    }
    let bits = x.prec();
    let mut pow = x.clone();
    for _ in 0..order {
        pow = alg.cup(&pow, x)?;
    }
    if pow.coeffs.iter().any(|c| !c.is_zero()) {
        return Err(Error::Domain(format!("x^{} does not vanish", order + 1)));
    }
    let consts = Constants::at(bits);
    let mut coeffs = vec![Complex::zero(bits), Complex::from_real(-consts.euler_gamma())];
    for k in 2..=order as u32 {
        let z = Float::with_val(bits, consts.zeta(k)? / k);
        coeffs.push(Complex::from_real(if k % 2 == 0 { z } else { -z }));
    }
    let log = alg.power_series(&coeffs, x)?;
    alg.exp_nilpotent(&log)
}
