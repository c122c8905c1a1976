//! Bernoulli numbers, zeta values at integers and the Euler–Mascheroni constant.
//!
//! Both transcendental constants are evaluated by Euler–Maclaurin summation
//! with exact Bernoulli coefficients, and cached per binary precision.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rug::ops::Pow;
use rug::Float;

use super::complex::{decimal_digits, float_from_rational};
use crate::error::{Error, Result};

static BERNOULLI: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();

/// Exact Bernoulli number `B_k` with the convention `B_1 = -1/2`.
pub fn bernoulli(k: usize) -> BigRational {
    let table = BERNOULLI.get_or_init(|| Mutex::new(vec![BigRational::one()]));
    let mut b = table.lock().expect("bernoulli table poisoned");
    while b.len() <= k {
        // sum_{j=0}^{m} binom(m+1, j) B_j = 0
        let m = b.len();
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += bj * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b[k].clone()
}

/// Per-precision cache of `gamma` and `zeta(k)`.
#[derive(Debug)]
pub struct Constants {
    bits: u32,
    gamma: Float,
    zeta: Mutex<HashMap<u32, Float>>,
}

static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Constants>>>> = OnceLock::new();

impl Constants {
    pub fn at(bits: u32) -> Arc<Constants> {
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = cache.lock().expect("constants cache poisoned").get(&bits) {
            return c.clone();
        }
        let built = Arc::new(Constants { bits, gamma: euler_maclaurin_gamma(bits), zeta: Mutex::new(HashMap::new()) });
        cache.lock().expect("constants cache poisoned").entry(bits).or_insert(built).clone()
    }

    pub fn euler_gamma(&self) -> Float {
        self.gamma.clone()
    }

    pub fn zeta(&self, k: u32) -> Result<Float> {
        if k < 2 {
            return Err(Error::Domain(format!("zeta({k}) is not defined by a convergent series")));
        }
        if let Some(v) = self.zeta.lock().expect("zeta cache poisoned").get(&k) {
            return Ok(v.clone());
        }
        let v = euler_maclaurin_zeta(self.bits, k);
        self.zeta.lock().expect("zeta cache poisoned").insert(k, v.clone());
        Ok(v)
    }
}

pub fn zeta_value(bits: u32, k: u32) -> Result<Float> {
    Constants::at(bits).zeta(k)
}

pub fn euler_gamma(bits: u32) -> Float {
    Constants::at(bits).euler_gamma()
}

/// Cutoff `N` for the Euler–Maclaurin split; the remainder series then converges
/// like `(j / (pi N))^{2j}` so a cutoff of about the digit count is ample.
fn cutoff(bits: u32) -> u64 {
    decimal_digits(bits) as u64 + 10
}

fn euler_maclaurin_zeta(bits: u32, k: u32) -> Float {
    let prec = bits + 32;
    let n = cutoff(bits);
    let s = Float::with_val(prec, k);
    let mut sum = Float::new(prec);
    for m in 1..n {
        sum += Float::with_val(prec, m).pow(-(k as i32));
    }
    let nf = Float::with_val(prec, n);
    let n_pow = Float::with_val(prec, (&nf).pow(-(k as i32)));
    // integral tail N^{1-s}/(s-1) and the half endpoint term
    sum += Float::with_val(prec, &n_pow * &nf) / (k - 1);
    sum += Float::with_val(prec, &n_pow / 2u32);
    let eps = {
        let mut e = Float::with_val(prec, 1);
        e >>= prec;
        e
    };
    // correction terms B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    let n2 = Float::with_val(prec, &nf * &nf);
    let mut rising = s.clone();
    let mut fact = Float::with_val(prec, 2);
    let mut npow = Float::with_val(prec, &n_pow / &nf);
    for j in 1usize.. {
        let b = float_from_rational(prec, &bernoulli(2 * j));
        let term = Float::with_val(prec, &b * &rising) * &npow / &fact;
        sum += &term;
        if term.clone().abs() < Float::with_val(prec, &eps * &sum) {
            break;
        }
        let a = Float::with_val(prec, &s + (2 * j - 1) as u32);
        let c = Float::with_val(prec, &s + (2 * j) as u32);
        rising *= a;
        rising *= c;
        fact *= ((2 * j + 1) * (2 * j + 2)) as u32;
        npow /= &n2;
    }
    Float::with_val(bits, sum)
}

fn euler_maclaurin_gamma(bits: u32) -> Float {
    let prec = bits + 32;
    let n = cutoff(bits);
    // gamma = H_N - ln N - 1/(2N) + sum_j B_{2j} / (2j N^{2j})
    let mut h = Float::new(prec);
    for m in 1..=n {
        h += Float::with_val(prec, 1) / Float::with_val(prec, m);
    }
    let nf = Float::with_val(prec, n);
    h -= Float::with_val(prec, nf.ln_ref());
    h -= Float::with_val(prec, 1) / Float::with_val(prec, 2 * n);
    let eps = {
        let mut e = Float::with_val(prec, 1);
        e >>= prec;
        e
    };
    let n2 = Float::with_val(prec, &nf * &nf);
    let mut npow = n2.clone();
    for j in 1usize.. {
        let b = float_from_rational(prec, &bernoulli(2 * j));
        let term = Float::with_val(prec, &b / &npow) / (2 * j) as u32;
        h += &term;
        if term.abs() < eps {
            break;
        }
        npow *= &n2;
    }
    Float::with_val(bits, h)
}
