//! Characteristic classes: Γ̂, Todd, Â, Chern characters and the Euler pairing.

use std::sync::Arc;

use num_traits::{One, Zero};
use rug::Float;
use serde::Serialize;

use crate::cohomology::{embed_factor, CohClass, GradedFrobeniusAlgebra};
use crate::error::{Error, Result};
use crate::exact::{self, rint, IntMatrix, Rat};
use crate::numerics::constants::{bernoulli, Constants};
use crate::numerics::{pi, Complex, PrecisionContext};

/// Chern character of the tangent bundle, graded by degree.
#[derive(Clone, Debug)]
pub struct TangentData {
    pub algebra: Arc<GradedFrobeniusAlgebra>,
    /// `ch_k(TX)` for `k = 0..=n`, each homogeneous of degree `2k`.
    pub ch: Vec<Vec<Rat>>,
    pub c1: Vec<Rat>,
}

impl TangentData {
    pub fn new(algebra: Arc<GradedFrobeniusAlgebra>, ch: Vec<Vec<Rat>>) -> Result<Self> {
        let n = algebra.dim_complex as usize;
        if ch.len() != n + 1 || ch.iter().any(|c| c.len() != algebra.dim()) {
            return Err(Error::Data(format!("expected ch_0..ch_{n} of length {}", algebra.dim())));
        }
        for (k, c) in ch.iter().enumerate() {
            if algebra.degree_part_exact(c, k as u32) != *c {
                return Err(Error::Data(format!("ch_{k} is not homogeneous of degree {}", 2 * k)));
            }
        }
        if algebra.integrate_exact(&algebra.cup_exact(&ch[0], &algebra.basis_vector(algebra.top))) != rint(n as i64) {
            return Err(Error::Data(format!("ch_0 must equal the dimension {n}")));
        }
        let c1 = ch.get(1).cloned().unwrap_or_else(|| vec![Rat::zero(); algebra.dim()]);
        Ok(Self { algebra, ch, c1 })
    }

    /// `ch(T P^n) = (n+1) e^p - 1`.
    pub fn projective(n: u32) -> Self {
        let alg = Arc::new(GradedFrobeniusAlgebra::projective(n));
        let mut ch = Vec::new();
        let mut fact = Rat::one();
        for k in 0..=n as usize {
            if k > 0 {
                fact *= rint(k as i64);
            }
            let coeff = if k == 0 { rint(n as i64) } else { rint(n as i64 + 1) / &fact };
            let mut v = vec![Rat::zero(); n as usize + 1];
            v[k] = coeff;
            ch.push(v);
        }
        Self::new(alg, ch).expect("projective tangent data is well formed")
    }

    /// `ch(T(X × Y)) = ch(TX) ⊗ 1 + 1 ⊗ ch(TY)`.
    pub fn kunneth(a: &Self, b: &Self) -> Self {
        let alg = Arc::new(GradedFrobeniusAlgebra::kunneth(&a.algebra, &b.algebra));
        let dims = [a.algebra.dim(), b.algebra.dim()];
        let n = alg.dim_complex as usize;
        let mut ch = vec![vec![Rat::zero(); alg.dim()]; n + 1];
        for (k, c) in a.ch.iter().enumerate() {
            let e = embed_factor(&dims, 0, c);
            for (x, y) in ch[k].iter_mut().zip(e) {
                *x += y;
            }
        }
        for (k, c) in b.ch.iter().enumerate() {
            for (x, y) in ch[k].iter_mut().zip(embed_factor(&dims, 1, c)) {
                *x += y;
            }
        }
        Self::new(alg, ch).expect("product tangent data is well formed")
    }

    pub fn dim_complex(&self) -> u32 {
        self.algebra.dim_complex
    }
}

/// Coefficients `c_k` of `log f(x) = Σ c_k x^k` for `f(0) = 1`.
fn series_log(f: &[Rat]) -> Vec<Rat> {
    let n = f.len();
    let mut h = vec![Rat::zero(); n];
    for k in 1..n {
        let mut acc = f[k].clone() * rint(k as i64);
        for j in 1..k {
            acc -= rint(j as i64) * &h[j] * &f[k - j];
        }
        h[k] = acc / rint(k as i64);
    }
    h
}

fn series_inverse(g: &[Rat]) -> Vec<Rat> {
    let n = g.len();
    let mut out = vec![Rat::zero(); n];
    out[0] = g[0].recip();
    for k in 1..n {
        let mut acc = Rat::zero();
        for j in 1..=k {
            acc += &g[j] * &out[k - j];
        }
        out[k] = -acc / &g[0];
    }
    out
}

fn factorial(k: usize) -> Rat {
    (1..=k as i64).fold(Rat::one(), |a, b| a * rint(b))
}

/// `x / (1 - e^{-x})` up to `x^order`.
fn todd_series(order: usize) -> Vec<Rat> {
    (0..=order).map(|k| bernoulli(k) * rint(if k % 2 == 1 { -1 } else { 1 }) / factorial(k)).collect()
}

/// `(x/2) / sinh(x/2)` up to `x^order`.
fn ahat_series(order: usize) -> Vec<Rat> {
    let g: Vec<Rat> = (0..=order).map(|k| if k % 2 == 0 { Rat::one() / (factorial(k + 1) * rint(2).pow(k as i32)) } else { Rat::zero() }).collect();
    series_inverse(&g)
}

/// The multiplicative class `∏ f(δ_i) = exp(Σ_k c_k k! ch_k)` where `log f = Σ c_k x^k`.
fn multiplicative_class(td: &TangentData, f: &[Rat]) -> Vec<Rat> {
    let alg = &td.algebra;
    let logf = series_log(f);
    let mut x = vec![Rat::zero(); alg.dim()];
    for (k, ck) in td.ch.iter().enumerate().skip(1) {
        let w = &logf[k] * factorial(k);
        for (xi, c) in x.iter_mut().zip(ck) {
            *xi += &w * c;
        }
    }
    alg.exp_nilpotent_exact(&x).expect("positive-degree classes are nilpotent")
}

pub fn todd_class(td: &TangentData) -> Vec<Rat> {
    multiplicative_class(td, &todd_series(td.dim_complex() as usize))
}

pub fn a_hat_class(td: &TangentData) -> Vec<Rat> {
    multiplicative_class(td, &ahat_series(td.dim_complex() as usize))
}

/// `Γ̂_X = exp(-γ c_1 + Σ_{k≥2} (-1)^k ζ(k) (k-1)! ch_k)`.
pub fn gamma_class(td: &TangentData, bits: u32) -> CohClass {
    let alg = &td.algebra;
    let consts = Constants::at(bits);
    let mut x = CohClass::from_exact(bits, &td.c1).scale(&Complex::from_real(-consts.euler_gamma()));
    for k in 2..td.ch.len() {
        let z = consts.zeta(k as u32).expect("k >= 2");
        let mut w = Float::with_val(bits, &z * factorial_u(k - 1));
        if k % 2 == 1 {
            w = -w;
        }
        x = x.add(&CohClass::from_exact(bits, &td.ch[k]).scale(&Complex::from_real(w)));
    }
    alg.exp_nilpotent(&x).expect("positive-degree classes are nilpotent")
}

fn factorial_u(k: usize) -> u64 {
    (1..=k as u64).product()
}

pub fn dual_gamma(alg: &GradedFrobeniusAlgebra, g: &CohClass) -> CohClass {
    alg.dual(g)
}

/// Multiply the degree-`2j` component by `(2πi)^j`.
pub fn two_pi_i_grading(alg: &GradedFrobeniusAlgebra, a: &CohClass) -> CohClass {
    let bits = a.prec();
    let two_pi_i = Complex::new(Float::new(bits), Float::with_val(bits, pi(bits) * 2u32));
    alg.by_degree(a, |j| two_pi_i.powi(j))
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaIdentityReport {
    pub space: String,
    /// `|(Γ̂ Γ̂^*)_i - ((2πi)^{deg/2} Â)_i|` per basis element, as decimal strings.
    pub residuals: Vec<String>,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub fn check_gamma_ahat(td: &TangentData, ctx: &PrecisionContext) -> GammaIdentityReport {
    let bits = ctx.bits();
    let alg = &td.algebra;
    let g = gamma_class(td, bits);
    let lhs = alg.cup(&g, &dual_gamma(alg, &g)).expect("same algebra");
    let rhs = two_pi_i_grading(alg, &CohClass::from_exact(bits, &a_hat_class(td)));
    let diff = lhs.sub(&rhs);
    let mut max = Float::new(bits);
    let residuals = diff
        .coeffs
        .iter()
        .map(|c| {
            let a = c.abs();
            if a > max {
                max = a.clone();
            }
            a.to_string_radix(10, Some(12))
        })
        .collect();
    let threshold = 10f64.powi(-(ctx.digits as i32) + 5);
    GammaIdentityReport { space: alg.name.clone(), residuals, max_residual: max.to_f64(), threshold, passed: max < threshold }
}

/// A topological K-class, represented by its Chern character.
#[derive(Clone, Debug, PartialEq)]
pub struct KClass {
    pub label: String,
    pub ch: Vec<Rat>,
}

impl KClass {
    pub fn zero(dim: usize) -> Self {
        Self { label: "0".into(), ch: vec![Rat::zero(); dim] }
    }

    /// Line bundle with first Chern class `h`: `ch = e^h`.
    pub fn line_bundle(alg: &GradedFrobeniusAlgebra, label: impl Into<String>, h: &[Rat]) -> Result<Self> {
        Ok(Self { label: label.into(), ch: alg.exp_nilpotent_exact(h)? })
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { label: format!("{} + {}", self.label, o.label), ch: self.ch.iter().zip(&o.ch).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: i64) -> Self {
        Self { label: format!("{k}·({})", self.label), ch: self.ch.iter().map(|a| a * rint(k)).collect() }
    }

    /// `V ⊗ W`.
    pub fn tensor(&self, o: &Self, alg: &GradedFrobeniusAlgebra) -> Self {
        Self { label: format!("{} ⊗ {}", self.label, o.label), ch: alg.cup_exact(&self.ch, &o.ch) }
    }

    /// Shift `[k]` multiplies the class by `(-1)^k`.
    pub fn shift(&self, k: i64) -> Self {
        let s = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        Self { label: format!("{}[{k}]", self.label), ch: self.ch.iter().map(|a| a * rint(s)).collect() }
    }

    /// `V^∨`: sign flip on `ch` in degrees `4k + 2`.
    pub fn dual(&self, alg: &GradedFrobeniusAlgebra) -> Self {
        Self { label: format!("({})^∨", self.label), ch: alg.dual_exact(&self.ch) }
    }
}

/// An ordered basis of a K-lattice.
#[derive(Clone, Debug)]
pub struct KBasis {
    pub elements: Vec<KClass>,
}

impl KBasis {
    /// `O(0), …, O(n)` on `P^n`, or the product line bundles on a product of projective spaces.
    pub fn line_bundles(alg: &GradedFrobeniusAlgebra, factors: &[u32]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(|&n| n as usize + 1).collect();
        let mut elements = Vec::new();
        let total: usize = dims.iter().product();
        for idx in 0..total {
            let mut rem = idx;
            let mut degs = vec![0usize; dims.len()];
            for a in (0..dims.len()).rev() {
                degs[a] = rem % dims[a];
                rem /= dims[a];
            }
            let mut h = vec![Rat::zero(); alg.dim()];
            for (a, &d) in degs.iter().enumerate() {
                let mut p = vec![Rat::zero(); dims[a]];
                if dims[a] > 1 {
                    p[1] = rint(d as i64);
                }
                for (x, y) in h.iter_mut().zip(embed_factor(&dims, a, &p)) {
                    *x += y;
                }
            }
            let label = if degs.len() == 1 {
                format!("O({})", degs[0])
            } else {
                format!("O({})", degs.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            };
            elements.push(KClass::line_bundle(alg, label, &h)?);
        }
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn combine(&self, coeffs: &[i64]) -> KClass {
        let dim = self.elements[0].ch.len();
        let mut ch = vec![Rat::zero(); dim];
        let mut parts = Vec::new();
        for (c, e) in coeffs.iter().zip(&self.elements) {
            if *c == 0 {
                continue;
            }
            parts.push(format!("{c}·{}", e.label));
            for (x, y) in ch.iter_mut().zip(&e.ch) {
                *x += rint(*c) * y;
            }
        }
        KClass { label: if parts.is_empty() { "0".into() } else { parts.join(" + ") }, ch }
    }

    /// Rational coordinates of a Chern character in this basis.
    pub fn coordinates(&self, ch: &[Rat]) -> Option<Vec<Rat>> {
        let n = self.elements.len();
        let m: Vec<Vec<Rat>> = (0..ch.len()).map(|r| (0..n).map(|c| self.elements[c].ch[r].clone()).collect()).collect();
        if m.len() != n {
            return None;
        }
        exact::solve(&m, ch)
    }

    pub fn integer_coordinates(&self, ch: &[Rat]) -> Option<Vec<i64>> {
        self.coordinates(ch)?.iter().map(exact::to_integer).collect()
    }
}

/// `χ(V, W) = ∫ ch(V)^∨ ch(W) Td(X)`, exactly.
pub fn euler_pairing_exact(td: &TangentData, v: &KClass, w: &KClass) -> Rat {
    let alg = &td.algebra;
    let todd = todd_class(td);
    alg.integrate_exact(&alg.cup_exact(&alg.cup_exact(&alg.dual_exact(&v.ch), &w.ch), &todd))
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerValue {
    pub raw_re: String,
    pub raw_im: String,
    pub integer: i64,
    /// Distance from the raw value to `integer`.
    pub distance: f64,
    pub integral: bool,
}

/// Floating evaluation of `χ` with an integrality certificate.
pub fn euler_pairing(td: &TangentData, v: &KClass, w: &KClass, ctx: &PrecisionContext) -> EulerValue {
    let bits = ctx.bits();
    let alg = &td.algebra;
    let todd = CohClass::from_exact(bits, &todd_class(td));
    let cv = alg.dual(&CohClass::from_exact(bits, &v.ch));
    let cw = CohClass::from_exact(bits, &w.ch);
    let prod = alg.cup_unchecked(&alg.cup_unchecked(&cv, &cw), &todd);
    let raw = alg.integrate(&prod).expect("same algebra");
    let (integer, distance) = raw.nearest_integer();
    let tol = 10f64.powi(-(ctx.digits as i32) + 8);
    let (re, im) = raw.to_decimal_strings();
    EulerValue { raw_re: re, raw_im: im, integer, distance: distance.to_f64(), integral: distance < tol }
}

/// Integer Gram matrix `G_ij = χ(E_i, E_j)`; fails if any entry is not integral.
pub fn euler_gram(td: &TangentData, basis: &KBasis) -> Result<IntMatrix> {
    let todd = todd_class(td);
    let alg = &td.algebra;
    basis
        .elements
        .iter()
        .map(|v| {
            let vd = alg.cup_exact(&alg.dual_exact(&v.ch), &todd);
            basis
                .elements
                .iter()
                .map(|w| {
                    let x = alg.integrate_exact(&alg.cup_exact(&vd, &w.ch));
                    exact::to_integer(&x).ok_or_else(|| Error::Data(format!("χ({}, {}) = {x} is not an integer", v.label, w.label)))
                })
                .collect()
        })
        .collect()
}
