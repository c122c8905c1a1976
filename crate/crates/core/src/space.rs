//! Built-in spaces: projective spaces and their finite products.

use std::sync::Arc;

use num_traits::Zero;

use crate::charclasses::{KBasis, KClass, TangentData};
use crate::cohomology::{embed_factor, GradedFrobeniusAlgebra};
use crate::error::{Error, Result};
use crate::exact::{rint, Rat};
use crate::numerics::{Complex, ZPoint};
use crate::quantum::QuantumAlgebra;

pub const MAX_PROJECTIVE_DIM: u32 = 6;

/// A product `P^{n_1} × ⋯ × P^{n_k}` together with its classical and quantum data.
///
/// Basis elements are monomials `p_1^{i_1} ⋯ p_k^{i_k}` in row-major order of the
/// exponent multi-index.
#[derive(Clone, Debug)]
pub struct Space {
    pub name: String,
    pub factors: Vec<u32>,
    pub tangent: TangentData,
    pub quantum: QuantumAlgebra,
}

impl Space {
    pub fn projective(n: u32) -> Result<Self> {
        Self::product(&[n])
    }

    pub fn product(factors: &[u32]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Domain("a space needs at least one factor".into()));
        }
        if let Some(&n) = factors.iter().find(|&&n| n > MAX_PROJECTIVE_DIM) {
            return Err(Error::Unsupported(format!("P^{n} exceeds the built-in range P^0..P^{MAX_PROJECTIVE_DIM}")));
        }
        let mut tangent = TangentData::projective(factors[0]);
        let mut quantum = QuantumAlgebra::projective(factors[0]);
        for &n in &factors[1..] {
            tangent = TangentData::kunneth(&tangent, &TangentData::projective(n));
            quantum = QuantumAlgebra::kunneth(&quantum, &QuantumAlgebra::projective(n));
        }
        quantum.base = Arc::clone(&tangent.algebra);
        let name = if factors == [0] { "point".to_string() } else { factors.iter().map(|n| format!("P{n}")).collect::<Vec<_>>().join("x") };
        Ok(Self { name, factors: factors.to_vec(), tangent, quantum })
    }

    /// Parse names like `P2`, `P1xP1`, `point`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        if lower == "point" || lower == "pt" {
            return Self::projective(0);
        }
        let mut factors = Vec::new();
        for part in lower.split(['x', '×', '*']) {
            let n = part.strip_prefix('p').and_then(|d| d.parse::<u32>().ok()).ok_or_else(|| Error::Data(format!("unknown space '{name}'")))?;
            factors.push(n);
        }
        Self::product(&factors)
    }

    pub fn algebra(&self) -> &GradedFrobeniusAlgebra {
        &self.tangent.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra().dim()
    }

    pub fn dim_complex(&self) -> u32 {
        self.factors.iter().sum()
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&n| n as usize + 1).collect()
    }

    /// Exponent multi-index of basis element `j`.
    pub fn multi_index(&self, mut j: usize) -> Vec<usize> {
        let dims = self.factor_dims();
        let mut out = vec![0; dims.len()];
        for a in (0..dims.len()).rev() {
            out[a] = j % dims[a];
            j /= dims[a];
        }
        out
    }

    pub fn k_basis(&self) -> Result<KBasis> {
        KBasis::line_bundles(self.algebra(), &self.factors)
    }

    /// Line bundle `O(d_1, …, d_k)`.
    pub fn line_bundle(&self, degs: &[i64]) -> Result<KClass> {
        if degs.len() != self.factors.len() {
            return Err(Error::Domain("one degree per factor is required".into()));
        }
        let dims = self.factor_dims();
        let mut h = vec![Rat::zero(); self.dim()];
        for (a, &d) in degs.iter().enumerate() {
            if dims[a] > 1 {
                let mut p = vec![Rat::zero(); dims[a]];
                p[1] = rint(d);
                for (x, y) in h.iter_mut().zip(embed_factor(&dims, a, &p)) {
                    *x += y;
                }
            }
        }
        let label = format!("O({})", degs.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
        KClass::line_bundle(self.algebra(), label, &h)
    }

    /// `V ⊗ ω[n]`, with `ch ω = e^{-c₁}`.
    pub fn canonical_twist(&self, v: &KClass) -> Result<KClass> {
        let alg = self.algebra();
        let neg_c1: Vec<Rat> = self.tangent.c1.iter().map(|x| -x).collect();
        let omega = KClass::line_bundle(alg, "ω", &neg_c1)?;
        Ok(v.tensor(&omega, alg).shift(i64::from(self.dim_complex())))
    }

    /// `O(1, …, 1)` when every factor has the same dimension, so that `c₁ = (n+1) c₁(L)`.
    pub fn balanced_line(&self) -> Result<(KClass, u32)> {
        let n = self.factors[0];
        if self.factors.iter().any(|&m| m != n) || n == 0 {
            return Err(Error::Unsupported(format!("{} has no line bundle proportional to c1 with a uniform shift", self.name)));
        }
        Ok((self.line_bundle(&vec![1; self.factors.len()])?, n + 1))
    }

    pub fn q_at(&self, t: &ZPoint) -> Vec<Complex> {
        self.quantum.q_from_t(t)
    }

    /// Spectral radius of `c₁ ⋆` at `τ = c₁ log t`: `Σ (n_a+1) |t|`.
    pub fn spectral_radius(&self, t_abs: f64) -> f64 {
        self.factors.iter().map(|&n| f64::from(n + 1)).sum::<f64>() * t_abs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!(Space::parse("P2").unwrap().dim(), 3);
        let s = Space::parse("P1xP2").unwrap();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.dim_complex(), 3);
        assert_eq!(s.multi_index(4), vec![1, 1]);
        assert!(Space::parse("Q3").is_err());
        assert!(Space::parse("P7").is_err());
        assert_eq!(Space::parse("point").unwrap().dim(), 1);
    }

    #[test]
    fn canonical_twist_on_line() {
        let s = Space::projective(1).unwrap();
        let o = s.line_bundle(&[0]).unwrap();
        let tw = s.canonical_twist(&o).unwrap();
        let expect = s.line_bundle(&[-2]).unwrap().shift(1);
        assert_eq!(tw.ch, expect.ch);
    }

    #[test]
    fn product_quantum_shares_algebra() {
        let s = Space::parse("P1xP1").unwrap();
        assert!(Arc::ptr_eq(&s.quantum.base, &s.tangent.algebra));
        assert!(s.quantum.validate().passed());
    }
}
