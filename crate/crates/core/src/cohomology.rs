//! Even cohomology rings as graded Frobenius algebras with exact structure constants.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, rint, Rat, RatMatrix};
use crate::numerics::{CMatrix, Complex};

/// Coefficient vector over working-precision complex scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct CohClass {
    pub coeffs: Vec<Complex>,
}

impl CohClass {
    pub fn zero(bits: u32, dim: usize) -> Self {
        Self { coeffs: vec![Complex::zero(bits); dim] }
    }

    pub fn from_exact(bits: u32, v: &[Rat]) -> Self {
        Self { coeffs: v.iter().map(|r| Complex::from_rational(bits, r)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.first().map_or(64, Complex::prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: &Complex) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn max_abs(&self) -> rug::Float {
        let mut m = rug::Float::new(self.prec());
        for c in &self.coeffs {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ValidationReport {
    pub algebra: String,
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub(crate) fn push(&mut self, axiom: &str, witness: Option<String>) {
        self.checks.push(AxiomCheck { axiom: axiom.into(), passed: witness.is_none(), witness });
    }
}

/// Graded commutative algebra with a Poincaré pairing, all data exact.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedFrobeniusAlgebra {
    pub name: String,
    pub labels: Vec<String>,
    /// Real cohomological degree of each basis element.
    pub degrees: Vec<u32>,
    pub dim_complex: u32,
    pub unit: usize,
    pub top: usize,
    cup: Vec<Vec<Vec<Rat>>>,
    cup_sparse: Vec<(usize, usize, usize, Rat)>,
    pairing: RatMatrix,
}

impl GradedFrobeniusAlgebra {
    /// Assemble without checking the axioms; see [`Self::validate`].
    pub fn from_parts(
        name: impl Into<String>,
        labels: Vec<String>,
        degrees: Vec<u32>,
        dim_complex: u32,
        unit: usize,
        top: usize,
        cup: Vec<Vec<Vec<Rat>>>,
        pairing: RatMatrix,
    ) -> Result<Self> {
        let n = labels.len();
        if degrees.len() != n || cup.len() != n || pairing.len() != n || unit >= n || top >= n {
            return Err(Error::Data("inconsistent algebra dimensions".into()));
        }
        if cup.iter().any(|r| r.len() != n || r.iter().any(|v| v.len() != n)) || pairing.iter().any(|r| r.len() != n) {
            return Err(Error::Data("structure tensor or pairing has the wrong shape".into()));
        }
        if let Some(d) = degrees.iter().find(|d| *d % 2 == 1) {
            return Err(Error::Data(format!("odd degree {d} is not supported")));
        }
        let mut cup_sparse = Vec::new();
        for (i, row) in cup.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                for (k, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        cup_sparse.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        Ok(Self { name: name.into(), labels, degrees, dim_complex, unit, top, cup, cup_sparse, pairing })
    }

    pub fn point() -> Self {
        Self::projective(0)
    }

    /// `H^*(P^n) = Q[p]/(p^{n+1})` with `(p^i, p^j) = δ_{i+j,n}`.
    pub fn projective(n: u32) -> Self {
        let d = n as usize + 1;
        let labels = (0..d)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "p".to_string(),
                _ => format!("p^{k}"),
            })
            .collect();
        let mut cup = vec![vec![vec![Rat::zero(); d]; d]; d];
        let mut pairing = exact::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                if i + j < d {
                    cup[i][j][i + j] = Rat::one();
                }
                if i + j == n as usize {
                    pairing[i][j] = Rat::one();
                }
            }
        }
        let name = if n == 0 { "point".to_string() } else { format!("P{n}") };
        Self::from_parts(name, labels, (0..d as u32).map(|k| 2 * k).collect(), n, 0, d - 1, cup, pairing)
            .expect("projective space data is well formed")
    }

    /// Tensor product; basis element `(i, j)` sits at index `i * dim(b) + j`.
    pub fn kunneth(a: &Self, b: &Self) -> Self {
        let (na, nb) = (a.dim(), b.dim());
        let n = na * nb;
        let idx = |i: usize, j: usize| i * nb + j;
        let mut labels = Vec::with_capacity(n);
        let mut degrees = Vec::with_capacity(n);
        for i in 0..na {
            for j in 0..nb {
                labels.push(format!("{}⊗{}", a.labels[i], b.labels[j]));
                degrees.push(a.degrees[i] + b.degrees[j]);
            }
        }
        let mut cup = vec![vec![vec![Rat::zero(); n]; n]; n];
        for (i1, j1, k1, c1) in &a.cup_sparse {
            for (i2, j2, k2, c2) in &b.cup_sparse {
                cup[idx(*i1, *i2)][idx(*j1, *j2)][idx(*k1, *k2)] = c1 * c2;
            }
        }
        let mut pairing = exact::zeros(n, n);
        for i1 in 0..na {
            for j1 in 0..na {
                if a.pairing[i1][j1].is_zero() {
                    continue;
                }
                for i2 in 0..nb {
                    for j2 in 0..nb {
                        pairing[idx(i1, i2)][idx(j1, j2)] = &a.pairing[i1][j1] * &b.pairing[i2][j2];
                    }
                }
            }
        }
        Self::from_parts(
            format!("{}x{}", a.name, b.name),
            labels,
            degrees,
            a.dim_complex + b.dim_complex,
            idx(a.unit, b.unit),
            idx(a.top, b.top),
            cup,
            pairing,
        )
        .expect("tensor product of valid algebras is well formed")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.cup[i][j][k]
    }

    pub fn pairing_exact(&self) -> &RatMatrix {
        &self.pairing
    }

    pub fn pairing_matrix(&self, bits: u32) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| Complex::from_rational(bits, &self.pairing[i][j]))
    }

    pub fn unit_class(&self) -> Vec<Rat> {
        self.basis_vector(self.unit)
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.dim()];
        v[i] = Rat::one();
        v
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Domain(format!("class of length {len} does not belong to {} (dimension {})", self.name, self.dim())));
        }
        Ok(())
    }

    pub fn cup_exact(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim()];
        for (i, j, k, c) in &self.cup_sparse {
            if a[*i].is_zero() || b[*j].is_zero() {
                continue;
            }
            out[*k] += &a[*i] * &b[*j] * c;
        }
        out
    }

    pub fn cup(&self, a: &CohClass, b: &CohClass) -> Result<CohClass> {
        self.check_dim(a.dim())?;
        self.check_dim(b.dim())?;
        Ok(self.cup_unchecked(a, b))
    }

    pub(crate) fn cup_unchecked(&self, a: &CohClass, b: &CohClass) -> CohClass {
        let bits = a.prec();
        let mut out = CohClass::zero(bits, self.dim());
        for (i, j, k, c) in &self.cup_sparse {
            let (x, y) = (&a.coeffs[*i], &b.coeffs[*j]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let xy = x * y;
            let t = scale_rat(&xy, c);
            out.coeffs[*k] += &t;
        }
        out
    }

    pub fn integrate_exact(&self, a: &[Rat]) -> Rat {
        (0..self.dim()).filter(|&k| !a[k].is_zero()).map(|k| &a[k] * &self.pairing[self.unit][k]).sum()
    }

    /// `∫ a = (1, a)`; equals the coefficient of the top class when `∫ top = 1`.
    pub fn integrate(&self, a: &CohClass) -> Result<Complex> {
        self.check_dim(a.dim())?;
        let mut acc = Complex::zero(a.prec());
        for k in 0..self.dim() {
            let w = &self.pairing[self.unit][k];
            if !w.is_zero() {
                acc += &scale_rat(&a.coeffs[k], w);
            }
        }
        Ok(acc)
    }

    pub fn pair_exact(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for i in 0..self.dim() {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.dim() {
                if !b[j].is_zero() && !self.pairing[i][j].is_zero() {
                    s += &a[i] * &b[j] * &self.pairing[i][j];
                }
            }
        }
        s
    }

    /// Bilinear (not sesquilinear) Poincaré pairing.
    pub fn poincare_pair(&self, a: &CohClass, b: &CohClass) -> Result<Complex> {
        self.check_dim(a.dim())?;
        self.check_dim(b.dim())?;
        Ok(self.pair_unchecked(a, b))
    }

    pub(crate) fn pair_unchecked(&self, a: &CohClass, b: &CohClass) -> Complex {
        let mut acc = Complex::zero(a.prec());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let w = &self.pairing[i][j];
                if w.is_zero() {
                    continue;
                }
                acc += &scale_rat(&(&a.coeffs[i] * &b.coeffs[j]), w);
            }
        }
        acc
    }

    /// Matrix of `a ∪ -`; column `j` holds `a ∪ φ_j`.
    pub fn cup_matrix_exact(&self, a: &[Rat]) -> RatMatrix {
        let n = self.dim();
        let mut m = exact::zeros(n, n);
        for (i, j, k, c) in &self.cup_sparse {
            if !a[*i].is_zero() {
                m[*k][*j] += &a[*i] * c;
            }
        }
        m
    }

    pub fn cup_matrix(&self, a: &[Rat], bits: u32) -> CMatrix {
        rat_matrix_to_c(&self.cup_matrix_exact(a), bits)
    }

    /// Grading operator `μ(φ_i) = (deg φ_i / 2 - n/2) φ_i` as a diagonal matrix.
    pub fn mu_matrix(&self, bits: u32) -> CMatrix {
        let d: Vec<Complex> = self.mu_values().iter().map(|r| Complex::from_rational(bits, r)).collect();
        CMatrix::diagonal(&d)
    }

    pub fn mu_values(&self) -> Vec<Rat> {
        self.degrees.iter().map(|&d| rint(i64::from(d)) / rint(2) - rint(i64::from(self.dim_complex)) / rint(2)).collect()
    }

    /// Multiply the degree-`2j` component by `f(j)`.
    pub fn by_degree<F: Fn(u32) -> Complex>(&self, a: &CohClass, f: F) -> CohClass {
        CohClass { coeffs: a.coeffs.iter().zip(&self.degrees).map(|(c, &d)| c * &f(d / 2)).collect() }
    }

    pub fn by_degree_exact<F: Fn(u32) -> Rat>(&self, a: &[Rat], f: F) -> Vec<Rat> {
        a.iter().zip(&self.degrees).map(|(c, &d)| c * f(d / 2)).collect()
    }

    /// Sign flip on degrees `4k+2`: the involution `(-1)^{deg/2}`.
    pub fn dual_exact(&self, a: &[Rat]) -> Vec<Rat> {
        self.by_degree_exact(a, |j| if j % 2 == 1 { rint(-1) } else { rint(1) })
    }

    pub fn dual(&self, a: &CohClass) -> CohClass {
        let bits = a.prec();
        self.by_degree(a, |j| Complex::from_i64(bits, if j % 2 == 1 { -1 } else { 1 }))
    }

    /// Degree-`2k` homogeneous part.
    pub fn degree_part_exact(&self, a: &[Rat], k: u32) -> Vec<Rat> {
        a.iter().zip(&self.degrees).map(|(c, &d)| if d == 2 * k { c.clone() } else { Rat::zero() }).collect()
    }

    /// True when `a` has no component in degree 0.
    pub fn is_nilpotent_exact(&self, a: &[Rat]) -> bool {
        a.iter().zip(&self.degrees).all(|(c, &d)| d > 0 || c.is_zero())
    }

    pub fn is_nilpotent(&self, a: &CohClass) -> bool {
        a.coeffs.iter().zip(&self.degrees).all(|(c, &d)| d > 0 || c.is_zero())
    }

    /// `exp(x)` for nilpotent `x`, exactly.
    pub fn exp_nilpotent_exact(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        if !self.is_nilpotent_exact(x) {
            return Err(Error::Domain("exp of a class with nonzero degree-0 part".into()));
        }
        let mut term = self.unit_class();
        let mut sum = term.clone();
        for k in 1..=self.dim_complex as i64 {
            term = self.cup_exact(&term, x).into_iter().map(|c| c / rint(k)).collect();
            if term.iter().all(Zero::is_zero) {
                break;
            }
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
        }
        Ok(sum)
    }

    /// `Σ_k coeffs[k] x^k` for nilpotent `x`, truncated at the top degree.
    pub fn power_series(&self, coeffs: &[Complex], x: &CohClass) -> Result<CohClass> {
        self.check_dim(x.dim())?;
        if !self.is_nilpotent(x) {
            return Err(Error::Domain("power series in a class with nonzero degree-0 part".into()));
        }
        let bits = x.prec();
        let mut pow = CohClass::from_exact(bits, &self.unit_class());
        let mut sum = CohClass::zero(bits, self.dim());
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                pow = self.cup_unchecked(&pow, x);
                if pow.coeffs.iter().all(Complex::is_zero) {
                    break;
                }
            }
            sum = sum.add(&pow.scale(c));
        }
        Ok(sum)
    }

    pub fn exp_nilpotent(&self, x: &CohClass) -> Result<CohClass> {
        let bits = x.prec();
        let mut coeffs = Vec::new();
        let mut f = Complex::one(bits);
        for k in 0..=self.dim_complex as i64 {
            if k > 0 {
                f = f.scale(&rug::Float::with_val(bits, rug::Float::with_val(bits, 1) / k));
            }
            coeffs.push(f.clone());
        }
        self.power_series(&coeffs, x)
    }

    /// Check every algebra axiom exactly, naming a witness for each failure.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim();
        let mut report = ValidationReport { algebra: self.name.clone(), checks: Vec::new() };
        let basis = |i: usize| self.basis_vector(i);

        let mut witness = None;
        'comm: for i in 0..n {
            for j in 0..n {
                if self.cup[i][j] != self.cup[j][i] {
                    witness = Some(format!("({}, {})", self.labels[i], self.labels[j]));
                    break 'comm;
                }
            }
        }
        report.push("commutativity", witness);

        let mut witness = None;
        'assoc: for i in 0..n {
            for j in 0..n {
                let ij = self.cup_exact(&basis(i), &basis(j));
                for k in 0..n {
                    let lhs = self.cup_exact(&ij, &basis(k));
                    let rhs = self.cup_exact(&basis(i), &self.cup_exact(&basis(j), &basis(k)));
                    if lhs != rhs {
                        witness = Some(format!("({}, {}, {})", self.labels[i], self.labels[j], self.labels[k]));
                        break 'assoc;
                    }
                }
            }
        }
        report.push("associativity", witness);

        let mut witness = None;
        for i in 0..n {
            if self.cup_exact(&self.unit_class(), &basis(i)) != basis(i) {
                witness = Some(format!("1 ∪ {} ≠ {}", self.labels[i], self.labels[i]));
                break;
            }
        }
        report.push("unit", witness);

        let mut witness = None;
        for (i, j, k, _) in &self.cup_sparse {
            if self.degrees[*k] != self.degrees[*i] + self.degrees[*j] {
                witness = Some(format!("{} ∪ {} has a component along {}", self.labels[*i], self.labels[*j], self.labels[*k]));
                break;
            }
        }
        report.push("grading", witness);

        let mut witness = None;
        'sym: for i in 0..n {
            for j in 0..n {
                if self.pairing[i][j] != self.pairing[j][i] {
                    witness = Some(format!("({}, {})", self.labels[i], self.labels[j]));
                    break 'sym;
                }
            }
        }
        report.push("pairing symmetry", witness);

        let kernel = exact::null_space(&self.pairing);
        let witness = kernel.first().map(|v| format!("kernel vector {}", fmt_rat_vec(v)));
        report.push("pairing non-degeneracy", witness);

        let mut witness = None;
        'support: for i in 0..n {
            for j in 0..n {
                if !self.pairing[i][j].is_zero() && self.degrees[i] + self.degrees[j] != 2 * self.dim_complex {
                    witness = Some(format!("({}, {}) = {} off the top degree", self.labels[i], self.labels[j], self.pairing[i][j]));
                    break 'support;
                }
            }
        }
        report.push("top-degree support", witness);

        let mut witness = None;
        'frob: for i in 0..n {
            for j in 0..n {
                let ij = self.cup_exact(&basis(i), &basis(j));
                for k in 0..n {
                    let jk = self.cup_exact(&basis(j), &basis(k));
                    if self.pair_exact(&ij, &basis(k)) != self.pair_exact(&basis(i), &jk) {
                        witness = Some(format!("({}, {}, {})", self.labels[i], self.labels[j], self.labels[k]));
                        break 'frob;
                    }
                }
            }
        }
        report.push("Frobenius property", witness);

        let top_integral = self.integrate_exact(&basis(self.top));
        let witness = (top_integral != Rat::one()).then(|| format!("∫ {} = {}", self.labels[self.top], top_integral));
        report.push("fundamental class normalization", witness);

        report
    }
}

pub(crate) fn scale_rat(x: &Complex, r: &Rat) -> Complex {
    if r.is_one() {
        return x.clone();
    }
    if r.is_integer() {
        if let Some(k) = num_traits::ToPrimitive::to_i64(r.numer()) {
            return x.scale_i64(k);
        }
    }
    x * &Complex::from_rational(x.prec(), r)
}

pub fn rat_matrix_to_c(m: &RatMatrix, bits: u32) -> CMatrix {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    CMatrix::from_fn(rows, cols, |i, j| Complex::from_rational(bits, &m[i][j]))
}

pub fn fmt_rat_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// Embed a class of factor `which` into a product of algebras with the given dimensions.
/// Every factor's unit must be its basis element 0, as for all built-in spaces.
pub fn embed_factor(dims: &[usize], which: usize, v: &[Rat]) -> Vec<Rat> {
    let total: usize = dims.iter().product();
    let stride: usize = dims[which + 1..].iter().product();
    let mut out = vec![Rat::zero(); total];
    for (k, c) in v.iter().enumerate() {
        out[k * stride] = c.clone();
    }
    out
}
