//! Small quantum products along `τ = c₁ log t`, the Euler multiplication and its spectrum.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rug::Float;
use serde::Serialize;

use crate::cohomology::{embed_factor, scale_rat, CohClass, GradedFrobeniusAlgebra, ValidationReport};
use crate::error::{Error, Result};
use crate::exact::{rint, Rat};
use crate::numerics::{eigen_decompose, pi, CMatrix, Complex, EigenDecomposition, PrecisionContext, ZPoint};

/// One structure-constant monomial: `φ_i ⋆ φ_j ∋ coeff · q^exps φ_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub exps: Vec<u32>,
    pub coeff: Rat,
}

type Poly = BTreeMap<Vec<u32>, Rat>;

#[derive(Clone, Debug)]
pub struct QuantumAlgebra {
    pub base: Arc<GradedFrobeniusAlgebra>,
    pub c1: Vec<Rat>,
    /// Along `τ = c₁ log t` the Novikov-specialized variables are `q_a = t^{weights[a]}`.
    pub weights: Vec<u32>,
    terms: Vec<QTerm>,
}

impl QuantumAlgebra {
    pub fn from_terms(base: Arc<GradedFrobeniusAlgebra>, c1: Vec<Rat>, weights: Vec<u32>, terms: Vec<QTerm>) -> Result<Self> {
        let n = base.dim();
        if c1.len() != n {
            return Err(Error::Data("c1 has the wrong length".into()));
        }
        for t in &terms {
            if t.i >= n || t.j >= n || t.k >= n || t.exps.len() != weights.len() {
                return Err(Error::Data(format!("quantum term ({}, {}, {}) is out of range", t.i, t.j, t.k)));
            }
        }
        Ok(Self { base, c1, weights, terms })
    }

    /// `p ⋆ p^k = p^{k+1}` for `k < n` and `p ⋆ p^n = q`.
    pub fn projective(n: u32) -> Self {
        let base = Arc::new(GradedFrobeniusAlgebra::projective(n));
        let d = n as usize + 1;
        let mut terms = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let (k, e) = if i + j < d { (i + j, 0) } else { (i + j - d, 1) };
                terms.push(QTerm { i, j, k, exps: vec![e], coeff: Rat::one() });
            }
        }
        let mut c1 = vec![Rat::zero(); d];
        if d > 1 {
            c1[1] = rint(d as i64);
        }
        Self::from_terms(base, c1, vec![n + 1], terms).expect("projective quantum data is well formed")
    }

    pub fn kunneth(a: &Self, b: &Self) -> Self {
        let base = Arc::new(GradedFrobeniusAlgebra::kunneth(&a.base, &b.base));
        let nb = b.base.dim();
        let mut terms = Vec::new();
        for x in &a.terms {
            for y in &b.terms {
                let mut exps = x.exps.clone();
                exps.extend(&y.exps);
                terms.push(QTerm { i: x.i * nb + y.i, j: x.j * nb + y.j, k: x.k * nb + y.k, exps, coeff: &x.coeff * &y.coeff });
            }
        }
        let dims = [a.base.dim(), nb];
        let c1 = embed_factor(&dims, 0, &a.c1).into_iter().zip(embed_factor(&dims, 1, &b.c1)).map(|(x, y)| x + y).collect();
        let mut weights = a.weights.clone();
        weights.extend(&b.weights);
        Self::from_terms(base, c1, weights, terms).expect("product quantum data is well formed")
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn terms(&self) -> &[QTerm] {
        &self.terms
    }

    /// Novikov variables at `τ = c₁ log t` on the branch of `log t` carried by `t`.
    pub fn q_from_t(&self, t: &ZPoint) -> Vec<Complex> {
        let lt = t.log();
        self.weights.iter().map(|&w| lt.scale_i64(i64::from(w)).exp()).collect()
    }

    fn check_q(&self, q: &[Complex]) -> Result<()> {
        if q.len() != self.nvars() {
            return Err(Error::Domain(format!("expected {} Novikov variables, got {}", self.nvars(), q.len())));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("Novikov variable is not finite".into()));
        }
        Ok(())
    }

    fn monomial(q: &[Complex], exps: &[u32], bits: u32) -> Complex {
        let mut m = Complex::one(bits);
        for (x, &e) in q.iter().zip(exps) {
            if e > 0 {
                m = &m * &x.powi(e);
            }
        }
        m
    }

    pub fn quantum_product(&self, a: &CohClass, b: &CohClass, q: &[Complex]) -> Result<CohClass> {
        self.check_q(q)?;
        if a.dim() != self.dim() || b.dim() != self.dim() {
            return Err(Error::Domain("class does not belong to this algebra".into()));
        }
        let bits = a.prec();
        let mut out = CohClass::zero(bits, self.dim());
        for t in &self.terms {
            let (x, y) = (&a.coeffs[t.i], &b.coeffs[t.j]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let v = &scale_rat(&(x * y), &t.coeff) * &Self::monomial(q, &t.exps, bits);
            out.coeffs[t.k] += &v;
        }
        Ok(out)
    }

    /// Matrix of `a ⋆ -` at `q`; column `j` holds `a ⋆ φ_j`.
    pub fn star_matrix(&self, a: &[Rat], q: &[Complex]) -> Result<CMatrix> {
        self.check_q(q)?;
        let bits = q.first().map_or(64, Complex::prec);
        let mut m = CMatrix::zeros(bits, self.dim(), self.dim());
        for t in &self.terms {
            if a[t.i].is_zero() {
                continue;
            }
            let v = scale_rat(&Self::monomial(q, &t.exps, bits), &(&a[t.i] * &t.coeff));
            m[(t.k, t.j)] += &v;
        }
        Ok(m)
    }

    /// `(E ⋆_τ)` for `τ ∈ H²`, which is `c₁ ⋆`.
    pub fn euler_matrix(&self, q: &[Complex]) -> Result<CMatrix> {
        self.star_matrix(&self.c1, q)
    }

    pub fn mu_matrix(&self, bits: u32) -> CMatrix {
        self.base.mu_matrix(bits)
    }

    pub fn c1_cup(&self, bits: u32) -> CMatrix {
        self.base.cup_matrix(&self.c1, bits)
    }

    fn poly_product(&self, a: &[Poly], b: &[Poly]) -> Vec<Poly> {
        let mut out = vec![Poly::new(); self.dim()];
        for t in &self.terms {
            if a[t.i].is_empty() || b[t.j].is_empty() {
                continue;
            }
            for (ea, ca) in &a[t.i] {
                for (eb, cb) in &b[t.j] {
                    let e: Vec<u32> = ea.iter().zip(eb).zip(&t.exps).map(|((x, y), z)| x + y + z).collect();
                    let entry = out[t.k].entry(e).or_insert_with(Rat::zero);
                    *entry += ca * cb * &t.coeff;
                }
            }
        }
        for p in &mut out {
            p.retain(|_, c| !c.is_zero());
        }
        out
    }

    fn poly_basis(&self, i: usize) -> Vec<Poly> {
        let mut v = vec![Poly::new(); self.dim()];
        v[i].insert(vec![0; self.nvars()], Rat::one());
        v
    }

    /// Exact axiom checks in the polynomial ring of the Novikov variables.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim();
        let labels = &self.base.labels;
        let mut report = ValidationReport { algebra: format!("{} (quantum)", self.base.name), checks: Vec::new() };
        let prod = |i: usize, j: usize| self.poly_product(&self.poly_basis(i), &self.poly_basis(j));

        let mut w = None;
        'c: for i in 0..n {
            for j in 0..n {
                if prod(i, j) != prod(j, i) {
                    w = Some(format!("({}, {})", labels[i], labels[j]));
                    break 'c;
                }
            }
        }
        report.push("commutativity", w);

        let mut w = None;
        'a: for i in 0..n {
            for j in 0..n {
                let ij = prod(i, j);
                for k in 0..n {
                    let lhs = self.poly_product(&ij, &self.poly_basis(k));
                    let rhs = self.poly_product(&self.poly_basis(i), &prod(j, k));
                    if lhs != rhs {
                        w = Some(format!("({}, {}, {})", labels[i], labels[j], labels[k]));
                        break 'a;
                    }
                }
            }
        }
        report.push("associativity", w);

        let mut w = None;
        for i in 0..n {
            if prod(self.base.unit, i) != self.poly_basis(i) {
                w = Some(format!("1 ⋆ {}", labels[i]));
                break;
            }
        }
        report.push("unit", w);

        let pairing = self.base.pairing_exact();
        let pair_poly = |a: &[Poly], b: usize| -> Poly {
            let mut out = Poly::new();
            for (i, p) in a.iter().enumerate() {
                if pairing[i][b].is_zero() {
                    continue;
                }
                for (e, c) in p {
                    *out.entry(e.clone()).or_insert_with(Rat::zero) += c * &pairing[i][b];
                }
            }
            out.retain(|_, c| !c.is_zero());
            out
        };
        let mut w = None;
        'f: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // (φ_i ⋆ φ_j, φ_k) = (φ_i, φ_j ⋆ φ_k)
                    let lhs = pair_poly(&prod(i, j), k);
                    let rhs = pair_poly(&prod(j, k), i);
                    if lhs != rhs {
                        w = Some(format!("({}, {}, {})", labels[i], labels[j], labels[k]));
                        break 'f;
                    }
                }
            }
        }
        report.push("Frobenius property", w);

        let mut w = None;
        for i in 0..n {
            for j in 0..n {
                let p = prod(i, j);
                for k in 0..n {
                    let classical = p[k].get(&vec![0; self.nvars()]).cloned().unwrap_or_else(Rat::zero);
                    if &classical != self.base.structure_constant(i, j, k) {
                        w = Some(format!("q = 0 limit of {} ⋆ {} differs from the cup product", labels[i], labels[j]));
                    }
                }
            }
        }
        report.push("large-radius limit", w);

        let mut w = None;
        for t in &self.terms {
            let qdeg: u32 = t.exps.iter().zip(&self.weights).map(|(e, w)| 2 * e * w).sum();
            if self.base.degrees[t.k] + qdeg != self.base.degrees[t.i] + self.base.degrees[t.j] {
                w = Some(format!("{} ⋆ {} has a term along {} of the wrong degree", labels[t.i], labels[t.j], labels[t.k]));
                break;
            }
        }
        report.push("grading", w);
        report
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenSummary {
    pub re: String,
    pub im: String,
    pub multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<EigenSummary>,
    /// Spectral radius `T = max |u|`.
    #[serde(rename = "T")]
    pub t: f64,
    /// `T` itself is an eigenvalue of multiplicity one.
    pub simple_max: bool,
    /// Directions `arg(u_i - u_j)` in `[0, 2π)`.
    pub forbidden_directions: Vec<f64>,
    pub max_residual: f64,
}

/// Eigen-data of the Euler multiplication at one parameter value.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub decomposition: EigenDecomposition,
    pub radius: Float,
}

impl Spectrum {
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let decomposition = eigen_decompose(m)?;
        let bits = m.prec();
        let mut radius = Float::new(bits);
        for c in &decomposition.clusters {
            let a = c.value.abs();
            if a > radius {
                radius = a;
            }
        }
        Ok(Self { decomposition, radius })
    }

    /// Distinct eigenvalues.
    pub fn values(&self) -> Vec<Complex> {
        self.decomposition.clusters.iter().map(|c| c.value.clone()).collect()
    }

    fn tolerance(&self) -> Float {
        let bits = self.radius.prec();
        let scale = if self.decomposition.norm > 1 { self.decomposition.norm.clone() } else { Float::with_val(bits, 1) };
        let digits = (f64::from(bits) / std::f64::consts::LOG2_10 / 2.0) as i32;
        Float::with_val(bits, 10f64.powi(-digits.min(300))) * scale
    }

    /// Index of the cluster sitting at the positive real number `T`.
    pub fn t_cluster(&self) -> Option<usize> {
        let bits = self.radius.prec();
        let t = Complex::from_real(self.radius.clone());
        let tol = self.tolerance();
        if self.radius.is_zero() {
            return None;
        }
        self.decomposition.clusters.iter().position(|c| Float::with_val(bits, (&c.value - &t).abs()) <= tol)
    }

    pub fn report(&self) -> SpectrumReport {
        let values = self.values();
        let simple_max = self.t_cluster().is_some_and(|i| self.decomposition.clusters[i].algebraic_multiplicity == 1);
        SpectrumReport {
            eigenvalues: self
                .decomposition
                .clusters
                .iter()
                .map(|c| {
                    let (re, im) = c.value.to_decimal_strings();
                    EigenSummary {
                        re,
                        im,
                        multiplicity: c.algebraic_multiplicity,
                        geometric_multiplicity: c.geometric_multiplicity(),
                        residual: c.residual.to_f64(),
                    }
                })
                .collect(),
            t: self.radius.to_f64(),
            simple_max,
            forbidden_directions: forbidden_directions(&values).iter().map(Float::to_f64).collect(),
            max_residual: self.decomposition.max_residual().to_f64(),
        }
    }
}

pub fn euler_spectrum(qa: &QuantumAlgebra, q: &[Complex]) -> Result<Spectrum> {
    Spectrum::from_matrix(&qa.euler_matrix(q)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureOReport {
    pub passed: bool,
    #[serde(rename = "T")]
    pub t: f64,
    /// Multiplicity of `T` as an eigenvalue (0 if `T` is not an eigenvalue).
    pub multiplicity_of_t: usize,
    /// Number of distinct eigenvalues with `|u| = T`.
    pub max_modulus_count: usize,
    pub multiplicities: Vec<usize>,
    pub detail: String,
}

/// Part (1) of Conjecture O: the spectral radius `T` is itself a simple eigenvalue.
pub fn conjecture_o_check(spec: &Spectrum) -> ConjectureOReport {
    let bits = spec.radius.prec();
    let tol = spec.tolerance();
    let clusters = &spec.decomposition.clusters;
    let max_modulus_count = clusters.iter().filter(|c| Float::with_val(bits, c.value.abs() - &spec.radius).abs() <= tol).count();
    let (mult, detail) = match spec.t_cluster() {
        Some(i) => {
            let m = clusters[i].algebraic_multiplicity;
            (m, if m == 1 { "T is a simple eigenvalue".to_string() } else { format!("T has multiplicity {m}") })
        }
        None => (0, "the spectral radius is not attained on the positive real axis".to_string()),
    };
    ConjectureOReport {
        passed: mult == 1,
        t: spec.radius.to_f64(),
        multiplicity_of_t: mult,
        max_modulus_count,
        multiplicities: clusters.iter().map(|c| c.algebraic_multiplicity).collect(),
        detail,
    }
}

fn normalize_angle(x: &Float) -> Float {
    // into [0, 2π)
    let bits = x.prec();
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let k = Float::with_val(bits, x / &two_pi).floor();
    Float::with_val(bits, x - k * &two_pi)
}

fn dedup_values(values: &[Complex]) -> Vec<Complex> {
    let mut out: Vec<Complex> = Vec::new();
    for v in values {
        let tiny = Float::with_val(v.prec(), 1e-30);
        if !out.iter().any(|u| (u - v).abs() <= tiny) {
            out.push(v.clone());
        }
    }
    out
}

/// Sorted directions `arg(u_i - u_j) ∈ [0, 2π)` over ordered pairs of distinct eigenvalues.
pub fn forbidden_directions(values: &[Complex]) -> Vec<Float> {
    let vals = dedup_values(values);
    let mut dirs: Vec<Float> = Vec::new();
    for (i, a) in vals.iter().enumerate() {
        for (j, b) in vals.iter().enumerate() {
            if i != j {
                dirs.push(normalize_angle(&(a - b).arg()));
            }
        }
    }
    dirs.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    let mut out: Vec<Float> = Vec::new();
    for d in dirs {
        if out.last().is_none_or(|l| Float::with_val(d.prec(), &d - l) > 1e-30) {
            out.push(d);
        }
    }
    out
}

/// Angular distance from `phi` to the nearest forbidden direction (π when none).
pub fn phase_margin(values: &[Complex], phi: &Float) -> Float {
    let bits = phi.prec();
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let p = normalize_angle(phi);
    let mut best = pi(bits);
    for d in forbidden_directions(values) {
        let diff = Float::with_val(bits, &p - &d).abs();
        let alt = Float::with_val(bits, &two_pi - &diff);
        let m = if diff < alt { diff } else { alt };
        if m < best {
            best = m;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct PhaseChoice {
    pub phi: Float,
    pub margin: Float,
    pub admissible: bool,
    pub forbidden: Vec<Float>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub phi: f64,
    pub margin: f64,
    pub admissible: bool,
    pub forbidden: Vec<f64>,
}

impl PhaseChoice {
    pub fn record(&self) -> PhaseRecord {
        PhaseRecord {
            phi: self.phi.to_f64(),
            margin: self.margin.to_f64(),
            admissible: self.admissible,
            forbidden: self.forbidden.iter().map(Float::to_f64).collect(),
        }
    }

    pub fn require(self) -> Result<Self> {
        if self.admissible {
            Ok(self)
        } else {
            Err(Error::Domain(format!("phase {} is not admissible (margin {:e})", self.phi.to_f64(), self.margin.to_f64())))
        }
    }
}

/// Check a requested phase, or choose the midpoint of the widest gap between forbidden directions.
///
/// Among equally wide gaps the midpoint of smallest `|φ|` (with `φ ∈ (-π, π]`) wins, and
/// a positive phase beats its negative.
pub fn admissible_phase(values: &[Complex], requested: Option<&Float>, bits: u32) -> PhaseChoice {
    let forbidden = forbidden_directions(values);
    let tiny = Float::with_val(bits, 1e-30);
    if let Some(phi) = requested {
        let margin = phase_margin(values, phi);
        let admissible = margin > tiny;
        return PhaseChoice { phi: phi.clone(), margin, admissible, forbidden };
    }
    let pi_b = pi(bits);
    let two_pi = Float::with_val(bits, &pi_b * 2u32);
    if forbidden.is_empty() {
        return PhaseChoice { phi: Float::new(bits), margin: pi_b, admissible: true, forbidden };
    }
    let mut best: Option<(Float, Float)> = None; // (gap, phi in (-π, π])
    for (idx, d) in forbidden.iter().enumerate() {
        let next = if idx + 1 < forbidden.len() { forbidden[idx + 1].clone() } else { Float::with_val(bits, &forbidden[0] + &two_pi) };
        let gap = Float::with_val(bits, &next - d);
        let mut mid = Float::with_val(bits, Float::with_val(bits, d + &next) / 2u32);
        mid = normalize_angle(&mid);
        if mid > pi_b {
            mid -= &two_pi;
        }
        let better = match &best {
            None => true,
            Some((g, m)) => {
                let dg = Float::with_val(bits, &gap - g);
                if dg > 1e-25 {
                    true
                } else if dg < -1e-25 {
                    false
                } else {
                    let (a, b) = (Float::with_val(bits, mid.abs_ref()), Float::with_val(bits, m.abs_ref()));
                    let da = Float::with_val(bits, &a - &b);
                    da < -1e-25 || (da.abs() <= 1e-25 && mid > *m)
                }
            }
        };
        if better {
            best = Some((gap, mid));
        }
    }
    let (gap, phi) = best.expect("at least one gap");
    PhaseChoice { phi, margin: gap / 2u32, admissible: true, forbidden }
}

/// Order eigenvalues by `Im(e^{-iφ} u)` descending; ties by `Re(e^{-iφ} u)` descending, then index.
pub fn order_by_phase(values: &[Complex], phi: &Float) -> Vec<usize> {
    let bits = phi.prec();
    let rot = Complex::cis(&Float::with_val(bits, -phi));
    let keyed: Vec<Complex> = values.iter().map(|u| u * &rot).collect();
    let tol = Float::with_val(bits, 1e-25);
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let di = Float::with_val(bits, &keyed[b].im - &keyed[a].im);
        if di > tol {
            return std::cmp::Ordering::Greater;
        }
        if di < Float::with_val(bits, -&tol) {
            return std::cmp::Ordering::Less;
        }
        let dr = Float::with_val(bits, &keyed[b].re - &keyed[a].re);
        if dr > tol {
            return std::cmp::Ordering::Greater;
        }
        if dr < Float::with_val(bits, -&tol) {
            return std::cmp::Ordering::Less;
        }
        a.cmp(&b)
    });
    idx
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternReport {
    pub n: u32,
    pub d: u32,
    pub expected_t: f64,
    pub matched: bool,
    pub max_deviation: f64,
    pub zero_multiplicity: usize,
}

/// Compare a spectrum with `{0} ∪ {T ζ : ζ^{n+1-d} = 1}`, `T = (n+1-d) d^{d/(n+1-d)}`.
pub fn hypersurface_pattern(spec: &Spectrum, n: u32, d: u32, ctx: &PrecisionContext) -> Result<PatternReport> {
    if d == 0 || d > n {
        return Err(Error::Domain(format!("degree {d} hypersurface in P^{n} is not Fano of the expected index")));
    }
    let bits = ctx.bits();
    let r = n + 1 - d;
    let t = Float::with_val(bits, Float::with_val(bits, d).ln() * d / r).exp() * r;
    let mut expected = Vec::new();
    for k in 0..r {
        let ang = Float::with_val(bits, pi(bits) * 2u32) * k / r;
        expected.push(Complex::from_polar(&t, &ang));
    }
    let mut max_dev = Float::new(bits);
    let mut matched = true;
    let mut zero_mult = 0;
    let tol = Float::with_val(bits, 1e-20);
    for c in &spec.decomposition.clusters {
        if c.value.abs() <= tol {
            zero_mult += c.algebraic_multiplicity;
            continue;
        }
        let dev = expected
            .iter()
            .map(|e| (e - &c.value).abs())
            .min_by(|a, b| a.partial_cmp(b).expect("finite"))
            .unwrap_or_else(|| Float::with_val(bits, f64::INFINITY));
        if c.algebraic_multiplicity != 1 || dev > tol {
            matched = false;
        }
        if dev > max_dev {
            max_dev = dev;
        }
    }
    let nonzero: usize = spec.decomposition.clusters.iter().filter(|c| c.value.abs() > tol).count();
    matched &= nonzero == r as usize;
    Ok(PatternReport { n, d, expected_t: t.to_f64(), matched, max_deviation: max_dev.to_f64(), zero_multiplicity: zero_mult })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(50).unwrap()
    }

    fn one(bits: u32) -> Vec<Complex> {
        vec![Complex::one(bits)]
    }

    #[test]
    fn line_product_rule() {
        let bits = ctx().bits();
        let qa = QuantumAlgebra::projective(1);
        let p = CohClass::from_exact(bits, &qa.base.basis_vector(1));
        let q = vec![Complex::from_f64(bits, 0.3, 0.1)];
        let pp = qa.quantum_product(&p, &p, &q).unwrap();
        assert_eq!(pp.coeffs[0], q[0]);
        assert!(pp.coeffs[1].is_zero());
        let q0 = vec![Complex::zero(bits)];
        assert!(qa.quantum_product(&p, &p, &q0).unwrap().coeffs.iter().all(Complex::is_zero));
        assert!(qa.quantum_product(&p, &p, &[]).is_err());
    }

    #[test]
    fn builtins_and_products_validate() {
        for n in 1..=4 {
            let r = QuantumAlgebra::projective(n).validate();
            assert!(r.passed(), "{:?}", r.failures());
        }
        let p1 = QuantumAlgebra::projective(1);
        let r = QuantumAlgebra::kunneth(&p1, &QuantumAlgebra::projective(2)).validate();
        assert!(r.passed(), "{:?}", r.failures());
    }

    #[test]
    fn plane_spectrum_and_conjecture_o() {
        let bits = ctx().bits();
        let s = euler_spectrum(&QuantumAlgebra::projective(2), &one(bits)).unwrap();
        let rep = s.report();
        assert!((rep.t - 3.0).abs() < 1e-12);
        assert!(rep.simple_max);
        let o = conjecture_o_check(&s);
        assert!(o.passed);
        assert_eq!(o.max_modulus_count, 3);
    }

    #[test]
    fn product_spectrum_has_double_zero() {
        let bits = ctx().bits();
        let p1 = QuantumAlgebra::projective(1);
        let qa = QuantumAlgebra::kunneth(&p1, &p1);
        let s = euler_spectrum(&qa, &[Complex::one(bits), Complex::one(bits)]).unwrap();
        let o = conjecture_o_check(&s);
        assert!(o.passed);
        assert!((o.t - 4.0).abs() < 1e-12);
        let zero = s.decomposition.clusters.iter().find(|c| c.value.abs() < 1e-30).unwrap();
        assert_eq!(zero.algebraic_multiplicity, 2);
        let pat = hypersurface_pattern(&s, 3, 2, &ctx()).unwrap();
        assert!(pat.matched, "{pat:?}");
        assert!((pat.expected_t - 4.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_double_maximum_fails() {
        let bits = ctx().bits();
        let m = CMatrix::diagonal(&[3, 3, 1].map(|x| Complex::from_i64(bits, x)));
        let o = conjecture_o_check(&Spectrum::from_matrix(&m).unwrap());
        assert!(!o.passed);
        assert_eq!(o.multiplicity_of_t, 2);
    }

    #[test]
    fn auto_phases() {
        let bits = ctx().bits();
        let line = euler_spectrum(&QuantumAlgebra::projective(1), &one(bits)).unwrap().values();
        let ch = admissible_phase(&line, None, bits);
        assert!((ch.phi.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((ch.margin.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let rej = admissible_phase(&line, Some(&Float::new(bits)), bits);
        assert!(!rej.admissible);
        assert!(rej.margin.to_f64().abs() < 1e-30);

        let plane = euler_spectrum(&QuantumAlgebra::projective(2), &one(bits)).unwrap().values();
        let ch = admissible_phase(&plane, None, bits);
        assert!(ch.phi.to_f64().abs() < 1e-15);
        assert_eq!(ch.forbidden.len(), 6);
        let pi6 = Float::with_val(bits, pi(bits) / 6u32);
        assert!(!admissible_phase(&plane, Some(&pi6), bits).admissible);
    }

    #[test]
    fn ordering_is_strict_for_admissible_phase() {
        let bits = ctx().bits();
        let plane = euler_spectrum(&QuantumAlgebra::projective(2), &one(bits)).unwrap().values();
        let phi = admissible_phase(&plane, None, bits).phi;
        let order = order_by_phase(&plane, &phi);
        let rot = Complex::cis(&Float::with_val(bits, -&phi));
        for w in order.windows(2) {
            let a = (&plane[w[0]] * &rot).im.to_f64();
            let b = (&plane[w[1]] * &rot).im.to_f64();
            assert!(a > b + 1e-6);
        }
    }

    #[test]
    fn characteristic_polynomial_of_euler_matrix() {
        let bits = ctx().bits();
        for n in 1..=4u32 {
            let qa = QuantumAlgebra::projective(n);
            let q = vec![Complex::from_f64(bits, 0.7, -0.2)];
            let e = qa.euler_matrix(&q).unwrap();
            // E^{n+1} = (n+1)^{n+1} q on H*(P^n)
            let mut pow = CMatrix::identity(bits, n as usize + 1);
            for _ in 0..=n {
                pow = pow.matmul(&e);
            }
            let c = q[0].scale_i64((n as i64 + 1).pow(n + 1));
            let expect = CMatrix::identity(bits, n as usize + 1).scale(&c);
            assert!(pow.sub(&expect).max_abs() < 1e-60);
        }
    }
}
