//! Eigenvalues by shifted QR on the Hessenberg form, eigenvectors by null spaces.

use rug::Float;

use super::complex::Complex;
use super::matrix::{vec_norm, CMatrix};
use crate::error::{Error, Result};

/// One distinct eigenvalue with its multiplicities and eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenCluster {
    pub value: Complex,
    pub algebraic_multiplicity: usize,
    /// Unit-norm basis of the computed eigenspace.
    pub vectors: Vec<Vec<Complex>>,
    /// `max ||M v - lambda v||` over the returned vectors.
    pub residual: Float,
}

impl EigenCluster {
    pub fn geometric_multiplicity(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// All eigenvalues with repetition, in the order produced by deflation.
    pub raw_values: Vec<Complex>,
    pub clusters: Vec<EigenCluster>,
    /// `||M||_F`, the scale for residuals.
    pub norm: Float,
    pub iterations: usize,
}

impl EigenDecomposition {
    pub fn max_residual(&self) -> Float {
        let mut m = Float::new(self.norm.prec());
        for c in &self.clusters {
            if c.residual > m {
                m = c.residual.clone();
            }
        }
        m
    }

    pub fn is_semisimple(&self) -> bool {
        self.clusters.iter().all(|c| c.geometric_multiplicity() == c.algebraic_multiplicity)
    }

    pub fn distinct(&self) -> bool {
        self.clusters.iter().all(|c| c.algebraic_multiplicity == 1)
    }
}

fn eps(bits: u32) -> Float {
    let mut e = Float::with_val(bits, 1);
    e >>= bits - 2;
    e
}

fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let bits = a.prec();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex> = (k + 1..n).map(|r| h[(r, k)].clone()).collect();
        let alpha_abs = vec_norm(&x);
        if alpha_abs.is_zero() {
            continue;
        }
        // v = x + e^{i arg x0} |x| e1, reflector I - 2 v v^H / (v^H v)
        let phase = if x[0].is_zero() { Complex::one(bits) } else { x[0].scale(&Float::with_val(bits, 1 / x[0].abs())) };
        let mut v = x.clone();
        v[0] = &v[0] + &phase.scale(&alpha_abs);
        let vnorm2 = {
            let mut s = Float::new(bits);
            for c in &v {
                s += c.norm_sqr();
            }
            s
        };
        if vnorm2.is_zero() {
            continue;
        }
        let two_over = Complex::from_real(Float::with_val(bits, 2) / vnorm2);
        // left: rows k+1.. of columns k..n
        for c in k..n {
            let mut dot = Complex::zero(bits);
            for (i, vi) in v.iter().enumerate() {
                dot.add_mul(&vi.conj(), &h[(k + 1 + i, c)]);
            }
            let f = &dot * &two_over;
            for (i, vi) in v.iter().enumerate() {
                let t = vi * &f;
                h[(k + 1 + i, c)] -= &t;
            }
        }
        // right: columns k+1.. of all rows
        for r in 0..n {
            let mut dot = Complex::zero(bits);
            for (i, vi) in v.iter().enumerate() {
                dot.add_mul(&h[(r, k + 1 + i)], vi);
            }
            let f = &dot * &two_over;
            for (i, vi) in v.iter().enumerate() {
                let t = &f * &vi.conj();
                h[(r, k + 1 + i)] -= &t;
            }
        }
        for r in k + 2..n {
            h[(r, k)] = Complex::zero(bits);
        }
    }
    h
}

fn wilkinson_shift(a: &Complex, b: &Complex, c: &Complex, d: &Complex) -> Complex {
    let bits = a.prec();
    let half = Complex::from_f64(bits, 0.5, 0.0);
    let tr_half = &(a + d) * &half;
    let det = &(a * d) - &(b * c);
    let disc = (&(&tr_half * &tr_half) - &det).sqrt();
    let l1 = &tr_half + &disc;
    let l2 = &tr_half - &disc;
    if (&l1 - d).abs() <= (&l2 - d).abs() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of a square matrix, with repetition.
pub fn eigenvalues(m: &CMatrix) -> Result<(Vec<Complex>, usize)> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    let n = m.rows();
    let bits = m.prec();
    if n == 0 {
        return Ok((vec![], 0));
    }
    let mut h = hessenberg(m);
    let tiny = eps(bits);
    let mut values = vec![Complex::zero(bits); n];
    let mut hi = n - 1;
    let mut total_iters = 0usize;
    let mut iters = 0usize;
    let mut trace = Vec::new();
    let scale = m.norm();
    loop {
        if hi == 0 {
            values[0] = h[(0, 0)].clone();
            break;
        }
        // locate the start of the unreduced block ending at hi
        let mut l = hi;
        while l > 0 {
            let s = Float::with_val(bits, h[(l - 1, l - 1)].abs() + h[(l, l)].abs());
            let s = if s.is_zero() { scale.clone() } else { s };
            if h[(l, l - 1)].abs() <= Float::with_val(bits, &tiny * &s) {
                h[(l, l - 1)] = Complex::zero(bits);
                break;
            }
            l -= 1;
        }
        if l == hi {
            values[hi] = h[(hi, hi)].clone();
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        total_iters += 1;
        trace.push(h[(hi, hi - 1)].abs().to_f64());
        if iters > 200 {
            return Err(Error::EigenNonConvergence { iterations: total_iters, last_subdiag: h[(hi, hi - 1)].abs().to_f64(), trace });
        }
        let shift = if iters.is_multiple_of(11) {
            // exceptional shift breaks cycles of rotation-symmetric spectra
            let mut s = h[(hi, hi - 1)].re.clone().abs();
            if hi >= 2 {
                s += h[(hi - 1, hi - 2)].re.clone().abs();
            }
            &h[(hi, hi)] + &Complex::new(s.clone(), Float::with_val(bits, &s * 0.37))
        } else {
            wilkinson_shift(&h[(hi - 1, hi - 1)], &h[(hi - 1, hi)], &h[(hi, hi - 1)], &h[(hi, hi)])
        };
        for i in l..=hi {
            h[(i, i)] -= &shift;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let a = h[(k, k)].clone();
            let b = h[(k + 1, k)].clone();
            let r = Float::with_val(bits, a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r.is_zero() {
                (Complex::one(bits), Complex::zero(bits))
            } else {
                let inv = Float::with_val(bits, 1 / r);
                (a.scale(&inv), b.scale(&inv))
            };
            let (cc, sc) = (c.conj(), s.conj());
            for col in k..=hi {
                let x = h[(k, col)].clone();
                let y = h[(k + 1, col)].clone();
                h[(k, col)] = &(&cc * &x) + &(&sc * &y);
                h[(k + 1, col)] = &(&c * &y) - &(&s * &x);
            }
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            let (cc, sc) = (c.conj(), s.conj());
            for row in l..=(k + 2).min(hi) {
                let x = h[(row, k)].clone();
                let y = h[(row, k + 1)].clone();
                h[(row, k)] = &(&x * c) + &(&y * s);
                h[(row, k + 1)] = &(&y * &cc) - &(&x * &sc);
            }
        }
        for i in l..=hi {
            h[(i, i)] += &shift;
        }
    }
    Ok((values, total_iters))
}

/// Orthonormal-ish basis of the numerical null space, by complete-pivot elimination.
pub fn null_space(a: &CMatrix, rank_tol: &Float) -> Vec<Vec<Complex>> {
    let (rows, cols) = (a.rows(), a.cols());
    let bits = a.prec();
    let mut m = a.clone();
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    let scale = {
        let s = a.max_abs();
        if s.is_zero() {
            Float::with_val(bits, 1)
        } else {
            s
        }
    };
    let threshold = Float::with_val(bits, rank_tol * &scale);
    while rank < rows.min(cols) {
        let mut best = Float::new(bits);
        let (mut pr, mut pc) = (rank, rank);
        for r in rank..rows {
            for c in rank..cols {
                let v = m[(r, c)].abs();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= threshold {
            break;
        }
        for c in 0..cols {
            let t = m[(rank, c)].clone();
            m[(rank, c)] = m[(pr, c)].clone();
            m[(pr, c)] = t;
        }
        for r in 0..rows {
            let t = m[(r, rank)].clone();
            m[(r, rank)] = m[(r, pc)].clone();
            m[(r, pc)] = t;
        }
        col_perm.swap(rank, pc);
        let piv = m[(rank, rank)].clone();
        for c in rank..cols {
            m[(rank, c)] = &m[(rank, c)] / &piv;
        }
        for r in 0..rows {
            if r == rank || m[(r, rank)].is_zero() {
                continue;
            }
            let f = m[(r, rank)].clone();
            for c in rank..cols {
                let t = &f * &m[(rank, c)];
                m[(r, c)] -= &t;
            }
        }
        rank += 1;
    }
    // reduced echelon form [I F]; null vectors are [-F e_j; e_j]
    let mut basis = Vec::new();
    for free in rank..cols {
        let mut v = vec![Complex::zero(bits); cols];
        v[col_perm[free]] = Complex::one(bits);
        for r in 0..rank {
            v[col_perm[r]] = -&m[(r, free)];
        }
        let nrm = vec_norm(&v);
        let inv = Float::with_val(bits, 1 / nrm);
        basis.push(v.iter().map(|x| x.scale(&inv)).collect());
    }
    basis
}

/// Full eigen-decomposition with clustering of numerically equal eigenvalues.
pub fn eigen_decompose(m: &CMatrix) -> Result<EigenDecomposition> {
    let n = m.rows();
    let bits = m.prec();
    let (raw, iterations) = eigenvalues(m)?;
    let norm = m.norm();
    let unit = if norm > 1 { norm.clone() } else { Float::with_val(bits, 1) };
    // defective eigenvalues are only resolved to about eps^{1/n}
    let cluster_tol = {
        let e = eps(bits);
        let root = Float::with_val(bits, e.ln_ref()) / n.max(1) as u32;
        Float::with_val(bits, root.exp() * 10u32) * &unit
    };
    let mut clusters: Vec<(Vec<Complex>, Complex)> = Vec::new();
    for v in &raw {
        match clusters.iter_mut().find(|(_, rep)| (rep as &Complex - v).abs() <= cluster_tol) {
            Some((members, rep)) => {
                members.push(v.clone());
                let mut s = Complex::zero(bits);
                for x in members.iter() {
                    s += x;
                }
                *rep = s.scale(&Float::with_val(bits, Float::with_val(bits, 1u32) / members.len() as u32));
            }
            None => clusters.push((vec![v.clone()], v.clone())),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for (members, value) in clusters {
        let shifted = CMatrix::from_fn(n, n, |r, c| if r == c { &m[(r, c)] - &value } else { m[(r, c)].clone() });
        let mult = members.len();
        let rank_tol = if mult == 1 {
            Float::with_val(bits, Float::with_val(bits, eps(bits).sqrt_ref()))
        } else {
            Float::with_val(bits, &cluster_tol / &unit) * 10u32
        };
        let mut vectors = null_space(&shifted, &rank_tol);
        if vectors.is_empty() {
            // fall back to the direction of least amplification
            vectors = null_space(&shifted, &Float::with_val(bits, 1e-3));
            vectors.truncate(1);
        }
        vectors.truncate(mult);
        let mut residual = Float::new(bits);
        for v in &vectors {
            let r = vec_norm(&shifted.mul_vec(v));
            if r > residual {
                residual = r;
            }
        }
        out.push(EigenCluster { value, algebraic_multiplicity: mult, vectors, residual });
    }
    Ok(EigenDecomposition { raw_values: raw, clusters: out, norm, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::complex::pi;

    const P: u32 = 240;

    #[test]
    fn identity_has_full_multiplicity() {
        let d = eigen_decompose(&CMatrix::identity(P, 4)).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!(d.clusters[0].algebraic_multiplicity, 4);
        assert_eq!(d.clusters[0].geometric_multiplicity(), 4);
    }

    #[test]
    fn scaled_cyclic_companion() {
        // matrix of 3 p* on H*(P^2) at q = 1
        let mut m = CMatrix::zeros(P, 3, 3);
        m[(1, 0)] = Complex::from_i64(P, 3);
        m[(2, 1)] = Complex::from_i64(P, 3);
        m[(0, 2)] = Complex::from_i64(P, 3);
        let d = eigen_decompose(&m).unwrap();
        assert_eq!(d.clusters.len(), 3);
        for k in 0..3 {
            let ang = Float::with_val(P, pi(P) * 2u32) * k / 3u32;
            let w = Complex::from_polar(&Float::with_val(P, 3), &ang);
            assert!(d.clusters.iter().any(|c| (&c.value - &w).abs() < 1e-60), "missing root {k}");
        }
        assert!(d.max_residual() < 1e-60);
    }

    #[test]
    fn repeated_zero_in_product_spectrum() {
        let m = CMatrix::diagonal(&[4, 0, 0, -4].map(|x| Complex::from_i64(P, x)));
        let d = eigen_decompose(&m).unwrap();
        let zero = d.clusters.iter().find(|c| c.value.abs() < 1e-60).unwrap();
        assert_eq!(zero.algebraic_multiplicity, 2);
        assert_eq!(zero.geometric_multiplicity(), 2);
    }

    #[test]
    fn jordan_block_is_defective() {
        let mut m = CMatrix::zeros(P, 2, 2);
        m[(0, 1)] = Complex::one(P);
        let d = eigen_decompose(&m).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!(d.clusters[0].algebraic_multiplicity, 2);
        assert_eq!(d.clusters[0].geometric_multiplicity(), 1);
        assert!(!d.is_semisimple());
    }

    #[test]
    fn dense_random_like_matrix() {
        let m = CMatrix::from_fn(5, 5, |r, c| Complex::from_f64(P, ((r * 7 + c * 3) % 5) as f64 - 1.3, ((r + 2 * c) % 3) as f64));
        let d = eigen_decompose(&m).unwrap();
        assert!(d.max_residual() < 1e-55);
        let mut tr = Complex::zero(P);
        for v in &d.raw_values {
            tr += v;
        }
        let mut tr_m = Complex::zero(P);
        for i in 0..5 {
            tr_m += &m[(i, i)];
        }
        assert!((&tr - &tr_m).abs() < 1e-60);
    }
}
