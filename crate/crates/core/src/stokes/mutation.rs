//! Exceptional bases of the Euler lattice, mutations and braid-orbit search.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::charclasses::{euler_gram, KBasis, KClass, TangentData};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::quantum::PhaseRecord;

pub type BigMatrix = Vec<Vec<BigInt>>;

fn to_big(a: &IntMatrix) -> BigMatrix {
    a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn big_matmul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = BigInt::zero();
                    for l in 0..k {
                        if !a[i][l].is_zero() && !b[l][j].is_zero() {
                            s += &a[i][l] * &b[l][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn big_transpose(a: &BigMatrix) -> BigMatrix {
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Determinant by fraction-free elimination (Bareiss).
pub fn big_det(a: &BigMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// True when the matrix has ones on the diagonal and zeros strictly below it.
pub fn is_upper_unitriangular(g: &BigMatrix) -> bool {
    g.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| if i == j { x.is_one() } else { j > i || x.is_zero() }))
}

fn right_mutation_matrix(g: &BigMatrix, i: usize) -> BigMatrix {
    let n = g.len();
    let mut b: BigMatrix = (0..n).map(|r| (0..n).map(|c| if r == c { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let a = g[i][i + 1].clone();
    b[i][i] = BigInt::zero();
    b[i + 1][i] = BigInt::one();
    b[i][i + 1] = BigInt::one();
    b[i + 1][i + 1] = -a;
    b
}

fn left_mutation_matrix(g: &BigMatrix, i: usize) -> BigMatrix {
    let n = g.len();
    let mut b: BigMatrix = (0..n).map(|r| (0..n).map(|c| if r == c { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let a = g[i][i + 1].clone();
    b[i][i] = -a;
    b[i + 1][i] = BigInt::one();
    b[i][i + 1] = BigInt::one();
    b[i + 1][i + 1] = BigInt::zero();
    b
}

/// Gram matrix after the basis change with columns `b`: `bᵀ g b`.
fn congruence(g: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    big_matmul(&big_matmul(&big_transpose(b), g), b)
}

/// An ordered exceptional basis of a lattice with its Euler form.
///
/// Elements are stored as integer coordinates (one row per element) in a fixed
/// reference basis whose Euler form is `form`; labels are read off the coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct MutationSystem {
    /// Labels of the reference basis.
    pub reference: Vec<String>,
    pub coords: BigMatrix,
    pub form: BigMatrix,
    pub gram: BigMatrix,
    pub phase: Option<PhaseRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MutationSystemRecord {
    pub labels: Vec<String>,
    pub coords: Vec<Vec<String>>,
    pub gram: Vec<Vec<String>>,
    pub det: String,
    pub phase: Option<PhaseRecord>,
}

impl MutationSystem {
    pub fn new(reference: Vec<String>, coords: BigMatrix, form: BigMatrix, phase: Option<PhaseRecord>) -> Result<Self> {
        let n = form.len();
        if reference.len() != n || coords.len() != n || coords.iter().any(|r| r.len() != n) || form.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("mutation system dimensions disagree".into()));
        }
        let gram = big_matmul(&big_matmul(&coords, &form), &big_transpose(&coords));
        if !is_upper_unitriangular(&gram) {
            return Err(Error::Domain(format!("the Gram matrix {} is not upper unitriangular", fmt_big(&gram))));
        }
        Ok(Self { reference, coords, form, gram, phase })
    }

    /// The basis itself as reference lattice.
    pub fn from_basis(td: &TangentData, basis: &KBasis, phase: Option<PhaseRecord>) -> Result<Self> {
        let form = to_big(&euler_gram(td, basis)?);
        let n = basis.len();
        let coords = (0..n).map(|r| (0..n).map(|c| BigInt::from(i64::from(r == c))).collect()).collect();
        Self::new(basis.elements.iter().map(|e| e.label.clone()).collect(), coords, form, phase)
    }

    /// Classes given by integer coordinates in `reference`.
    pub fn from_coordinates(td: &TangentData, reference: &KBasis, coords: &IntMatrix, phase: Option<PhaseRecord>) -> Result<Self> {
        let form = to_big(&euler_gram(td, reference)?);
        Self::new(reference.elements.iter().map(|e| e.label.clone()).collect(), to_big(coords), form, phase)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Elements written in the reference basis. Coordinates grow quickly under
    /// long braid words, so this is formatted on demand.
    pub fn labels(&self) -> Vec<String> {
        self.coords.iter().map(|r| row_label(&self.reference, r)).collect()
    }

    pub fn det(&self) -> BigInt {
        big_det(&self.gram)
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i + 1 >= self.len() {
            return Err(Error::Domain(format!("mutation index {i} out of range for a system of length {}", self.len())));
        }
        Ok(())
    }

    fn apply(&self, b: &BigMatrix) -> Self {
        let coords = big_matmul(&big_transpose(b), &self.coords);
        let gram = congruence(&self.gram, b);
        Self { reference: self.reference.clone(), coords, form: self.form.clone(), gram, phase: self.phase.clone() }
    }

    /// `(E_i, E_{i+1}) ↦ (E_{i+1}, E_i − χ(E_i, E_{i+1}) E_{i+1})`, positions 0-based.
    pub fn mutate_right(&self, i: usize) -> Result<Self> {
        self.check_index(i)?;
        Ok(self.apply(&right_mutation_matrix(&self.gram, i)))
    }

    /// `(E_i, E_{i+1}) ↦ (E_{i+1} − χ(E_i, E_{i+1}) E_i, E_i)`, the inverse of [`Self::mutate_right`].
    pub fn mutate_left(&self, i: usize) -> Result<Self> {
        self.check_index(i)?;
        Ok(self.apply(&left_mutation_matrix(&self.gram, i)))
    }

    pub fn flip_sign(&self, i: usize) -> Self {
        let mut out = self.clone();
        for x in out.coords[i].iter_mut() {
            *x = -x.clone();
        }
        for j in 0..out.len() {
            if j != i {
                out.gram[i][j] = -out.gram[i][j].clone();
                out.gram[j][i] = -out.gram[j][i].clone();
            }
        }
        out
    }

    /// Apply a braid word: `k > 0` is a right mutation at position `k-1`, `k < 0` a left one.
    pub fn apply_word(&self, word: &[i32]) -> Result<Self> {
        let mut s = self.clone();
        for &k in word {
            let i = k.unsigned_abs() as usize;
            if i == 0 {
                return Err(Error::Domain("braid generators are numbered from 1".into()));
            }
            s = if k > 0 { s.mutate_right(i - 1)? } else { s.mutate_left(i - 1)? };
        }
        Ok(s)
    }

    pub fn gram_i64(&self) -> Option<IntMatrix> {
        self.gram.iter().map(|r| r.iter().map(ToPrimitive::to_i64).collect()).collect()
    }

    /// The elements as K-classes, given the reference basis used for the coordinates.
    pub fn classes(&self, reference: &KBasis) -> Result<Vec<KClass>> {
        self.coords
            .iter()
            .zip(self.labels())
            .map(|(row, label)| {
                let c: Option<Vec<i64>> = row.iter().map(ToPrimitive::to_i64).collect();
                let c = c.ok_or_else(|| Error::Domain("coordinates exceed the 64-bit range".into()))?;
                let mut k = reference.combine(&c);
                k.label = label;
                Ok(k)
            })
            .collect()
    }

    pub fn record(&self) -> MutationSystemRecord {
        let s = |m: &BigMatrix| m.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        MutationSystemRecord {
            labels: self.labels(),
            coords: s(&self.coords),
            gram: s(&self.gram),
            det: self.det().to_string(),
            phase: self.phase.clone(),
        }
    }
}

/// `2·A - B` style label of an integer combination of the reference classes.
pub fn row_label(reference: &[String], row: &[BigInt]) -> String {
    let mut out = String::new();
    for (c, l) in row.iter().zip(reference) {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let term = if mag.is_one() { l.clone() } else { format!("{mag}·{l}") };
        if out.is_empty() {
            out = if c.is_negative() { format!("-{term}") } else { term };
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
            out.push_str(&term);
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

pub fn fmt_big(m: &BigMatrix) -> String {
    let rows: Vec<String> = m.iter().map(|r| format!("[{}]", r.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))).collect();
    format!("[{}]", rows.join(","))
}

/// Representative of `D g D` over sign matrices `D`: along a breadth-first
/// spanning forest of the support graph every tree entry is made positive.
pub fn sign_canonical(g: &BigMatrix) -> BigMatrix {
    let n = g.len();
    let mut eps: Vec<Option<bool>> = vec![None; n];
    for root in 0..n {
        if eps[root].is_some() {
            continue;
        }
        eps[root] = Some(true);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if eps[w].is_some() {
                    continue;
                }
                let x = if v < w { &g[v][w] } else { &g[w][v] };
                if x.is_zero() {
                    continue;
                }
                let ev = eps[v].expect("visited");
                // choose eps_w so that eps_v * eps_w * x > 0
                eps[w] = Some(ev == x.is_positive());
                queue.push_back(w);
            }
        }
    }
    let s: Vec<BigInt> = eps.iter().map(|e| if e.expect("assigned") { BigInt::one() } else { -BigInt::one() }).collect();
    (0..n).map(|i| (0..n).map(|j| &g[i][j] * &s[i] * &s[j]).collect()).collect()
}

pub fn sign_equivalent(a: &BigMatrix, b: &BigMatrix) -> bool {
    a.len() == b.len() && sign_canonical(a) == sign_canonical(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct BraidSearch {
    pub depth: usize,
    /// Shortest word found, in the generator convention of [`MutationSystem::apply_word`].
    pub word: Option<Vec<i32>>,
    /// Sign-classes of Gram matrices reached within `depth`.
    pub visited: usize,
    /// True when every word of length at most `depth` was explored.
    pub exhaustive: bool,
}

impl BraidSearch {
    pub fn found(&self) -> bool {
        self.word.is_some()
    }
}

/// Breadth-first search of the braid-group orbit of `start` (up to sign changes)
/// for a Gram matrix sign-equivalent to `target`.
pub fn braid_orbit_search(start: &BigMatrix, target: &BigMatrix, depth: usize) -> BraidSearch {
    let n = start.len();
    let goal = sign_canonical(target);
    let first = sign_canonical(start);
    if first == goal {
        return BraidSearch { depth, word: Some(Vec::new()), visited: 1, exhaustive: true };
    }
    let mut seen: HashSet<BigMatrix> = HashSet::from([first.clone()]);
    let mut frontier: Vec<(BigMatrix, Vec<i32>)> = vec![(first, Vec::new())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (g, word) in &frontier {
            for i in 0..n.saturating_sub(1) {
                for right in [true, false] {
                    let b = if right { right_mutation_matrix(g, i) } else { left_mutation_matrix(g, i) };
                    let h = sign_canonical(&congruence(g, &b));
                    if !seen.insert(h.clone()) {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(if right { i as i32 + 1 } else { -(i as i32 + 1) });
                    if h == goal {
                        return BraidSearch { depth, word: Some(w), visited: seen.len(), exhaustive: true };
                    }
                    next.push((h, w));
                }
            }
        }
        frontier = next;
    }
    BraidSearch { depth, word: None, visited: seen.len(), exhaustive: true }
}

/// The integer monodromy `T` with `χ(Tα, β) = χ(β, α)`: `T = G^{-T} G` in the basis of `G`.
pub fn monodromy_from_gram(g: &IntMatrix) -> Option<IntMatrix> {
    let gt = crate::exact::int_transpose(g);
    let inv = crate::exact::int_inverse(&gt)?;
    Some(crate::exact::int_matmul(&inv, g))
}

pub fn big_from_int(a: &IntMatrix) -> BigMatrix {
    to_big(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    fn p1_system() -> (Space, MutationSystem) {
        let s = Space::projective(1).unwrap();
        let sys = MutationSystem::from_basis(&s.tangent, &s.k_basis().unwrap(), None).unwrap();
        (s, sys)
    }

    #[test]
    fn p1_right_mutation() {
        let (s, sys) = p1_system();
        let m = sys.mutate_right(0).unwrap();
        assert_eq!(m.gram_i64().unwrap(), vec![vec![1, -2], vec![0, 1]]);
        assert_eq!(m.labels(), vec!["O(1)".to_string(), "O(0) - 2·O(1)".to_string()]);
        let classes = m.classes(&s.k_basis().unwrap()).unwrap();
        assert_eq!(classes[0].ch, s.line_bundle(&[1]).unwrap().ch);
        let expect = s.line_bundle(&[0]).unwrap().add(&s.line_bundle(&[1]).unwrap().scale(-2));
        assert_eq!(classes[1].ch, expect.ch);
        assert_eq!(m.mutate_left(0).unwrap().coords, sys.coords);
    }

    #[test]
    fn p2_orbit_contains_markov_neighbour() {
        let s = Space::projective(2).unwrap();
        let sys = MutationSystem::from_basis(&s.tangent, &s.k_basis().unwrap(), None).unwrap();
        let target = sys.apply_word(&[1, 2, -1]).unwrap().flip_sign(1);
        let r = braid_orbit_search(&sys.gram, &target.gram, 6);
        assert!(r.found());
        assert!(r.word.unwrap().len() <= 3);
    }

    #[test]
    fn sign_canonical_is_invariant() {
        let g = to_big(&vec![vec![1, 3, 6], vec![0, 1, 3], vec![0, 0, 1]]);
        let flipped = to_big(&vec![vec![1, -3, 6], vec![0, 1, -3], vec![0, 0, 1]]);
        assert!(sign_equivalent(&g, &flipped));
        let other = to_big(&vec![vec![1, 3, -6], vec![0, 1, 3], vec![0, 0, 1]]);
        assert!(!sign_equivalent(&g, &other));
    }

    #[test]
    fn monodromy_of_the_line() {
        assert_eq!(monodromy_from_gram(&vec![vec![1, 2], vec![0, 1]]).unwrap(), vec![vec![1, 2], vec![-2, -3]]);
    }

    #[test]
    fn bareiss_determinant() {
        let m = to_big(&vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        assert_eq!(big_det(&m), BigInt::from(18));
        let swap = to_big(&vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(big_det(&swap), BigInt::from(-1));
    }
}
