//! Exact rational and integer linear algebra.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;
pub type RatMatrix = Vec<Vec<Rat>>;
pub type IntMatrix = Vec<Vec<i64>>;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zeros(n: usize, m: usize) -> RatMatrix {
    vec![vec![Rat::zero(); m]; n]
}

pub fn identity(n: usize) -> RatMatrix {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    a
}

pub fn matmul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &RatMatrix, v: &[Rat]) -> Vec<Rat> {
    a.iter().map(|row| row.iter().zip(v).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()).collect()
}

/// Row-reduce; returns (reduced matrix, pivot columns).
fn rref(a: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn null_space(a: &RatMatrix) -> Vec<Vec<Rat>> {
    let cols = a.first().map_or(0, Vec::len);
    let (m, pivots) = rref(a);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        out.push(v);
    }
    out
}

pub fn rank(a: &RatMatrix) -> usize {
    rref(a).1.len()
}

pub fn inverse(a: &RatMatrix) -> Option<RatMatrix> {
    let n = a.len();
    let aug: RatMatrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let (m, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(a: &RatMatrix) -> Rat {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Rat::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            let pivot_row = m[c].clone();
            for (x, y) in m[i].iter_mut().zip(&pivot_row).skip(c) {
                *x -= &f * y;
            }
        }
    }
    d
}

/// Solve `a x = b` exactly; `None` when singular.
pub fn solve(a: &RatMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    inverse(a).map(|inv| mat_vec(&inv, b))
}

pub fn to_integer(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

pub fn int_to_rat(a: &IntMatrix) -> RatMatrix {
    a.iter().map(|row| row.iter().map(|&x| rint(x)).collect()).collect()
}

/// Integer determinant by the Bareiss fraction-free elimination.
pub fn int_det(a: &IntMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else { return BigInt::zero() };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

pub fn int_matmul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0i64; m]; n];
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn int_transpose(a: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn int_identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

/// Inverse of a unimodular integer matrix.
pub fn int_inverse(a: &IntMatrix) -> Option<IntMatrix> {
    let inv = inverse(&int_to_rat(a))?;
    inv.iter().map(|row| row.iter().map(to_integer).collect::<Option<Vec<_>>>()).collect()
}

pub fn is_unimodular(a: &IntMatrix) -> bool {
    int_det(a).abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse_agree() {
        let a = vec![vec![rint(2), rint(1), rint(0)], vec![rint(1), rint(3), rint(1)], vec![rint(0), rint(1), rint(4)]];
        let d = det(&a);
        assert_eq!(d, rint(18));
        let inv = inverse(&a).unwrap();
        assert_eq!(matmul(&a, &inv), identity(3));
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = vec![vec![rint(1), rint(2)], vec![rint(2), rint(4)]];
        let ns = null_space(&a);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&a, &ns[0]).iter().all(Zero::is_zero));
        assert!(inverse(&a).is_none());
    }

    #[test]
    fn bareiss_matches_rational_det() {
        let a: IntMatrix = vec![vec![1, 3, 6], vec![0, 1, 3], vec![0, 0, 1]];
        assert_eq!(int_det(&a), BigInt::one());
        let b: IntMatrix = vec![vec![0, 2, 1], vec![3, 1, 4], vec![5, 9, 2]];
        assert_eq!(Rat::from_integer(int_det(&b)), det(&int_to_rat(&b)));
        assert!(int_inverse(&a).is_some());
    }
}
