//! J-functions, fundamental solutions and Γ̂-framed flat sections for products of projective spaces.
//!
//! For `P^n` at `τ = c₁ log t`,
//! `J = Σ_d t^{(n+1)(d + p/z)} / Π_{k=1}^d (p + kz)^{n+1}`, and on a product the
//! J-function is the cup product of the factor series. The fundamental solution is
//! assembled from derivatives: with `s_a = (n_a+1) log t_a`, the column of the
//! monomial `Π p_a^{i_a}` is `Π (z∂_{s_a})^{i_a} J = L^{-1}(Π p_a^{i_a})`.

use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::charclasses::{euler_gram, gamma_class, two_pi_i_grading, KBasis, KClass};
use crate::cohomology::CohClass;
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::numerics::{branch_power, pi, CMatrix, Complex, PrecisionContext, ZPoint};
use crate::parallel::{self, Schedule};
use crate::space::Space;

/// Hard cap on the number of series terms per factor.
pub const MAX_TERMS: usize = 200_000;

/// Digits kept in reserve when deciding whether `|z|` is too small for series evaluation.
pub const SAFETY_DIGITS: u32 = 25;

/// Truncated polynomials in one nilpotent `p` with `p^{n+1} = 0`.
mod tpoly {
    use super::*;

    pub fn mul(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
        let n = a.len();
        let bits = a[0].prec();
        let mut out = vec![Complex::zero(bits); n];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(n - i) {
                out[i + j].add_mul(x, y);
            }
        }
        out
    }

    /// `exp(c p)`.
    pub fn exp_scaled(c: &Complex, len: usize) -> Vec<Complex> {
        let bits = c.prec();
        let mut out = Vec::with_capacity(len);
        let mut term = Complex::one(bits);
        for m in 0..len {
            if m > 0 {
                term = (&term * c).scale(&Float::with_val(bits, Float::with_val(bits, 1) / m as u32));
            }
            out.push(term.clone());
        }
        out
    }

    /// `(p + a)^{-1} = Σ_m (-1)^m p^m / a^{m+1}`.
    pub fn inv_linear(a: &Complex, len: usize) -> Vec<Complex> {
        let r = a.recip();
        let neg_r = -&r;
        let mut out = Vec::with_capacity(len);
        let mut term = r;
        for _ in 0..len {
            out.push(term.clone());
            term = &term * &neg_r;
        }
        out
    }

    /// `(a + p)^k`.
    pub fn pow_linear(a: &Complex, k: u32, len: usize) -> Vec<Complex> {
        let bits = a.prec();
        let mut out = vec![Complex::zero(bits); len];
        let mut binom = Float::with_val(bits, 1);
        for (m, slot) in out.iter_mut().enumerate() {
            if m as u32 > k {
                break;
            }
            *slot = a.powi(k - m as u32).scale(&binom);
            binom *= k - m as u32;
            binom /= m as u32 + 1;
        }
        out
    }

    pub fn pow(a: &[Complex], k: u32) -> Vec<Complex> {
        let bits = a[0].prec();
        let mut acc = vec![Complex::zero(bits); a.len()];
        acc[0] = Complex::one(bits);
        for _ in 0..k {
            acc = mul(&acc, a);
        }
        acc
    }

    pub fn norm1(a: &[Complex]) -> Float {
        let bits = a[0].prec();
        let mut s = Float::new(bits);
        for x in a {
            s += x.abs();
        }
        s
    }
}

/// Terms of one factor's series together with a rigorous ℓ¹ tail majorant.
struct FactorSeries {
    terms: Vec<Vec<Complex>>,
    /// `Σ_{d ≤ D} (d|z|+1)^k ‖term_d‖₁`, a majorant for every weighted partial sum.
    abs_sum: Float,
    tail: Float,
}

fn factor_series(n: u32, log_t: &Complex, z: &Complex, max_power: u32, tol: &Float) -> Result<FactorSeries> {
    let bits = z.prec();
    let len = n as usize + 1;
    let np1 = n + 1;
    let zinv = z.recip();
    let s = log_t.scale_i64(i64::from(np1));
    let es = s.exp();
    let es_abs = es.abs();
    let zabs = z.abs();
    let one = Float::with_val(bits, 1);

    let mut terms = vec![tpoly::exp_scaled(&(&s * &zinv), len)];
    // Partial sums of the weighted columns (z∂_s)^i J, i = 0..=max_power, for the stopping rule.
    let mut partial: Vec<Vec<Complex>> = (0..=max_power).map(|i| if i == 0 { terms[0].clone() } else { zero_poly(bits, len, i) }).collect();
    if max_power > 0 {
        // at d = 0 the weight is p^i
        for i in 1..=max_power {
            partial[i as usize] = tpoly::mul(&tpoly::pow_linear(&Complex::zero(bits), i, len), &terms[0]);
        }
    }
    let mut abs_sum = tpoly::norm1(&terms[0]);
    if n == 0 {
        // a point carries no Novikov variable
        return Ok(FactorSeries { terms, abs_sum, tail: Float::new(bits) });
    }
    let mut d = 0usize;
    loop {
        d += 1;
        if d > MAX_TERMS {
            return Err(Error::Truncation(format!("series for P^{n} did not reach the tail bound within {MAX_TERMS} terms")));
        }
        let dz = z.scale_i64(d as i64);
        let inv = tpoly::inv_linear(&dz, len);
        let mut next = tpoly::mul(&terms[d - 1], &tpoly::pow(&inv, np1));
        for x in next.iter_mut() {
            *x *= &es;
        }
        let weight_abs = Float::with_val(bits, Float::with_val(bits, &zabs * d as u32) + 1u32);
        let weight_k = Float::with_val(bits, (&weight_abs).pow(max_power));
        abs_sum += Float::with_val(bits, &weight_k * tpoly::norm1(&next));
        for i in 0..=max_power {
            let w = tpoly::pow_linear(&dz, i, len);
            let add = tpoly::mul(&w, &next);
            for (a, b) in partial[i as usize].iter_mut().zip(&add) {
                *a += b;
            }
        }
        terms.push(next);

        // ρ_{d+1} = Σ_{m ≤ n} ((d+1)|z|)^{-(m+1)}, r = |e^s| ρ^{n+1}, r' = r (1 + 1/d)^k
        let base = Float::with_val(bits, &zabs * (d as u32 + 1));
        let binv = Float::with_val(bits, &one / &base);
        let mut rho = Float::new(bits);
        let mut pw = binv.clone();
        for _ in 0..len {
            rho += &pw;
            pw *= &binv;
        }
        let r = Float::with_val(bits, &es_abs * Float::with_val(bits, (&rho).pow(np1)));
        let growth = Float::with_val(bits, Float::with_val(bits, &one + Float::with_val(bits, &one / d as u32)).pow(max_power));
        let rp = Float::with_val(bits, &r * &growth);
        if rp >= 0.5 {
            continue;
        }
        let tail = Float::with_val(bits, &weight_k * tpoly::norm1(&terms[d])) * Float::with_val(bits, &rp / Float::with_val(bits, &one - &rp));
        let min_norm = partial.iter().map(|p| tpoly::norm1(p)).fold(None::<Float>, |acc, x| match acc {
            Some(a) if a <= x => Some(a),
            _ => Some(x),
        });
        let min_norm = min_norm.expect("at least one column");
        if tail <= Float::with_val(bits, tol * &min_norm) {
            return Ok(FactorSeries { terms, abs_sum, tail });
        }
    }
}

fn zero_poly(bits: u32, len: usize, _i: u32) -> Vec<Complex> {
    vec![Complex::zero(bits); len]
}

/// Place a factor class into the product basis (other factors at their unit).
fn embed(dims: &[usize], which: usize, v: &[Complex]) -> CohClass {
    let bits = v[0].prec();
    let total: usize = dims.iter().product();
    let stride: usize = dims[which + 1..].iter().product();
    let mut coeffs = vec![Complex::zero(bits); total];
    for (k, c) in v.iter().enumerate() {
        coeffs[k * stride] = c.clone();
    }
    CohClass { coeffs }
}

/// Result of evaluating several derivative columns of `J` at one point.
#[derive(Clone, Debug)]
pub struct SeriesColumns {
    pub columns: Vec<CohClass>,
    pub terms: Vec<usize>,
    /// ℓ¹ majorant of the truncation error of every column.
    pub tail_bound: Float,
}

/// `Π_a (z∂_{s_a})^{e_a} J` for each requested exponent vector `e`.
pub fn series_columns(space: &Space, t: &ZPoint, z: &ZPoint, exps: &[Vec<u32>], ctx: &PrecisionContext) -> Result<SeriesColumns> {
    let bits = ctx.bits();
    let alg = space.algebra();
    let dims = space.factor_dims();
    let k = space.factors.len();
    if exps.iter().any(|e| e.len() != k) {
        return Err(Error::Domain("exponent vectors need one entry per factor".into()));
    }
    let log_t = t.log();
    let zv = z.value();
    let tol = ctx.series_tol();
    let series: Vec<FactorSeries> = (0..k)
        .map(|a| {
            let max_power = exps.iter().map(|e| e[a]).max().unwrap_or(0);
            factor_series(space.factors[a], &log_t, &zv, max_power, &tol)
        })
        .collect::<Result<_>>()?;

    // Product of factor majorants bounds the truncation of the multi-sum.
    let mut tail_bound = Float::new(bits);
    for a in 0..k {
        let mut prod = series[a].tail.clone();
        for (b, s) in series.iter().enumerate() {
            if b != a {
                prod *= Float::with_val(bits, &s.abs_sum + &s.tail);
            }
        }
        tail_bound += prod;
    }

    // Per-factor weights (d z + p)^e, embedded.
    let weights: Vec<Vec<Vec<CohClass>>> = (0..k)
        .map(|a| {
            let len = dims[a];
            (0..series[a].terms.len())
                .map(|d| {
                    exps.iter()
                        .map(|e| {
                            let dz = zv.scale_i64(d as i64);
                            embed(&dims, a, &tpoly::mul(&tpoly::pow_linear(&dz, e[a], len), &series[a].terms[d]))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let counts: Vec<usize> = series.iter().map(|s| s.terms.len()).collect();
    let total: usize = counts.iter().product();
    let mut columns = vec![CohClass::zero(bits, alg.dim()); exps.len()];
    let mut idx = vec![0usize; k];
    for _ in 0..total {
        for (c, col) in columns.iter_mut().enumerate() {
            let mut acc = weights[0][idx[0]][c].clone();
            for a in 1..k {
                acc = alg.cup_unchecked(&acc, &weights[a][idx[a]][c]);
            }
            *col = col.add(&acc);
        }
        for a in (0..k).rev() {
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(SeriesColumns { columns, terms: counts, tail_bound })
}

/// `J(c₁ log t, z)`.
pub fn j_function(space: &Space, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<(CohClass, SeriesColumns)> {
    let zero = vec![0u32; space.factors.len()];
    let mut out = series_columns(space, t, z, &[zero], ctx)?;
    let j = out.columns.remove(0);
    Ok((j, out))
}

#[derive(Clone, Debug, Serialize)]
pub struct QdeResidual {
    pub relative_residual: f64,
    pub terms: Vec<usize>,
    pub tail_bound: f64,
}

/// `max_a ‖(z∂_{s_a})^{n_a+1} J − q_a J‖ / ‖J‖`.
pub fn quantum_de_residual(space: &Space, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<QdeResidual> {
    let k = space.factors.len();
    let mut exps = vec![vec![0u32; k]];
    for a in 0..k {
        let mut e = vec![0u32; k];
        e[a] = space.factors[a] + 1;
        exps.push(e);
    }
    let sc = series_columns(space, t, z, &exps, ctx)?;
    let q = space.q_at(t);
    let j = &sc.columns[0];
    let jn = crate::numerics::matrix::vec_norm(&j.coeffs);
    let mut worst = Float::new(ctx.bits());
    for a in 0..k {
        let diff = sc.columns[a + 1].sub(&j.scale(&q[a]));
        let r = Float::with_val(ctx.bits(), crate::numerics::matrix::vec_norm(&diff.coeffs) / &jn);
        if r > worst {
            worst = r;
        }
    }
    Ok(QdeResidual { relative_residual: worst.to_f64(), terms: sc.terms, tail_bound: sc.tail_bound.to_f64() })
}

/// Decimal digits lost to cancellation when the series is evaluated at `|z|`.
pub fn cancellation_digits(space: &Space, t_abs: f64, z_abs: f64) -> f64 {
    2.0 * space.spectral_radius(t_abs) / (z_abs * std::f64::consts::LN_10)
}

/// Smallest `|z|` at which series evaluation keeps `SAFETY_DIGITS` at the given working precision.
pub fn z_floor(space: &Space, t_abs: f64, working_digits: u32) -> f64 {
    let avail = f64::from(working_digits.saturating_sub(SAFETY_DIGITS)).max(1.0);
    2.0 * space.spectral_radius(t_abs) / (avail * std::f64::consts::LN_10)
}

/// Requested digits needed so that evaluation at `|z|` is admitted and still carries `target` digits.
pub fn required_digits(space: &Space, t_abs: f64, z_abs: f64, target: u32) -> u32 {
    let cancel = cancellation_digits(space, t_abs, z_abs).ceil() as u32;
    let guard = crate::numerics::precision::GUARD_DIGITS;
    (cancel + SAFETY_DIGITS).saturating_sub(guard).max((cancel + target).saturating_sub(guard)).max(PrecisionContext::MIN_DIGITS)
}

/// `L(τ, z)` and the derivative matrix it inverts.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub t: ZPoint,
    pub z: ZPoint,
    /// Column `j` is `L^{-1} φ_j`.
    pub m: CMatrix,
    pub l: CMatrix,
    pub condition: Float,
    pub det: Complex,
    pub terms: Vec<usize>,
    pub tail_bound: Float,
}

pub fn fundamental_solution(space: &Space, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<FundamentalSolution> {
    let wd = ctx.working_digits();
    let floor = z_floor(space, t.abs.to_f64(), wd);
    if z.abs.to_f64() < floor {
        let need = required_digits(space, t.abs.to_f64(), z.abs.to_f64(), ctx.digits);
        return Err(Error::Precision(format!(
            "|z| = {:e} is below the series floor {:e} at {} digits; use at least {} digits or continue by ODE from a safe radius",
            z.abs.to_f64(),
            floor,
            ctx.digits,
            need
        )));
    }
    let exps: Vec<Vec<u32>> = (0..space.dim()).map(|j| space.multi_index(j).iter().map(|&i| i as u32).collect()).collect();
    let sc = series_columns(space, t, z, &exps, ctx)?;
    let cols: Vec<Vec<Complex>> = sc.columns.iter().map(|c| c.coeffs.clone()).collect();
    let m = CMatrix::from_columns(&cols);
    let lu = m.lu()?;
    let det = lu.det();
    let l = lu.solve_matrix(&CMatrix::identity(ctx.bits(), space.dim()));
    let condition = Float::with_val(ctx.bits(), m.norm1() * l.norm1());
    let log10_cond = Float::with_val(ctx.bits(), condition.log10_ref()).to_f64();
    if log10_cond > f64::from(wd) - 10.0 {
        return Err(Error::IllConditioned { log10_cond, advice: "move z away from 0 or raise the precision".into() });
    }
    Ok(FundamentalSolution { t: t.clone(), z: z.clone(), m, l, condition, det, terms: sc.terms, tail_bound: sc.tail_bound })
}

/// `(2π)^{-n/2} Γ̂ ∪ (2πi)^{deg/2} ch V`.
pub fn framing_vector(space: &Space, v: &KClass, bits: u32) -> CohClass {
    let alg = space.algebra();
    let g = gamma_class(&space.tangent, bits);
    let ch = two_pi_i_grading(alg, &CohClass::from_exact(bits, &v.ch));
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let n = space.dim_complex();
    let scale = Float::with_val(bits, (&two_pi).pow(-(n as i32))).sqrt();
    alg.cup_unchecked(&g, &ch).scale(&Complex::from_real(scale))
}

/// The flat frame `L z^{-μ} z^{c₁}` at one point.
#[derive(Clone, Debug)]
pub struct FlatFrame {
    pub solution: FundamentalSolution,
    pub frame: CMatrix,
}

impl FlatFrame {
    pub fn new(space: &Space, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<Self> {
        let bits = ctx.bits();
        let solution = fundamental_solution(space, t, z, ctx)?;
        let minus_mu = space.algebra().mu_matrix(bits).scale(&Complex::from_i64(bits, -1));
        let c1 = space.algebra().cup_matrix(&space.tangent.c1, bits);
        let frame = solution.l.matmul(&branch_power(z, &minus_mu)).matmul(&branch_power(z, &c1));
        Ok(Self { solution, frame })
    }

    pub fn section(&self, space: &Space, v: &KClass) -> CohClass {
        let bits = self.frame.prec();
        CohClass { coeffs: self.frame.mul_vec(&framing_vector(space, v, bits).coeffs) }
    }
}

pub fn framing_section(space: &Space, v: &KClass, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<CohClass> {
    Ok(FlatFrame::new(space, t, z, ctx)?.section(space, v))
}

/// `[s₁, s₂) = (s₁(e^{-πi} z), s₂(z))`, given `s₁` already evaluated at `e^{-πi} z`.
pub fn section_pairing(space: &Space, s1_rotated: &CohClass, s2: &CohClass) -> Complex {
    space.algebra().pair_unchecked(s1_rotated, s2)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingGramReport {
    pub space: String,
    pub labels: Vec<String>,
    pub raw: Vec<Vec<(String, String)>>,
    pub expected: IntMatrix,
    pub max_residual: f64,
    pub condition: f64,
}

/// Gram matrix `[s(E_i), s(E_j))` next to the Euler pairing `χ(E_i, E_j)`.
pub fn pairing_gram(space: &Space, basis: &KBasis, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<(CMatrix, PairingGramReport)> {
    let bits = ctx.bits();
    let points = [z.rotate_pi(-1), z.clone()];
    let frames = parallel::try_map(Schedule::default(), &points, |p| FlatFrame::new(space, t, p, ctx))?;
    let left: Vec<CohClass> = basis.elements.iter().map(|v| frames[0].section(space, v)).collect();
    let right: Vec<CohClass> = basis.elements.iter().map(|v| frames[1].section(space, v)).collect();
    let n = basis.len();
    let g = CMatrix::from_fn(n, n, |i, j| section_pairing(space, &left[i], &right[j]));
    let expected = euler_gram(&space.tangent, basis)?;
    let mut max = Float::new(bits);
    for i in 0..n {
        for j in 0..n {
            let d = (&g[(i, j)] - &Complex::from_i64(bits, expected[i][j])).abs();
            if d > max {
                max = d;
            }
        }
    }
    let cond = frames.iter().map(|f| f.solution.condition.to_f64()).fold(0.0, f64::max);
    let report = PairingGramReport {
        space: space.name.clone(),
        labels: basis.elements.iter().map(|e| e.label.clone()).collect(),
        raw: (0..n).map(|i| (0..n).map(|j| g[(i, j)].to_decimal_strings()).collect()).collect(),
        expected,
        max_residual: max.to_f64(),
        condition: cond,
    };
    Ok((g, report))
}

fn relative_difference(a: &CohClass, b: &CohClass) -> Float {
    let bits = a.prec();
    let na = crate::numerics::matrix::vec_norm(&a.coeffs);
    let nb = crate::numerics::matrix::vec_norm(&b.coeffs);
    let scale = if na > nb { na } else { nb };
    let d = crate::numerics::matrix::vec_norm(&a.sub(b).coeffs);
    if scale.is_zero() {
        d
    } else {
        Float::with_val(bits, d / scale)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyReport {
    pub space: String,
    pub bundle: String,
    /// `s(V)(e^{-2πi} z)` against `s(V ⊗ ω[n])(z)`.
    pub z_loop_residual: f64,
    /// `s(V)(τ − 2πi c₁(L))` against `s(V ⊗ L)`, when a balanced `L` exists.
    pub tau_shift_residual: Option<f64>,
    /// `(n+1)` z-loops against the matching `τ`-shift with sign `(-1)^{n(n+1)}`.
    pub composed_residual: Option<f64>,
}

/// Check the monodromy identities for `s(V)` at `(t, z)`; residuals are relative.
pub fn monodromy_check(space: &Space, v: &KClass, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<MonodromyReport> {
    let bits = ctx.bits();
    let base = FlatFrame::new(space, t, z, ctx)?;
    let looped = FlatFrame::new(space, t, &z.rotate_pi(-2), ctx)?;
    let lhs = looped.section(space, v);
    let rhs = base.section(space, &space.canonical_twist(v)?);
    let z_loop = relative_difference(&lhs, &rhs).to_f64();

    let (tau_shift, composed) = match space.balanced_line() {
        Ok((line, m)) => {
            // τ − 2πi c₁(L) = c₁ (log t − 2πi/m)
            let shift = Float::with_val(bits, pi(bits) * 2u32) / m;
            let t_shift = t.rotate(&Float::with_val(bits, -&shift));
            let lhs = framing_section(space, v, &t_shift, z, ctx)?;
            let rhs = base.section(space, &v.tensor(&line, space.algebra()));
            let tau = relative_difference(&lhs, &rhs).to_f64();

            // (n+1) loops of z equal the τ-shift by c₁(ω^{n+1}), i.e. log t ↦ log t + 2πi m, up to (−1)^{n m}
            let n = i64::from(space.dim_complex());
            let turns = i32::try_from(2 * m).expect("small");
            let lhs = framing_section(space, v, t, &z.rotate_pi(-turns), ctx)?;
            let t_back = t.rotate(&Float::with_val(bits, pi(bits) * (2 * m)));
            let mut rhs = framing_section(space, v, &t_back, z, ctx)?;
            if (n * i64::from(m)) % 2 == 1 {
                rhs = rhs.neg();
            }
            (Some(tau), Some(relative_difference(&lhs, &rhs).to_f64()))
        }
        Err(_) => (None, None),
    };
    Ok(MonodromyReport {
        space: space.name.clone(),
        bundle: v.label.clone(),
        z_loop_residual: z_loop,
        tau_shift_residual: tau_shift,
        composed_residual: composed,
    })
}

/// `‖L e^{σ/z} − id‖` with `σ = c₁ log t`; small when `|z|` is large and `|t|` small.
pub fn large_radius_deviation(space: &Space, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    let fs = fundamental_solution(space, t, z, ctx)?;
    let c1 = space.algebra().cup_matrix(&space.tangent.c1, bits);
    let e = c1.scale(&(&t.log() / &z.value())).exp();
    Ok(fs.l.matmul(&e).sub(&CMatrix::identity(bits, space.dim())).max_abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct LeveltReport {
    pub space: String,
    /// `‖(ad_μ − k) L_k − (E⋆) L_{k−1} + L_{k−1} c₁‖` for `k = 1..`.
    pub recursion_residuals: Vec<f64>,
    /// `#{(i, j) : μ_i − μ_j = k}`, the kernel dimension of `ad_μ − k`.
    pub ambiguity_dims: Vec<usize>,
    pub l0_deviation: f64,
}

/// Cross-check `L = Σ L_k z^{-k}` against the recursion
/// `(ad_μ − k) L_k = (E⋆) L_{k−1} − L_{k−1} c₁` using Cauchy sampling on `|z| = radius`.
pub fn levelt_check(space: &Space, t: &ZPoint, radius: f64, samples: usize, kmax: usize, ctx: &PrecisionContext) -> Result<LeveltReport> {
    let bits = ctx.bits();
    let dim = space.dim();
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let r = Float::with_val(bits, radius);
    let pts: Vec<ZPoint> = (0..samples).map(|j| ZPoint::new(r.clone(), Float::with_val(bits, &two_pi * j as u32) / samples as u32)).collect();
    let ls = parallel::try_map(Schedule::default(), &pts, |z| Ok(fundamental_solution(space, t, z, ctx)?.l))?;
    let coeff = |k: usize| -> CMatrix {
        let mut acc = CMatrix::zeros(bits, dim, dim);
        for (z, l) in pts.iter().zip(&ls) {
            let zk = z.value().powi(k as u32);
            acc = acc.add(&l.scale(&zk));
        }
        acc.scale(&Complex::from_real(Float::with_val(bits, Float::with_val(bits, 1) / samples as u32)))
    };
    let lk: Vec<CMatrix> = (0..=kmax).map(coeff).collect();
    let mu = space.algebra().mu_matrix(bits);
    let mu_vals = space.algebra().mu_values();
    let e = space.quantum.euler_matrix(&space.q_at(t))?;
    let c1 = space.algebra().cup_matrix(&space.tangent.c1, bits);
    let mut residuals = Vec::new();
    let mut ambiguity = Vec::new();
    for k in 1..=kmax {
        let lhs = mu.matmul(&lk[k]).sub(&lk[k].matmul(&mu)).sub(&lk[k].scale(&Complex::from_i64(bits, k as i64)));
        let rhs = e.matmul(&lk[k - 1]).sub(&lk[k - 1].matmul(&c1));
        residuals.push(lhs.sub(&rhs).max_abs().to_f64());
        let kr = crate::exact::rint(k as i64);
        ambiguity.push(mu_vals.iter().flat_map(|a| mu_vals.iter().map(move |b| a - b)).filter(|d| *d == kr).count());
    }
    let l0_deviation = lk[0].sub(&CMatrix::identity(bits, dim)).max_abs().to_f64();
    Ok(LeveltReport { space: space.name.clone(), recursion_residuals: residuals, ambiguity_dims: ambiguity, l0_deviation })
}

#[derive(Clone, Debug, Serialize)]
pub struct KunnethReport {
    pub product: String,
    pub bundles: (String, String),
    pub relative_residual: f64,
}

/// Compare `s_{X×Y}(V ⊠ W)` with `s_X(V) ⊗ s_Y(W)` at the same `(t, z)`.
pub fn kunneth_check(x: &Space, y: &Space, v: &KClass, w: &KClass, t: &ZPoint, z: &ZPoint, ctx: &PrecisionContext) -> Result<KunnethReport> {
    let factors: Vec<u32> = x.factors.iter().chain(&y.factors).copied().collect();
    let xy = Space::product(&factors)?;
    let dims = [x.dim(), y.dim()];
    let pv = crate::cohomology::embed_factor(&dims, 0, &v.ch);
    let pw = crate::cohomology::embed_factor(&dims, 1, &w.ch);
    let vw = KClass { label: format!("{} ⊠ {}", v.label, w.label), ch: xy.algebra().cup_exact(&pv, &pw) };
    let whole = framing_section(&xy, &vw, t, z, ctx)?;
    let sx = framing_section(x, v, t, z, ctx)?;
    let sy = framing_section(y, w, t, z, ctx)?;
    let mut kron = Vec::with_capacity(xy.dim());
    for a in &sx.coeffs {
        for b in &sy.coeffs {
            kron.push(a * b);
        }
    }
    let r = relative_difference(&whole, &CohClass { coeffs: kron });
    Ok(KunnethReport { product: xy.name.clone(), bundles: (v.label.clone(), w.label.clone()), relative_residual: r.to_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(50).unwrap()
    }

    fn zp(bits: u32, abs: f64, arg: f64) -> ZPoint {
        ZPoint::from_f64(bits, abs, arg)
    }

    #[test]
    fn degree_zero_term_only_for_tiny_t() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(2).unwrap();
        let t = zp(bits, 1e-30, 0.0);
        let z = zp(bits, 1.0, 0.0);
        let (j, _) = j_function(&s, &t, &z, &c).unwrap();
        // t^{3p/z} = Σ (3 log t)^m p^m / m!
        let l = t.log().scale_i64(3);
        let expect = [Complex::one(bits), l.clone(), (&l * &l).scale(&Float::with_val(bits, 0.5))];
        for (a, b) in j.coeffs.iter().zip(&expect) {
            assert!(Float::with_val(bits, (a - b).abs() / b.abs()) < 1e-45);
        }
    }

    #[test]
    fn bessel_value_on_the_line() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(1).unwrap();
        let (j, sc) = j_function(&s, &zp(bits, 1.0, 0.0), &zp(bits, 1.0, 0.0), &c).unwrap();
        // oracle: Σ 1/(d!)^2 summed directly
        let mut sum = Float::new(bits);
        let mut term = Float::with_val(bits, 1);
        for d in 0..80u32 {
            if d > 0 {
                term /= d * d;
            }
            sum += &term;
        }
        assert!(Float::with_val(bits, &j.coeffs[0].re - &sum).abs() < 1e-55);
        assert!(sc.tail_bound < 1e-50);
    }

    #[test]
    fn tail_bound_covers_doubling() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(2).unwrap();
        let t = zp(bits, 2.0, 0.3);
        let z = zp(bits, 0.8, -0.4);
        let (j, sc) = j_function(&s, &t, &z, &c).unwrap();
        let fine = PrecisionContext::new(50, 70, 55).unwrap();
        let (j2, _) = j_function(&s, &t, &z, &fine).unwrap();
        let diff: Float = j.coeffs.iter().zip(&j2.coeffs).map(|(a, b)| (a - b).abs()).fold(Float::new(bits), |a, b| a + b);
        assert!(diff <= Float::with_val(bits, &sc.tail_bound * 1.0001) + 1e-65, "{diff} vs {}", sc.tail_bound);
    }

    #[test]
    fn quantum_de_on_plane() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(2).unwrap();
        let r = quantum_de_residual(&s, &zp(bits, 2.0, 0.0), &zp(bits, 1.0, 0.0), &c).unwrap();
        assert!(r.relative_residual < 1e-40, "{r:?}");
    }

    #[test]
    fn line_pairing_gram() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(1).unwrap();
        let basis = s.k_basis().unwrap();
        let (_, rep) = pairing_gram(&s, &basis, &zp(bits, 1.0, 0.0), &zp(bits, 1.0, 0.0), &c).unwrap();
        assert_eq!(rep.expected, vec![vec![1, 2], vec![0, 1]]);
        assert!(rep.max_residual < 1e-40, "{rep:?}");
    }

    #[test]
    fn line_monodromy() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(1).unwrap();
        let o = s.line_bundle(&[0]).unwrap();
        let r = monodromy_check(&s, &o, &zp(bits, 1.0, 0.0), &zp(bits, 1.0, 0.0), &c).unwrap();
        assert!(r.z_loop_residual < 1e-40, "{r:?}");
        assert!(r.tau_shift_residual.unwrap() < 1e-40, "{r:?}");
        assert!(r.composed_residual.unwrap() < 1e-40, "{r:?}");
    }

    #[test]
    fn small_z_is_refused_with_digit_estimate() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(1).unwrap();
        match fundamental_solution(&s, &zp(bits, 1.0, 0.0), &zp(bits, 0.01, 0.0), &c) {
            Err(Error::Precision(msg)) => assert!(msg.contains("digits")),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn large_radius_regime() {
        let c = ctx();
        let bits = c.bits();
        for n in 1..=3 {
            let s = Space::projective(n).unwrap();
            let t = zp(bits, 1e-3, 0.0);
            let dev = large_radius_deviation(&s, &t, &zp(bits, 1e3, 0.0), &c).unwrap();
            assert!(dev < 10.0 * 1e-3f64.powi(n as i32 + 1), "P{n}: {dev}");
        }
    }

    #[test]
    fn levelt_recursion_agrees() {
        let c = ctx();
        let bits = c.bits();
        let s = Space::projective(1).unwrap();
        let r = levelt_check(&s, &zp(bits, 1.0, 0.0), 4.0, 48, 4, &c).unwrap();
        assert!(r.l0_deviation < 1e-20, "{r:?}");
        assert!(r.recursion_residuals.iter().all(|&x| x < 1e-15), "{r:?}");
        assert_eq!(r.ambiguity_dims[0], 1);
        assert_eq!(r.ambiguity_dims[1], 0);
    }
}
