//! K-class identification of asymptotic sections, semiorthogonality of the
//! flat-section decomposition and forward checks of the gluing equations.

use num_bigint::BigInt;
use rug::Float;
use serde::Serialize;

use super::mutation::{monodromy_from_gram, row_label};
use super::{stokes_pair, AsymptoticBasis, BasisOptions, QdmPoint, StokesPair};
use crate::charclasses::{euler_gram, KBasis, KClass};
use crate::error::{Error, Result};
use crate::exact::{self, IntMatrix, Rat};
use crate::numerics::{branch_power, pi, CMatrix, Complex, PrecisionContext, ZPoint};
use crate::sections::{framing_vector, FlatFrame};
use crate::space::Space;

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.sub(b).norm();
    let s = b.norm();
    if s.is_zero() {
        d.to_f64()
    } else {
        Float::with_val(d.prec(), &d / &s).to_f64()
    }
}

/// `"O(0) - 2·O(1)"` style label for an integer combination.
pub fn combination_label(labels: &[String], coeffs: &[i64]) -> String {
    let row: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
    row_label(labels, &row)
}

/// Columns `(2π)^{-n/2} Γ̂ (2πi)^{deg/2} ch(E_k)` for a K-basis.
fn framing_matrix(space: &Space, basis: &KBasis, bits: u32) -> CMatrix {
    let cols: Vec<Vec<Complex>> = basis.elements.iter().map(|e| framing_vector(space, e, bits).coeffs).collect();
    CMatrix::from_columns(&cols)
}

#[derive(Clone, Debug, Serialize)]
pub struct Identification {
    pub phi: f64,
    pub reference: Vec<String>,
    /// Row `i`: complex coordinates of `y_i` in the reference framing basis.
    pub raw: Vec<Vec<(String, String)>>,
    pub coefficients: IntMatrix,
    pub labels: Vec<String>,
    pub samples: usize,
    /// Largest distance of a raw coordinate to the nearest integer.
    pub rounding_residual: f64,
    /// Relative residual of the least-squares fit.
    pub fit_residual: f64,
    /// Relative residual of the overdetermined system with the rounded coordinates.
    pub integer_residual: f64,
    pub conclusive: bool,
    pub gram: Option<IntMatrix>,
    pub self_chi: Vec<i64>,
    /// The identified classes form a basis of the K-lattice.
    pub unimodular_span: bool,
    #[serde(skip)]
    pub classes: Vec<KClass>,
}

/// Fit `y_i^φ(z) = s(E_i)(z)` over `2N` points of the sector and round the coordinates.
pub fn identify_k_classes(space: &Space, t: &ZPoint, basis: &AsymptoticBasis, reference: &KBasis, ctx: &PrecisionContext) -> Result<Identification> {
    let bits = ctx.bits();
    let n = basis.len();
    if reference.len() != n {
        return Err(Error::Domain(format!("reference K-basis has rank {} but the asymptotic basis has {n} sections", reference.len())));
    }
    let v = framing_matrix(space, reference, bits);
    let samples = 2 * n.max(1);
    let spread = basis.margin.to_f64().min(1.0);
    let mut a = CMatrix::zeros(bits, samples * n, n);
    let mut b = CMatrix::zeros(bits, samples * n, n);
    for s in 0..samples {
        let f = if samples > 1 { s as f64 / (samples - 1) as f64 } else { 0.5 };
        let z = ZPoint::new(Float::with_val(bits, 0.8 + 0.5 * f), Float::with_val(bits, &basis.phi + spread * (f - 0.5)));
        let fv = FlatFrame::new(space, t, &z, ctx)?.frame.matmul(&v);
        let y = basis.evaluate(&z)?;
        for r in 0..n {
            for c in 0..n {
                a[(s * n + r, c)] = fv[(r, c)].clone();
                b[(s * n + r, c)] = y[(r, c)].clone();
            }
        }
    }
    let coef = a.least_squares(&b)?;
    let fit_residual = rel_diff(&a.matmul(&coef), &b);
    let mut rounding = 0f64;
    let mut coefficients = vec![vec![0i64; n]; n];
    let mut rounded = CMatrix::zeros(bits, n, n);
    for i in 0..n {
        for k in 0..n {
            let (m, d) = coef[(k, i)].nearest_integer();
            coefficients[i][k] = m;
            rounded[(k, i)] = Complex::from_i64(bits, m);
            rounding = rounding.max(d.to_f64());
        }
    }
    let integer_residual = rel_diff(&a.matmul(&rounded), &b);
    let conclusive = rounding < 1e-4 && integer_residual < 1e-6;
    let ref_labels: Vec<String> = reference.elements.iter().map(|e| e.label.clone()).collect();
    let labels: Vec<String> = coefficients.iter().map(|c| combination_label(&ref_labels, c)).collect();
    let classes: Vec<KClass> = coefficients
        .iter()
        .zip(&labels)
        .map(|(c, l)| {
            let mut k = reference.combine(c);
            k.label = l.clone();
            k
        })
        .collect();
    let (gram, self_chi, unimodular_span) = if conclusive {
        let g = euler_gram(&space.tangent, &KBasis { elements: classes.clone() })?;
        let d = exact::int_det(&coefficients);
        let diag = (0..n).map(|i| g[i][i]).collect();
        (Some(g), diag, d == 1.into() || d == (-1).into())
    } else {
        (None, Vec::new(), false)
    };
    Ok(Identification {
        phi: basis.phi.to_f64(),
        reference: ref_labels,
        raw: (0..n).map(|i| (0..n).map(|k| coef[(k, i)].to_decimal_strings()).collect()).collect(),
        coefficients,
        labels,
        samples,
        rounding_residual: rounding,
        fit_residual,
        integer_residual,
        conclusive,
        gram,
        self_chi,
        unimodular_span,
        classes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SodPiece {
    pub channel: usize,
    pub eigenvalue: (String, String),
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingCheck {
    /// Channel with the smaller `Im(e^{-iφ} u)`.
    pub later: usize,
    pub earlier: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SodReport {
    pub phi: f64,
    pub pieces: Vec<SodPiece>,
    /// `[y_i, y_j)` at `arg z = φ + π/2`.
    pub pairing: Vec<Vec<(String, String)>>,
    pub vanishing: Vec<VanishingCheck>,
    pub max_vanishing: f64,
    pub tolerance: f64,
    pub semiorthogonal: bool,
    /// Whether the identified classes span the K-lattice (when an identification is given).
    pub lattice_decomposition: Option<bool>,
}

/// Group the asymptotic sections by eigenvalue and check `[V_u, V_u') = 0` for later `u`.
pub fn sod_flat_sections(point: &QdmPoint, basis: &AsymptoticBasis, identification: Option<&Identification>) -> Result<SodReport> {
    let bits = basis.y_ref.prec();
    let n = basis.len();
    let half_pi = Float::with_val(bits, pi(bits) / 2u32);
    let one = Float::with_val(bits, 1);
    let z = ZPoint::new(one.clone(), Float::with_val(bits, &basis.phi + &half_pi));
    let z_rot = ZPoint::new(one, Float::with_val(bits, &basis.phi - &half_pi));
    let y = basis.evaluate(&z)?;
    let y_rot = basis.evaluate(&z_rot)?;
    let m = CMatrix::from_fn(n, n, |i, j| point.pair(&y_rot.column(i), &y.column(j)));
    let mut vanishing = Vec::new();
    let mut max_v = 0f64;
    for i in 0..n {
        for j in 0..i {
            let v = m[(i, j)].abs().to_f64();
            max_v = max_v.max(v);
            vanishing.push(VanishingCheck { later: i, earlier: j, value: v });
        }
    }
    let tolerance = 1e-8;
    Ok(SodReport {
        phi: basis.phi.to_f64(),
        pieces: basis.channels.iter().enumerate().map(|(i, c)| SodPiece { channel: i, eigenvalue: c.u.to_decimal_strings(), rank: 1 }).collect(),
        pairing: (0..n).map(|i| (0..n).map(|j| m[(i, j)].to_decimal_strings()).collect()).collect(),
        vanishing,
        max_vanishing: max_v,
        tolerance,
        semiorthogonal: max_v < tolerance,
        lattice_decomposition: identification.map(|id| id.conclusive && id.unimodular_span),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingSample {
    pub equation: String,
    pub region: String,
    pub abs_z: f64,
    pub arg_z: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RhReport {
    pub space: String,
    pub t: (f64, f64),
    pub phi: f64,
    pub margin: f64,
    pub classes: Vec<String>,
    pub gram: IntMatrix,
    /// Matrix of `S^+` in the basis `E_i` and its dual: `χ(E_i, E_j)`.
    pub s_plus: IntMatrix,
    /// Matrix of `S^-`: `χ(E_j, E_i)`.
    pub s_minus: IntMatrix,
    /// `(S^-)^{-1} S^+`.
    pub t_from_chi: IntMatrix,
    /// The K-matrix of `V ↦ V ⊗ ω^{-1}[-n]` on the identified classes.
    pub t_from_twist: IntMatrix,
    pub t_matches_twist: bool,
    /// `T^{-1}` is the K-matrix of `V ↦ V ⊗ ω[n]`.
    pub t_inverse_is_canonical_twist: bool,
    pub samples: Vec<GluingSample>,
    pub max_residual_sector: f64,
    pub max_residual_d_plus: f64,
    pub max_residual_d_minus: f64,
    /// `Y(e^{2πi} z)` by continuation against `Y(z) T`.
    pub ode_loop_residual: f64,
    /// Monodromy of the `z^{-μ} z^{c₁}` framing in K-coordinates against `T`.
    pub framing_loop_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

fn int_to_c(a: &IntMatrix, bits: u32) -> CMatrix {
    CMatrix::from_fn(a.len(), a.len(), |i, j| Complex::from_i64(bits, a[i][j]))
}

/// Forward check of the gluing equations over the sector, `D^+` and `D^-`.
pub fn verify_rh_consistency(
    space: &Space,
    t: &ZPoint,
    phi: Option<&Float>,
    samples: usize,
    ctx: &PrecisionContext,
    opts: BasisOptions,
) -> Result<RhReport> {
    let bits = ctx.bits();
    if samples == 0 {
        return Err(Error::Domain("at least one sample point is required".into()));
    }
    let point = QdmPoint::at(space, t, bits)?;
    let pair: StokesPair = stokes_pair(&point, phi, ctx, opts)?;
    let reference = space.k_basis()?;
    let id = identify_k_classes(space, t, &pair.plus, &reference, ctx)?;
    if !id.conclusive {
        return Err(Error::Domain(format!(
            "K-class identification is inconclusive (rounding residual {:e}, fit residual {:e})",
            id.rounding_residual, id.fit_residual
        )));
    }
    let n = pair.plus.len();
    let gram = id.gram.clone().expect("conclusive identification carries a Gram matrix");
    let s_plus = gram.clone();
    let s_minus = exact::int_transpose(&gram);
    let t_chi = monodromy_from_gram(&gram).ok_or_else(|| Error::Singular("the Gram matrix is not unimodular".into()))?;

    // the twist V ↦ V ⊗ ω^{-1}[-n] expressed in the identified basis
    let alg = space.algebra();
    let dimc = i64::from(space.dim_complex());
    let omega_inv = KClass::line_bundle(alg, "ω^-1", &space.tangent.c1)?;
    let e_basis = KBasis { elements: id.classes.clone() };
    let coords = |ch: &[Rat]| e_basis.integer_coordinates(ch).ok_or_else(|| Error::Domain("twisted class leaves the identified lattice".into()));
    let mut t_twist = vec![vec![0i64; n]; n];
    let mut t_canon = vec![vec![0i64; n]; n];
    for j in 0..n {
        let up = coords(&id.classes[j].tensor(&omega_inv, alg).shift(-dimc).ch)?;
        let down = coords(&space.canonical_twist(&id.classes[j])?.ch)?;
        for i in 0..n {
            t_twist[i][j] = up[i];
            t_canon[i][j] = down[i];
        }
    }
    let t_matches_twist = t_twist == t_chi;
    let t_inverse_is_canonical_twist = exact::int_matmul(&t_chi, &t_canon) == exact::int_identity(n);

    let v_e = framing_matrix(space, &e_basis, bits);
    let mut out = Vec::new();
    let push = |out: &mut Vec<GluingSample>, eq: &str, region: &str, z: &ZPoint, r: f64| {
        out.push(GluingSample { equation: eq.into(), region: region.into(), abs_z: z.abs.to_f64(), arg_z: z.arg.to_f64(), residual: r });
    };
    let phi_f = pair.plus.phi.clone();
    let margin = pair.plus.margin.to_f64().min(std::f64::consts::FRAC_PI_2);
    let frac = |k: usize| if samples > 1 { k as f64 / (samples - 1) as f64 } else { 0.5 };
    let radius = |k: usize| Float::with_val(bits, 0.6 + 0.9 * ((3 * k) % samples) as f64 / samples as f64);
    let half_pi = Float::with_val(bits, pi(bits) / 2u32);
    let two_pi = Float::with_val(bits, pi(bits) * 2u32);
    let g_plus = int_to_c(&s_plus, bits);
    let g_minus = int_to_c(&s_minus, bits);

    // Y_+ Ψ e^{-U/z} = Y_∞ Ψ_∞ over the sector
    for k in 0..samples {
        let off = (-0.8 + 1.6 * frac(k)) * (std::f64::consts::FRAC_PI_2 + 0.5 * margin);
        let z = ZPoint::new(radius(k), Float::with_val(bits, &phi_f + off));
        let y = pair.plus.evaluate(&z)?;
        let rhs = FlatFrame::new(space, t, &z, ctx)?.frame.matmul(&v_e);
        push(&mut out, "Y_+ Psi e^{-U/z} = Y_inf Psi_inf", "I", &z, rel_diff(&y, &rhs));
    }
    // Y_- Ψ_- e^{-U/z} S^± = Y_+ Ψ e^{-U/z} over D^±
    for (region, sign, g) in [("D+", 1i32, &g_plus), ("D-", -1, &g_minus)] {
        for k in 0..samples {
            let off = (-0.8 + 1.6 * frac(k)) * margin;
            let centre = Float::with_val(bits, &phi_f + Float::with_val(bits, &half_pi * sign));
            let z = ZPoint::new(radius(k), Float::with_val(bits, &centre + off));
            let y_plus = pair.plus.evaluate(&z)?;
            // the same point seen from the opposite sector
            let z_minus = if sign > 0 { z.clone() } else { z.rotate(&two_pi) };
            let y_minus = pair.minus.evaluate(&z_minus)?;
            push(&mut out, "Y_- Psi_- e^{-U/z} S = Y_+ Psi e^{-U/z}", region, &z, rel_diff(&y_minus.matmul(g), &y_plus));
        }
    }
    let t_c = int_to_c(&t_chi, bits);
    let z_ref = pair.plus.z_ref.clone();
    let y_loop = pair.plus.evaluate(&z_ref.rotate(&two_pi))?;
    let ode_loop_residual = rel_diff(&y_loop, &pair.plus.y_ref.matmul(&t_c));
    let minus_mu = alg.mu_matrix(bits).scale(&Complex::from_i64(bits, -1));
    let c1 = alg.cup_matrix(&space.tangent.c1, bits);
    let frame_at = |z: &ZPoint| branch_power(z, &minus_mu).matmul(&branch_power(z, &c1));
    let loop_k = v_e.solve(&frame_at(&z_ref).solve(&frame_at(&z_ref.rotate(&two_pi)).matmul(&v_e))?)?;
    let framing_loop_residual = rel_diff(&loop_k, &t_c);

    let tolerance = 1e-8;
    let max_of = |r: &str| out.iter().filter(|s| s.region == r).map(|s| s.residual).fold(0f64, f64::max);
    let (ms, mp, mm) = (max_of("I"), max_of("D+"), max_of("D-"));
    let mut failures = Vec::new();
    for s in &out {
        if !(s.residual < tolerance) {
            failures.push(format!("{} on {} at |z|={:.4}, arg z={:.4}: residual {:e}", s.equation, s.region, s.abs_z, s.arg_z, s.residual));
        }
    }
    if !t_matches_twist {
        failures.push("T from the Euler form differs from the twist by the inverse canonical bundle".into());
    }
    if !(ode_loop_residual < tolerance) {
        failures.push(format!("loop monodromy of the asymptotic basis differs from T by {ode_loop_residual:e}"));
    }
    if !(framing_loop_residual < tolerance) {
        failures.push(format!("framing monodromy differs from T by {framing_loop_residual:e}"));
    }
    Ok(RhReport {
        space: space.name.clone(),
        t: (t.abs.to_f64(), t.arg.to_f64()),
        phi: phi_f.to_f64(),
        margin: pair.plus.margin.to_f64(),
        classes: id.labels.clone(),
        gram,
        s_plus,
        s_minus,
        t_from_chi: t_chi,
        t_from_twist: t_twist,
        t_matches_twist,
        t_inverse_is_canonical_twist,
        samples: out,
        max_residual_sector: ms,
        max_residual_d_plus: mp,
        max_residual_d_minus: mm,
        ode_loop_residual,
        framing_loop_residual,
        tolerance,
        passed: failures.is_empty(),
        failures,
    })
}
