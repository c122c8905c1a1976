//! Asymptotic flat bases at the irregular singular point `z = 0`, Stokes matrices,
//! mutations of exceptional bases and forward checks of the gluing data.
//!
//! Each asymptotic section `y_i ~ e^{-u_i/z} Ψ_i` is computed on a ray where it is
//! exponentially smaller than every other solution. There the formal series,
//! optimally truncated, pins it down to the ODE tolerance, and outward integration
//! damps all errors. The section is then continued along `|z| = 1` to the
//! reference direction `arg z = φ`.

pub mod gluing;
pub mod mutation;

use std::f64::consts::FRAC_PI_2;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::numerics::branch::BranchedValue;
use crate::numerics::matrix::vec_norm;
use crate::numerics::ode::integrate_columns;
use crate::numerics::{eigen_decompose, integrate_to, pi, CMatrix, Complex, FlatSystem, OdeOptions, PrecisionContext, ZPoint};
use crate::parallel::{self, Schedule};
use crate::quantum::{admissible_phase, order_by_phase, PhaseChoice, PhaseRecord};
use crate::space::Space;

pub use gluing::{identify_k_classes, sod_flat_sections, verify_rh_consistency, Identification, RhReport, SodReport};
pub use mutation::{braid_orbit_search, monodromy_from_gram, BraidSearch, MutationSystem};

/// Stokes computations need this many requested digits.
pub const MIN_STOKES_DIGITS: u32 = 40;

/// The quantum connection at a fixed parameter, as constant matrices.
#[derive(Clone, Debug)]
pub struct QdmPoint {
    pub label: String,
    /// `E ⋆` at the chosen parameter.
    pub euler: CMatrix,
    pub mu: CMatrix,
    pub pairing: CMatrix,
    /// Index of the degree-0 basis vector, used by the sign convention.
    pub unit: usize,
}

impl QdmPoint {
    pub fn at(space: &Space, t: &ZPoint, bits: u32) -> Result<Self> {
        let q = space.q_at(t);
        Ok(Self {
            label: format!("{} at |t|={}, arg t={}", space.name, t.abs.to_f64(), t.arg.to_f64()),
            euler: space.quantum.euler_matrix(&q)?,
            mu: space.algebra().mu_matrix(bits),
            pairing: space.algebra().pairing_matrix(bits),
            unit: space.algebra().unit,
        })
    }

    pub fn synthetic(label: impl Into<String>, euler: CMatrix, mu: CMatrix, pairing: CMatrix) -> Self {
        Self { label: label.into(), euler, mu, pairing, unit: 0 }
    }

    pub fn dim(&self) -> usize {
        self.euler.rows()
    }

    pub fn system(&self) -> FlatSystem {
        FlatSystem::new(self.euler.clone(), self.mu.clone())
    }

    /// `aᵀ P b` with the pairing matrix `P`.
    pub fn pair(&self, a: &[Complex], b: &[Complex]) -> Complex {
        let pb = self.pairing.mul_vec(b);
        let mut s = Complex::zero(self.euler.prec());
        for (x, y) in a.iter().zip(&pb) {
            s.add_mul(x, y);
        }
        s
    }
}

/// Normalized idempotent eigenvectors of `E ⋆`, ordered by phase.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    pub values: Vec<Complex>,
    /// `Ψ_i` with `(Ψ_i, Ψ_j) = δ_ij`.
    pub psi: Vec<Vec<Complex>>,
    /// `(Ψ_j, μ Ψ_k)`.
    pub mu_tilde: CMatrix,
    pub phase: PhaseChoice,
    pub max_residual: Float,
}

impl EigenFrame {
    /// Eigen-data at `point`; `phi = None` picks the phase automatically.
    pub fn new(point: &QdmPoint, phi: Option<&Float>) -> Result<Self> {
        let bits = point.euler.prec();
        let dec = eigen_decompose(&point.euler)?;
        if let Some(c) = dec.clusters.iter().find(|c| c.algebraic_multiplicity > 1) {
            return Err(Error::Unsupported(format!(
                "{}: eigenvalue {} has multiplicity {}; the asymptotic basis needs distinct eigenvalues",
                point.label,
                fmt_c(&c.value),
                c.algebraic_multiplicity
            )));
        }
        let raw: Vec<Complex> = dec.clusters.iter().map(|c| c.value.clone()).collect();
        let phase = admissible_phase(&raw, phi, bits).require()?;
        let order = order_by_phase(&raw, &phase.phi);
        let tiny = Float::with_val(bits, 1e-20);
        let mut values = Vec::new();
        let mut psi = Vec::new();
        for &k in &order {
            let v = &dec.clusters[k].vectors[0];
            let n2 = point.pair(v, v);
            if n2.abs() < tiny {
                return Err(Error::Unsupported(format!(
                    "{}: eigenvector for {} is isotropic, the point is not semisimple",
                    point.label,
                    fmt_c(&dec.clusters[k].value)
                )));
            }
            let s = n2.sqrt().recip();
            let mut w: Vec<Complex> = v.iter().map(|x| x * &s).collect();
            fix_sign(&mut w, point.unit);
            values.push(dec.clusters[k].value.clone());
            psi.push(w);
        }
        let n = values.len();
        let mu_tilde = CMatrix::from_fn(n, n, |j, k| point.pair(&psi[j], &point.mu.mul_vec(&psi[k])));
        Ok(Self { values, psi, mu_tilde, phase, max_residual: dec.max_residual() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficients `r_0 = e_i, r_1, …, r_kmax` of the formal solution in the `Ψ` basis.
    pub fn formal_series(&self, i: usize, kmax: usize) -> Vec<Vec<Complex>> {
        let n = self.len();
        let bits = self.mu_tilde.prec();
        let mut r0 = vec![Complex::zero(bits); n];
        r0[i] = Complex::one(bits);
        let mut out = vec![r0];
        let diff: Vec<Complex> = (0..n).map(|j| &self.values[j] - &self.values[i]).collect();
        for k in 1..=kmax {
            let prev = &out[k - 1];
            let mut w = self.mu_tilde.mul_vec(prev);
            let km1 = Complex::from_i64(bits, k as i64 - 1);
            for (x, p) in w.iter_mut().zip(prev) {
                x.add_mul(&km1, p);
            }
            let mut r: Vec<Complex> = (0..n).map(|j| if j == i { Complex::zero(bits) } else { &w[j] / &diff[j] }).collect();
            // fix the Ψ_i component so the next order is solvable
            let mut s = Complex::zero(bits);
            for (l, x) in r.iter().enumerate() {
                if l != i {
                    s.add_mul(&self.mu_tilde[(i, l)], x);
                }
            }
            let denom = &Complex::from_i64(bits, k as i64) + &self.mu_tilde[(i, i)];
            r[i] = -(&s / &denom);
            out.push(r);
        }
        out
    }

    fn to_cohomology(&self, coeffs: &[Complex]) -> Vec<Complex> {
        let bits = self.mu_tilde.prec();
        let dim = self.psi[0].len();
        let mut out = vec![Complex::zero(bits); dim];
        for (c, p) in coeffs.iter().zip(&self.psi) {
            for (o, x) in out.iter_mut().zip(p) {
                o.add_mul(c, x);
            }
        }
        out
    }
}

/// Degree-0 component real part positive, else the first component with a nonzero real part.
fn fix_sign(v: &mut [Complex], unit: usize) {
    let bits = v[0].prec();
    let tiny = Float::with_val(bits, 1e-30);
    let pick = |c: &Complex| if Float::with_val(bits, c.re.abs_ref()) > tiny { Some(c.re.is_sign_negative()) } else { None };
    let negative = pick(&v[unit])
        .or_else(|| v.iter().find_map(pick))
        .or_else(|| v.iter().find(|c| Float::with_val(bits, c.im.abs_ref()) > tiny).map(|c| c.im.is_sign_negative()))
        .unwrap_or(false);
    if negative {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
}

fn fmt_c(c: &Complex) -> String {
    let (a, b) = c.to_f64_pair();
    format!("{a:.6}{b:+.6}i")
}

/// Direction in the sector `|θ - φ| < π/2 + margin` where channel `i` is most recessive
/// relative to the others, with the relative gap `min_j Re((u_i - u_j) e^{-iθ}) / |u_i - u_j|`.
fn recessive_ray(values: &[(f64, f64)], i: usize, phi: f64, margin: f64) -> Option<(f64, f64)> {
    if values.len() == 1 {
        return Some((phi, 1.0));
    }
    let half = FRAC_PI_2 + 0.9 * margin.min(FRAC_PI_2);
    let samples = 3600;
    let mut best: Option<(f64, f64)> = None;
    for s in 0..=samples {
        let theta = phi - half + 2.0 * half * s as f64 / samples as f64;
        let (c, sn) = (theta.cos(), theta.sin());
        let gap = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(re, im))| {
                let (dr, di) = (values[i].0 - re, values[i].1 - im);
                (dr * c + di * sn) / dr.hypot(di)
            })
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(_, g)| gap > g) {
            best = Some((theta, gap));
        }
    }
    best.filter(|&(_, g)| g > 1e-3)
}

/// Largest radius (on a geometric grid below 1/2) where two consecutive formal terms fall
/// below `log10_tol`, scaled by `scale`; returns `(r, order, log10 of the next-term estimate)`.
fn matching_radius(log_norms: &[f64], log10_tol: f64, scale: f64) -> Option<(f64, usize, f64)> {
    let order_at = |r: f64| -> Option<(usize, f64)> {
        let lr = r.log10();
        let term = |k: usize| log_norms[k] + k as f64 * lr;
        (1..log_norms.len() - 1).find(|&k| term(k) <= log10_tol && term(k + 1) <= log10_tol).map(|k| (k - 1, term(k).max(term(k + 1))))
    };
    let mut r = 0.5;
    for _ in 0..120 {
        if order_at(r).is_some() {
            let rs = r * scale;
            return order_at(rs).map(|(m, e)| (rs, m, e));
        }
        r *= 0.9;
    }
    None
}

/// How a channel of an asymptotic basis was pinned down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pinning {
    /// Integrated from the formal solution along a ray where it is recessive.
    Ray,
    /// Transported from the opposite sector through the flat pairing.
    Duality,
}

/// One channel `y_i ~ e^{-u_i/z} Ψ_i` of an asymptotic basis.
#[derive(Clone, Debug)]
pub struct Channel {
    pub u: Complex,
    pub psi: Vec<Complex>,
    /// Direction of the ray used to pin down the section (the sector phase under duality).
    pub theta: Float,
    pub r_match: Float,
    /// Number of formal correction terms `R_1, …, R_m` used at `r_match`.
    pub order: usize,
    /// `log10` of the estimated size of the first omitted term.
    pub log10_next_term: f64,
    /// `R_0 = Ψ_i, R_1, …, R_m` in cohomology coordinates.
    pub formal: Vec<Vec<Complex>>,
    pub pinning: Pinning,
}

#[derive(Clone, Copy, Debug)]
pub struct BasisOptions {
    /// Multiplier applied to the automatically chosen matching radius (at most 1).
    pub r_match_scale: f64,
    pub schedule: Schedule,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self { r_match_scale: 1.0, schedule: Schedule::default() }
    }
}

/// The asymptotic basis `{y_i^φ}` with values stored at `z_ref = e^{iφ}`.
#[derive(Clone, Debug)]
pub struct AsymptoticBasis {
    pub label: String,
    pub phi: Float,
    pub margin: Float,
    pub channels: Vec<Channel>,
    pub z_ref: ZPoint,
    /// Column `i` is `y_i(z_ref)`.
    pub y_ref: CMatrix,
    pub error_estimate: Float,
    system: FlatSystem,
    opts: OdeOptions,
    schedule: Schedule,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelRecord {
    pub u: (String, String),
    pub psi: Vec<(String, String)>,
    pub theta: f64,
    pub r_match: f64,
    pub order: usize,
    pub log10_next_term: f64,
    pub pinning: Pinning,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticBasisRecord {
    pub label: String,
    pub phi: f64,
    pub margin: f64,
    pub sign_convention: String,
    pub channels: Vec<ChannelRecord>,
    pub error_estimate: f64,
}

pub const SIGN_CONVENTION: &str = "degree-0 component of Psi_i has positive real part, else the lowest-index component with nonzero real part";

impl AsymptoticBasis {
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn values(&self) -> Vec<Complex> {
        self.channels.iter().map(|c| c.u.clone()).collect()
    }

    /// `Y(z)` by continuation from `z_ref` along `|z| = |z_ref|` to `arg z`, then radially.
    pub fn evaluate(&self, z: &ZPoint) -> Result<CMatrix> {
        let mid = ZPoint::new(self.z_ref.abs.clone(), z.arg.clone());
        let (y_mid, _) = integrate_columns(&self.system, &self.y_ref, &self.z_ref, &mid, &self.opts, self.schedule)?;
        let (y, _) = integrate_columns(&self.system, &y_mid, &mid, z, &self.opts, self.schedule)?;
        Ok(y)
    }

    /// Truncated formal solution `e^{-u_i/z} Σ_{k ≤ m} R_k z^k` for channel `i`.
    pub fn formal_value(&self, i: usize, z: &ZPoint) -> Vec<Complex> {
        let ch = &self.channels[i];
        let zv = z.value();
        let mut acc = vec![Complex::zero(zv.prec()); ch.psi.len()];
        for r in ch.formal.iter().rev() {
            for (a, x) in acc.iter_mut().zip(r) {
                *a = &(&*a * &zv) + x;
            }
        }
        let e = (&-&ch.u / &zv).exp();
        acc.iter().map(|x| x * &e).collect()
    }

    /// `‖e^{u_i/z} y_i(z) - Ψ_i‖` for every channel.
    pub fn leading_deviation(&self, z: &ZPoint) -> Result<Vec<Float>> {
        let y = self.evaluate(z)?;
        let zv = z.value();
        Ok(self
            .channels
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                let e = (&ch.u / &zv).exp();
                let d: Vec<Complex> = y.column(i).iter().zip(&ch.psi).map(|(a, p)| &(a * &e) - p).collect();
                vec_norm(&d)
            })
            .collect())
    }

    pub fn record(&self) -> AsymptoticBasisRecord {
        AsymptoticBasisRecord {
            label: self.label.clone(),
            phi: self.phi.to_f64(),
            margin: self.margin.to_f64(),
            sign_convention: SIGN_CONVENTION.into(),
            channels: self
                .channels
                .iter()
                .map(|c| ChannelRecord {
                    u: c.u.to_decimal_strings(),
                    psi: c.psi.iter().map(Complex::to_decimal_strings).collect(),
                    theta: c.theta.to_f64(),
                    r_match: c.r_match.to_f64(),
                    order: c.order,
                    log10_next_term: c.log10_next_term,
                    pinning: c.pinning,
                })
                .collect(),
            error_estimate: self.error_estimate.to_f64(),
        }
    }

    pub fn phase_record(&self) -> PhaseRecord {
        PhaseRecord { phi: self.phi.to_f64(), margin: self.margin.to_f64(), admissible: true, forbidden: Vec::new() }
    }
}

fn require_digits(ctx: &PrecisionContext) -> Result<()> {
    if ctx.digits < MIN_STOKES_DIGITS {
        return Err(Error::Precision(format!("Stokes computations need at least {MIN_STOKES_DIGITS} digits, got {}", ctx.digits)));
    }
    Ok(())
}

/// Asymptotic basis at an admissible phase (chosen automatically when `phi` is `None`).
pub fn asymptotic_basis(point: &QdmPoint, phi: Option<&Float>, ctx: &PrecisionContext, opts: BasisOptions) -> Result<AsymptoticBasis> {
    let frame = EigenFrame::new(point, phi)?;
    let phi = frame.phase.phi.clone();
    basis_in_direction(point, &frame, &phi, ctx, opts)
}

/// Asymptotic basis for the sector around `phi`, reusing the eigen-data (and channel
/// order) of `frame`; `phi` must lie in the chamber of `frame.phase.phi` or its opposite.
///
/// A channel that is recessive nowhere in its sector cannot be integrated out of the formal
/// solution directly. The whole basis is then built for the opposite sector and transported
/// through the flat pairing, `Y^{φ}(e^{πi}z)ᵀ P Y^{φ-π}(z) = 1`.
pub fn basis_in_direction(point: &QdmPoint, frame: &EigenFrame, phi: &Float, ctx: &PrecisionContext, opts: BasisOptions) -> Result<AsymptoticBasis> {
    require_digits(ctx)?;
    if !(opts.r_match_scale > 0.0 && opts.r_match_scale <= 1.0) {
        return Err(Error::Domain("the matching-radius scale must lie in (0, 1]".into()));
    }
    let values_f: Vec<(f64, f64)> = frame.values.iter().map(Complex::to_f64_pair).collect();
    let margin_f = frame.phase.margin.to_f64();
    let blocked = |p: f64| (0..frame.len()).find(|&i| recessive_ray(&values_f, i, p, margin_f).is_none());
    let Some(i) = blocked(phi.to_f64()) else {
        return integrate_basis(point, frame, phi, ctx, opts);
    };
    let bits = ctx.bits();
    let back = Float::with_val(bits, phi - pi(bits));
    if blocked(back.to_f64()).is_some() {
        return Err(Error::Unsupported(format!(
            "{}: eigenvalue {} has no recessive direction inside the sector of phase {} nor in the opposite sector",
            point.label,
            fmt_c(&frame.values[i]),
            phi.to_f64()
        )));
    }
    let source = integrate_basis(point, frame, &back, ctx, opts)?;
    dual_basis(point, &source, phi)
}

/// Basis of the sector `source.phi + π` from the basis of `source.phi`.
fn dual_basis(point: &QdmPoint, source: &AsymptoticBasis, phi: &Float) -> Result<AsymptoticBasis> {
    let bits = source.y_ref.prec();
    let py = point.pairing.matmul(&source.y_ref);
    let y_ref = py.transpose().inverse()?;
    let cond = py.condition_number()?;
    let channels = source.channels.iter().map(|c| Channel { theta: phi.clone(), pinning: Pinning::Duality, ..c.clone() }).collect();
    Ok(AsymptoticBasis {
        label: source.label.clone(),
        phi: phi.clone(),
        margin: source.margin.clone(),
        channels,
        z_ref: ZPoint::new(Float::with_val(bits, 1), phi.clone()),
        y_ref,
        error_estimate: Float::with_val(bits, &source.error_estimate * &cond),
        system: source.system.clone(),
        opts: source.opts.clone(),
        schedule: source.schedule,
    })
}

fn integrate_basis(point: &QdmPoint, frame: &EigenFrame, phi: &Float, ctx: &PrecisionContext, opts: BasisOptions) -> Result<AsymptoticBasis> {
    let bits = ctx.bits();
    let system = point.system();
    let ode = OdeOptions::from_context(ctx);
    let log10_tol = -f64::from(ctx.ode_tol_exp);
    let kmax = (3.0 * f64::from(ctx.ode_tol_exp) * std::f64::consts::LN_10).ceil() as usize + 20;
    let values_f: Vec<(f64, f64)> = frame.values.iter().map(Complex::to_f64_pair).collect();
    let phi_f = phi.to_f64();
    let margin = frame.phase.margin.clone();
    let margin_f = margin.to_f64();
    let z_ref = ZPoint::new(Float::with_val(bits, 1), phi.clone());
    let idx: Vec<usize> = (0..frame.len()).collect();
    let results = parallel::try_map(opts.schedule, &idx, |&i| -> Result<(Channel, Vec<Complex>, Float)> {
        let (theta_f, _) = recessive_ray(&values_f, i, phi_f, margin_f).ok_or_else(|| {
            Error::Unsupported(format!(
                "{}: eigenvalue {} has no recessive direction inside the sector of phase {phi_f}",
                point.label,
                fmt_c(&frame.values[i])
            ))
        })?;
        let series = frame.formal_series(i, kmax);
        let log_norms: Vec<f64> = series
            .iter()
            .map(|r| {
                let n = vec_norm(r);
                if n.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    Float::with_val(bits, n.log10_ref()).to_f64()
                }
            })
            .collect();
        let (r_f, m, est) = matching_radius(&log_norms, log10_tol, opts.r_match_scale).ok_or_else(|| {
            let curve: Vec<String> = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
                .iter()
                .map(|&r: &f64| {
                    let best = (1..log_norms.len()).map(|k| log_norms[k] + k as f64 * r.log10()).fold(f64::INFINITY, f64::min);
                    format!("r={r}: 1e{best:.1}")
                })
                .collect();
            Error::Truncation(format!(
                "{}: no matching radius reaches 1e{log10_tol} for eigenvalue {} within {kmax} terms (least term by radius: {})",
                point.label,
                fmt_c(&frame.values[i]),
                curve.join(", ")
            ))
        })?;
        let theta = Float::with_val(bits, theta_f);
        let r_match = Float::with_val(bits, r_f);
        let z0 = ZPoint::new(r_match.clone(), theta.clone());
        let z0v = z0.value();
        let mut w = vec![Complex::zero(bits); frame.len()];
        for r in series[..=m].iter().rev() {
            for (a, x) in w.iter_mut().zip(r) {
                *a = &(&*a * &z0v) + x;
            }
        }
        let e = (&-&frame.values[i] / &z0v).exp();
        let y0: Vec<Complex> = frame.to_cohomology(&w).iter().map(|x| x * &e).collect();
        let on_ray = ZPoint::new(z_ref.abs.clone(), theta.clone());
        let leg1 = integrate_to(&system, &BranchedValue { value: y0, z: z0 }, &on_ray, &ode)?;
        let leg2 = integrate_to(&system, &leg1.end, &z_ref, &ode)?;
        let err = Float::with_val(bits, &leg1.error_estimate + &leg2.error_estimate);
        let formal = series[..=m].iter().map(|r| frame.to_cohomology(r)).collect();
        let channel = Channel {
            u: frame.values[i].clone(),
            psi: frame.psi[i].clone(),
            theta,
            r_match,
            order: m,
            log10_next_term: est,
            formal,
            pinning: Pinning::Ray,
        };
        Ok((channel, leg2.end.value, err))
    })?;
    let mut channels = Vec::new();
    let mut cols = Vec::new();
    let mut error_estimate = Float::new(bits);
    for (c, y, e) in results {
        channels.push(c);
        cols.push(y);
        if e > error_estimate {
            error_estimate = e;
        }
    }
    Ok(AsymptoticBasis {
        label: point.label.clone(),
        phi: phi.clone(),
        margin,
        channels,
        z_ref,
        y_ref: CMatrix::from_columns(&cols),
        error_estimate,
        system,
        opts: ode,
        schedule: opts.schedule,
    })
}

/// Bases for the sectors around `φ` and `φ + π` with a shared channel order.
#[derive(Clone, Debug)]
pub struct StokesPair {
    pub frame: EigenFrame,
    pub plus: AsymptoticBasis,
    pub minus: AsymptoticBasis,
}

pub fn stokes_pair(point: &QdmPoint, phi: Option<&Float>, ctx: &PrecisionContext, opts: BasisOptions) -> Result<StokesPair> {
    let frame = EigenFrame::new(point, phi)?;
    let bits = ctx.bits();
    let phi = frame.phase.phi.clone();
    let opposite = Float::with_val(bits, &phi + pi(bits));
    let plus = basis_in_direction(point, &frame, &phi, ctx, opts)?;
    let minus = basis_in_direction(point, &frame, &opposite, ctx, opts)?;
    Ok(StokesPair { frame, plus, minus })
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesReport {
    pub phi: f64,
    pub eigenvalues: Vec<(String, String)>,
    pub raw: Vec<Vec<(String, String)>>,
    pub integer: IntMatrix,
    pub max_integer_deviation: f64,
    /// Every entry within `1e-4` of an integer.
    pub integral: bool,
    pub unit_diagonal: bool,
    /// Largest entry below the diagonal in the phase order.
    pub max_below_diagonal: f64,
    pub upper_unitriangular: bool,
    pub warnings: Vec<String>,
}

/// `S` with `y_j^φ = Σ_i y_i^{φ+π} S_ij` at `arg z = φ + π/2`.
pub fn stokes_matrix(pair: &StokesPair) -> Result<(CMatrix, StokesReport)> {
    let plus = &pair.plus;
    let bits = plus.y_ref.prec();
    let half_pi = Float::with_val(bits, pi(bits) / 2u32);
    let z_star = ZPoint::new(Float::with_val(bits, 1), Float::with_val(bits, &plus.phi + &half_pi));
    let y_plus = plus.evaluate(&z_star)?;
    let y_minus = pair.minus.evaluate(&z_star)?;
    let s = y_minus.solve(&y_plus)?;
    let n = s.rows();
    let mut integer = vec![vec![0i64; n]; n];
    let mut max_dev = 0f64;
    let mut max_below = 0f64;
    for i in 0..n {
        for j in 0..n {
            let (k, d) = s[(i, j)].nearest_integer();
            integer[i][j] = k;
            max_dev = max_dev.max(d.to_f64());
            if i > j {
                max_below = max_below.max(s[(i, j)].abs().to_f64());
            }
        }
    }
    let integral = max_dev < 1e-4;
    let unit_diagonal = (0..n).all(|i| integer[i][i] == 1);
    let upper = integral && unit_diagonal && max_below < 1e-6;
    let mut warnings = Vec::new();
    if !integral {
        warnings.push(format!("Stokes entries are up to {max_dev:e} away from integers"));
    }
    let report = StokesReport {
        phi: plus.phi.to_f64(),
        eigenvalues: plus.channels.iter().map(|c| c.u.to_decimal_strings()).collect(),
        raw: (0..n).map(|i| (0..n).map(|j| s[(i, j)].to_decimal_strings()).collect()).collect(),
        integer,
        max_integer_deviation: max_dev,
        integral,
        unit_diagonal,
        max_below_diagonal: max_below,
        upper_unitriangular: upper,
        warnings,
    };
    Ok((s, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(40).unwrap()
    }

    fn p1_point(c: &PrecisionContext) -> (Space, QdmPoint) {
        let s = Space::projective(1).unwrap();
        let t = ZPoint::from_f64(c.bits(), 1.0, 0.0);
        let p = QdmPoint::at(&s, &t, c.bits()).unwrap();
        (s, p)
    }

    #[test]
    fn flat_system_carries_framing_sections() {
        let c = ctx();
        let bits = c.bits();
        let (s, p) = p1_point(&c);
        let t = ZPoint::from_f64(bits, 1.0, 0.0);
        let v = s.line_bundle(&[1]).unwrap();
        let z0 = ZPoint::from_f64(bits, 1.0, 0.3);
        let z1 = ZPoint::from_f64(bits, 1.7, -0.4);
        let s0 = crate::sections::framing_section(&s, &v, &t, &z0, &c).unwrap();
        let s1 = crate::sections::framing_section(&s, &v, &t, &z1, &c).unwrap();
        let out = integrate_to(&p.system(), &BranchedValue { value: s0.coeffs, z: z0 }, &z1, &OdeOptions::from_context(&c)).unwrap();
        let d: Vec<Complex> = out.end.value.iter().zip(&s1.coeffs).map(|(a, b)| a - b).collect();
        assert!(vec_norm(&d) < 1e-38, "{}", vec_norm(&d));
    }

    #[test]
    fn eigenframe_is_orthonormal() {
        let c = ctx();
        let (_, p) = p1_point(&c);
        let f = EigenFrame::new(&p, None).unwrap();
        assert!((f.phase.phi.to_f64() - FRAC_PI_2).abs() < 1e-12);
        for i in 0..2 {
            for j in 0..2 {
                let x = p.pair(&f.psi[i], &f.psi[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((x.re.to_f64() - expect).abs() < 1e-40 && x.im.to_f64().abs() < 1e-40);
            }
            assert!(f.mu_tilde[(i, i)].abs() < 1e-40);
        }
    }

    #[test]
    fn formal_series_solves_the_recursion() {
        let c = ctx();
        let (_, p) = p1_point(&c);
        let f = EigenFrame::new(&p, None).unwrap();
        let bits = c.bits();
        for i in 0..2 {
            let r: Vec<Vec<Complex>> = f.formal_series(i, 12).iter().map(|x| f.to_cohomology(x)).collect();
            for k in 1..r.len() {
                // (M - u) R_k = (μ + k - 1) R_{k-1}
                let lhs = vec_sub_c(&p.euler.mul_vec(&r[k]), &r[k].iter().map(|x| x * &f.values[i]).collect::<Vec<_>>());
                let mut rhs = p.mu.mul_vec(&r[k - 1]);
                for (a, b) in rhs.iter_mut().zip(&r[k - 1]) {
                    a.add_mul(&Complex::from_i64(bits, k as i64 - 1), b);
                }
                assert!(vec_norm(&vec_sub_c(&lhs, &rhs)) < 1e-35);
            }
        }
    }

    fn vec_sub_c(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    #[test]
    fn rank_one_is_a_pure_exponential() {
        let c = ctx();
        let bits = c.bits();
        let u = Complex::from_f64(bits, 1.5, -0.5);
        let p = QdmPoint::synthetic("rank one", CMatrix::diagonal(std::slice::from_ref(&u)), CMatrix::zeros(bits, 1, 1), CMatrix::identity(bits, 1));
        let b = asymptotic_basis(&p, None, &c, BasisOptions::default()).unwrap();
        let z = ZPoint::from_f64(bits, 0.8, 0.9);
        let y = b.evaluate(&z).unwrap();
        let exact = (&-&u / &z.value()).exp();
        assert!(Float::with_val(bits, (&y[(0, 0)] - &exact).abs() / exact.abs()) < 1e-40);
    }

    #[test]
    fn repeated_eigenvalues_are_refused() {
        let c = ctx();
        let s = Space::parse("P1xP1").unwrap();
        let p = QdmPoint::at(&s, &ZPoint::from_f64(c.bits(), 1.0, 0.0), c.bits()).unwrap();
        let e = EigenFrame::new(&p, None).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)), "{e}");
        assert!(e.to_string().contains("multiplicity 2"));
    }

    #[test]
    fn low_precision_is_refused() {
        let c = PrecisionContext::with_digits(35).unwrap();
        let (_, p) = p1_point(&c);
        assert!(matches!(asymptotic_basis(&p, None, &c, BasisOptions::default()), Err(Error::Precision(_))));
    }

    #[test]
    fn p1_stokes_matrix() {
        let c = ctx();
        let (_, p) = p1_point(&c);
        let pair = stokes_pair(&p, None, &c, BasisOptions::default()).unwrap();
        let (_, rep) = stokes_matrix(&pair).unwrap();
        assert!(rep.max_integer_deviation < 1e-20, "{rep:?}");
        assert!(rep.upper_unitriangular);
        assert_eq!(rep.integer[0][1].abs(), 2);
    }

    #[test]
    fn duality_reproduces_the_opposite_sector() {
        let c = ctx();
        let (_, p) = p1_point(&c);
        let pair = stokes_pair(&p, None, &c, BasisOptions::default()).unwrap();
        assert!(pair.minus.channels.iter().all(|ch| ch.pinning == Pinning::Ray));
        let dual = dual_basis(&p, &pair.plus, &pair.minus.phi).unwrap();
        let d = dual.y_ref.sub(&pair.minus.y_ref).max_abs().to_f64();
        assert!(d < 1e-40, "{d:e}");
    }
}
