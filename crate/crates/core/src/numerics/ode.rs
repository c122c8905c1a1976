//! Taylor-series integrator for `z^2 s' = (M - mu z) s`.
//!
//! The equation has an irregular pole at `z = 0`, so steps are taken along a
//! log-linear path `z(σ) = exp(w0 + σ (w1 - w0))` with step lengths proportional
//! to `|z|`. Each step expands the solution in a Taylor series about the current
//! point (coefficients by an exact recurrence) and evaluates it at the next path
//! point, which keeps the argument of `z` tracked continuously as `Im w`.

use rug::ops::Pow;
use rug::Float;

use super::branch::{BranchedValue, ZPoint};
use super::complex::Complex;
use super::matrix::{vec_norm, CMatrix};
use super::precision::PrecisionContext;
use crate::error::{Error, Result};
use crate::parallel::{self, Schedule};

/// The flat-section system `(z d/dz) s = (M / z - mu) s` with constant `M`, `mu`.
#[derive(Clone, Debug)]
pub struct FlatSystem {
    pub m: CMatrix,
    pub mu: CMatrix,
}

impl FlatSystem {
    pub fn new(m: CMatrix, mu: CMatrix) -> Self {
        assert!(m.is_square() && mu.is_square() && m.rows() == mu.rows());
        Self { m, mu }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// Residual of the equation at `z` given `s` and `ds/dz`.
    pub fn residual(&self, z: &Complex, s: &[Complex], ds: &[Complex]) -> Vec<Complex> {
        let z2 = z * z;
        let ms = self.m.mul_vec(s);
        let mus = self.mu.mul_vec(s);
        (0..s.len()).map(|i| &(&(&z2 * &ds[i]) - &ms[i]) + &(z * &mus[i])).collect()
    }
}

/// A radial segment `z = r e^{i phase}` for `r` between `r_from` and `r_to`.
#[derive(Clone, Debug)]
pub struct Ray {
    pub phase: Float,
    pub r_from: Float,
    pub r_to: Float,
}

#[derive(Clone, Debug)]
pub struct OdeOutcome {
    pub end: BranchedValue,
    /// Sampled points along the path including both endpoints, when requested.
    pub path: Vec<BranchedValue>,
    /// Sum of the per-step relative truncation estimates.
    pub error_estimate: Float,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub tol: Float,
    pub max_steps: usize,
    pub record_path: bool,
}

impl OdeOptions {
    pub fn from_context(ctx: &PrecisionContext) -> Self {
        Self { tol: ctx.ode_tol(), max_steps: 200_000, record_path: false }
    }
}

fn taylor_order(tol: &Float) -> usize {
    let d = -tol.to_f64().log10();
    (1.66 * d.max(8.0)).ceil() as usize + 4
}

fn failure(reason: impl Into<String>, s: &[Complex], z: &ZPoint) -> Error {
    Error::Integration {
        reason: reason.into(),
        abs_z: z.abs.to_f64(),
        arg_z: z.arg.to_f64(),
        last_value: s.iter().map(Complex::to_decimal_strings).collect(),
    }
}

fn taylor_coefficients(sys: &FlatSystem, z0: &Complex, s: &[Complex], order: usize) -> Vec<Vec<Complex>> {
    let bits = z0.prec();
    let n = s.len();
    let b = sys.m.sub(&sys.mu.scale(z0));
    let inv_z2 = (z0 * z0).recip();
    let mut coeffs: Vec<Vec<Complex>> = Vec::with_capacity(order + 1);
    coeffs.push(s.to_vec());
    for k in 0..order {
        let ak = &coeffs[k];
        let mut next = b.mul_vec(ak);
        let two_k_z0 = z0.scale_i64(2 * k as i64);
        for i in 0..n {
            let t = &two_k_z0 * &ak[i];
            next[i] -= &t;
        }
        if k >= 1 {
            let prev = &coeffs[k - 1];
            let mu_prev = sys.mu.mul_vec(prev);
            let km1 = Float::with_val(bits, k as i64 - 1);
            for i in 0..n {
                next[i] -= &mu_prev[i];
                let t = prev[i].scale(&km1);
                next[i] -= &t;
            }
        }
        let f = inv_z2.scale(&Float::with_val(bits, Float::with_val(bits, 1u32) / (k as u32 + 1)));
        for x in next.iter_mut() {
            *x *= &f;
        }
        coeffs.push(next);
    }
    coeffs
}

fn horner(coeffs: &[Vec<Complex>], h: &Complex) -> Vec<Complex> {
    let n = coeffs[0].len();
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for c in coeffs[..coeffs.len() - 1].iter().rev() {
        for i in 0..n {
            acc[i] = &(&acc[i] * h) + &c[i];
        }
    }
    acc
}

/// Integrate along the log-linear path from `init.z` to `target`.
pub fn integrate_to(sys: &FlatSystem, init: &BranchedValue, target: &ZPoint, opts: &OdeOptions) -> Result<OdeOutcome> {
    let bits = init.z.prec();
    let w0 = init.z.log();
    let w1 = target.log();
    let dw = &w1 - &w0;
    let dw_abs = dw.abs();
    let order = taylor_order(&opts.tol);
    let mut s = init.value.clone();
    let mut sigma = Float::new(bits);
    let mut zp = init.z.clone();
    let mut err = Float::new(bits);
    let mut steps = 0usize;
    let mut path = Vec::new();
    if opts.record_path {
        path.push(init.clone());
    }
    if dw_abs.is_zero() {
        return Ok(OdeOutcome { end: init.clone(), path, error_estimate: err, steps });
    }
    let one = Float::with_val(bits, 1);
    while sigma < one {
        if steps >= opts.max_steps {
            return Err(failure(format!("step budget of {} exhausted", opts.max_steps), &s, &zp));
        }
        let z0 = zp.value();
        let coeffs = taylor_coefficients(sys, &z0, &s, order);
        let a0 = vec_norm(&s);
        if a0.is_zero() {
            // the zero solution stays zero
            let end = BranchedValue { value: s.clone(), z: target.clone() };
            if opts.record_path {
                path.push(end.clone());
            }
            return Ok(OdeOutcome { end, path, error_estimate: err, steps });
        }
        let cap = Float::with_val(bits, &zp.abs * 0.5);
        let mut hmax = cap.clone();
        for k in [order - 1, order] {
            let ak = vec_norm(&coeffs[k]);
            if ak.is_zero() {
                continue;
            }
            let ratio = Float::with_val(bits, &opts.tol * &a0) / ak;
            let hk = Float::with_val(bits, ratio.ln_ref()) / k as u32;
            let hk = hk.exp();
            if hk < hmax {
                hmax = hk;
            }
        }
        if hmax < Float::with_val(bits, &zp.abs * 1e-40) {
            return Err(failure("step size underflow", &s, &zp));
        }
        let mut dsigma = Float::with_val(bits, &hmax / Float::with_val(bits, &zp.abs * &dw_abs));
        let (z1p, h) = loop {
            let next_sigma = {
                let t = Float::with_val(bits, &sigma + &dsigma);
                if t > one {
                    one.clone()
                } else {
                    t
                }
            };
            let w = &w0 + &dw.scale(&next_sigma);
            let z1p = if next_sigma == one { target.clone() } else { ZPoint::new(Float::with_val(bits, w.re.exp_ref()), w.im.clone()) };
            let h = &z1p.value() - &z0;
            if h.abs() <= Float::with_val(bits, &hmax * 1.05) {
                sigma = next_sigma;
                break (z1p, h);
            }
            dsigma *= 0.8;
        };
        let s1 = horner(&coeffs, &h);
        let habs = h.abs();
        let tail = {
            let t1 = vec_norm(&coeffs[order - 1]) * Float::with_val(bits, (&habs).pow((order - 1) as u32));
            let t2 = vec_norm(&coeffs[order]) * Float::with_val(bits, (&habs).pow(order as u32));
            Float::with_val(bits, &t1 + &t2)
        };
        let n1 = vec_norm(&s1);
        if !n1.is_finite() {
            return Err(failure("non-finite solution value", &s, &zp));
        }
        err += Float::with_val(bits, tail / n1);
        s = s1;
        zp = z1p;
        steps += 1;
        if opts.record_path {
            path.push(BranchedValue { value: s.clone(), z: zp.clone() });
        }
    }
    Ok(OdeOutcome { end: BranchedValue { value: s, z: zp }, path, error_estimate: err, steps })
}

/// Integrate along a ray `z = r e^{i phase}`; the initial value lives at `r_from`.
pub fn ode_integrate(sys: &FlatSystem, ray: &Ray, init: &[Complex], opts: &OdeOptions) -> Result<OdeOutcome> {
    if ray.r_from <= 0 || ray.r_to <= 0 {
        return Err(Error::Domain("ray radii must be positive".into()));
    }
    let start = BranchedValue { value: init.to_vec(), z: ZPoint::new(ray.r_from.clone(), ray.phase.clone()) };
    let target = ZPoint::new(ray.r_to.clone(), ray.phase.clone());
    integrate_to(sys, &start, &target, opts)
}

/// Transport every column of `init` from `from` to `to`; columns run independently.
pub fn integrate_columns(
    sys: &FlatSystem,
    init: &CMatrix,
    from: &ZPoint,
    to: &ZPoint,
    opts: &OdeOptions,
    schedule: Schedule,
) -> Result<(CMatrix, Float)> {
    let cols: Vec<usize> = (0..init.cols()).collect();
    let results = parallel::try_map(schedule, &cols, |&c| {
        let start = BranchedValue { value: init.column(c), z: from.clone() };
        integrate_to(sys, &start, to, opts)
    })?;
    let mut out = CMatrix::zeros(init.prec(), init.rows(), init.cols());
    let mut err = Float::new(init.prec());
    for (c, r) in results.into_iter().enumerate() {
        out.set_column(c, &r.end.value);
        if r.error_estimate > err {
            err = r.error_estimate;
        }
    }
    Ok((out, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::branch::branch_power;

    fn ctx() -> PrecisionContext {
        PrecisionContext::with_digits(40).unwrap()
    }

    fn rank_one(bits: u32, u: Complex) -> FlatSystem {
        FlatSystem::new(CMatrix::diagonal(&[u]), CMatrix::zeros(bits, 1, 1))
    }

    #[test]
    fn rank_one_exponential() {
        let c = ctx();
        let bits = c.bits();
        let u = Complex::from_f64(bits, 2.0, 0.5);
        let sys = rank_one(bits, u.clone());
        let phase = Float::with_val(bits, 0.4);
        let z_from = ZPoint::new(Float::with_val(bits, 0.2), phase.clone());
        let init = vec![(&-&u / &z_from.value()).exp()];
        let ray = Ray { phase: phase.clone(), r_from: Float::with_val(bits, 0.2), r_to: Float::with_val(bits, 3.0) };
        let out = ode_integrate(&sys, &ray, &init, &OdeOptions::from_context(&c)).unwrap();
        let exact = (&-&u / &ZPoint::new(Float::with_val(bits, 3.0), phase).value()).exp();
        let rel = Float::with_val(bits, (&out.end.value[0] - &exact).abs() / exact.abs());
        assert!(rel < 1e-40, "relative error {rel}");
        assert!(out.error_estimate < 1e-38);
    }

    #[test]
    fn euler_equation_matches_branch_power() {
        let c = ctx();
        let bits = c.bits();
        let mu = CMatrix::diagonal(&[Complex::from_f64(bits, -0.5, 0.0), Complex::from_f64(bits, 1.5, 0.0)]);
        let sys = FlatSystem::new(CMatrix::zeros(bits, 2, 2), mu.clone());
        let z0 = ZPoint::from_f64(bits, 1.0, 0.0);
        // full turn around the origin: arg goes from 0 to 2 pi
        let z1 = ZPoint::new(Float::with_val(bits, 1.0), Float::with_val(bits, crate::numerics::complex::pi(bits) * 2u32));
        let init = vec![Complex::one(bits), Complex::one(bits)];
        let out = integrate_to(&sys, &BranchedValue { value: init.clone(), z: z0 }, &z1, &OdeOptions::from_context(&c)).unwrap();
        let expect = branch_power(&z1, &mu.scale(&Complex::from_i64(bits, -1))).mul_vec(&init);
        for i in 0..2 {
            assert!((&out.end.value[i] - &expect[i]).abs() < 1e-40);
        }
        assert_eq!(out.end.z.arg, z1.arg);
    }

    #[test]
    fn stiff_request_reports_last_point() {
        let c = ctx();
        let bits = c.bits();
        let sys = rank_one(bits, Complex::from_f64(bits, 1.0, 0.0));
        let ray = Ray { phase: Float::new(bits), r_from: Float::with_val(bits, 1.0), r_to: Float::with_val(bits, 1e-3) };
        let opts = OdeOptions { max_steps: 5, ..OdeOptions::from_context(&c) };
        match ode_integrate(&sys, &ray, &[Complex::one(bits)], &opts) {
            Err(Error::Integration { last_value, abs_z, .. }) => {
                assert_eq!(last_value.len(), 1);
                assert!(abs_z < 1.0);
            }
            other => panic!("expected integration failure, got {other:?}"),
        }
    }
}
