//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Criteria run concurrently on their own threads; each one returns a short
//! measurement string on success and an explanation on failure.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use gammaflow::birational::{assemble_blowup, check_sod_lattice, orlov_sod, BlowupPreset};
use gammaflow::charclasses::{check_gamma_ahat, euler_gram, euler_pairing};
use gammaflow::conjectures::{asymptotic_fit, gamma1_flat_form_test, gamma1_limit_test};
use gammaflow::numerics::ZPoint;
use gammaflow::parallel::Schedule;
use gammaflow::sections::{kunneth_check, monodromy_check, pairing_gram, quantum_de_residual};
use gammaflow::space::Space;
use gammaflow::stokes::mutation::{big_from_int, sign_equivalent};
use gammaflow::stokes::{
    braid_orbit_search, identify_k_classes, stokes_matrix, stokes_pair, verify_rh_consistency, BasisOptions, MutationSystem, QdmPoint,
};
use gammaflow::PrecisionContext;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ctx() -> PrecisionContext {
    PrecisionContext::with_digits(50).unwrap()
}

fn zp(c: &PrecisionContext, abs: f64, arg: f64) -> ZPoint {
    ZPoint::from_f64(c.bits(), abs, arg)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn space(name: &str) -> Result<Space, String> {
    Space::parse(name).map_err(|e| e.to_string())
}

fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn binomial_gram(n: i64) -> Vec<Vec<i64>> {
    (0..=n).map(|i| (0..=n).map(|j| binomial(n + j - i, n)).collect()).collect()
}

fn gamma_ahat() -> Outcome {
    let c = ctx();
    let mut worst = 0f64;
    for name in ["P1", "P2", "P3", "P1xP1"] {
        let r = check_gamma_ahat(&space(name)?.tangent, &c);
        ensure(r.max_residual < 1e-40, || format!("{name}: residual {:e}", r.max_residual))?;
        worst = worst.max(r.max_residual);
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn hrr_integrality() -> Outcome {
    let c = ctx();
    let mut worst = 0f64;
    for n in 1..=3u32 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        let basis = s.k_basis().map_err(|e| e.to_string())?;
        let expected = binomial_gram(i64::from(n));
        let exact = euler_gram(&s.tangent, &basis).map_err(|e| e.to_string())?;
        ensure(exact == expected, || format!("P{n}: exact Gram {exact:?}"))?;
        for (i, v) in basis.elements.iter().enumerate() {
            for (j, w) in basis.elements.iter().enumerate() {
                let x = euler_pairing(&s.tangent, v, w, &c);
                ensure(x.integer == expected[i][j] && x.distance < 1e-40, || format!("P{n} ({i},{j}): {x:?}"))?;
                worst = worst.max(x.distance);
            }
        }
    }
    Ok(format!("binomial Grams exact, pre-rounding error {worst:.1e}"))
}

fn pairing_identity() -> Outcome {
    let c = ctx();
    let mut worst = 0f64;
    for n in 1..=2 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        let basis = s.k_basis().map_err(|e| e.to_string())?;
        for (t, z) in [(zp(&c, 1.0, 0.0), zp(&c, 1.0, 0.0)), (zp(&c, 2.0, 0.0), zp(&c, 1.0, PI / 5.0))] {
            let (_, r) = pairing_gram(&s, &basis, &t, &z, &c).map_err(|e| e.to_string())?;
            ensure(r.expected == binomial_gram(i64::from(n)), || format!("P{n}: HRR Gram {:?}", r.expected))?;
            ensure(r.max_residual < 1e-30, || format!("P{n}: residual {:e}", r.max_residual))?;
            worst = worst.max(r.max_residual);
        }
    }
    Ok(format!("max deviation from χ {worst:.1e}"))
}

fn monodromy() -> Outcome {
    let c = ctx();
    let mut worst = 0f64;
    for n in 1..=2u32 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        for k in [0, 1] {
            let v = s.line_bundle(&[k]).map_err(|e| e.to_string())?;
            let r = monodromy_check(&s, &v, &zp(&c, 1.0, 0.0), &zp(&c, 1.0, 0.4), &c).map_err(|e| e.to_string())?;
            let tau = r.tau_shift_residual.ok_or("τ-shift identity not evaluated")?;
            ensure(r.z_loop_residual < 1e-25 && tau < 1e-25, || format!("P{n} O({k}): {r:?}"))?;
            worst = worst.max(r.z_loop_residual).max(tau);
        }
    }
    Ok(format!("z-loop and τ-shift residuals ≤ {worst:.1e}"))
}

fn quantum_de() -> Outcome {
    let c = ctx();
    let grid = [
        (0.5, 1.0, 0.0, 0.0),
        (1.0, 1.0, 0.3, -0.2),
        (2.0, 0.7, 0.0, 0.5),
        (3.0, 1.5, -0.4, 0.1),
        (5.0, 2.0, 0.0, 0.0),
        (0.2, 0.4, 1.0, 0.0),
        (1.5, 3.0, 0.0, -1.0),
        (4.0, 0.9, 0.2, 0.2),
        (0.8, 2.5, -1.2, 0.7),
        (2.5, 1.2, 0.6, -0.6),
    ];
    let mut worst = 0f64;
    for n in 1..=3 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        for &(t, z, ta, za) in &grid {
            let r = quantum_de_residual(&s, &zp(&c, t, ta), &zp(&c, z, za), &c).map_err(|e| e.to_string())?;
            ensure(r.relative_residual < 1e-35, || format!("P{n} t={t} z={z}: {:e}", r.relative_residual))?;
            worst = worst.max(r.relative_residual);
        }
    }
    Ok(format!("10 points on P1..P3, max relative residual {worst:.1e}"))
}

fn gamma1_limit() -> Outcome {
    let mut alphas = Vec::new();
    let mut in_band = true;
    for n in 1..=3 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        let t = gamma1_limit_test(&s, &[25.0, 50.0, 100.0, 200.0], &ctx(), 1000, Schedule::Parallel).map_err(|e| e.to_string())?;
        ensure(t.strictly_decreasing, || format!("P{n}: distances not strictly decreasing"))?;
        alphas.push(format!("P{n} α={:.1} κ={:.2}", t.alpha, t.exp_rate));
        in_band &= (0.8..=1.2).contains(&t.alpha);
    }
    ensure(in_band, || format!("strictly decreasing, but the decay is exponential rather than O(1/t): {}", alphas.join(", ")))?;
    Ok(alphas.join(", "))
}

fn gamma1_flat_form() -> Outcome {
    let s = space("P1")?;
    let r = gamma1_flat_form_test(&s, &[0.1, 0.05, 0.02, 0.01, 0.005], &ctx(), 1000).map_err(|e| e.to_string())?;
    ensure(r.final_angle < 1e-3, || format!("angle {:e} at the smallest z", r.final_angle))?;
    ensure(r.min_anti_angle > 1e-1, || format!("O(1) anti-test angle {:e}", r.min_anti_angle))?;
    Ok(format!("angle {:.2e} at z=0.005, O(1) stays at ≥ {:.2}", r.final_angle, r.min_anti_angle))
}

fn growth_fit() -> Outcome {
    let grid: Vec<f64> = (0..9).map(|k| 20.0 + 5.0 * f64::from(k)).collect();
    let mut out = Vec::new();
    for n in 1..=2 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        let f = asymptotic_fit(&s, &grid, &ctx(), Schedule::Parallel).map_err(|e| e.to_string())?;
        ensure(f.relative_t_error < 0.01 && f.relative_exponent_error < 0.1, || format!("P{n}: {f:?}"))?;
        out.push(format!("P{n} T={:.4} exponent={:.3}", f.fitted_t, f.fitted_exponent));
    }
    Ok(out.join(", "))
}

fn stokes_identification() -> Outcome {
    let c = ctx();
    let mut out = Vec::new();
    for n in 1..=2u32 {
        let s = Space::projective(n).map_err(|e| e.to_string())?;
        let t = zp(&c, 1.0, 0.0);
        let reference = s.k_basis().map_err(|e| e.to_string())?;
        let binomial = big_from_int(&binomial_gram(i64::from(n)));
        let p = QdmPoint::at(&s, &t, c.bits()).map_err(|e| e.to_string())?;
        let pair = stokes_pair(&p, None, &c, BasisOptions::default()).map_err(|e| e.to_string())?;
        let (_, rep) = stokes_matrix(&pair).map_err(|e| e.to_string())?;
        ensure(rep.max_integer_deviation < 1e-6 && rep.upper_unitriangular, || format!("P{n}: {rep:?}"))?;
        let found = braid_orbit_search(&big_from_int(&rep.integer), &binomial, 6);
        let word = found.word.clone().ok_or_else(|| format!("P{n}: no braid word of length ≤ 6 reaches the χ Gram"))?;
        let id = identify_k_classes(&s, &t, &pair.plus, &reference, &c).map_err(|e| e.to_string())?;
        ensure(id.conclusive && id.self_chi.iter().all(|&x| x == 1), || format!("P{n}: {id:?}"))?;
        ensure(id.gram.as_ref() == Some(&rep.integer), || format!("P{n}: identified Gram differs from the Stokes matrix"))?;
        let sys = MutationSystem::from_coordinates(&s.tangent, &reference, &id.coefficients, None).map_err(|e| e.to_string())?;
        let moved = sys.apply_word(&word).map_err(|e| e.to_string())?;
        ensure(sign_equivalent(&moved.gram, &binomial), || format!("P{n}: mutated classes miss the χ Gram"))?;
        out.push(format!("P{n} deviation {:.1e} word {word:?}", rep.max_integer_deviation));
    }
    Ok(out.join(", "))
}

fn rh_forward() -> Outcome {
    let c = ctx();
    let s = space("P1")?;
    let r = verify_rh_consistency(&s, &zp(&c, 1.0, 0.0), None, 10, &c, BasisOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.passed, || r.failures.join("; "))?;
    let worst = [r.max_residual_sector, r.max_residual_d_plus, r.max_residual_d_minus].into_iter().fold(0f64, f64::max);
    ensure(worst < 1e-8, || format!("residual {worst:e}"))?;
    Ok(format!("10 samples, max gluing residual {worst:.1e}"))
}

fn blowup_lattice() -> Outcome {
    let d = assemble_blowup(BlowupPreset::F1).map_err(|e| e.to_string())?;
    let r = check_sod_lattice(&d, &orlov_sod(&d).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    ensure(r.passed && failed.is_empty() && r.checks.len() == 3, || failed.join("; "))?;
    ensure(r.determinant == "1" || r.determinant == "-1", || format!("det {}", r.determinant))?;
    Ok(format!("F1 Gram det {}, isometry and semiorthogonality exact", r.determinant))
}

fn kunneth() -> Outcome {
    let c = ctx();
    let p1 = space("P1")?;
    let mut worst = 0f64;
    for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 2)] {
        let v = p1.line_bundle(&[a]).map_err(|e| e.to_string())?;
        let w = p1.line_bundle(&[b]).map_err(|e| e.to_string())?;
        let r = kunneth_check(&p1, &p1, &v, &w, &zp(&c, 1.0, 0.0), &zp(&c, 1.3, 0.5), &c).map_err(|e| e.to_string())?;
        ensure(r.relative_residual < 1e-25, || format!("O({a})⊠O({b}): {:e}", r.relative_residual))?;
        worst = worst.max(r.relative_residual);
    }
    Ok(format!("max relative residual {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("Gamma-Ahat identity", gamma_ahat),
        ("HRR integrality", hrr_integrality),
        ("pairing equals Euler form", pairing_identity),
        ("monodromy identities", monodromy),
        ("quantum differential equation", quantum_de),
        ("Gamma conjecture I, limit form", gamma1_limit),
        ("Gamma conjecture I, flat form", gamma1_flat_form),
        ("asymptotic growth fit", growth_fit),
        ("Stokes matrix and K-class identification", stokes_identification),
        ("Riemann-Hilbert gluing", rh_forward),
        ("blowup lattice", blowup_lattice),
        ("Kunneth naturality", kunneth),
    ];
    // panics are reported per criterion, not through the default hook
    std::panic::set_hook(Box::new(|_| {}));
    let results: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                scope.spawn(move || {
                    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
                        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                        Err(format!("panicked: {}", msg.unwrap_or_default()))
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });
    let mut failures = 0;
    for (i, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
