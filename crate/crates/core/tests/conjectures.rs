use gammaflow::conjectures::{asymptotic_fit, gamma1_flat_form_test, gamma1_limit_test};
use gammaflow::parallel::Schedule;
use gammaflow::space::Space;
use gammaflow::PrecisionContext;

fn ctx() -> PrecisionContext {
    PrecisionContext::with_digits(50).unwrap()
}

#[test]
fn limit_distances_decay_at_the_spectral_gap() {
    // Poisson summation over the degree d shows the O(1/t) correction is parallel to Γ̂ for P^n,
    // so the projective distance dies like e^{-gap·t} with gap = T(1 - cos(2π/(n+1))).
    for n in 1..=3u32 {
        let s = Space::projective(n).unwrap();
        let table = gamma1_limit_test(&s, &[25.0, 50.0, 100.0, 200.0], &ctx(), 1000, Schedule::Parallel).unwrap();
        let np1 = f64::from(n + 1);
        let gap = np1 * (1.0 - (2.0 * std::f64::consts::PI / np1).cos());
        assert!((table.spectral_gap - gap).abs() < 1e-12);
        assert!(table.strictly_decreasing, "{table:?}");
        assert!((table.exp_rate / gap - 1.0).abs() < 0.05, "P{n}: κ = {}", table.exp_rate);
    }
}

#[test]
fn flat_form_on_the_line() {
    let s = Space::projective(1).unwrap();
    let r = gamma1_flat_form_test(&s, &[0.1, 0.05, 0.02, 0.01, 0.005], &ctx(), 1000).unwrap();
    eprintln!("{r:?}");
    assert!(r.decreasing);
    // Bessel asymptotics K_1/K_0 = 1 + z/4 + O(z²) put the angle at z/8 to first order
    for row in &r.rows {
        assert!((row.angle / row.z - 0.125).abs() < 0.02, "{row:?}");
    }
    assert!(r.final_angle < 1e-3);
    assert!(r.min_anti_angle > 1e-1);
}

#[test]
fn flat_form_refuses_beyond_digit_cap() {
    let s = Space::projective(1).unwrap();
    assert!(gamma1_flat_form_test(&s, &[0.001], &ctx(), 200).is_err());
}

#[test]
fn growth_fit_recovers_spectrum() {
    let grid: Vec<f64> = (0..9).map(|k| 20.0 + 5.0 * f64::from(k)).collect();
    for n in 1..=2 {
        let s = Space::projective(n).unwrap();
        let f = asymptotic_fit(&s, &grid, &ctx(), Schedule::Parallel).unwrap();
        eprintln!("{f:?}");
        assert!(f.relative_t_error < 0.01);
        assert!(f.relative_exponent_error < 0.1);
    }
}

#[test]
fn decrease_is_judged_beyond_the_double_range() {
    let s = Space::projective(2).unwrap();
    let table = gamma1_limit_test(&s, &[175.0, 200.0], &ctx(), 1000, Schedule::Sequential).unwrap();
    assert!(table.rows.iter().all(|r| r.distance == 0.0), "both distances underflow f64");
    assert!(table.strictly_decreasing);
}
