use gammaflow::numerics::{CMatrix, ZPoint};
use gammaflow::space::Space;
use gammaflow::stokes::mutation::{big_from_int, sign_equivalent};
use gammaflow::stokes::{
    asymptotic_basis, braid_orbit_search, identify_k_classes, sod_flat_sections, stokes_matrix, stokes_pair, verify_rh_consistency, BasisOptions,
    MutationSystem, QdmPoint,
};
use gammaflow::PrecisionContext;
use rug::Float;

fn ctx() -> PrecisionContext {
    PrecisionContext::with_digits(50).unwrap()
}

fn point(name: &str, c: &PrecisionContext) -> (Space, ZPoint, QdmPoint) {
    let s = Space::parse(name).unwrap();
    let t = ZPoint::from_f64(c.bits(), 1.0, 0.0);
    let p = QdmPoint::at(&s, &t, c.bits()).unwrap();
    (s, t, p)
}

#[test]
fn leading_term_converges_at_shrinking_radii() {
    let c = ctx();
    let (_, _, p) = point("P1", &c);
    let b = asymptotic_basis(&p, None, &c, BasisOptions::default()).unwrap();
    assert!((b.phi.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    let mut prev = [f64::INFINITY; 2];
    for r in [0.2, 0.1, 0.05] {
        let z = ZPoint::from_f64(c.bits(), r, std::f64::consts::FRAC_PI_2);
        let dev = b.leading_deviation(&z).unwrap();
        for (i, d) in dev.iter().enumerate() {
            let d = d.to_f64();
            let r1 = Float::with_val(c.bits(), gammaflow::numerics::matrix::vec_norm(&b.channels[i].formal[1])).to_f64();
            // first-order behaviour: |e^{u/z} y - Ψ| ≈ |R_1| |z|
            assert!((d / (r1 * r) - 1.0).abs() < 0.25, "r={r} channel {i}: {d} vs {}", r1 * r);
            assert!(d < prev[i]);
            prev[i] = d;
        }
    }
}

#[test]
fn matching_radius_does_not_change_the_sections() {
    let c = ctx();
    let (_, _, p) = point("P2", &c);
    let a = asymptotic_basis(&p, None, &c, BasisOptions::default()).unwrap();
    let b = asymptotic_basis(&p, None, &c, BasisOptions { r_match_scale: 0.5, ..Default::default() }).unwrap();
    for (x, y) in a.channels.iter().zip(&b.channels) {
        assert!(y.r_match < x.r_match);
    }
    let d = a.y_ref.sub(&b.y_ref).max_abs();
    let scale = a.y_ref.max_abs();
    let rel = Float::with_val(c.bits(), &d / &scale).to_f64();
    assert!(rel < 10.0 * 1e-55, "relative change {rel:e}");
}

fn stokes_checks(name: &str, binomial: &[Vec<i64>]) {
    let c = ctx();
    let (s, t, p) = point(name, &c);
    let pair = stokes_pair(&p, None, &c, BasisOptions::default()).unwrap();
    let (_, rep) = stokes_matrix(&pair).unwrap();
    assert!(rep.max_integer_deviation < 1e-6, "{rep:?}");
    assert!(rep.upper_unitriangular, "{rep:?}");
    let found = braid_orbit_search(&big_from_int(&rep.integer), &big_from_int(&binomial.to_vec()), 6);
    assert!(found.found(), "{name}: no braid word of length <= 6 reaches the binomial Gram");

    let id = identify_k_classes(&s, &t, &pair.plus, &s.k_basis().unwrap(), &c).unwrap();
    assert!(id.conclusive && id.integer_residual < 1e-6, "{id:?}");
    assert!(id.self_chi.iter().all(|&x| x == 1));
    assert!(id.unimodular_span);
    // the Stokes matrix is the Euler Gram of the identified classes
    assert_eq!(id.gram.as_ref().unwrap(), &rep.integer);

    let sys = MutationSystem::from_coordinates(&s.tangent, &s.k_basis().unwrap(), &id.coefficients, Some(pair.plus.phase_record())).unwrap();
    assert!(sys.is_unimodular());
    let word = found.word.unwrap();
    let moved = sys.apply_word(&word).unwrap();
    assert!(sign_equivalent(&moved.gram, &big_from_int(&binomial.to_vec())));
}

#[test]
fn stokes_matrix_of_the_line() {
    stokes_checks("P1", &[vec![1, 2], vec![0, 1]]);
}

#[test]
fn stokes_matrix_of_the_plane() {
    stokes_checks("P2", &[vec![1, 3, 6], vec![0, 1, 3], vec![0, 0, 1]]);
}

#[test]
fn flat_sections_are_semiorthogonal_on_the_plane() {
    let c = ctx();
    let (s, t, p) = point("P2", &c);
    let b = asymptotic_basis(&p, None, &c, BasisOptions::default()).unwrap();
    let id = identify_k_classes(&s, &t, &b, &s.k_basis().unwrap(), &c).unwrap();
    let rep = sod_flat_sections(&p, &b, Some(&id)).unwrap();
    assert_eq!(rep.pieces.len(), 3);
    assert_eq!(rep.vanishing.len(), 3);
    assert!(rep.semiorthogonal && rep.max_vanishing < 1e-8, "{rep:?}");
    assert_eq!(rep.lattice_decomposition, Some(true));
}

#[test]
fn gluing_equations_on_the_line() {
    let c = ctx();
    let s = Space::projective(1).unwrap();
    let t = ZPoint::from_f64(c.bits(), 1.0, 0.0);
    let r = verify_rh_consistency(&s, &t, None, 10, &c, BasisOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
    assert_eq!(r.samples.len(), 30);
    assert!(r.max_residual_sector < 1e-8 && r.max_residual_d_plus < 1e-8 && r.max_residual_d_minus < 1e-8);
    assert!(r.ode_loop_residual < 1e-8 && r.framing_loop_residual < 1e-8);
    assert!(r.t_matches_twist && r.t_inverse_is_canonical_twist);
    eprintln!(
        "sector {:e}, D+ {:e}, D- {:e}, loop {:e}, framing {:e}, classes {:?}",
        r.max_residual_sector, r.max_residual_d_plus, r.max_residual_d_minus, r.ode_loop_residual, r.framing_loop_residual, r.classes
    );
}

#[test]
fn gluing_equations_hold_exactly_for_a_point() {
    let c = ctx();
    let s = Space::parse("point").unwrap();
    let t = ZPoint::from_f64(c.bits(), 1.0, 0.0);
    let r = verify_rh_consistency(&s, &t, None, 3, &c, BasisOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
    assert_eq!(r.gram, vec![vec![1]]);
    assert!(r.samples.iter().all(|x| x.residual < 1e-60));
}

#[test]
fn sequential_and_parallel_bases_agree() {
    let c = ctx();
    let (_, _, p) = point("P2", &c);
    let a = asymptotic_basis(&p, None, &c, BasisOptions { schedule: gammaflow::parallel::Schedule::Sequential, ..Default::default() }).unwrap();
    let b = asymptotic_basis(&p, None, &c, BasisOptions { schedule: gammaflow::parallel::Schedule::Parallel, ..Default::default() }).unwrap();
    assert_eq!(a.y_ref.sub(&b.y_ref).max_abs(), 0);
    let _ = CMatrix::identity(c.bits(), 1);
}

#[test]
fn identified_classes_are_constant_on_a_chamber() {
    let c = ctx();
    let (s, t, p) = point("P2", &c);
    let reference = s.k_basis().unwrap();
    let ids: Vec<_> = [-0.3, 0.0, 0.25]
        .iter()
        .map(|&phi| {
            let phi = Float::with_val(c.bits(), phi);
            let b = asymptotic_basis(&p, Some(&phi), &c, BasisOptions::default()).unwrap();
            identify_k_classes(&s, &t, &b, &reference, &c).unwrap()
        })
        .collect();
    assert!(ids.iter().all(|id| id.conclusive));
    assert!(ids.windows(2).all(|w| w[0].coefficients == w[1].coefficients));
}

#[test]
fn gluing_equations_on_the_plane() {
    let c = ctx();
    let s = Space::projective(2).unwrap();
    let t = ZPoint::from_f64(c.bits(), 1.0, 0.0);
    let r = verify_rh_consistency(&s, &t, None, 4, &c, BasisOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures);
}
