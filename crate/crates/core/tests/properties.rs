use gammaflow::charclasses::{euler_pairing_exact, KClass, TangentData};
use gammaflow::cohomology::{CohClass, GradedFrobeniusAlgebra};
use gammaflow::exact::{rat, rint, Rat};
use gammaflow::numerics::branch::branch_power;
use gammaflow::numerics::nilpotent::gamma_of_one_plus_nilpotent;
use gammaflow::numerics::{pi, CMatrix, Complex, ZPoint};
use gammaflow::stokes::mutation::{is_upper_unitriangular, BigMatrix};
use gammaflow::stokes::MutationSystem;
use num_bigint::BigInt;
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

const BITS: u32 = 200;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn class(dim: usize) -> impl Strategy<Value = Vec<Rat>> {
    proptest::collection::vec(small_rat(), dim)
}

fn p1xp2() -> GradedFrobeniusAlgebra {
    GradedFrobeniusAlgebra::kunneth(&GradedFrobeniusAlgebra::projective(1), &GradedFrobeniusAlgebra::projective(2))
}

proptest! {
    #[test]
    fn duality_is_an_involution(ch in class(6)) {
        let alg = p1xp2();
        let v = KClass { label: "V".into(), ch };
        prop_assert_eq!(v.dual(&alg).dual(&alg).ch, v.ch);
    }

    #[test]
    fn cup_product_is_associative(a in class(6), b in class(6), c in class(6)) {
        let alg = p1xp2();
        let left = alg.cup_exact(&alg.cup_exact(&a, &b), &c);
        let right = alg.cup_exact(&a, &alg.cup_exact(&b, &c));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn serre_duality_on_projective_space(n in 1u32..=3, v in class(4), w in class(4)) {
        let td = TangentData::projective(n);
        let alg = &td.algebra;
        let d = alg.dim();
        let v = KClass { label: "V".into(), ch: v[..d].to_vec() };
        let w = KClass { label: "W".into(), ch: w[..d].to_vec() };
        let mut h = vec![rint(0); d];
        h[1] = rint(-(i64::from(n) + 1));
        let omega = KClass::line_bundle(alg, "ω", &h).unwrap();
        let lhs = euler_pairing_exact(&td, &v, &w);
        let rhs = euler_pairing_exact(&td, &w, &v.tensor(&omega, alg));
        let sign = if n % 2 == 0 { rint(1) } else { rint(-1) };
        prop_assert_eq!(lhs, sign * rhs);
    }
}

fn unitriangular(entries: Vec<i64>) -> BigMatrix {
    let mut g = vec![vec![BigInt::from(0); 4]; 4];
    let mut it = entries.into_iter();
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = BigInt::from(1);
        for x in row.iter_mut().skip(i + 1) {
            *x = BigInt::from(it.next().unwrap_or(0));
        }
    }
    g
}

/// Euler form of a rank-4 Dynkin quiver (A₄ path or D₄ star) with vertices in the given order.
/// Such lattices carry finitely many exceptional classes, so long braid words stay small.
fn dynkin_form(star: bool, order: &[usize], signs: &[bool]) -> BigMatrix {
    let edges: [(usize, usize); 3] = if star { [(0, 1), (0, 2), (0, 3)] } else { [(0, 1), (1, 2), (2, 3)] };
    let pos = |v: usize| order.iter().position(|&x| x == v).unwrap();
    let mut g = unitriangular(Vec::new());
    for (&(a, b), &s) in edges.iter().zip(signs) {
        let (i, j) = (pos(a).min(pos(b)), pos(a).max(pos(b)));
        g[i][j] = BigInt::from(if s { 1 } else { -1 });
    }
    g
}

fn walk(form: BigMatrix, steps: &[(usize, bool)]) -> Result<(), TestCaseError> {
    let id: BigMatrix = (0..4).map(|r| (0..4).map(|c| BigInt::from(i64::from(r == c))).collect()).collect();
    let reference = (0..4).map(|i| format!("E{i}")).collect();
    let start = MutationSystem::new(reference, id, form, None).unwrap();
    let mut sys = start.clone();
    for &(i, right) in steps {
        let next = if right { sys.mutate_right(i) } else { sys.mutate_left(i) }.unwrap();
        prop_assert!(next.is_unimodular());
        prop_assert!(is_upper_unitriangular(&next.gram));
        let back = if right { next.mutate_left(i) } else { next.mutate_right(i) }.unwrap();
        prop_assert_eq!(&back, &sys);
        sys = next;
    }
    for &(i, right) in steps.iter().rev() {
        sys = if right { sys.mutate_left(i) } else { sys.mutate_right(i) }.unwrap();
    }
    prop_assert_eq!(sys, start);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn long_mutation_walks_preserve_unimodularity_and_invert(
        star in any::<bool>(),
        order in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
        signs in proptest::collection::vec(any::<bool>(), 3),
        steps in proptest::collection::vec((0usize..3, any::<bool>()), 100),
    ) {
        walk(dynkin_form(star, &order, &signs), &steps)?;
    }

    // On a generic form the coordinates grow doubly exponentially, so walks stay short.
    #[test]
    fn mutations_of_arbitrary_forms_invert(
        entries in proptest::collection::vec(-3i64..=3, 6),
        steps in proptest::collection::vec((0usize..3, any::<bool>()), 12),
    ) {
        walk(unitriangular(entries), &steps)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn full_turn_of_branch_power(
        abs in 0.05f64..20.0,
        arg in -10.0f64..10.0,
        entries in proptest::collection::vec(-1.5f64..1.5, 9),
    ) {
        let a = CMatrix::from_fn(3, 3, |r, c| Complex::from_f64(BITS, entries[3 * r + c], 0.25 * entries[(3 * r + c + 4) % 9]));
        let z = ZPoint::from_f64(BITS, abs, arg);
        let two_pi = Float::with_val(BITS, pi(BITS) * 2u32);
        let turned = branch_power(&z.rotate(&two_pi), &a);
        let monodromy = a.scale(&Complex::new(Float::new(BITS), two_pi)).exp();
        let expect = branch_power(&z, &a).matmul(&monodromy);
        let scale = Float::with_val(BITS, expect.max_abs() + 1u32);
        let rel = Float::with_val(BITS, turned.sub(&expect).max_abs() / scale).to_f64();
        prop_assert!(rel < 1e-45, "relative deviation {rel:e}");
    }

    #[test]
    fn gamma_reflection_on_nilpotents(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        // Γ(1+x)Γ(1-x) = πx / sin πx = 1 + π²x²/6 + 7π⁴x⁴/360 + …
        let alg = GradedFrobeniusAlgebra::projective(4);
        let mut x = CohClass::zero(BITS, 5);
        x.coeffs[1] = Complex::from_f64(BITS, a, 0.0);
        x.coeffs[2] = Complex::from_f64(BITS, b, 0.0);
        let g_plus = gamma_of_one_plus_nilpotent(&alg, &x, 4).unwrap();
        let g_minus = gamma_of_one_plus_nilpotent(&alg, &x.neg(), 4).unwrap();
        let lhs = alg.cup(&g_plus, &g_minus).unwrap();
        let p = pi(BITS);
        let p2 = Complex::from_real(Float::with_val(BITS, &p * &p) / 6u32);
        let p4 = Complex::from_real(Float::with_val(BITS, (&p).pow(4u32)) * 7u32 / 360u32);
        let x2 = alg.cup(&x, &x).unwrap();
        let x4 = alg.cup(&x2, &x2).unwrap();
        let mut one = CohClass::zero(BITS, 5);
        one.coeffs[0] = Complex::one(BITS);
        let rhs = one.add(&x2.scale(&p2)).add(&x4.scale(&p4));
        let dev = lhs.sub(&rhs).max_abs().to_f64();
        prop_assert!(dev < 1e-50, "{dev:e}");
    }
}
