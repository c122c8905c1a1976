use std::path::PathBuf;

use gammaflow::data::{export_space, load_user_data, parse_user_data, read_user_data, same_structure};
use gammaflow::numerics::Complex;
use gammaflow::quantum::{euler_spectrum, hypersurface_pattern};
use gammaflow::space::Space;
use gammaflow::{Error, PrecisionContext};

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn shipped_projective_files_match_the_builtins() {
    for (file, n) in [("p1.json", 1), ("p2.json", 2)] {
        let d = load_user_data(&shipped(file)).unwrap();
        let s = Space::projective(n).unwrap();
        assert_eq!(*d.algebra, *s.algebra(), "{file}");
        assert!(same_structure(d.quantum.as_ref().unwrap(), &s.quantum), "{file}");
        assert_eq!(d.tangent.as_ref().unwrap().ch, s.tangent.ch, "{file}");
    }
}

#[test]
fn export_round_trips() {
    for n in 1..=4 {
        let s = Space::projective(n).unwrap();
        let text = serde_json::to_string(&export_space(&s).unwrap()).unwrap();
        let d = parse_user_data(&text).unwrap().build().unwrap();
        assert!(same_structure(d.quantum.as_ref().unwrap(), &s.quantum));
    }
    assert!(export_space(&Space::parse("P1xP1").unwrap()).is_err());
}

#[test]
fn broken_associativity_names_the_triple() {
    let path = shipped("broken_associativity.json");
    let d = read_user_data(&path).unwrap();
    let reports = d.validate();
    assert!(reports[0].passed(), "the classical ring is intact");
    let bad = reports[1].failures();
    let assoc = bad.iter().find(|c| c.axiom == "associativity").expect("associativity fails");
    let w = assoc.witness.as_deref().unwrap();
    assert_eq!(w.matches(", ").count(), 2, "{w}");
    assert!(w.contains("p^2"), "{w}");
    match load_user_data(&path) {
        Err(Error::Data(msg)) => assert!(msg.contains("associativity fails at (") && msg.contains(w), "{msg}"),
        other => panic!("expected a data error, got {other:?}"),
    }
}

#[test]
fn quadric_surface_matches_the_hypersurface_pattern() {
    let c = PrecisionContext::with_digits(50).unwrap();
    let d = load_user_data(&shipped("quadric_surface.json")).unwrap();
    let q = d.quantum.as_ref().unwrap();
    assert_eq!(q.weights, vec![2]);
    let spec = euler_spectrum(q, &[Complex::one(c.bits())]).unwrap();
    let h = d.hypersurface.as_ref().unwrap();
    let r = hypersurface_pattern(&spec, h.n, h.d, &c).unwrap();
    assert!(r.matched, "{r:?}");
    assert!((r.expected_t - 4.0).abs() < 1e-12);
    assert_eq!(r.zero_multiplicity, 2);
}

#[test]
fn parse_errors_carry_a_location() {
    let text = "{\n  \"name\": \"x\",\n  \"dim_complex\": 0.5\n}";
    match parse_user_data(text) {
        Err(Error::Data(m)) => assert!(m.contains("line 3"), "{m}"),
        other => panic!("{other:?}"),
    }
    let bad_field = r#"{"name":"x","dim_complex":0,"basis":[{"label":"1","degree":0}],"unit":0,"top":0,"cup":[[0,0,["1/0"]]],"pairing":[[0,0,1]]}"#;
    match parse_user_data(bad_field).unwrap().build() {
        Err(Error::Data(m)) => assert!(m.starts_with("cup[0][0]"), "{m}"),
        other => panic!("{other:?}"),
    }
}
