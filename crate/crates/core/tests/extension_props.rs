mod common;

use std::sync::Arc;

use dissipgen::algebra::*;
use dissipgen::extension::*;
use dissipgen::pencil::SkewPencil;
use dissipgen::quadruple::*;
use dissipgen::random;
use proptest::prelude::*;

use common::max_abs;

fn worked() -> BoundaryQuadruple {
    quadruple_from_form(Arc::new(SkewPencil::worked_example()), 1e-9).unwrap()
}

fn scalar(x: f64) -> Contraction {
    Contraction::new(from_real(1, 1, &[x])).unwrap()
}

/// `2Re⟨Aw, w⟩_M − (‖gp w‖² − ‖gm w‖²)` for `w` in the domain.
fn energy_defect(e: &Extension, w: &CVector) -> f64 {
    let q = e.quadruple();
    let p = q.pencil();
    let lhs = 2.0 * w.dotc(&(p.weight() * (p.a_max() * w))).re;
    let rhs = (q.gp() * w).norm_squared() - (q.gm() * w).norm_squared();
    (lhs - rhs).abs()
}

#[test]
fn worked_generators() {
    let q = worked();
    let e0 = build_extension(&q, &scalar(0.0)).unwrap();
    assert!((e0.gen()[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
    let b = e0.basis();
    assert!((b[(0, 0)] + b[(1, 0)]).norm() < 1e-14);
    assert!(!is_unitary_generator(&e0));
    let e1 = build_extension(&q, &scalar(1.0)).unwrap();
    assert!(e1.gen()[(0, 0)].norm() < 1e-14);
    assert!(e1.basis()[(1, 0)].norm() < 1e-14);
    assert!(is_unitary_generator(&e1));
    assert_eq!(unitary_cross_check(&e1), Some(true));
    assert!(!extension_equal(&e0, &e1));
    assert!(extension_equal(&e0, &e0));
    let near = build_extension(&q, &scalar(1e-12)).unwrap();
    assert!(extension_equal(&e0, &near));
}

#[test]
fn non_contraction_refused_and_forced_is_not_dissipative() {
    let q = worked();
    assert!(matches!(Contraction::new(from_real(1, 1, &[2.0])), Err(ExtensionError::NotAContraction { .. })));
    let forced = build_extension_unchecked(&q, &from_real(1, 1, &[2.0])).unwrap();
    assert!(forced.certificate().lambda_max_herm > 0.0);
    assert!(!forced.certificate().is_dissipative());
    assert!(Contraction::new(from_real(1, 1, &[1.0 + 1e-10])).is_ok());
}

#[test]
fn recover_special_subspaces() {
    let q = worked();
    let cl = closure_space(&q, 1e-9);
    let phi = recover_contraction(&q, &cl).unwrap();
    assert_eq!(phi.phi().shape(), (1, 1));
    assert!(phi.phi()[(0, 0)].norm() < 1e-12);
    let up = from_real(2, 1, &[1.0, 1.0]);
    assert!(matches!(recover_contraction(&q, &up), Err(ExtensionError::NotDissipativeOnS { .. })));
}

#[test]
fn degenerate_regimes() {
    let cases =
        [((2, 0, 0), Regime::BothZero), ((0, 0, 2), Regime::GammaPlusZero), ((1, 2, 0), Regime::GammaMinusZero)];
    for ((k0, kp, km), regime) in cases {
        let q = quadruple_from_form(Arc::new(synth_pencil(k0, kp, km, 1).unwrap()), 1e-9).unwrap();
        let r = enumerate_extremes(&q).unwrap();
        assert_eq!(r.regime, regime);
        let e = r.unique_extension.unwrap();
        let n = k0 + kp + km;
        assert_eq!(e.s(), n - kp);
        assert!(e.certificate().is_dissipative());
    }
    let q = quadruple_from_form(Arc::new(synth_pencil(0, 2, 1, 1).unwrap()), 1e-9).unwrap();
    let r = enumerate_extremes(&q).unwrap();
    assert_eq!((r.regime, r.p, r.q, r.unitary_possible), (Regime::Generic, 1, 2, false));
    assert!(r.unique_extension.is_none());
    // T = 0 with an empty Φ: A itself, skew.
    let q = quadruple_from_form(Arc::new(synth_pencil(3, 0, 0, 2).unwrap()), 1e-9).unwrap();
    let e = build_extension(&q, &Contraction::zero(0, 0)).unwrap();
    assert!(is_unitary_generator(&e));
}

#[test]
fn report_json_shape() {
    let e = build_extension(&worked(), &scalar(1.0)).unwrap();
    let v = serde_json::to_value(e.report()).unwrap();
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["lambda_max_herm", "phi", "regime", "s", "unitary"]);
    assert_eq!(v["regime"], "generic");
    assert_eq!(v["unitary"], true);
}

#[test]
fn bijection_on_random_pencil() {
    let q = quadruple_from_form(Arc::new(random_pencil(10, 2, 77).unwrap()), 1e-9).unwrap();
    let mut rng = random::seeded(5);
    let mut built = Vec::new();
    for _ in 0..100 {
        let phi = Contraction::new(random::contraction(&mut rng, q.q(), q.p())).unwrap();
        let e = build_extension(&q, &phi).unwrap();
        let back = recover_contraction(&q, e.basis()).unwrap();
        assert!(max_abs(&(back.phi() - phi.phi())) <= 1e-8);
        built.push((phi, e));
    }
    for i in 0..built.len() {
        for j in i + 1..built.len() {
            if operator_norm(&(built[i].0.phi() - built[j].0.phi())) >= 1e-6 {
                assert!(!extension_equal(&built[i].1, &built[j].1));
            }
        }
    }
}

proptest! {
    #![proptest_config(common::cfg(48))]

    #[test]
    fn built_extensions_are_certified(n in 2usize..16, k in 0usize..4, seed in any::<u64>()) {
        let q = quadruple_from_form(Arc::new(random_pencil(n, k, seed).unwrap()), 1e-9).unwrap();
        let mut rng = random::seeded(seed ^ 3);
        let phi = Contraction::new(random::contraction(&mut rng, q.q(), q.p())).unwrap();
        let e = build_extension(&q, &phi).unwrap();
        let cert = e.certificate();
        prop_assert!(cert.lambda_max_herm <= 1e-9 * cert.gen_norm.max(1.0));
        prop_assert_eq!(e.s(), n - q.q());
        prop_assert!(cert.resolvent_sigma_min >= 0.5);
        let back = recover_contraction(&q, e.basis()).unwrap();
        prop_assert!(max_abs(&(back.phi() - phi.phi())) <= 1e-8);
        for _ in 0..3 {
            let z = random::complex_gaussian_vector(&mut rng, e.s());
            let w = e.ambient(&z);
            let scale = operator_norm(q.pencil().weight()) * operator_norm(q.pencil().a_max()) * w.norm_squared();
            prop_assert!(energy_defect(&e, &w) <= 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn forced_expansions_fail_certificate(d in 1usize..4, k0 in 0usize..3, seed in any::<u64>()) {
        let q = quadruple_from_form(Arc::new(synth_pencil(k0, d, d, seed).unwrap()), 1e-9).unwrap();
        let mut rng = random::seeded(seed);
        let u = random::unitary(&mut rng, d);
        let big = &u * c(1.5, 0.0);
        prop_assert!(Contraction::new(big.clone()).is_err());
        let e = build_extension_unchecked(&q, &big).unwrap();
        prop_assert!(e.certificate().lambda_max_herm > 1e-6);
        prop_assert!(build_extension(&q, &Contraction::with_tolerance(big, 1.0).unwrap()).is_err());
    }

    #[test]
    fn unitary_iff(d in 1usize..4, k0 in 0usize..3, seed in any::<u64>()) {
        let q = quadruple_from_form(Arc::new(synth_pencil(k0, d, d, seed).unwrap()), 1e-9).unwrap();
        let mut rng = random::seeded(seed);
        let u = Contraction::new(random::unitary(&mut rng, d)).unwrap();
        let e = build_extension(&q, &u).unwrap();
        prop_assert!(is_unitary_generator(&e));
        let back = recover_contraction(&q, e.basis()).unwrap();
        let ident = CMatrix::identity(d, d);
        prop_assert!(max_abs(&(back.phi().adjoint() * back.phi() - ident)) <= 1e-8);
        let strict = Contraction::new(random::clip_singular_values(&random::complex_gaussian(&mut rng, d, d), 0.0, 0.9)).unwrap();
        let e = build_extension(&q, &strict).unwrap();
        prop_assert!(!is_unitary_generator(&e));
        prop_assert_eq!(unitary_cross_check(&e), None);
    }

    #[test]
    fn no_unitary_when_dimensions_differ(kp in 0usize..4, km in 0usize..4, seed in any::<u64>()) {
        prop_assume!(kp != km);
        let q = quadruple_from_form(Arc::new(synth_pencil(1, kp, km, seed).unwrap()), 1e-9).unwrap();
        let mut rng = random::seeded(seed);
        let phi = Contraction::new(random::partial_isometry(&mut rng, kp, km)).unwrap();
        prop_assert!(!phi.is_unitary());
        prop_assert!(!enumerate_extremes(&q).unwrap().unitary_possible);
    }
}
