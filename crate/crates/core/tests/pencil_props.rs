mod common;

use std::sync::Arc;

use dissipgen::algebra::*;
use dissipgen::pencil::*;
use dissipgen::quadruple::{random_pencil, synth_pencil};
use dissipgen::random;
use dissipgen::sbp::{second_derivative_model, transport_model, wave_model};
use proptest::prelude::*;

use common::{max_abs, small_singular_values};

#[test]
fn worked_example_form() {
    let p = SkewPencil::worked_example();
    assert_eq!(p.boundary_form(), from_real(2, 2, &[0.0, 2.0, 2.0, 0.0]));
    assert_eq!(p.graph_gram(), CMatrix::identity(2, 2) * c(2.0, 0.0));
    let r = check_skew_symmetric(&p, PENCIL_TOL);
    assert!(r.pass);
    assert_eq!(r.core_dim, 0);
}

#[test]
fn invalid_pencils_rejected() {
    let a = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let not_herm = from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    assert!(matches!(
        SkewPencil::new(not_herm, a.clone(), CMatrix::zeros(2, 0)),
        Err(PencilError::WeightNotHermitian(_))
    ));
    let indefinite = from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    assert!(matches!(
        SkewPencil::new(indefinite, a.clone(), CMatrix::zeros(2, 0)),
        Err(PencilError::WeightNotPositiveDefinite)
    ));
    let core = from_real(2, 1, &[1.0, 1.0]);
    assert!(matches!(SkewPencil::new(CMatrix::identity(2, 2), a.clone(), core), Err(PencilError::CoreNotInKernel(_))));
    let twice = from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]);
    assert!(matches!(
        SkewPencil::new(CMatrix::identity(2, 2), CMatrix::zeros(2, 2), twice),
        Err(PencilError::CoreRankDeficient { .. })
    ));
    assert!(matches!(
        SkewPencil::new(CMatrix::identity(3, 3), a, CMatrix::zeros(3, 0)),
        Err(PencilError::DimensionMismatch(_))
    ));
}

#[test]
fn sbp_pencils_are_skew_on_core() {
    for n in [16, 64] {
        let pencils = [
            transport_model(n, 2, 0.0, 1.0).unwrap().pencil,
            second_derivative_model(n, 0.0, 1.0).unwrap().pencil,
            wave_model(n, -1.0, 2.0).unwrap().pencil,
        ];
        for p in pencils {
            let r = check_skew_symmetric(&p, PENCIL_TOL);
            assert!(r.pass, "n={n}: {r:?}");
            let t = p.boundary_form();
            assert!(max_abs(&(&t - t.adjoint())) == 0.0);
        }
    }
}

#[test]
fn dissipativity_verdicts_agree_on_1000_pairs() {
    let mut rng = random::seeded(2024);
    let mut disagreements = 0;
    let mut both = [0usize; 2];
    for trial in 0..1000u64 {
        let n = 2 + (trial % 9) as usize;
        let p = random_pencil(n, (trial % 3) as usize, 7 + trial).unwrap();
        let k = 1 + (trial as usize % n);
        let s = random::complex_gaussian(&mut rng, n, k);
        let r = check_dissipative_on(&p, &s, 1e-9).unwrap();
        both[r.pass as usize] += 1;
        if !r.consistent() {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
    assert!(both[0] > 0);
}

#[test]
fn dissipative_on_core_and_nonpositive_eigenspace() {
    let p = random_pencil(8, 3, 5).unwrap();
    assert!(check_dissipative_on(&p, p.core(), 1e-9).unwrap().pass);
    let spec = hermitian_geig(&p.boundary_form(), p.weight()).unwrap();
    // T ≤ 0 on the eigenvectors with λ ≤ 0, which include the kernel.
    let cols: Vec<usize> = (0..8).filter(|&k| spec.values[k] <= 1e-12).collect();
    let s = spec.vectors.select_columns(&cols);
    assert!(check_dissipative_on(&p, &s, 1e-9).unwrap().pass);
    let top = spec.vectors.columns(7, 1).into_owned();
    let r = check_dissipative_on(&p, &top, 1e-9).unwrap();
    assert!(!r.pass && r.resolvent_violated);
}

proptest! {
    #![proptest_config(common::cfg(64))]

    #[test]
    fn form_is_hermitian_and_matches_direct_pairing(n in 1usize..20, k in 0usize..5, seed in any::<u64>()) {
        let p = random_pencil(n, k, seed).unwrap();
        let t = p.boundary_form();
        prop_assert_eq!(&t, &t.adjoint());
        let mut rng = random::seeded(seed ^ 1);
        let u = random::complex_gaussian_vector(&mut rng, n);
        let v = random::complex_gaussian_vector(&mut rng, n);
        let m = p.weight();
        let a = p.a_max();
        let direct = v.dotc(&(m * (a * &u))) + (a * &v).dotc(&(m * &u));
        let scale = operator_norm(m) * operator_norm(a) * u.norm() * v.norm();
        prop_assert!((p.boundary_pairing(&u, &v) - direct).norm() <= 1e-12 * scale.max(1.0));
        prop_assert!(check_skew_symmetric(&p, PENCIL_TOL).pass);
        prop_assert!(p.core_residual() <= 1e-10);
    }

    #[test]
    fn graph_gram_dominates_weight(n in 1usize..16, seed in any::<u64>()) {
        let p = random_pencil(n, 0, seed).unwrap();
        let d = p.graph_gram() - p.weight();
        let (vals, _) = hermitian_eig(&hermitian_part(&d));
        prop_assert!(vals[0] >= -1e-10 * operator_norm(&d).max(1.0));
    }

    #[test]
    fn synth_invariants(k0 in 0usize..4, kp in 0usize..4, km in 0usize..4, seed in any::<u64>()) {
        prop_assume!(k0 + kp + km > 0);
        let p = Arc::new(synth_pencil(k0, kp, km, seed).unwrap());
        let n = k0 + kp + km;
        let a = p.a_max();
        let ident = CMatrix::identity(n, n);
        prop_assert_eq!(small_singular_values(&(&ident - a), 1e-9), kp);
        prop_assert_eq!(small_singular_values(&(&ident + a), 1e-9), km);
        prop_assert_eq!(p.closure_kernel(1e-9).ncols(), k0);
        prop_assert_eq!(p.core_deficit(1e-9), 0);
        prop_assert!(check_skew_symmetric(&p, PENCIL_TOL).pass);
    }

    #[test]
    fn negated_pencil_flips_form(n in 1usize..10, seed in any::<u64>()) {
        let p = random_pencil(n, 1, seed).unwrap();
        prop_assert_eq!(p.negated().boundary_form(), -p.boundary_form());
    }
}
