#![allow(dead_code)]

use std::f64::consts::PI;

use dissipgen::algebra::{c, norm1, CMatrix, CVector};
use dissipgen::quadruple::BoundaryQuadruple;

/// `e^{tB}` by a 40-term Taylor series after scaling `‖tB‖₁` below 1/2.
pub fn taylor_exp(b: &CMatrix, t: f64) -> CMatrix {
    let n = b.nrows();
    let a = b * c(t, 0.0);
    let norm = norm1(&a);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = a * c(2f64.powi(-s), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &a * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_err(got: &CMatrix, want: &CMatrix) -> f64 {
    frob(&(got - want)) / frob(want).max(f64::MIN_POSITIVE)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `⟨Au, v⟩ + ⟨u, Av⟩` from `M` and `A` directly, and the boundary-map side
/// `⟨Γ₊u, Γ₊v⟩ − ⟨Γ₋u, Γ₋v⟩`.
pub fn green_sides(
    q: &BoundaryQuadruple,
    u: &CVector,
    v: &CVector,
) -> (dissipgen::algebra::C64, dissipgen::algebra::C64) {
    let p = q.pencil();
    let m = p.weight();
    let a = p.a_max();
    let au = a * u;
    let av = a * v;
    let lhs = v.dotc(&(m * &au)) + av.dotc(&(m * u));
    let rhs = (q.gp() * v).dotc(&(q.gp() * u)) - (q.gm() * v).dotc(&(q.gm() * u));
    (lhs, rhs)
}

/// Analytic Dirichlet eigenvalue `−(kπ/L)²` of `d²/dx²`.
pub fn dirichlet_exact(k: usize, len: f64) -> f64 {
    -(k as f64 * PI / len).powi(2)
}

/// Exact eigenvalue of the 3-point Dirichlet Laplacian on `n` points.
pub fn dirichlet_discrete(n: usize, len: f64, k: usize) -> f64 {
    let h = len / (n - 1) as f64;
    -(4.0 / (h * h)) * (k as f64 * PI * h / (2.0 * len)).sin().powi(2)
}

/// Periodic analytic spectrum on `[0, L]`: `0, −(2πk/L)²` twice each.
pub fn periodic_exact(len: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut k = 1;
    while out.len() < count {
        let v = -(2.0 * PI * k as f64 / len).powi(2);
        out.push(v);
        out.push(v);
        k += 1;
    }
    out.truncate(count);
    out
}

pub fn gaussian(grid: &[f64], center: f64, width: f64) -> Vec<f64> {
    grid.iter().map(|x| (-((x - center) / width).powi(2)).exp()).collect()
}

pub fn real_vector(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0)))
}

pub fn cfg(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases, failure_persistence: None, ..Default::default() }
}

/// Number of singular values below an absolute threshold.
pub fn small_singular_values(m: &CMatrix, abs_tol: f64) -> usize {
    dissipgen::algebra::singular_values(m).iter().filter(|&&s| s < abs_tol).count()
}
