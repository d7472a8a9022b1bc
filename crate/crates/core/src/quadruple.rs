//! Boundary quadruples `(H₋, H₊, Γ₋, Γ₊)` over a skew pencil.
//!
//! `H₋ = ℂᵖ` and `H₊ = ℂ^q` carry the standard inner product; any weighting
//! lives in the coordinate matrices `gm` (p × n) and `gp` (q × n). A valid
//! quadruple satisfies
//!
//! * Green's identity `gpᴴ gp − gmᴴ gm = T` with `T` the boundary form,
//! * joint surjectivity: `[gm; gp]` has full row rank `p + q`,
//! * individual surjectivity: `gm` and `gp` have full row rank.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    self, c, hermitian_geig, operator_norm, orthonormalize_weighted, singular_values, solve, AlgebraError, CMatrix,
    CVector,
};
use crate::pencil::{PencilError, SkewPencil};
use crate::random;
use crate::report::{all_pass, Check};

/// Relative tolerance for Green's identity and rank margins.
pub const QUADRUPLE_TOL: f64 = 1e-9;
/// Looser tolerance applied after the deficiency construction.
pub const DEFICIENCY_CHECK_TOL: f64 = 1e-8;
/// Largest admissible condition number of the direct-sum basis.
pub const DECOMPOSITION_COND_CAP: f64 = 1e8;
/// Tolerance for the `Ψᴴ C̃ Ψ = C` certificate.
pub const ISO_TOL: f64 = 1e-8;

const FRAC_SQRT2_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadrupleError {
    #[error("not a boundary quadruple: {0}")]
    NotAQuadruple(String),
    #[error("direct sum ker T ⊕ ker(I−A) ⊕ ker(I+A) fails: {0}")]
    DecompositionFails(String),
    #[error("stacked boundary map has rank {rank} < {expected}")]
    SurjectivityViolated { rank: usize, expected: usize },
    #[error("quadruples are not isomorphic (residual {residual:.3e})")]
    SignatureMismatch { residual: f64 },
    #[error("no boundary triple: dim H₋ = {p} differs from dim H₊ = {q}")]
    NoTriple { p: usize, q: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("a synthetic pencil needs at least one dimension")]
    EmptyPencil,
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// How a quadruple was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadrupleKind {
    FormSpectral,
    Deficiency,
    ModelExplicit,
    Triple,
    Given,
}

#[derive(Debug, Clone)]
pub struct BoundaryQuadruple {
    pencil: Arc<SkewPencil>,
    gm: CMatrix,
    gp: CMatrix,
    kind: QuadrupleKind,
}

impl BoundaryQuadruple {
    /// Validates all three quadruple invariants at [`QUADRUPLE_TOL`].
    pub fn new(pencil: Arc<SkewPencil>, gm: CMatrix, gp: CMatrix, kind: QuadrupleKind) -> Result<Self, QuadrupleError> {
        Self::with_tolerance(pencil, gm, gp, kind, QUADRUPLE_TOL)
    }

    pub fn with_tolerance(
        pencil: Arc<SkewPencil>,
        gm: CMatrix,
        gp: CMatrix,
        kind: QuadrupleKind,
        tol: f64,
    ) -> Result<Self, QuadrupleError> {
        let q = Self::new_unchecked(pencil, gm, gp, kind)?;
        let checks = q.verify(tol);
        if !all_pass(&checks) {
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{} (residual {:.3e})", c.name, c.residual))
                .collect();
            return Err(QuadrupleError::NotAQuadruple(failed.join(", ")));
        }
        Ok(q)
    }

    /// Checks dimensions only.
    pub fn new_unchecked(
        pencil: Arc<SkewPencil>,
        gm: CMatrix,
        gp: CMatrix,
        kind: QuadrupleKind,
    ) -> Result<Self, QuadrupleError> {
        let n = pencil.dim();
        if gm.ncols() != n || gp.ncols() != n {
            return Err(QuadrupleError::DimensionMismatch(format!(
                "boundary maps need {n} columns, got {} and {}",
                gm.ncols(),
                gp.ncols()
            )));
        }
        Ok(Self { pencil, gm, gp, kind })
    }

    pub fn pencil(&self) -> &SkewPencil {
        &self.pencil
    }

    pub fn pencil_arc(&self) -> &Arc<SkewPencil> {
        &self.pencil
    }

    pub fn gm(&self) -> &CMatrix {
        &self.gm
    }

    pub fn gp(&self) -> &CMatrix {
        &self.gp
    }

    pub fn kind(&self) -> QuadrupleKind {
        self.kind
    }

    /// `dim H₋`.
    pub fn p(&self) -> usize {
        self.gm.nrows()
    }

    /// `dim H₊`.
    pub fn q(&self) -> usize {
        self.gp.nrows()
    }

    /// `[gm; gp]`, the map `u ↦ (Γ₋u, Γ₊u)`.
    pub fn stacked(&self) -> CMatrix {
        stack_rows(&self.gm, &self.gp)
    }

    /// `(H₊, H₋, Γ₊, Γ₋)` is a quadruple for `−A₀`.
    pub fn swapped(&self) -> Self {
        Self { pencil: Arc::new(self.pencil.negated()), gm: self.gp.clone(), gp: self.gm.clone(), kind: self.kind }
    }

    /// `‖gpᴴgp − gmᴴgm − T‖₂` relative to `‖T‖₂` (or to `‖M‖‖A‖` when `T` vanishes).
    pub fn green_residual(&self) -> f64 {
        let t = self.pencil.boundary_form();
        let diff = self.gp.adjoint() * &self.gp - self.gm.adjoint() * &self.gm - &t;
        operator_norm(&diff) / self.form_scale(&t)
    }

    fn form_scale(&self, t: &CMatrix) -> f64 {
        let tn = operator_norm(t);
        let an = operator_norm(self.pencil.weight()) * operator_norm(self.pencil.a_max());
        if tn > 1e-12 * an {
            tn
        } else {
            an.max(f64::MIN_POSITIVE)
        }
    }

    /// Runs the three quadruple invariants.
    pub fn verify(&self, tol: f64) -> Vec<Check> {
        vec![
            Check::at_most("green identity", self.green_residual(), tol),
            Check::above("joint surjectivity", rank_margin(&self.stacked()), tol),
            Check::above("individual surjectivity (gm)", rank_margin(&self.gm), tol),
            Check::above("individual surjectivity (gp)", rank_margin(&self.gp), tol),
        ]
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        all_pass(&self.verify(tol))
    }
}

/// `σ_min / σ_max` of a matrix with at most as many rows as columns; 1 for empty maps.
fn rank_margin(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    if m.nrows() > m.ncols() {
        return 0.0;
    }
    let s = singular_values(m);
    let smax = s[0];
    if smax == 0.0 {
        return 0.0;
    }
    s[m.nrows() - 1] / smax
}

pub(crate) fn stack_rows(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let n = top.ncols();
    let mut out = CMatrix::zeros(top.nrows() + bottom.nrows(), n);
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

/// Quadruple from the spectral split of the boundary form relative to the graph norm.
///
/// Solves `T x = λ G x` with `G` the graph Gram matrix; eigenvalues above
/// `tol·max|λ|` feed `gp = Λ₊^{1/2} X₊ᴴ G`, those below `−tol·max|λ|` feed
/// `gm = |Λ₋|^{1/2} X₋ᴴ G`. The rest span `ker T`. Eigenvalues at round-off
/// level (`100·n·ε`) are always treated as zero.
pub fn quadruple_from_form(pencil: Arc<SkewPencil>, tol: f64) -> Result<BoundaryQuadruple, QuadrupleError> {
    let t = pencil.boundary_form();
    let g = pencil.graph_gram();
    let spectrum = hermitian_geig(&t, &g)?;
    // Graph-norm eigenvalues satisfy |λ| ≤ 1, so round-off in T shows up as
    // |λ| of order n·ε regardless of scale.
    let scale = spectrum.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = 100.0 * pencil.dim() as f64 * f64::EPSILON;
    let threshold = (tol * scale).max(noise);
    let xg = spectrum.vectors.adjoint() * &g;
    let rows_for = |pred: &dyn Fn(f64) -> bool| -> CMatrix {
        let idx: Vec<usize> = (0..spectrum.values.len()).filter(|&k| pred(spectrum.values[k])).collect();
        let mut out = CMatrix::zeros(idx.len(), pencil.dim());
        for (r, &k) in idx.iter().enumerate() {
            let w = spectrum.values[k].abs().sqrt();
            out.set_row(r, &(xg.row(k) * c(w, 0.0)));
        }
        out
    };
    // Most significant directions first.
    let gm = rows_for(&|v| v < -threshold);
    let gp_asc = rows_for(&|v| v > threshold);
    let gp = CMatrix::from_fn(gp_asc.nrows(), gp_asc.ncols(), |i, j| gp_asc[(gp_asc.nrows() - 1 - i, j)]);
    let (gm, gp) = refine_in_range(&t, gm, gp).unwrap_or_else(|(gm, gp)| (gm, gp));
    BoundaryQuadruple::new_unchecked(pencil, gm, gp, QuadrupleKind::FormSpectral)
}

/// Polishes `gpᴴgp − gmᴴgm = T` inside `range(T)`.
///
/// The Cholesky reduction loses `cond(G)·ε`, which is large for
/// higher-order operators. Writing `[gp; gm] = Y V_rᴴ` with `T = V_r D V_rᴴ`,
/// the `r × r` matrix `E = Y⁻ᴴ D Y⁻¹` should equal `diag(I, −I)`; factoring
/// `E` exactly and re-aligning each block with the original rows keeps the
/// maps while making the identity exact to round-off in `Y`.
///
/// Returns the input unchanged (as `Err`) when the inertia of `T` does not
/// match the split.
fn refine_in_range(t: &CMatrix, gm: CMatrix, gp: CMatrix) -> Result<(CMatrix, CMatrix), (CMatrix, CMatrix)> {
    let (p, q) = (gm.nrows(), gp.nrows());
    let r = p + q;
    if r == 0 {
        return Ok((gm, gp));
    }
    let (d, v) = crate::algebra::hermitian_eig(t);
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].abs().total_cmp(&d[a].abs()));
    let top = &order[..r];
    if top.iter().filter(|&&k| d[k] > 0.0).count() != q {
        return Err((gm, gp));
    }
    let vr = CMatrix::from_fn(t.nrows(), r, |i, j| v[(i, top[j])]);
    let dr = CMatrix::from_fn(r, r, |i, j| if i == j { c(d[top[i]], 0.0) } else { c(0.0, 0.0) });
    let f = stack_rows(&gp, &gm);
    let y = &f * &vr;
    let yh = y.adjoint();
    let Ok(inner) = crate::algebra::solve(&yh, &dr) else {
        return Err((gm, gp));
    };
    let Ok(e) = crate::algebra::solve(&yh, &inner.adjoint()) else {
        return Err((gm, gp));
    };
    let (lam, u) = crate::algebra::hermitian_eig(&crate::algebra::hermitian_part(&e));
    // Ascending: the first p eigenvalues are negative, the last q positive.
    if lam[..p].iter().any(|&x| x >= 0.0) || lam[p..].iter().any(|&x| x <= 0.0) {
        return Err((gm, gp));
    }
    let block = |cols: std::ops::Range<usize>, target: &CMatrix| -> CMatrix {
        let k = cols.len();
        let mut rows = CMatrix::zeros(k, r);
        for (i, col) in cols.enumerate() {
            let w = lam[col].abs().sqrt();
            rows.set_row(i, &(u.column(col).adjoint() * &y * c(w, 0.0)));
        }
        // Unitary re-alignment with the original rows (orthogonal Procrustes).
        let svd = crate::algebra::full_svd(&(target * rows.adjoint()));
        let align = svd.u.columns(0, k) * svd.v.adjoint();
        align * rows * vr.adjoint()
    };
    let new_gm = block(0..p, &(&gm * &vr));
    let new_gp = block(p..r, &(&gp * &vr));
    Ok((new_gm, new_gp))
}

/// Quadruple from the direct sum `ker T ⊕ ker(I − A) ⊕ ker(I + A)`.
///
/// With M-orthonormal bases `B₊`, `B₋` of the deficiency spaces and the
/// oblique projections `P±` of the direct sum, `gp = √2 B₊ᴴ M P₊` and
/// `gm = √2 B₋ᴴ M P₋`.
pub fn quadruple_from_deficiency(pencil: Arc<SkewPencil>, tol: f64) -> Result<BoundaryQuadruple, QuadrupleError> {
    let n = pencil.dim();
    let ident = CMatrix::identity(n, n);
    let kernel = pencil.closure_kernel(tol);
    let cutoff = tol * operator_norm(pencil.a_max()).max(1.0);
    let plus = algebra::null_space_cutoff(&(&ident - pencil.a_max()), cutoff);
    let minus = algebra::null_space_cutoff(&(&ident + pencil.a_max()), cutoff);
    let (k0, kp, km) = (kernel.ncols(), plus.ncols(), minus.ncols());
    if k0 + kp + km != n {
        return Err(QuadrupleError::DecompositionFails(format!("dimensions {k0} + {kp} + {km} do not add up to {n}")));
    }
    let bp = orthonormalize_weighted(&plus, pencil.weight(), algebra::DEFAULT_TOL);
    let bm = orthonormalize_weighted(&minus, pencil.weight(), algebra::DEFAULT_TOL);
    let mut w = CMatrix::zeros(n, n);
    w.columns_mut(0, k0).copy_from(&kernel);
    w.columns_mut(k0, kp).copy_from(&bp);
    w.columns_mut(k0 + kp, km).copy_from(&bm);
    let s = singular_values(&w);
    let cond = if s[n - 1] > 0.0 { s[0] / s[n - 1] } else { f64::INFINITY };
    if cond > DECOMPOSITION_COND_CAP {
        return Err(QuadrupleError::DecompositionFails(format!("sum is not direct (condition number {cond:.3e})")));
    }
    // Rows of W⁻¹ are the coordinate functionals of the direct sum; since B±
    // are M-orthonormal, B±ᴴ M P± reduces to the matching block of rows.
    let w_inv = solve(&w, &ident)?;
    let gp = w_inv.rows(k0, kp) * c(2f64.sqrt(), 0.0);
    let gm = w_inv.rows(k0 + kp, km) * c(2f64.sqrt(), 0.0);
    BoundaryQuadruple::with_tolerance(pencil, gm, gp, QuadrupleKind::Deficiency, DEFICIENCY_CHECK_TOL)
}

/// Orthonormal basis of `ker Γ₋ ∩ ker Γ₊`.
pub fn closure_space(q: &BoundaryQuadruple, tol: f64) -> CMatrix {
    algebra::null_space(&q.stacked(), tol)
}

/// Minimum-norm `w` with `Γ₋w = xm` and `Γ₊w = xp`.
pub fn interpolate(q: &BoundaryQuadruple, xm: &CVector, xp: &CVector) -> Result<CVector, QuadrupleError> {
    if xm.len() != q.p() || xp.len() != q.q() {
        return Err(QuadrupleError::DimensionMismatch(format!(
            "boundary data must have lengths ({}, {}), got ({}, {})",
            q.p(),
            q.q(),
            xm.len(),
            xp.len()
        )));
    }
    let s = q.stacked();
    let expected = q.p() + q.q();
    if expected == 0 {
        return Ok(CVector::zeros(q.pencil().dim()));
    }
    let r = algebra::rank(&s, QUADRUPLE_TOL);
    if r < expected {
        return Err(QuadrupleError::SurjectivityViolated { rank: r, expected });
    }
    let mut rhs = CVector::zeros(expected);
    rhs.rows_mut(0, q.p()).copy_from(xm);
    rhs.rows_mut(q.p(), q.q()).copy_from(xp);
    Ok(algebra::pinv(&s, QUADRUPLE_TOL) * rhs)
}

/// Certified isomorphism `Ψ` with `Ψ(Γ₋u, Γ₊u) = (Γ̃₋u, Γ̃₊u)` and `Ψᴴ C̃ Ψ = C`.
#[derive(Debug, Clone)]
pub struct QuadrupleIso {
    pub psi: CMatrix,
    /// `‖Ψᴴ C̃ Ψ − C‖` relative to `max(1, ‖Ψ‖²)`.
    pub signature_residual: f64,
    /// `‖Ψ G − G̃‖` relative to `max(1, ‖G̃‖)`.
    pub intertwining_residual: f64,
}

pub fn signature_matrix(p: usize, q: usize) -> CMatrix {
    CMatrix::from_fn(p + q, p + q, |i, j| {
        if i != j {
            c(0.0, 0.0)
        } else if i < p {
            c(-1.0, 0.0)
        } else {
            c(1.0, 0.0)
        }
    })
}

pub fn quadruple_iso(q1: &BoundaryQuadruple, q2: &BoundaryQuadruple, tol: f64) -> Result<QuadrupleIso, QuadrupleError> {
    let n = q1.pencil().dim();
    if q2.pencil().dim() != n {
        return Err(QuadrupleError::DimensionMismatch(format!(
            "pencils have dimensions {n} and {}",
            q2.pencil().dim()
        )));
    }
    let r = q1.p() + q1.q();
    if q2.p() + q2.q() != r || q1.p() != q2.p() {
        // Different inertia: Ψᴴ C̃ Ψ = C is impossible by Sylvester's law.
        return Err(QuadrupleError::SignatureMismatch { residual: f64::INFINITY });
    }
    let g = q1.stacked();
    let gt = q2.stacked();
    // Orthonormal basis of (ker G)^⊥ = ran Gᴴ.
    let y = algebra::range_basis(&g.adjoint(), tol);
    if y.ncols() != r {
        return Err(QuadrupleError::SurjectivityViolated { rank: y.ncols(), expected: r });
    }
    let g0 = &g * &y;
    let gt0 = &gt * &y;
    // Ψ G₀ = G̃₀  ⇔  G₀ᴴ Ψᴴ = G̃₀ᴴ
    let psi = solve(&g0.adjoint(), &gt0.adjoint())?.adjoint();
    let c1 = signature_matrix(q1.p(), q1.q());
    let c2 = signature_matrix(q2.p(), q2.q());
    let psi_norm = operator_norm(&psi);
    let signature_residual = operator_norm(&(psi.adjoint() * &c2 * &psi - &c1)) / psi_norm.powi(2).max(1.0);
    let intertwining_residual = operator_norm(&(&psi * &g - &gt)) / operator_norm(&gt).max(1.0);
    let residual = signature_residual.max(intertwining_residual);
    if residual > ISO_TOL {
        return Err(QuadrupleError::SignatureMismatch { residual });
    }
    Ok(QuadrupleIso { psi, signature_residual, intertwining_residual })
}

/// Boundary triple maps `(G₁, G₂)` associated with a quadruple with `p = q`.
#[derive(Debug, Clone)]
pub struct BoundaryTriple {
    pub g1: CMatrix,
    pub g2: CMatrix,
}

/// `G₁ = (√2/2)(Γ₊ − Γ₋)`, `G₂ = (√2/2)(Γ₊ + Γ₋)`; requires `p = q`.
pub fn to_triple(q: &BoundaryQuadruple) -> Result<BoundaryTriple, QuadrupleError> {
    if q.p() != q.q() {
        return Err(QuadrupleError::NoTriple { p: q.p(), q: q.q() });
    }
    let s = c(FRAC_SQRT2_2, 0.0);
    Ok(BoundaryTriple { g1: (q.gp() - q.gm()) * s, g2: (q.gp() + q.gm()) * s })
}

/// `Γ₋ = (√2/2)(G₂ − G₁)`, `Γ₊ = (√2/2)(G₂ + G₁)`, validated as a quadruple.
pub fn from_triple(pencil: Arc<SkewPencil>, g1: &CMatrix, g2: &CMatrix) -> Result<BoundaryQuadruple, QuadrupleError> {
    if g1.shape() != g2.shape() {
        return Err(QuadrupleError::DimensionMismatch(format!(
            "triple maps have shapes {:?} and {:?}",
            g1.shape(),
            g2.shape()
        )));
    }
    let s = c(FRAC_SQRT2_2, 0.0);
    let gm = (g2 - g1) * s;
    let gp = (g2 + g1) * s;
    BoundaryQuadruple::new(pencil, gm, gp, QuadrupleKind::Triple)
}

/// Largest relative defect of `⟨G₁u,G₂v⟩ + ⟨G₂u,G₁v⟩ = ⟨Γ₊u,Γ₊v⟩ − ⟨Γ₋u,Γ₋v⟩`
/// over `samples` random pairs.
pub fn triple_identity_residual(q: &BoundaryQuadruple, t: &BoundaryTriple, samples: usize, seed: u64) -> f64 {
    let mut rng = random::seeded(seed);
    let n = q.pencil().dim();
    let ip = |a: &CVector, b: &CVector| b.dotc(a);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let u = random::complex_gaussian_vector(&mut rng, n);
        let v = random::complex_gaussian_vector(&mut rng, n);
        let lhs = ip(&(&t.g1 * &u), &(&t.g2 * &v)) + ip(&(&t.g2 * &u), &(&t.g1 * &v));
        let rhs = ip(&(q.gp() * &u), &(q.gp() * &v)) - ip(&(q.gm() * &u), &(q.gm() * &v));
        let scale = 1.0 + (q.gp() * &u).norm() * (q.gp() * &v).norm() + (q.gm() * &u).norm() * (q.gm() * &v).norm();
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    worst
}

/// Synthetic pencil `A = U diag(A₀, I_kp, −I_km) Uᴴ` on `ℂⁿ` with `M = I`.
///
/// `A₀` is a random skew-Hermitian `k0 × k0` block and `U` a random unitary;
/// the core is `U` applied to the first block. Then `ker T` is the core,
/// `ker(I − A)` has dimension `kp` and `ker(I + A)` dimension `km`.
pub fn synth_pencil(k0: usize, kp: usize, km: usize, seed: u64) -> Result<SkewPencil, QuadrupleError> {
    let n = k0 + kp + km;
    if n == 0 {
        return Err(QuadrupleError::EmptyPencil);
    }
    let mut rng = random::seeded(seed);
    let u = random::unitary(&mut rng, n);
    let a0 = random::skew_hermitian(&mut rng, k0);
    let mut d = CMatrix::zeros(n, n);
    d.view_mut((0, 0), (k0, k0)).copy_from(&a0);
    for i in 0..kp {
        d[(k0 + i, k0 + i)] = c(1.0, 0.0);
    }
    for i in 0..km {
        d[(k0 + kp + i, k0 + kp + i)] = c(-1.0, 0.0);
    }
    let a = &u * d * u.adjoint();
    let core = u.columns(0, k0).into_owned();
    Ok(SkewPencil::new(CMatrix::identity(n, n), a, core)?)
}

/// Generic weighted pencil of dimension `n` with a `kernel_dim`-dimensional core.
///
/// A random Hermitian positive-definite weight `M`, a random Hermitian `T`
/// with the prescribed kernel and spectrum bounded away from zero, and
/// `A = M⁻¹(T/2 + S)` with `S` random skew-Hermitian, so that `MA + AᴴM = T`.
pub fn random_pencil(n: usize, kernel_dim: usize, seed: u64) -> Result<SkewPencil, QuadrupleError> {
    if n == 0 {
        return Err(QuadrupleError::EmptyPencil);
    }
    let kernel_dim = kernel_dim.min(n);
    let mut rng = random::seeded(seed);
    let m = random::hermitian_positive_definite(&mut rng, n);
    let u = random::unitary(&mut rng, n);
    let signs = random::complex_gaussian(&mut rng, n, 1);
    let mut lam = CMatrix::zeros(n, n);
    for i in kernel_dim..n {
        let z = signs[(i, 0)];
        let mag = 0.5 + z.im.abs();
        lam[(i, i)] = c(if z.re >= 0.0 { mag } else { -mag }, 0.0);
    }
    let t = &u * lam * u.adjoint();
    let s = random::skew_hermitian(&mut rng, n);
    let a = solve(&m, &(t * c(0.5, 0.0) + s))?;
    let core = u.columns(0, kernel_dim).into_owned();
    Ok(SkewPencil::new(m, a, core)?)
}
