//! Skew pencils: a maximal operator together with a core domain on a
//! weighted inner-product space, and the dissipativity checks that act on them.

use thiserror::Error;

use crate::algebra::{
    self, c, hermitian_eig, hermitian_part, hermitian_residual, operator_norm, orthonormalize_weighted, AlgebraError,
    CMatrix, CVector, DEFAULT_TOL,
};
use crate::random;

/// Tolerance for the pencil invariants, relative to `‖M‖·‖A‖`.
pub const PENCIL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PencilError {
    #[error("weight matrix is not Hermitian (relative residual {0:.3e})")]
    WeightNotHermitian(f64),
    #[error("weight matrix is not positive definite")]
    WeightNotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("core basis has rank {rank} < {cols} columns")]
    CoreRankDeficient { rank: usize, cols: usize },
    #[error("boundary form does not vanish on the core (residual {0:.3e})")]
    CoreNotInKernel(f64),
    #[error("subspace basis is rank deficient")]
    RankDeficientBasis,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `ℂⁿ` with the inner product `⟨u, v⟩ = vᴴ M u`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSpace {
    weight: CMatrix,
}

impl InnerSpace {
    pub fn new(weight: CMatrix) -> Result<Self, PencilError> {
        if weight.nrows() != weight.ncols() || weight.nrows() == 0 {
            return Err(PencilError::DimensionMismatch(format!(
                "weight must be square and non-empty, got {}x{}",
                weight.nrows(),
                weight.ncols()
            )));
        }
        if !algebra::is_finite(&weight) {
            return Err(AlgebraError::NonFinite.into());
        }
        let residual = hermitian_residual(&weight);
        if residual > algebra::HERMITIAN_TOL {
            return Err(PencilError::WeightNotHermitian(residual));
        }
        let weight = hermitian_part(&weight);
        let (vals, _) = hermitian_eig(&weight);
        if vals[0] <= 0.0 {
            return Err(PencilError::WeightNotPositiveDefinite);
        }
        Ok(Self { weight })
    }

    pub fn euclidean(n: usize) -> Self {
        Self { weight: CMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn weight(&self) -> &CMatrix {
        &self.weight
    }

    pub fn inner(&self, u: &CVector, v: &CVector) -> algebra::C64 {
        algebra::weighted_inner(u, v, &self.weight)
    }

    pub fn norm(&self, u: &CVector) -> f64 {
        algebra::weighted_norm(u, &self.weight)
    }
}

/// A maximal operator `A` with a core domain `D(A₀) = span(core)` such that
/// the boundary form `T = M A + Aᴴ M` vanishes on the core.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewPencil {
    space: InnerSpace,
    a_max: CMatrix,
    core: CMatrix,
}

impl SkewPencil {
    pub fn new(weight: CMatrix, a_max: CMatrix, core: CMatrix) -> Result<Self, PencilError> {
        Self::from_space(InnerSpace::new(weight)?, a_max, core)
    }

    pub fn from_space(space: InnerSpace, a_max: CMatrix, core: CMatrix) -> Result<Self, PencilError> {
        let n = space.dim();
        if a_max.shape() != (n, n) {
            return Err(PencilError::DimensionMismatch(format!(
                "a_max must be {n}x{n}, got {}x{}",
                a_max.nrows(),
                a_max.ncols()
            )));
        }
        if core.nrows() != n {
            return Err(PencilError::DimensionMismatch(format!("core must have {n} rows, got {}", core.nrows())));
        }
        if !algebra::is_finite(&a_max) || !algebra::is_finite(&core) {
            return Err(AlgebraError::NonFinite.into());
        }
        let pencil = Self { space, a_max, core };
        let k = pencil.core.ncols();
        if k > 0 {
            let r = algebra::rank(&pencil.core, DEFAULT_TOL);
            if r < k {
                return Err(PencilError::CoreRankDeficient { rank: r, cols: k });
            }
            let residual = pencil.core_residual();
            if residual > PENCIL_TOL {
                return Err(PencilError::CoreNotInKernel(residual));
            }
        }
        Ok(pencil)
    }

    /// Worked two-dimensional example: `M = I`, `A = [[0,1],[1,0]]`, empty core.
    pub fn worked_example() -> Self {
        Self {
            space: InnerSpace::euclidean(2),
            a_max: algebra::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            core: CMatrix::zeros(2, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &InnerSpace {
        &self.space
    }

    pub fn weight(&self) -> &CMatrix {
        self.space.weight()
    }

    pub fn a_max(&self) -> &CMatrix {
        &self.a_max
    }

    pub fn core(&self) -> &CMatrix {
        &self.core
    }

    /// `T = M A + Aᴴ M`, so that `b(u, v) = vᴴ T u`. Exactly Hermitian.
    pub fn boundary_form(&self) -> CMatrix {
        let ma = self.weight() * &self.a_max;
        &ma + ma.adjoint()
    }

    /// Graph-norm Gram matrix `G = M + Aᴴ M A`.
    pub fn graph_gram(&self) -> CMatrix {
        let g = self.weight() + self.a_max.adjoint() * self.weight() * &self.a_max;
        hermitian_part(&g)
    }

    /// `b(u, v)` for a pair of vectors.
    pub fn boundary_pairing(&self, u: &CVector, v: &CVector) -> algebra::C64 {
        (v.adjoint() * self.boundary_form() * u)[(0, 0)]
    }

    /// Orthonormal basis of `ker T`, the discrete closure domain.
    ///
    /// The cut-off is `tol·‖M‖‖A‖`, so a form that vanishes up to round-off
    /// has the whole space as kernel.
    pub fn closure_kernel(&self, tol: f64) -> CMatrix {
        let scale = operator_norm(self.weight()) * operator_norm(&self.a_max);
        algebra::null_space_cutoff(&self.boundary_form(), tol * scale)
    }

    /// `‖T·core‖ / (‖M‖‖A‖‖core‖)`, zero for an empty core.
    pub fn core_residual(&self) -> f64 {
        if self.core.ncols() == 0 {
            return 0.0;
        }
        let scale = operator_norm(self.weight()) * operator_norm(&self.a_max) * operator_norm(&self.core);
        if scale == 0.0 {
            return 0.0;
        }
        operator_norm(&(self.boundary_form() * &self.core)) / scale
    }

    /// Reports whether `span(core)` is strictly smaller than `ker T`.
    pub fn core_deficit(&self, tol: f64) -> usize {
        self.closure_kernel(tol).ncols().saturating_sub(self.core.ncols())
    }

    /// The pencil of `−A₀`: same space and core, `a_max` negated.
    pub fn negated(&self) -> Self {
        Self { space: self.space.clone(), a_max: -&self.a_max, core: self.core.clone() }
    }

    /// Compressed operator `Qᴴ M A Q` for an M-orthonormal `Q`.
    pub fn compress(&self, q: &CMatrix) -> CMatrix {
        q.adjoint() * self.weight() * &self.a_max * q
    }
}

/// Outcome of [`check_skew_symmetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct SkewReport {
    pub core_dim: usize,
    /// `max |Re⟨A₀u, u⟩|` over M-orthonormal core probes.
    pub probe_residual: f64,
    /// `‖Qᴴ T Q‖₂` for an M-orthonormal core basis `Q`.
    pub form_residual: f64,
    pub residual: f64,
    pub pass: bool,
}

/// Skew-symmetry of `A₀ = A|span(core)`, checked on probes and on the compressed boundary form.
pub fn check_skew_symmetric(p: &SkewPencil, tol: f64) -> SkewReport {
    let q = orthonormalize_weighted(p.core(), p.weight(), DEFAULT_TOL);
    if q.ncols() == 0 {
        return SkewReport { core_dim: 0, probe_residual: 0.0, form_residual: 0.0, residual: 0.0, pass: true };
    }
    let mut probe_residual: f64 = 0.0;
    let a = p.a_max();
    for j in 0..q.ncols() {
        let u = q.column(j).into_owned();
        let au = a * &u;
        probe_residual = probe_residual.max(p.space().inner(&au, &u).re.abs());
    }
    let form_residual = operator_norm(&(q.adjoint() * p.boundary_form() * &q));
    let residual = probe_residual.max(form_residual);
    let scale = operator_norm(p.weight()) * operator_norm(a);
    SkewReport { core_dim: q.ncols(), probe_residual, form_residual, residual, pass: residual <= tol * scale.max(1.0) }
}

/// Outcome of [`check_dissipative_on`].
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityReport {
    pub dim: usize,
    /// Largest eigenvalue of the Hermitian part of the compressed operator.
    pub lambda_max: f64,
    /// `min ‖(I − tA)x‖² / ‖x‖²` over the resolvent probes.
    pub min_resolvent_ratio: f64,
    /// Whether some probe showed `‖(I − tA)x‖ < ‖x‖`.
    pub resolvent_violated: bool,
    pub pass: bool,
}

impl DissipativityReport {
    /// The numerical-range test and the resolvent test agree.
    pub fn consistent(&self) -> bool {
        self.pass != self.resolvent_violated
    }
}

const RESOLVENT_TIMES: [f64; 3] = [0.1, 1.0, 10.0];
const RESOLVENT_PROBES: usize = 100;
const RESOLVENT_SEED: u64 = 0x5eed_d155;

/// Checks `Re⟨Ax, x⟩ ≤ 0` on `span(s)`.
///
/// The verdict comes from the numerical range of the compressed operator.
/// As an independent cross-check, `‖(I − tA)x‖ ≥ ‖x‖` is probed on 100
/// random vectors at `t ∈ {0.1, 1, 10}` and on the maximizing direction at
/// the step that minimizes the left-hand side.
pub fn check_dissipative_on(p: &SkewPencil, s: &CMatrix, tol: f64) -> Result<DissipativityReport, PencilError> {
    if s.nrows() != p.dim() {
        return Err(PencilError::DimensionMismatch(format!(
            "subspace basis must have {} rows, got {}",
            p.dim(),
            s.nrows()
        )));
    }
    let q = orthonormalize_weighted(s, p.weight(), DEFAULT_TOL);
    if q.ncols() < s.ncols() {
        return Err(PencilError::RankDeficientBasis);
    }
    if q.ncols() == 0 {
        return Ok(DissipativityReport {
            dim: 0,
            lambda_max: f64::NEG_INFINITY,
            min_resolvent_ratio: 1.0,
            resolvent_violated: false,
            pass: true,
        });
    }
    let gen = p.compress(&q);
    let (vals, vecs) = hermitian_eig(&hermitian_part(&gen));
    let lambda_max = *vals.last().unwrap();
    let scale = operator_norm(&gen).max(1.0);

    let n = p.dim();
    let ident = CMatrix::identity(n, n);
    let ratio = |x: &CVector, t: f64| {
        let y = (&ident - p.a_max() * c(t, 0.0)) * x;
        let nx = p.space().norm(x);
        (p.space().norm(&y) / nx).powi(2)
    };
    let mut min_ratio = f64::INFINITY;
    let mut rng = random::seeded(RESOLVENT_SEED);
    for _ in 0..RESOLVENT_PROBES {
        let z = random::complex_gaussian_vector(&mut rng, q.ncols());
        let x = &q * z;
        for t in RESOLVENT_TIMES {
            min_ratio = min_ratio.min(ratio(&x, t));
        }
    }
    // ‖x − tAx‖² = 1 − 2tλ + t²‖Ax‖² is smallest at t = λ/‖Ax‖².
    let x_top = &q * vecs.column(vecs.ncols() - 1);
    let ax_norm2 = p.space().norm(&(p.a_max() * &x_top)).powi(2);
    if lambda_max > 0.0 && ax_norm2 > 0.0 {
        min_ratio = min_ratio.min(ratio(&x_top, lambda_max / ax_norm2));
    }
    Ok(DissipativityReport {
        dim: q.ncols(),
        lambda_max,
        min_resolvent_ratio: min_ratio,
        resolvent_violated: min_ratio < 1.0 - 1e-10,
        pass: lambda_max <= tol * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{from_real, vec_from_real};

    #[test]
    fn worked_boundary_form_and_gram() {
        let p = SkewPencil::worked_example();
        assert_eq!(p.boundary_form(), from_real(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        assert_eq!(p.graph_gram(), from_real(2, 2, &[2.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn skew_hermitian_operator_has_zero_form() {
        let a = from_real(3, 3, &[0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0]);
        let p = SkewPencil::new(CMatrix::identity(3, 3), a, CMatrix::identity(3, 3)).unwrap();
        assert!(p.boundary_form().iter().all(|z| z.norm() < 1e-15));
        assert!(check_skew_symmetric(&p, 1e-9).pass);
    }

    #[test]
    fn graph_gram_of_zero_and_unitary() {
        let m = from_real(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let p = SkewPencil::new(m.clone(), CMatrix::zeros(2, 2), CMatrix::identity(2, 2)).unwrap();
        assert_eq!(p.graph_gram(), m);
        let u = from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let p = SkewPencil::new(CMatrix::identity(2, 2), u, CMatrix::zeros(2, 0)).unwrap();
        assert_eq!(p.graph_gram(), CMatrix::identity(2, 2) * c(2.0, 0.0));
    }

    #[test]
    fn skew_check_examples() {
        let p = SkewPencil::worked_example();
        assert!(check_skew_symmetric(&p, 1e-9).pass);
        // Bypass the constructor: the full space is not a valid core here.
        let full = SkewPencil { core: CMatrix::identity(2, 2), ..p };
        let report = check_skew_symmetric(&full, 1e-9);
        assert!(!report.pass);
        assert!((report.residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constructor_rejects_core_outside_kernel() {
        let err = SkewPencil::new(
            CMatrix::identity(2, 2),
            from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            from_real(2, 1, &[1.0, 0.0]),
        )
        .unwrap_err();
        assert!(matches!(err, PencilError::CoreNotInKernel(_)));
        let err = SkewPencil::new(from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]), CMatrix::zeros(2, 2), CMatrix::zeros(2, 0))
            .unwrap_err();
        assert_eq!(err, PencilError::WeightNotPositiveDefinite);
    }

    #[test]
    fn dissipativity_examples() {
        let p = SkewPencil::worked_example();
        let bad = check_dissipative_on(&p, &from_real(2, 1, &[1.0, 1.0]), 1e-9).unwrap();
        assert!(!bad.pass && (bad.lambda_max - 1.0).abs() < 1e-12);
        assert!(bad.resolvent_violated);
        let good = check_dissipative_on(&p, &from_real(2, 1, &[1.0, -1.0]), 1e-9).unwrap();
        assert!(good.pass && (good.lambda_max + 1.0).abs() < 1e-12);
        assert!(good.consistent());
        // eigenvector of A with eigenvalue −1
        let x = vec_from_real(&[1.0, -1.0]);
        let ax = p.a_max() * &x;
        assert!((ax + x).norm() < 1e-15);
        let err = check_dissipative_on(&p, &from_real(2, 2, &[1.0, 2.0, 1.0, 2.0]), 1e-9).unwrap_err();
        assert_eq!(err, PencilError::RankDeficientBasis);
    }
}
