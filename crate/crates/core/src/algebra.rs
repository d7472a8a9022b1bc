//! Dense complex linear algebra used throughout the crate.
//!
//! Everything is complex double precision. Real inputs are embedded with a
//! zero imaginary part. Tolerances are always passed explicitly; the
//! default relative rank tolerance is [`DEFAULT_TOL`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative tolerance for rank decisions and eigenvalue splits.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest admissible 1-norm of `t·B` in [`matrix_exp`].
pub const EXP_NORM_CAP: f64 = 1e4;

/// Relative Hermitian tolerance accepted by [`hermitian_geig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("exponent norm {norm:.3e} exceeds cap {cap:.1e}")]
    Overflow { norm: f64, cap: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a complex matrix from real row-major data.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
    CMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

/// Builds a complex vector from real data.
pub fn vec_from_real(data: &[f64]) -> CVector {
    CVector::from_iterator(data.len(), data.iter().map(|&x| c(x, 0.0)))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `‖M − Mᴴ‖_F / max(‖M‖_F, 1e-300)`; zero for the empty matrix.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let scale = m.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / scale
}

/// `(M + Mᴴ)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
///
/// The input is symmetrized before factorization; callers are responsible
/// for checking that it was Hermitian to begin with.
pub fn hermitian_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        normalize_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Rotates `v` so that its first non-negligible entry is real and positive.
fn normalize_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-6 * max).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Smallest and largest eigenvalue of the Hermitian part of `m`.
pub fn hermitian_part_extremes(m: &CMatrix) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let (vals, _) = hermitian_eig(&hermitian_part(m));
    (vals[0], vals[vals.len() - 1])
}

/// Largest eigenvalue of `(M + Mᴴ)/2`; `-∞` for the empty matrix.
pub fn hermitian_part_max(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return f64::NEG_INFINITY;
    }
    hermitian_part_extremes(m).1
}

/// Real spectrum and G-orthonormal eigenvectors of a Hermitian pencil `T x = λ G x`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Columns pair with `values`; `Xᴴ G X = I`.
    pub vectors: CMatrix,
}

/// Solves the generalized Hermitian eigenproblem `T x = λ G x` with `G ≻ 0`.
///
/// Reduction via `G = L Lᴴ` followed by a Hermitian eigensolve of
/// `L⁻¹ T L⁻ᴴ`. Eigenvalues come back ascending with `Xᴴ G X = I`.
pub fn hermitian_geig(t: &CMatrix, g: &CMatrix) -> Result<Spectrum> {
    let n = t.nrows();
    if t.ncols() != n || g.nrows() != n || g.ncols() != n {
        return Err(AlgebraError::DimensionMismatch {
            expected: format!("two {n}x{n} matrices"),
            got: format!("{}x{} and {}x{}", t.nrows(), t.ncols(), g.nrows(), g.ncols()),
        });
    }
    if !is_finite(t) || !is_finite(g) {
        return Err(AlgebraError::NonFinite);
    }
    for m in [t, g] {
        let residual = hermitian_residual(m);
        if residual > HERMITIAN_TOL {
            return Err(AlgebraError::NotHermitian { residual });
        }
    }
    if n == 0 {
        return Ok(Spectrum { values: Vec::new(), vectors: CMatrix::zeros(0, 0) });
    }
    let g = hermitian_part(g);
    // The complex Cholesky happily takes square roots of negative pivots,
    // so positivity is read off the diagonal of L.
    let l = g.clone().cholesky().map(|ch| ch.l()).filter(|l| {
        (0..n).all(|i| {
            let d = l[(i, i)];
            d.re > 0.0 && d.im.abs() <= 1e-12 * d.re && d.re.is_finite()
        })
    });
    let Some(l) = l else {
        let (vals, _) = hermitian_eig(&g);
        return Err(AlgebraError::NotPositiveDefinite { min_eigenvalue: vals[0] });
    };
    // C = L⁻¹ T L⁻ᴴ
    let lt_inv_t = l.solve_lower_triangular(&hermitian_part(t)).ok_or(AlgebraError::Singular)?;
    let reduced = l.solve_lower_triangular(&lt_inv_t.adjoint()).ok_or(AlgebraError::Singular)?.adjoint();
    let (values, y) = hermitian_eig(&reduced);
    // X = L⁻ᴴ Y
    let mut vectors = l.adjoint().solve_upper_triangular(&y).ok_or(AlgebraError::Singular)?;
    for j in 0..n {
        let mut col = vectors.column(j).into_owned();
        normalize_phase(&mut col);
        vectors.set_column(j, &col);
    }
    Ok(Spectrum { values, vectors })
}

/// Full singular value decomposition `M = U Σ Vᴴ` with `V` square (`cols × cols`).
///
/// Singular values are returned in descending order; only the leading
/// `min(rows, cols)` are meaningful, the remaining columns of `V` span the
/// trailing part of the domain.
pub struct FullSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn full_svd(m: &CMatrix) -> FullSvd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return FullSvd {
            u: CMatrix::identity(rows, rows),
            singular_values: Vec::new(),
            v: CMatrix::identity(cols, cols),
        };
    }
    // Pad with zero rows so the thin factorization returns all of V.
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let padded_rows = padded.nrows();
    let svd = padded.svd(true, true);
    let u_full = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᴴ");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut v = CMatrix::zeros(cols, k);
    let mut u = CMatrix::zeros(padded_rows, k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &v_t.row(src).adjoint());
        u.set_column(dst, &u_full.column(src));
        singular_values.push(svd.singular_values[src]);
    }
    let u = u.rows(0, rows).into_owned();
    singular_values.truncate(rows.min(cols));
    FullSvd { u, singular_values, v }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value; zero for empty matrices.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank: number of singular values above `tol·σ_max`.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > tol * smax).count(),
        _ => 0,
    }
}

/// Orthonormal basis (standard inner product) of the numerical null space of `m`.
///
/// A direction is kept when its singular value is at most `tol·‖M‖`.
/// The zero matrix returns the identity basis.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    assert!(tol > 0.0, "null_space tolerance must be positive");
    let cols = m.ncols();
    let svd = full_svd(m);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return CMatrix::identity(cols, cols);
    }
    let kept = svd.singular_values.iter().filter(|&&s| s > tol * smax).count();
    svd.v.columns(kept, cols - kept).into_owned()
}

/// Orthonormal basis of the null space, keeping singular values above an absolute cut-off.
pub fn null_space_cutoff(m: &CMatrix, cutoff: f64) -> CMatrix {
    let cols = m.ncols();
    let svd = full_svd(m);
    let kept = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    svd.v.columns(kept, cols - kept).into_owned()
}

/// Orthonormal basis (standard inner product) of the range of `m`.
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let svd = full_svd(m);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let kept = svd.singular_values.iter().filter(|&&s| s > tol * smax).count();
    svd.u.columns(0, kept).into_owned()
}

/// Moore–Penrose pseudo-inverse with relative cut-off `tol`.
pub fn pinv(m: &CMatrix, tol: f64) -> CMatrix {
    pinv_cutoff(m, tol * operator_norm(m))
}

/// Pseudo-inverse that drops singular values at or below the absolute `cutoff`.
pub fn pinv_cutoff(m: &CMatrix, cutoff: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    let svd = full_svd(m);
    let mut out = CMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let vk = svd.v.column(k);
            let uk = svd.u.column(k);
            out += (vk * uk.adjoint()) * c(1.0 / s, 0.0);
        }
    }
    out
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(AlgebraError::DimensionMismatch {
            expected: format!("square A and B with {} rows", a.nrows()),
            got: format!("{}x{} and {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols()),
        });
    }
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or(AlgebraError::Singular)?;
    if !is_finite(&x) {
        return Err(AlgebraError::Singular);
    }
    Ok(x)
}

/// `⟨u, v⟩_G = vᴴ G u`.
#[inline]
pub fn weighted_inner(u: &CVector, v: &CVector, gram: &CMatrix) -> C64 {
    (v.adjoint() * gram * u)[(0, 0)]
}

#[inline]
pub fn weighted_norm(u: &CVector, gram: &CMatrix) -> f64 {
    weighted_inner(u, u, gram).re.max(0.0).sqrt()
}

/// Gram–Schmidt against the Gram matrix `gram`, with one
/// re-orthogonalization pass.
///
/// Columns whose remaining norm falls below `tol` times their original
/// norm are dropped, so the output has at most as many columns as the
/// input and spans the same subspace up to that tolerance.
pub fn orthonormalize_weighted(basis: &CMatrix, gram: &CMatrix, tol: f64) -> CMatrix {
    let n = basis.nrows();
    let mut q: Vec<CVector> = Vec::with_capacity(basis.ncols());
    // `G q_k`, so projections are plain dot products.
    let mut gq: Vec<CVector> = Vec::with_capacity(basis.ncols());
    for j in 0..basis.ncols() {
        let mut v = basis.column(j).into_owned();
        let original = weighted_norm(&v, gram);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            let coeffs: Vec<C64> = gq.iter().map(|g| g.dotc(&v)).collect();
            for (qk, a) in q.iter().zip(coeffs) {
                v.axpy(-a, qk, c(1.0, 0.0));
            }
        }
        let gv = gram * &v;
        let norm = v.dotc(&gv).re.max(0.0).sqrt();
        if norm > tol * original {
            let scale = c(1.0 / norm, 0.0);
            q.push(v * scale);
            gq.push(gv * scale);
        }
    }
    let mut out = CMatrix::zeros(n, q.len());
    for (j, col) in q.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

/// Sine of the largest principal angle between `span(a)` and `span(b)`
/// in the `gram` inner product. Returns 1 when dimensions differ.
pub fn subspace_distance(a: &CMatrix, b: &CMatrix, gram: &CMatrix) -> f64 {
    let qa = orthonormalize_weighted(a, gram, DEFAULT_TOL);
    let qb = orthonormalize_weighted(b, gram, DEFAULT_TOL);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    one_sided_distance(&qa, &qb, gram).max(one_sided_distance(&qb, &qa, gram))
}

/// `‖(I − P_b) Q_a‖` for G-orthonormal `qa`, `qb`: how far `span(a)` sticks out of `span(b)`.
pub fn one_sided_distance(qa: &CMatrix, qb: &CMatrix, gram: &CMatrix) -> f64 {
    if qa.ncols() == 0 {
        return 0.0;
    }
    let residual = qa - qb * (qb.adjoint() * gram * qa);
    // G-norm of the residual operator: ‖G^{1/2} R‖₂ = sqrt(λ_max(Rᴴ G R)).
    let rgr = residual.adjoint() * gram * &residual;
    let (vals, _) = hermitian_eig(&rgr);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Eigenvalues of a general square matrix via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(AlgebraError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 0).ok_or(AlgebraError::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `e^{tB}` by scaling and squaring with the degree-13 diagonal Padé approximant.
///
/// Fails with [`AlgebraError::Overflow`] when `‖tB‖₁` exceeds [`EXP_NORM_CAP`].
pub fn matrix_exp(b: &CMatrix, t: f64) -> Result<CMatrix> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(AlgebraError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    if !t.is_finite() || !is_finite(b) {
        return Err(AlgebraError::NonFinite);
    }
    let a = b * c(t, 0.0);
    let norm = norm1(&a);
    if norm > EXP_NORM_CAP {
        return Err(AlgebraError::Overflow { norm, cap: EXP_NORM_CAP });
    }
    let ident = CMatrix::identity(n, n);
    if norm == 0.0 {
        return Ok(ident);
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * c(2f64.powi(-s), 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let p = |k: usize| c(PADE13[k], 0.0);
    let u_inner = &a6 * (&a6 * p(13) + &a4 * p(11) + &a2 * p(9)) + &a6 * p(7) + &a4 * p(5) + &a2 * p(3) + &ident * p(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * p(12) + &a4 * p(10) + &a2 * p(8)) + &a6 * p(6) + &a4 * p(4) + &a2 * p(2) + &ident * p(0);
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
