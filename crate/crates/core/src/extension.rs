//! Extensions `A_Φ` of the core operator parametrized by contractions `Φ: H₋ → H₊`.
//!
//! `D(A_Φ) = {w : Φ Γ₋ w = Γ₊ w}` and `A_Φ w = A w`. The domain is stored
//! as an M-orthonormal basis and the operator as its compression
//! `B = basisᴴ M A basis`.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{
    self, hermitian_part_max, one_sided_distance, operator_norm, orthonormalize_weighted, singular_values,
    AlgebraError, CMatrix, CVector, DEFAULT_TOL,
};
use crate::io::MatrixJson;
use crate::pencil::{check_dissipative_on, PencilError};
use crate::quadruple::{BoundaryQuadruple, QuadrupleError};

/// Slack on `σ_max(Φ) ≤ 1`.
pub const CONTRACTION_TOL: f64 = 1e-9;
/// Tolerance of the extension certificate, relative to `max(1, ‖B‖)`.
pub const EXTENSION_TOL: f64 = 1e-9;
/// Largest principal-angle sine at which two domains count as equal.
pub const DOMAIN_EQUALITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Φ is not a contraction (σ_max = {sigma_max:.12})")]
    NotAContraction { sigma_max: f64 },
    #[error("Φ is not unitary")]
    NotUnitary,
    #[error("A is not dissipative on the given subspace (λ_max = {lambda_max:.3e})")]
    NotDissipativeOnS { lambda_max: f64 },
    #[error("the core is not contained in the given subspace (residual {residual:.3e})")]
    CoreNotContained { residual: f64 },
    #[error("extension certificate failed: {0}")]
    CertificateFailed(String),
    #[error(transparent)]
    Quadruple(#[from] QuadrupleError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A boundary coupling `Φ: ℂᵖ → ℂ^q` with `σ_max(Φ) ≤ 1 + tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    phi: CMatrix,
    tol: f64,
    sigma_max: f64,
    sigma_min: f64,
}

impl Contraction {
    pub fn new(phi: CMatrix) -> Result<Self, ExtensionError> {
        Self::with_tolerance(phi, CONTRACTION_TOL)
    }

    pub fn with_tolerance(phi: CMatrix, tol: f64) -> Result<Self, ExtensionError> {
        if !algebra::is_finite(&phi) {
            return Err(AlgebraError::NonFinite.into());
        }
        let s = singular_values(&phi);
        let sigma_max = s.first().copied().unwrap_or(0.0);
        // σ_min over the smaller side; vacuous (1) when that side is empty.
        let sigma_min = if phi.nrows().min(phi.ncols()) == 0 { 1.0 } else { *s.last().unwrap() };
        if sigma_max > 1.0 + tol {
            return Err(ExtensionError::NotAContraction { sigma_max });
        }
        Ok(Self { phi, tol, sigma_max, sigma_min })
    }

    /// The zero map `ℂᵖ → ℂ^q`.
    pub fn zero(q: usize, p: usize) -> Self {
        Self::new(CMatrix::zeros(q, p)).expect("zero is a contraction")
    }

    pub fn phi(&self) -> &CMatrix {
        &self.phi
    }

    pub fn p(&self) -> usize {
        self.phi.ncols()
    }

    pub fn q(&self) -> usize {
        self.phi.nrows()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// `ΦᴴΦ = I`: needs `p ≤ q` and every singular value at 1.
    pub fn is_isometry(&self) -> bool {
        self.p() <= self.q() && (self.p() == 0 || self.sigma_min >= 1.0 - self.tol)
    }

    pub fn is_unitary(&self) -> bool {
        self.p() == self.q() && self.is_isometry()
    }
}

/// Numbers certifying an extension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionCertificate {
    pub s: usize,
    pub expected_s: usize,
    /// `max ‖Φ gm w − gp w‖` over basis columns, relative to `max(1, ‖gm‖, ‖gp‖)`.
    pub constraint_residual: f64,
    /// Largest eigenvalue of `(B + Bᴴ)/2`.
    pub lambda_max_herm: f64,
    /// How far the core sticks out of the domain.
    pub core_residual: f64,
    /// `σ_min(I − B)`; positive means `I − B` is invertible.
    pub resolvent_sigma_min: f64,
    pub gen_norm: f64,
}

impl ExtensionCertificate {
    pub fn is_dissipative(&self) -> bool {
        self.lambda_max_herm <= EXTENSION_TOL * self.gen_norm.max(1.0)
    }

    fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.s != self.expected_s {
            out.push(format!("domain dimension {} != {}", self.s, self.expected_s));
        }
        if self.constraint_residual > EXTENSION_TOL {
            out.push(format!("boundary constraint residual {:.3e}", self.constraint_residual));
        }
        if !self.is_dissipative() {
            out.push(format!("Hermitian part eigenvalue {:.3e} > 0", self.lambda_max_herm));
        }
        if self.core_residual > DOMAIN_EQUALITY_TOL {
            out.push(format!("core not contained (residual {:.3e})", self.core_residual));
        }
        if self.s > 0 && self.resolvent_sigma_min < 0.5 {
            out.push(format!("I − B nearly singular (σ_min {:.3e})", self.resolvent_sigma_min));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Extension {
    quadruple: BoundaryQuadruple,
    phi: CMatrix,
    basis: CMatrix,
    gen: CMatrix,
    certificate: ExtensionCertificate,
}

impl Extension {
    pub fn quadruple(&self) -> &BoundaryQuadruple {
        &self.quadruple
    }

    pub fn phi(&self) -> &CMatrix {
        &self.phi
    }

    /// M-orthonormal basis of `D(A_Φ)` (n × s).
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Compressed generator `basisᴴ M A basis` (s × s).
    pub fn gen(&self) -> &CMatrix {
        &self.gen
    }

    pub fn certificate(&self) -> &ExtensionCertificate {
        &self.certificate
    }

    pub fn s(&self) -> usize {
        self.basis.ncols()
    }

    /// Ambient vector `basis · coords`.
    pub fn ambient(&self, coords: &CVector) -> CVector {
        &self.basis * coords
    }

    /// Coordinates of the M-orthogonal projection of `u` onto the domain.
    pub fn coords(&self, u: &CVector) -> CVector {
        self.basis.adjoint() * self.quadruple.pencil().weight() * u
    }

    pub fn report(&self) -> ExtensionReport {
        ExtensionReport {
            phi: MatrixJson::from(&self.phi),
            s: self.s(),
            lambda_max_herm: self.certificate.lambda_max_herm,
            unitary: is_unitary_generator(self),
            regime: classify(self.quadruple.p(), self.quadruple.q()),
        }
    }
}

/// Serializable summary of an extension.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub phi: MatrixJson,
    pub s: usize,
    pub lambda_max_herm: f64,
    pub unitary: bool,
    pub regime: Regime,
}

/// Builds `A_Φ` for a certified contraction.
///
/// Fails with [`ExtensionError::CertificateFailed`] if any extension
/// invariant does not hold, including invertibility of `I − B`.
pub fn build_extension(q: &BoundaryQuadruple, phi: &Contraction) -> Result<Extension, ExtensionError> {
    let e = build_extension_unchecked(q, phi.phi())?;
    let failures = e.certificate.failures();
    if !failures.is_empty() {
        return Err(ExtensionError::CertificateFailed(failures.join("; ")));
    }
    Ok(e)
}

/// Builds the restriction of `A` to `{Φ gm w = gp w}` for any `Φ`, without
/// requiring a contraction and without rejecting a failed certificate.
///
/// Meant for probing what happens outside the contraction set; the
/// certificate is still computed and available on the result.
pub fn build_extension_unchecked(q: &BoundaryQuadruple, phi: &CMatrix) -> Result<Extension, ExtensionError> {
    if phi.shape() != (q.q(), q.p()) {
        return Err(ExtensionError::DimensionMismatch(format!(
            "Φ must be {}x{}, got {}x{}",
            q.q(),
            q.p(),
            phi.nrows(),
            phi.ncols()
        )));
    }
    let pencil = q.pencil();
    let n = pencil.dim();
    let constraint = phi * q.gm() - q.gp();
    let null =
        if constraint.nrows() == 0 { CMatrix::identity(n, n) } else { algebra::null_space(&constraint, DEFAULT_TOL) };
    let basis = orthonormalize_weighted(&null, pencil.weight(), DEFAULT_TOL);
    let gen = pencil.compress(&basis);
    let certificate = certify(q, phi, &basis, &gen);
    Ok(Extension { quadruple: q.clone(), phi: phi.clone(), basis, gen, certificate })
}

fn certify(q: &BoundaryQuadruple, phi: &CMatrix, basis: &CMatrix, gen: &CMatrix) -> ExtensionCertificate {
    let pencil = q.pencil();
    let n = pencil.dim();
    let s = basis.ncols();
    let map_scale = operator_norm(q.gm()).max(operator_norm(q.gp())).max(1.0);
    let constraint_residual = if s == 0 || q.q() == 0 {
        0.0
    } else {
        let r = phi * q.gm() * basis - q.gp() * basis;
        (0..s).map(|j| r.column(j).norm()).fold(0.0, f64::max) / map_scale
    };
    let core = orthonormalize_weighted(pencil.core(), pencil.weight(), DEFAULT_TOL);
    let core_residual = one_sided_distance(&core, basis, pencil.weight());
    let resolvent_sigma_min =
        if s == 0 { 1.0 } else { *singular_values(&(CMatrix::identity(s, s) - gen)).last().unwrap() };
    ExtensionCertificate {
        s,
        expected_s: n - q.q(),
        constraint_residual,
        lambda_max_herm: hermitian_part_max(gen),
        core_residual,
        resolvent_sigma_min,
        gen_norm: operator_norm(gen),
    }
}

/// Recovers the contraction `Φ` of a dissipative extension from its domain.
///
/// `Φ` is defined on `gm·span(s)` by `Φ(gm w) = gp w` and extended by zero
/// on the orthogonal complement in `ℂᵖ`.
pub fn recover_contraction(q: &BoundaryQuadruple, s: &CMatrix) -> Result<Contraction, ExtensionError> {
    let pencil = q.pencil();
    if s.nrows() != pencil.dim() {
        return Err(ExtensionError::DimensionMismatch(format!(
            "subspace basis must have {} rows, got {}",
            pencil.dim(),
            s.nrows()
        )));
    }
    let qs = orthonormalize_weighted(s, pencil.weight(), DEFAULT_TOL);
    let core = orthonormalize_weighted(pencil.core(), pencil.weight(), DEFAULT_TOL);
    let core_residual = one_sided_distance(&core, &qs, pencil.weight());
    if core_residual > DOMAIN_EQUALITY_TOL {
        return Err(ExtensionError::CoreNotContained { residual: core_residual });
    }
    let report = check_dissipative_on(pencil, &qs, EXTENSION_TOL)?;
    if !report.pass {
        return Err(ExtensionError::NotDissipativeOnS { lambda_max: report.lambda_max });
    }
    let x = q.gm() * &qs;
    let y = q.gp() * &qs;
    // Round-off in gm·Q is measured against the maps, not against gm·Q itself.
    let scale = operator_norm(&q.stacked()) * operator_norm(&qs);
    let phi = &y * algebra::pinv_cutoff(&x, DEFAULT_TOL * scale);
    let contraction = Contraction::new(phi)?;
    let e = build_extension_unchecked(q, contraction.phi())?;
    let residual = one_sided_distance(&qs, e.basis(), pencil.weight());
    if residual > DOMAIN_EQUALITY_TOL {
        return Err(ExtensionError::CertificateFailed(format!(
            "recovered domain does not contain the subspace (residual {residual:.3e})"
        )));
    }
    Ok(contraction)
}

/// `‖B + Bᴴ‖ ≤ 1e-9·max(1, ‖B‖)`: the extension generates a unitary group.
pub fn is_unitary_generator(e: &Extension) -> bool {
    let g = e.gen();
    if g.is_empty() {
        return true;
    }
    operator_norm(&(g + g.adjoint())) <= EXTENSION_TOL * operator_norm(g).max(1.0)
}

/// When `p = q` and the generator is skew, the contraction recovered from the
/// domain must be unitary. `None` when the check does not apply.
pub fn unitary_cross_check(e: &Extension) -> Option<bool> {
    let q = e.quadruple();
    if q.p() != q.q() || !is_unitary_generator(e) {
        return None;
    }
    Some(recover_contraction(q, e.basis()).map(|c| c.is_unitary()).unwrap_or(false))
}

/// Whether two extensions of the same quadruple have the same domain.
pub fn extension_equal(e1: &Extension, e2: &Extension) -> bool {
    if e1.s() != e2.s() {
        return false;
    }
    let w = e1.quadruple().pencil().weight();
    algebra::subspace_distance(e1.basis(), e2.basis(), w) <= DOMAIN_EQUALITY_TOL
}

/// Which boundary maps vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `Γ₋ = Γ₊ = 0`: the closure of the core is already skew-adjoint.
    BothZero,
    /// `Γ₊ = 0`: `A` itself is the only m-dissipative extension.
    GammaPlusZero,
    /// `Γ₋ = 0`: the closure of the core is the only m-dissipative extension.
    GammaMinusZero,
    Generic,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::BothZero => "both zero",
            Regime::GammaPlusZero => "Γ₊=0",
            Regime::GammaMinusZero => "Γ₋=0",
            Regime::Generic => "generic",
        }
    }
}

pub fn classify(p: usize, q: usize) -> Regime {
    match (p, q) {
        (0, 0) => Regime::BothZero,
        (_, 0) => Regime::GammaPlusZero,
        (0, _) => Regime::GammaMinusZero,
        _ => Regime::Generic,
    }
}

#[derive(Debug, Clone)]
pub struct ExtremesReport {
    pub regime: Regime,
    pub p: usize,
    pub q: usize,
    /// A unitary `Φ` exists iff `p = q`.
    pub unitary_possible: bool,
    /// The single m-dissipative extension in the degenerate regimes.
    pub unique_extension: Option<Extension>,
}

pub fn enumerate_extremes(q: &BoundaryQuadruple) -> Result<ExtremesReport, ExtensionError> {
    let regime = classify(q.p(), q.q());
    let unique_extension = match regime {
        Regime::Generic => None,
        // Only one map exists between the spaces when either side is trivial.
        _ => Some(build_extension(q, &Contraction::zero(q.q(), q.p()))?),
    };
    Ok(ExtremesReport { regime, p: q.p(), q: q.q(), unitary_possible: q.p() == q.q(), unique_extension })
}
