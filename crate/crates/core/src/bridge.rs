//! Symmetric operators `S` and their skew counterparts `iS`.
//!
//! Selfadjoint extensions of `S` are the extensions of `iS` with unitary
//! `Φ`; their compression `T̂ = −i·B` is Hermitian.

use std::cmp::Ordering;

use thiserror::Error;

use crate::algebra::{c, eigenvalues, hermitian_eig, operator_norm, CMatrix, C64};
use crate::extension::{build_extension, Contraction, Extension, ExtensionError};
use crate::io::{csv, fmt_f64};
use crate::pencil::{InnerSpace, PencilError, SkewPencil, PENCIL_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BridgeError {
    #[error("S is not symmetric on the core (residual {0:.3e})")]
    NotSymmetric(f64),
    #[error("Φ is not unitary")]
    NotUnitary,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("−i·B is not Hermitian (residual {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// `(M, S_max, core)` with `S` symmetric on the core.
#[derive(Debug, Clone)]
pub struct SymmetricPencil {
    space: InnerSpace,
    s_max: CMatrix,
    core: CMatrix,
}

impl SymmetricPencil {
    pub fn new(weight: CMatrix, s_max: CMatrix, core: CMatrix) -> Result<Self, BridgeError> {
        Self::from_space(InnerSpace::new(weight)?, s_max, core)
    }

    pub fn from_space(space: InnerSpace, s_max: CMatrix, core: CMatrix) -> Result<Self, BridgeError> {
        let n = space.dim();
        if s_max.shape() != (n, n) || core.nrows() != n {
            return Err(BridgeError::DimensionMismatch(format!(
                "space of dim {n}, s_max {:?}, core {:?}",
                s_max.shape(),
                core.shape()
            )));
        }
        let sp = Self { space, s_max, core };
        let scale = (operator_norm(sp.space.weight()) * operator_norm(&sp.s_max)).max(f64::MIN_POSITIVE);
        let residual = operator_norm(&(sp.symmetric_form() * &sp.core)) / scale;
        if residual > PENCIL_TOL {
            return Err(BridgeError::NotSymmetric(residual));
        }
        Ok(sp)
    }

    pub fn space(&self) -> &InnerSpace {
        &self.space
    }

    pub fn s_max(&self) -> &CMatrix {
        &self.s_max
    }

    pub fn core(&self) -> &CMatrix {
        &self.core
    }

    /// `M S − Sᴴ M`, the matrix of `⟨Su, v⟩ − ⟨u, Sv⟩`.
    pub fn symmetric_form(&self) -> CMatrix {
        let ms = self.space.weight() * &self.s_max;
        &ms - ms.adjoint()
    }
}

/// The skew pencil `iS` on the same space and core.
pub fn to_skew(sp: &SymmetricPencil) -> Result<SkewPencil, PencilError> {
    SkewPencil::from_space(sp.space.clone(), sp.s_max() * c(0.0, 1.0), sp.core.clone())
}

/// Converts a unitary `Ψ: H₊ → H₋` (relation `Ψ Γ₊ w = Γ₋ w`) into the
/// library's orientation `Φ = Ψ⁻¹ = Ψᴴ: H₋ → H₊`.
pub fn from_plus_to_minus(psi: &CMatrix) -> Result<Contraction, BridgeError> {
    let phi = Contraction::new(psi.adjoint()).map_err(|_| BridgeError::NotUnitary)?;
    if !phi.is_unitary() {
        return Err(BridgeError::NotUnitary);
    }
    Ok(phi)
}

#[derive(Debug, Clone)]
pub struct SelfAdjointExtension {
    pub extension: Extension,
    /// `−i·B`, Hermitian.
    pub t_hat: CMatrix,
    /// Eigenvalues of `T̂`, descending.
    pub spectrum: Vec<f64>,
    pub hermitian_residual: f64,
}

/// Builds the extension for a unitary `Φ` and certifies that `−i·B` is
/// Hermitian.
pub fn selfadjoint_extension(
    q: &crate::quadruple::BoundaryQuadruple,
    phi: &Contraction,
) -> Result<SelfAdjointExtension, BridgeError> {
    if q.p() != q.q() {
        return Err(BridgeError::DimensionMismatch(format!("p = {} but q = {}", q.p(), q.q())));
    }
    if phi.p() != q.p() || phi.q() != q.q() {
        return Err(BridgeError::DimensionMismatch(format!(
            "Φ must be {}x{}, got {}x{}",
            q.q(),
            q.p(),
            phi.q(),
            phi.p()
        )));
    }
    if !phi.is_unitary() {
        return Err(BridgeError::NotUnitary);
    }
    let extension = build_extension(q, phi)?;
    let t_hat = extension.gen() * c(0.0, -1.0);
    let hermitian_residual = operator_norm(&(&t_hat - t_hat.adjoint())) / operator_norm(&t_hat).max(1.0);
    if hermitian_residual > crate::extension::EXTENSION_TOL {
        return Err(BridgeError::NotSelfAdjoint(hermitian_residual));
    }
    let sym = (&t_hat + t_hat.adjoint()) * c(0.5, 0.0);
    let (mut spectrum, _) = hermitian_eig(&sym);
    spectrum.reverse();
    Ok(SelfAdjointExtension { extension, t_hat, spectrum, hermitian_residual })
}

/// Eigenvalues of `scale·B`, sorted by descending real part then descending
/// imaginary part.
pub fn scaled_spectrum(e: &Extension, scale: C64) -> Result<Vec<C64>, crate::algebra::AlgebraError> {
    let mut ev = eigenvalues(&(e.gen() * scale))?;
    ev.sort_by(|x, y| {
        y.re.partial_cmp(&x.re).unwrap_or(Ordering::Equal).then(y.im.partial_cmp(&x.im).unwrap_or(Ordering::Equal))
    });
    Ok(ev)
}

/// CSV with columns `k, re_lambda, im_lambda`.
pub fn spectrum_csv(values: &[C64]) -> String {
    let header = ["k", "re_lambda", "im_lambda"].map(String::from);
    csv(&header, values.iter().enumerate().map(|(k, z)| vec![k.to_string(), fmt_f64(z.re), fmt_f64(z.im)]))
}
