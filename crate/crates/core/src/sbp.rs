//! Second-order summation-by-parts operators and the transport,
//! second-derivative and wave models built on them.
//!
//! Every model's Green identity holds to round-off, independently of the
//! grid size.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::algebra::{c, CMatrix};
use crate::bridge::{to_skew, BridgeError, SymmetricPencil};
use crate::io::ModelKind;
use crate::pencil::{PencilError, SkewPencil};
use crate::quadruple::{BoundaryQuadruple, QuadrupleError, QuadrupleKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbpError {
    #[error("grid too small: need at least {min} points, got {n}")]
    GridTooSmall { n: usize, min: usize },
    #[error("only order 2 is available, got {0}")]
    UnsupportedOrder(usize),
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("block dimension must be at least 1")]
    EmptyBlock,
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Quadruple(#[from] QuadrupleError),
}

/// Second-derivative block: `H·d2 = −m_pos + e_N d_b − e_0 d_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct D2Block {
    pub m_pos: DMatrix<f64>,
    pub d_a: DVector<f64>,
    pub d_b: DVector<f64>,
    pub d2: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub h: f64,
    /// Diagonal of the quadrature `H`.
    pub h_norm: DVector<f64>,
    pub d1: DMatrix<f64>,
    pub d2: Option<D2Block>,
}

impl SbpOperator {
    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.a + i as f64 * self.h).collect()
    }

    pub fn h_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.h_norm)
    }
}

/// Order-2 SBP operators on `n ≥ 4` equispaced points of `[a, b]`.
pub fn make_sbp(n: usize, a: f64, b: f64, order: usize) -> Result<SbpOperator, SbpError> {
    if order != 2 {
        return Err(SbpError::UnsupportedOrder(order));
    }
    if n < 4 {
        return Err(SbpError::GridTooSmall { n, min: 4 });
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(SbpError::InvalidInterval { a, b });
    }
    let last = n - 1;
    let h = (b - a) / last as f64;
    let mut h_norm = DVector::from_element(n, h);
    h_norm[0] = h / 2.0;
    h_norm[last] = h / 2.0;

    let mut d1 = DMatrix::zeros(n, n);
    d1[(0, 0)] = -1.0 / h;
    d1[(0, 1)] = 1.0 / h;
    d1[(last, last - 1)] = -1.0 / h;
    d1[(last, last)] = 1.0 / h;
    for i in 1..last {
        d1[(i, i - 1)] = -0.5 / h;
        d1[(i, i + 1)] = 0.5 / h;
    }

    let mut m_pos = DMatrix::zeros(n, n);
    for i in 0..last {
        m_pos[(i, i)] += 1.0 / h;
        m_pos[(i + 1, i + 1)] += 1.0 / h;
        m_pos[(i, i + 1)] -= 1.0 / h;
        m_pos[(i + 1, i)] -= 1.0 / h;
    }
    let mut d_a = DVector::zeros(n);
    d_a[0] = -1.5 / h;
    d_a[1] = 2.0 / h;
    d_a[2] = -0.5 / h;
    let mut d_b = DVector::zeros(n);
    d_b[last - 2] = 0.5 / h;
    d_b[last - 1] = -2.0 / h;
    d_b[last] = 1.5 / h;

    let mut hd2 = -&m_pos;
    for j in 0..n {
        hd2[(last, j)] += d_b[j];
        hd2[(0, j)] -= d_a[j];
    }
    let mut d2 = hd2;
    for i in 0..n {
        let w = h_norm[i];
        d2.row_mut(i).scale_mut(1.0 / w);
    }
    Ok(SbpOperator { n, a, b, h, h_norm, d1, d2: Some(D2Block { m_pos, d_a, d_b, d2 }) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    /// Block dimension of grid-function values.
    pub m: usize,
}

#[derive(Debug, Clone)]
pub struct SbpModel {
    pub pencil: Arc<SkewPencil>,
    pub quadruple: BoundaryQuadruple,
    pub kind: ModelKind,
    pub geometry: Geometry,
    pub op: SbpOperator,
    /// The symmetric operator `S` behind `A = iS` (second-derivative model only).
    pub symmetric: Option<SymmetricPencil>,
}

fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

fn kron_identity(m: &DMatrix<f64>, k: usize) -> CMatrix {
    let (r, cl) = m.shape();
    let mut out = CMatrix::zeros(r * k, cl * k);
    for i in 0..r {
        for j in 0..cl {
            let x = m[(i, j)];
            if x != 0.0 {
                for l in 0..k {
                    out[(i * k + l, j * k + l)] = c(x, 0.0);
                }
            }
        }
    }
    out
}

/// Unit coordinate vectors `e_i` for `i` in `range`, as columns.
fn unit_columns(n: usize, indices: impl Iterator<Item = usize>) -> CMatrix {
    let idx: Vec<usize> = indices.collect();
    let mut out = CMatrix::zeros(n, idx.len());
    for (col, &i) in idx.iter().enumerate() {
        out[(i, col)] = c(1.0, 0.0);
    }
    out
}

fn row(v: &DVector<f64>) -> CMatrix {
    CMatrix::from_fn(1, v.len(), |_, j| c(v[j], 0.0))
}

fn endpoint(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// `u_t = u_x` for `ℂᵐ`-valued grid functions on `[a, b]`, with
/// `Γ₋ u = u(a)` and `Γ₊ u = u(b)`.
pub fn transport_model(n: usize, m: usize, a: f64, b: f64) -> Result<SbpModel, SbpError> {
    if m == 0 {
        return Err(SbpError::EmptyBlock);
    }
    let op = make_sbp(n, a, b, 2)?;
    let last = n - 1;
    let weight = kron_identity(&op.h_matrix(), m);
    let a_max = kron_identity(&op.d1, m);
    let core = unit_columns(n * m, m..last * m);
    let pencil = Arc::new(SkewPencil::new(weight, a_max, core)?);
    let gm = kron_identity(&DMatrix::from_row_slice(1, n, endpoint(n, 0).as_slice()), m);
    let gp = kron_identity(&DMatrix::from_row_slice(1, n, endpoint(n, last).as_slice()), m);
    let quadruple = BoundaryQuadruple::new(pencil.clone(), gm, gp, QuadrupleKind::ModelExplicit)?;
    Ok(SbpModel {
        pencil,
        quadruple,
        kind: ModelKind::Transport,
        geometry: Geometry { a, b, n, m },
        op,
        symmetric: None,
    })
}

/// `A = i·d2` on `n ≥ 6` points, with
/// `Γ₋ u = √2/2 (u(a) + i d_a u, u(b) − i d_b u)` and
/// `Γ₊ u = √2/2 (u(a) − i d_a u, u(b) + i d_b u)`.
///
/// `Φ = −I` gives Dirichlet, `Φ = I` Neumann and the swap periodic
/// conditions.
pub fn second_derivative_model(n: usize, a: f64, b: f64) -> Result<SbpModel, SbpError> {
    if n < 6 {
        return Err(SbpError::GridTooSmall { n, min: 6 });
    }
    let op = make_sbp(n, a, b, 2)?;
    let last = n - 1;
    let blk = op.d2.as_ref().expect("order-2 operators carry a d2 block");
    let weight = complexify(&op.h_matrix());
    let s_max = complexify(&blk.d2);
    let core = unit_columns(n, 3..last - 2);
    let symmetric = SymmetricPencil::new(weight, s_max, core)?;
    let pencil = Arc::new(to_skew(&symmetric)?);

    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (ea, eb) = (row(&endpoint(n, 0)), row(&endpoint(n, last)));
    let (da, db) = (row(&blk.d_a), row(&blk.d_b));
    let i = c(0.0, 1.0);
    let mut gm = CMatrix::zeros(2, n);
    let mut gp = CMatrix::zeros(2, n);
    gm.set_row(0, &((&ea + &da * i) * c(r, 0.0)).row(0));
    gm.set_row(1, &((&eb - &db * i) * c(r, 0.0)).row(0));
    gp.set_row(0, &((&ea - &da * i) * c(r, 0.0)).row(0));
    gp.set_row(1, &((&eb + &db * i) * c(r, 0.0)).row(0));
    let quadruple = BoundaryQuadruple::new(pencil.clone(), gm, gp, QuadrupleKind::ModelExplicit)?;
    Ok(SbpModel {
        pencil,
        quadruple,
        kind: ModelKind::SecondDerivative,
        geometry: Geometry { a, b, n, m: 1 },
        op,
        symmetric: Some(symmetric),
    })
}

/// First-order wave system `(u₁, u₂)_t = (u₂', u₁')` with
/// `Γ± = (½u₁(a) ∓ u₂(a), ½u₁(b) ± u₂(b))`.
pub fn wave_model(n: usize, a: f64, b: f64) -> Result<SbpModel, SbpError> {
    let op = make_sbp(n, a, b, 2)?;
    let last = n - 1;
    let h = complexify(&op.h_matrix());
    let d1 = complexify(&op.d1);
    let mut weight = CMatrix::zeros(2 * n, 2 * n);
    weight.view_mut((0, 0), (n, n)).copy_from(&h);
    weight.view_mut((n, n), (n, n)).copy_from(&h);
    let mut a_max = CMatrix::zeros(2 * n, 2 * n);
    a_max.view_mut((0, n), (n, n)).copy_from(&d1);
    a_max.view_mut((n, 0), (n, n)).copy_from(&d1);
    let core = unit_columns(2 * n, (1..last).chain(n + 1..n + last));
    let pencil = Arc::new(SkewPencil::new(weight, a_max, core)?);

    let mut gm = CMatrix::zeros(2, 2 * n);
    let mut gp = CMatrix::zeros(2, 2 * n);
    gp[(0, 0)] = c(0.5, 0.0);
    gp[(0, n)] = c(-1.0, 0.0);
    gp[(1, last)] = c(0.5, 0.0);
    gp[(1, n + last)] = c(1.0, 0.0);
    gm[(0, 0)] = c(0.5, 0.0);
    gm[(0, n)] = c(1.0, 0.0);
    gm[(1, last)] = c(0.5, 0.0);
    gm[(1, n + last)] = c(-1.0, 0.0);
    let quadruple = BoundaryQuadruple::new(pencil.clone(), gm, gp, QuadrupleKind::ModelExplicit)?;
    Ok(SbpModel { pencil, quadruple, kind: ModelKind::Wave, geometry: Geometry { a, b, n, m: 1 }, op, symmetric: None })
}

pub fn build_model(kind: ModelKind, n: usize, m: usize, a: f64, b: f64) -> Result<SbpModel, SbpError> {
    match kind {
        ModelKind::Transport => transport_model(n, m, a, b),
        ModelKind::SecondDerivative => second_derivative_model(n, a, b),
        ModelKind::Wave => wave_model(n, a, b),
    }
}
