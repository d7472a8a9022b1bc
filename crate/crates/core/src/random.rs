//! Seeded random matrices for generators, sampling and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{c, full_svd, CMatrix, CVector};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent real and imaginary parts drawn from `N(0, 1/2)`.
pub fn complex_gaussian(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(s * re, s * im)
    })
}

pub fn complex_gaussian_vector(rng: &mut Rng, n: usize) -> CVector {
    complex_gaussian(rng, n, 1).column(0).into_owned()
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the phases of `R` removed.
pub fn unitary(rng: &mut Rng, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let qr = complex_gaussian(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Random Hermitian matrix `(Z + Zᴴ)/2`.
pub fn hermitian(rng: &mut Rng, n: usize) -> CMatrix {
    let z = complex_gaussian(rng, n, n);
    (&z + z.adjoint()) * c(0.5, 0.0)
}

/// Random skew-Hermitian matrix `(Z − Zᴴ)/2`.
pub fn skew_hermitian(rng: &mut Rng, n: usize) -> CMatrix {
    let z = complex_gaussian(rng, n, n);
    (&z - z.adjoint()) * c(0.5, 0.0)
}

/// Random Hermitian positive-definite matrix `ZᴴZ/n + I`.
pub fn hermitian_positive_definite(rng: &mut Rng, n: usize) -> CMatrix {
    let z = complex_gaussian(rng, n, n);
    let scale = 1.0 / n.max(1) as f64;
    let m = z.adjoint() * &z * c(scale, 0.0) + CMatrix::identity(n, n);
    (&m + m.adjoint()) * c(0.5, 0.0)
}

/// Random contraction `q × p`: Gaussian matrix with singular values clipped to `[0, 1]`.
pub fn contraction(rng: &mut Rng, q: usize, p: usize) -> CMatrix {
    let z = complex_gaussian(rng, q, p);
    clip_singular_values(&z, 0.0, 1.0)
}

/// Random matrix `q × p` with all singular values set to one (an isometry or co-isometry).
pub fn partial_isometry(rng: &mut Rng, q: usize, p: usize) -> CMatrix {
    let z = complex_gaussian(rng, q, p);
    clip_singular_values(&z, 1.0, 1.0)
}

/// Replaces each singular value `σ` of `m` by `clamp(σ, lo, hi)`.
pub fn clip_singular_values(m: &CMatrix, lo: f64, hi: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return m.clone();
    }
    let svd = full_svd(m);
    let mut out = CMatrix::zeros(rows, cols);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let clipped = s.clamp(lo, hi);
        out += svd.u.column(k) * svd.v.column(k).adjoint() * c(clipped, 0.0);
    }
    out
}
