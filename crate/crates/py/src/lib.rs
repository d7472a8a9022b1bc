//! Python bindings: pencils, quadruples, extensions, trajectories and the SBP models.
//!
//! Matrices cross the boundary as lists of rows of Python `complex` (real
//! numbers and numpy rows are accepted on input).

use std::fmt::Display;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dissipgen::algebra::{CMatrix, CVector, C64};
use dissipgen::bridge;
use dissipgen::extension::{self, Contraction, Extension};
use dissipgen::io::{PencilJson, QuadrupleJson};
use dissipgen::pencil::{check_skew_symmetric, SkewPencil};
use dissipgen::quadruple::{self as quad, BoundaryQuadruple, QuadrupleKind};
use dissipgen::sbp::{self, SbpModel};
use dissipgen::semigroup::{self, Trajectory};

type Rows = Vec<Vec<C64>>;

fn value_err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: &Rows) -> PyResult<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_row_iterator(r, c, rows.iter().flatten().copied()))
}

fn from_matrix(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn to_vector(v: &[C64]) -> CVector {
    CVector::from_column_slice(v)
}

#[pyclass(name = "Pencil", module = "dissipgen", frozen)]
struct PyPencil {
    inner: Arc<SkewPencil>,
}

#[pymethods]
impl PyPencil {
    /// `core` lists the core basis as an `n × k` matrix; `None` means an empty core.
    #[new]
    #[pyo3(signature = (weight, a_max, core=None))]
    fn new(weight: Rows, a_max: Rows, core: Option<Rows>) -> PyResult<Self> {
        let w = to_matrix(&weight)?;
        let core = match core {
            Some(rows) if !rows.is_empty() => to_matrix(&rows)?,
            _ => CMatrix::zeros(w.nrows(), 0),
        };
        let p = SkewPencil::new(w, to_matrix(&a_max)?, core).map_err(value_err)?;
        Ok(Self { inner: Arc::new(p) })
    }

    #[staticmethod]
    #[pyo3(signature = (k0, kp, km, seed=0))]
    fn synth(k0: usize, kp: usize, km: usize, seed: u64) -> PyResult<Self> {
        let p = quad::synth_pencil(k0, kp, km, seed).map_err(value_err)?;
        Ok(Self { inner: Arc::new(p) })
    }

    #[staticmethod]
    #[pyo3(signature = (n, kernel_dim, seed=0))]
    fn random(n: usize, kernel_dim: usize, seed: u64) -> PyResult<Self> {
        let p = quad::random_pencil(n, kernel_dim, seed).map_err(value_err)?;
        Ok(Self { inner: Arc::new(p) })
    }

    #[staticmethod]
    fn worked_example() -> Self {
        Self { inner: Arc::new(SkewPencil::worked_example()) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: PencilJson = serde_json::from_str(text).map_err(value_err)?;
        Ok(Self { inner: Arc::new(doc.to_pencil().map_err(value_err)?) })
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PencilJson::from(self.inner.as_ref())).expect("pencil serializes")
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn weight(&self) -> Rows {
        from_matrix(self.inner.weight())
    }

    #[getter]
    fn a_max(&self) -> Rows {
        from_matrix(self.inner.a_max())
    }

    #[getter]
    fn core(&self) -> Rows {
        from_matrix(self.inner.core())
    }

    fn boundary_form(&self) -> Rows {
        from_matrix(&self.inner.boundary_form())
    }

    fn graph_gram(&self) -> Rows {
        from_matrix(&self.inner.graph_gram())
    }

    #[pyo3(signature = (tol=1e-9))]
    fn closure_kernel(&self, tol: f64) -> Rows {
        from_matrix(&self.inner.closure_kernel(tol))
    }

    #[pyo3(signature = (tol=1e-9))]
    fn is_skew_symmetric(&self, tol: f64) -> bool {
        check_skew_symmetric(&self.inner, tol).pass
    }

    fn __repr__(&self) -> String {
        format!("Pencil(dim={}, core_dim={})", self.inner.dim(), self.inner.core().ncols())
    }
}

#[pyclass(name = "Quadruple", module = "dissipgen", frozen)]
struct PyQuadruple {
    inner: BoundaryQuadruple,
}

#[pymethods]
impl PyQuadruple {
    #[new]
    fn new(pencil: &PyPencil, gm: Rows, gp: Rows) -> PyResult<Self> {
        let n = pencil.inner.dim();
        let shape = |rows: &Rows| -> PyResult<CMatrix> {
            if rows.is_empty() {
                Ok(CMatrix::zeros(0, n))
            } else {
                to_matrix(rows)
            }
        };
        let q = BoundaryQuadruple::new(pencil.inner.clone(), shape(&gm)?, shape(&gp)?, QuadrupleKind::Given)
            .map_err(value_err)?;
        Ok(Self { inner: q })
    }

    #[staticmethod]
    #[pyo3(signature = (pencil, tol=1e-9))]
    fn from_form(pencil: &PyPencil, tol: f64) -> PyResult<Self> {
        Ok(Self { inner: quad::quadruple_from_form(pencil.inner.clone(), tol).map_err(value_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (pencil, tol=1e-9))]
    fn from_deficiency(pencil: &PyPencil, tol: f64) -> PyResult<Self> {
        Ok(Self { inner: quad::quadruple_from_deficiency(pencil.inner.clone(), tol).map_err(value_err)? })
    }

    #[staticmethod]
    fn from_triple(pencil: &PyPencil, g1: Rows, g2: Rows) -> PyResult<Self> {
        let q = quad::from_triple(pencil.inner.clone(), &to_matrix(&g1)?, &to_matrix(&g2)?).map_err(value_err)?;
        Ok(Self { inner: q })
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn gm(&self) -> Rows {
        from_matrix(self.inner.gm())
    }

    #[getter]
    fn gp(&self) -> Rows {
        from_matrix(self.inner.gp())
    }

    #[getter]
    fn pencil(&self) -> PyPencil {
        PyPencil { inner: self.inner.pencil_arc().clone() }
    }

    #[getter]
    fn regime(&self) -> &'static str {
        extension::classify(self.inner.p(), self.inner.q()).label()
    }

    fn green_residual(&self) -> f64 {
        self.inner.green_residual()
    }

    /// `(name, residual, tolerance, pass)` for each invariant.
    #[pyo3(signature = (tol=1e-9))]
    fn verify(&self, tol: f64) -> Vec<(String, f64, f64, bool)> {
        self.inner.verify(tol).into_iter().map(|c| (c.name, c.residual, c.tolerance, c.pass)).collect()
    }

    #[pyo3(signature = (tol=1e-9))]
    fn is_valid(&self, tol: f64) -> bool {
        self.inner.is_valid(tol)
    }

    #[pyo3(signature = (tol=1e-9))]
    fn closure_space(&self, tol: f64) -> Rows {
        from_matrix(&quad::closure_space(&self.inner, tol))
    }

    fn interpolate(&self, xm: Vec<C64>, xp: Vec<C64>) -> PyResult<Vec<C64>> {
        let w = quad::interpolate(&self.inner, &to_vector(&xm), &to_vector(&xp)).map_err(value_err)?;
        Ok(w.iter().copied().collect())
    }

    fn to_triple(&self) -> PyResult<(Rows, Rows)> {
        let t = quad::to_triple(&self.inner).map_err(value_err)?;
        Ok((from_matrix(&t.g1), from_matrix(&t.g2)))
    }

    #[pyo3(signature = (samples=50, seed=0))]
    fn triple_identity_residual(&self, samples: usize, seed: u64) -> PyResult<f64> {
        let t = quad::to_triple(&self.inner).map_err(value_err)?;
        Ok(quad::triple_identity_residual(&self.inner, &t, samples, seed))
    }

    fn is_isomorphic_to(&self, other: &PyQuadruple) -> bool {
        quad::quadruple_iso(&self.inner, &other.inner, 1e-9).is_ok()
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&QuadrupleJson::inline(&self.inner)).expect("quadruple serializes")
    }

    fn __repr__(&self) -> String {
        format!("Quadruple(p={}, q={}, dim={})", self.inner.p(), self.inner.q(), self.inner.pencil().dim())
    }
}

#[pyclass(name = "Extension", module = "dissipgen", frozen)]
struct PyExtension {
    inner: Extension,
}

#[pymethods]
impl PyExtension {
    /// `phi` maps `ℂᵖ → ℂ^q`; `None` is the zero map.
    #[new]
    #[pyo3(signature = (quadruple, phi=None))]
    fn new(quadruple: &PyQuadruple, phi: Option<Rows>) -> PyResult<Self> {
        let q = &quadruple.inner;
        let phi = match phi {
            Some(rows) if !rows.is_empty() => Contraction::new(to_matrix(&rows)?).map_err(value_err)?,
            _ => Contraction::zero(q.q(), q.p()),
        };
        Ok(Self { inner: extension::build_extension(q, &phi).map_err(value_err)? })
    }

    #[getter]
    fn phi(&self) -> Rows {
        from_matrix(self.inner.phi())
    }

    #[getter]
    fn basis(&self) -> Rows {
        from_matrix(self.inner.basis())
    }

    #[getter]
    fn gen(&self) -> Rows {
        from_matrix(self.inner.gen())
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s()
    }

    #[getter]
    fn lambda_max_herm(&self) -> f64 {
        self.inner.certificate().lambda_max_herm
    }

    #[getter]
    fn quadruple(&self) -> PyQuadruple {
        PyQuadruple { inner: self.inner.quadruple().clone() }
    }

    fn is_dissipative(&self) -> bool {
        self.inner.certificate().is_dissipative()
    }

    fn is_unitary_generator(&self) -> bool {
        extension::is_unitary_generator(&self.inner)
    }

    fn recover_contraction(&self) -> PyResult<Rows> {
        let c = extension::recover_contraction(self.inner.quadruple(), self.inner.basis()).map_err(value_err)?;
        Ok(from_matrix(c.phi()))
    }

    fn same_domain(&self, other: &PyExtension) -> bool {
        extension::extension_equal(&self.inner, &other.inner)
    }

    /// Eigenvalues of the generator, by descending real part.
    fn spectrum(&self) -> PyResult<Vec<C64>> {
        bridge::scaled_spectrum(&self.inner, C64::new(1.0, 0.0)).map_err(value_err)
    }

    fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner.report()).expect("report serializes")
    }

    fn evolve(&self, u0: Vec<C64>, times: Vec<f64>) -> PyResult<PyTrajectory> {
        let tr = semigroup::propagate_exact(&self.inner, &to_vector(&u0), &times).map_err(value_err)?;
        Ok(PyTrajectory { inner: tr, ext: self.inner.clone() })
    }

    fn evolve_cn(&self, u0: Vec<C64>, dt: f64, steps: usize) -> PyResult<PyTrajectory> {
        let tr = semigroup::propagate_cn(&self.inner, &to_vector(&u0), dt, steps).map_err(value_err)?;
        Ok(PyTrajectory { inner: tr, ext: self.inner.clone() })
    }

    /// Ambient vector for extension coordinates.
    fn ambient(&self, coords: Vec<C64>) -> PyResult<Vec<C64>> {
        if coords.len() != self.inner.s() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.s())));
        }
        Ok(self.inner.ambient(&to_vector(&coords)).iter().copied().collect())
    }

    fn __repr__(&self) -> String {
        format!("Extension(s={}, lambda_max_herm={:.3e})", self.inner.s(), self.inner.certificate().lambda_max_herm)
    }
}

#[pyclass(name = "Trajectory", module = "dissipgen", frozen)]
struct PyTrajectory {
    inner: Trajectory,
    ext: Extension,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.energies.clone()
    }

    /// `(‖Γ₊u‖², ‖Γ₋u‖²)` at each sample.
    #[getter]
    fn fluxes(&self) -> Vec<(f64, f64)> {
        self.inner.fluxes.clone()
    }

    /// Ambient states, one per sample.
    #[getter]
    fn states(&self) -> Vec<Vec<C64>> {
        self.inner.states.iter().map(|c| self.ext.ambient(c).iter().copied().collect()).collect()
    }

    /// Largest energy-rate defect relative to `max(1, E)`.
    fn energy_rate_defect(&self) -> f64 {
        semigroup::energy_rate_audit(&self.ext, &self.inner).max_relative
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv(&self.ext)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Model", module = "dissipgen", frozen)]
struct PyModel {
    inner: SbpModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (n, m=1, a=0.0, b=1.0))]
    fn transport(n: usize, m: usize, a: f64, b: f64) -> PyResult<Self> {
        Ok(Self { inner: sbp::transport_model(n, m, a, b).map_err(value_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, a=0.0, b=1.0))]
    fn second_derivative(n: usize, a: f64, b: f64) -> PyResult<Self> {
        Ok(Self { inner: sbp::second_derivative_model(n, a, b).map_err(value_err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, a=0.0, b=1.0))]
    fn wave(n: usize, a: f64, b: f64) -> PyResult<Self> {
        Ok(Self { inner: sbp::wave_model(n, a, b).map_err(value_err)? })
    }

    #[getter]
    fn kind(&self) -> String {
        serde_json::to_value(self.inner.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.op.grid()
    }

    #[getter]
    fn pencil(&self) -> PyPencil {
        PyPencil { inner: self.inner.pencil.clone() }
    }

    #[getter]
    fn quadruple(&self) -> PyQuadruple {
        PyQuadruple { inner: self.inner.quadruple.clone() }
    }

    fn extension(&self, phi: Rows) -> PyResult<PyExtension> {
        let phi = Contraction::new(to_matrix(&phi)?).map_err(value_err)?;
        Ok(PyExtension { inner: extension::build_extension(&self.inner.quadruple, &phi).map_err(value_err)? })
    }

    /// Real spectrum of the self-adjoint realization for a unitary `phi`, descending.
    fn selfadjoint_spectrum(&self, phi: Rows) -> PyResult<Vec<f64>> {
        let phi = Contraction::new(to_matrix(&phi)?).map_err(value_err)?;
        let sa = bridge::selfadjoint_extension(&self.inner.quadruple, &phi).map_err(value_err)?;
        Ok(sa.spectrum)
    }

    fn __repr__(&self) -> String {
        format!("Model(kind={}, n={})", self.kind(), self.inner.geometry.n)
    }
}

/// Regime label for boundary spaces of dimensions `p` and `q`.
#[pyfunction]
fn classify(p: usize, q: usize) -> &'static str {
    extension::classify(p, q).label()
}

#[pymodule]
#[pyo3(name = "dissipgen")]
fn dissipgen_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPencil>()?;
    m.add_class::<PyQuadruple>()?;
    m.add_class::<PyExtension>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
