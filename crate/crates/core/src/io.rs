//! JSON documents and CSV writers used by the command-line front end.
//!
//! Complex numbers are `[re, im]` pairs; matrices are
//! `{"rows": r, "cols": c, "data": [[re, im], ...]}` in row-major order.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{c, CMatrix, CVector, C64};
use crate::pencil::{PencilError, SkewPencil};
use crate::quadruple::{BoundaryQuadruple, QuadrupleError, QuadrupleKind};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix, SchemaError> {
        if self.data.len() != self.rows * self.cols {
            return Err(SchemaError::Invalid(format!(
                "matrix declares {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(SchemaError::Invalid("matrix has non-finite entries".into()));
        }
        Ok(CMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|&[re, im]| c(re, im))))
    }
}

pub fn vector_to_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> Result<CVector, SchemaError> {
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(SchemaError::Invalid("vector has non-finite entries".into()));
    }
    Ok(CVector::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilJson {
    pub dim: usize,
    pub weight: MatrixJson,
    pub a_max: MatrixJson,
    pub core: MatrixJson,
}

impl From<&SkewPencil> for PencilJson {
    fn from(p: &SkewPencil) -> Self {
        Self { dim: p.dim(), weight: p.weight().into(), a_max: p.a_max().into(), core: p.core().into() }
    }
}

impl PencilJson {
    pub fn to_matrices(&self) -> Result<(CMatrix, CMatrix, CMatrix), SchemaError> {
        let weight = self.weight.to_matrix()?;
        let a_max = self.a_max.to_matrix()?;
        let core = self.core.to_matrix()?;
        let n = self.dim;
        if weight.shape() != (n, n) || a_max.shape() != (n, n) || core.nrows() != n {
            return Err(SchemaError::Invalid(format!(
                "pencil of dim {n} has weight {:?}, a_max {:?}, core {:?}",
                weight.shape(),
                a_max.shape(),
                core.shape()
            )));
        }
        Ok((weight, a_max, core))
    }

    pub fn to_pencil(&self) -> Result<SkewPencil, PencilError> {
        let (w, a, core) = self.to_matrices().map_err(|e| PencilError::DimensionMismatch(e.to_string()))?;
        SkewPencil::new(w, a, core)
    }
}

/// Where a quadruple document finds its pencil: a path (relative to the
/// quadruple file) or an inline pencil document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PencilRef {
    Path(String),
    Inline(PencilJson),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupleMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<QuadrupleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupleJson {
    pub pencil_ref: PencilRef,
    pub gm: MatrixJson,
    pub gp: MatrixJson,
    #[serde(default)]
    pub meta: QuadrupleMeta,
}

impl QuadrupleJson {
    pub fn inline(q: &BoundaryQuadruple) -> Self {
        Self {
            pencil_ref: PencilRef::Inline(q.pencil().into()),
            gm: q.gm().into(),
            gp: q.gp().into(),
            meta: QuadrupleMeta { kind: Some(q.kind()), note: None },
        }
    }

    pub fn resolve_pencil(&self, base: Option<&Path>) -> Result<PencilJson, SchemaError> {
        match &self.pencil_ref {
            PencilRef::Inline(p) => Ok(p.clone()),
            PencilRef::Path(rel) => {
                let path = match base {
                    Some(dir) => dir.join(rel),
                    None => PathBuf::from(rel),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| SchemaError::Read { path: path.clone(), source })?;
                Ok(serde_json::from_str(&text)?)
            }
        }
    }

    /// Builds the quadruple without validating it, so the caller can report
    /// every failed invariant.
    pub fn to_quadruple(&self, pencil: Arc<SkewPencil>) -> Result<BoundaryQuadruple, QuadrupleError> {
        let gm = self.gm.to_matrix().map_err(|e| QuadrupleError::NotAQuadruple(e.to_string()))?;
        let gp = self.gp.to_matrix().map_err(|e| QuadrupleError::NotAQuadruple(e.to_string()))?;
        let kind = self.meta.kind.unwrap_or(QuadrupleKind::Given);
        BoundaryQuadruple::new_unchecked(pencil, gm, gp, kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Transport,
    SecondDerivative,
    Wave,
}

fn default_m() -> usize {
    1
}

fn default_b() -> f64 {
    1.0
}

/// `{kind, n, m, a, b, phi}`; `m` defaults to 1 and `(a, b)` to `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub kind: ModelKind,
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    pub phi: MatrixJson,
}

/// RFC-4180 CSV with a header row and LF line endings.
pub fn csv(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV fields are UTF-8")
}

/// Shortest round-trip representation of an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
