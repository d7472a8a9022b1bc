//! Time evolution `u(t) = e^{tA_Φ} u₀` in extension coordinates, plus
//! energy and boundary-flux bookkeeping.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{c, matrix_exp, solve, AlgebraError, CMatrix, CVector};
use crate::extension::Extension;
use crate::io::{csv, fmt_f64};

/// Projection residual (relative to `max(1, ‖u₀‖)`) above which `u₀` is
/// rejected as violating the boundary condition.
pub const DOMAIN_TOL: f64 = 1e-8;
/// Energy-rate tolerance, relative to `max(1, E)`.
pub const ENERGY_RATE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemigroupError {
    #[error("initial state is not in the extension domain (projection residual {residual:.3e})")]
    NotInDomain { residual: f64 },
    #[error("I − (dt/2)·B is singular")]
    SingularStep,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("time grid must be finite and nondecreasing")]
    InvalidTimes,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Coordinates in the extension basis.
    pub states: Vec<CVector>,
    /// `‖u(t)‖²_V`.
    pub energies: Vec<f64>,
    /// `(‖Γ₊u‖², ‖Γ₋u‖²)` at each sample.
    pub fluxes: Vec<(f64, f64)>,
}

impl Trajectory {
    fn from_states(e: &Extension, times: Vec<f64>, states: Vec<CVector>) -> Self {
        let mut energies = Vec::with_capacity(states.len());
        let mut fluxes = Vec::with_capacity(states.len());
        for s in &states {
            energies.push(s.norm_squared());
            fluxes.push(boundary_fluxes(e, s));
        }
        Self { times, states, energies, fluxes }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.energies.last().copied()
    }

    /// CSV with columns `t, energy, flux_plus, flux_minus` followed by the
    /// ambient state components, real and imaginary parts interleaved.
    pub fn to_csv(&self, e: &Extension) -> String {
        let n = e.basis().nrows();
        let mut header: Vec<String> =
            ["t", "energy", "flux_plus", "flux_minus"].iter().map(|s| s.to_string()).collect();
        for i in 0..n {
            header.push(format!("u{i}_re"));
            header.push(format!("u{i}_im"));
        }
        let rows = (0..self.len()).map(|k| {
            let mut row = vec![
                fmt_f64(self.times[k]),
                fmt_f64(self.energies[k]),
                fmt_f64(self.fluxes[k].0),
                fmt_f64(self.fluxes[k].1),
            ];
            for z in e.ambient(&self.states[k]).iter() {
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
            row
        });
        csv(&header, rows)
    }
}

/// `(‖Γ₊w‖², ‖Γ₋w‖²)` for `w = basis · coords`.
pub fn boundary_fluxes(e: &Extension, coords: &CVector) -> (f64, f64) {
    let w = e.ambient(coords);
    let q = e.quadruple();
    ((q.gp() * &w).norm_squared(), (q.gm() * &w).norm_squared())
}

/// Coordinates of `u0` in the extension basis, or [`SemigroupError::NotInDomain`].
pub fn initial_coords(e: &Extension, u0: &CVector) -> Result<CVector, SemigroupError> {
    let n = e.basis().nrows();
    if u0.len() != n {
        return Err(SemigroupError::DimensionMismatch { expected: n, got: u0.len() });
    }
    let coords = e.coords(u0);
    let space = e.quadruple().pencil().space();
    let residual = space.norm(&(u0 - e.ambient(&coords)));
    if residual > DOMAIN_TOL * space.norm(u0).max(1.0) {
        return Err(SemigroupError::NotInDomain { residual });
    }
    Ok(coords)
}

/// `e^{tB} c`; `t` may be negative.
pub fn evolve_coords(e: &Extension, coords: &CVector, t: f64) -> Result<CVector, SemigroupError> {
    if coords.len() != e.s() {
        return Err(SemigroupError::DimensionMismatch { expected: e.s(), got: coords.len() });
    }
    Ok(matrix_exp(e.gen(), t)? * coords)
}

/// Samples `e^{t_k B}` applied to the coordinates of `u0`.
///
/// Steps between consecutive samples with one exponential each, reusing
/// it while the step length repeats.
pub fn propagate_exact(e: &Extension, u0: &CVector, times: &[f64]) -> Result<Trajectory, SemigroupError> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(SemigroupError::InvalidTimes);
    }
    let c0 = initial_coords(e, u0)?;
    let s = e.s();
    let mut states = Vec::with_capacity(times.len());
    let mut cur = c0;
    let mut prev_t = 0.0;
    let mut cached: Option<(f64, CMatrix)> = None;
    for &t in times {
        let dt = t - prev_t;
        if dt != 0.0 && s > 0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0));
            if !reuse {
                cached = Some((dt, matrix_exp(e.gen(), dt)?));
            }
            cur = &cached.as_ref().unwrap().1 * &cur;
        }
        states.push(cur.clone());
        prev_t = t;
    }
    Ok(Trajectory::from_states(e, times.to_vec(), states))
}

/// Crank–Nicolson stepping `c ← (I − dt/2·B)⁻¹ (I + dt/2·B) c` at
/// `t = 0, dt, …, steps·dt`.
pub fn propagate_cn(e: &Extension, u0: &CVector, dt: f64, steps: usize) -> Result<Trajectory, SemigroupError> {
    if !dt.is_finite() {
        return Err(SemigroupError::InvalidTimes);
    }
    let mut cur = initial_coords(e, u0)?;
    let s = e.s();
    let ident = CMatrix::identity(s, s);
    let half = e.gen() * c(0.5 * dt, 0.0);
    let step = solve(&(&ident - &half), &(&ident + &half)).map_err(|err| match err {
        AlgebraError::Singular => SemigroupError::SingularStep,
        other => other.into(),
    })?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(cur.clone());
    for k in 1..=steps {
        cur = &step * &cur;
        times.push(k as f64 * dt);
        states.push(cur.clone());
    }
    Ok(Trajectory::from_states(e, times, states))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyAudit {
    /// `max_k |2Re⟨B c, c⟩ − (‖Γ₊w‖² − ‖Γ₋w‖²)|`.
    pub max_discrepancy: f64,
    /// `max_k` of the discrepancy divided by `max(1, E_k)`.
    pub max_relative: f64,
    pub pass: bool,
}

/// Compares the energy derivative `2Re⟨B c, c⟩` with the boundary flux
/// difference at every sample.
pub fn energy_rate_audit(e: &Extension, traj: &Trajectory) -> EnergyAudit {
    let mut max_discrepancy = 0.0f64;
    let mut max_relative = 0.0f64;
    for (k, coords) in traj.states.iter().enumerate() {
        let lhs = 2.0 * coords.dotc(&(e.gen() * coords)).re;
        let (fp, fm) = traj.fluxes[k];
        let d = (lhs - (fp - fm)).abs();
        max_discrepancy = max_discrepancy.max(d);
        max_relative = max_relative.max(d / traj.energies[k].max(1.0));
    }
    EnergyAudit { max_discrepancy, max_relative, pass: max_relative <= ENERGY_RATE_TOL }
}
