use serde::Serialize;

/// One named invariant check with its measured residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `residual ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, pass: residual <= tolerance }
    }

    /// Passes when `residual > tolerance` (margins such as σ_min/σ_max).
    pub fn above(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, pass: residual > tolerance }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
