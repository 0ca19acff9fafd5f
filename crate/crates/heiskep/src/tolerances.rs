//! The shared tolerance profile used by the verification command and the
//! test suites. One global profile, versioned with the crate; per-run
//! overrides belong in recipe files.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceProfile {
    /// Finite-difference residual tolerance (PDE system checks).
    pub fd_tol: f64,
    /// Budget for first-integral drift along accurate integrations.
    pub drift_tol: f64,
    /// Algebraic identity tolerance, scaled by k².
    pub identity_tol: f64,
    /// Surface residual tolerance for emitted mesh points.
    pub mesh_tol: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            fd_tol: 1e-5,
            drift_tol: 1e-6,
            identity_tol: 1e-9,
            mesh_tol: 1e-9,
        }
    }
}

/// Conservation residual bound for the finite-difference bracket oracles.
pub const BRACKET_TOL: f64 = 1e-6;
/// Relative bound for the sub-Laplacian harmonicity residual.
pub const HARMONICITY_REL_TOL: f64 = 1e-4;
/// The linear-integral probe reports evidence, not proof; its minimum must
/// stay above this floor.
pub const PROBE_LINEAR_FLOOR: f64 = 1e-2;
/// The quadratic control must recover a conserved combination below this.
pub const PROBE_QUADRATIC_CEIL: f64 = 1e-6;
