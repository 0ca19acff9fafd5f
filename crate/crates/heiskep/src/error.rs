use crate::integrals::Case;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The point lies on (or numerically at) the z-axis, where the
    /// cylindrical momenta are undefined.
    #[error("point on the z-axis: cylindrical momenta undefined (r < 1e-12)")]
    AxisSingularity,

    /// The state is too close to the potential singularity at the origin.
    #[error("state within the origin-singularity threshold (rho < 1e-10)")]
    OriginSingularity,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation specific to one surface case was called on another.
    #[error("surface case mismatch: expected {expected}, got {actual}")]
    CaseMismatch { expected: Case, actual: Case },

    /// A fixed-step integration stage landed on a singular state.
    #[error("integration stage hit a singular intermediate state")]
    StepSingularity,

    /// The integrated state became non-finite.
    #[error("state diverged (non-finite) at t = {t}")]
    Diverged { t: f64 },

    /// Stationary solutions exist only for negative energies.
    #[error("no stationary solution for H >= 0")]
    NoStationarySolution,

    #[error("z = {z} outside the admissible open interval (-{z0}, {z0})")]
    OutOfRange { z: f64, z0: f64 },

    #[error("inconsistent state: {0}")]
    InconsistentState(String),

    /// The trajectory ensemble cannot support a least-squares probe.
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}
