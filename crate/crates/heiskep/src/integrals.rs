//! Closed-form first integrals of the reduced system and their derived
//! invariants.
//!
//! Besides the energy H the system conserves three quadratic-in-momenta
//! quantities (writing `ρ² = √(r⁴ + 16z²)`):
//!
//! ```text
//! F₁ =  (p_R p_S r − 2p_R²z + 2p_S²z/r²) cos 2θ
//!     + (−p_S² + 4p_R p_S z/r + kr²/ρ²) sin 2θ
//! F₂ = −(p_R p_S r − 2p_R²z + 2p_S²z/r²) sin 2θ
//!     + (−p_S² + 4p_R p_S z/r + kr²/ρ²) cos 2θ
//! F₃ = 4z²p_R² − 4rz p_R p_S + ((r⁴+4z²)/r²) p_S² + 8kz²/ρ²
//! ```
//!
//! Any three of H, F₁, F₂, F₃ are functionally independent a.e., and all of
//! them satisfy the relation `F₁² + F₂² = 2HF₃ + k²`. The pair (F₁, F₂) is
//! decomposed as `F₁ = J sin 2θ₀`, `F₂ = J cos 2θ₀` with `J ≥ 0` and
//! `θ₀ ∈ [0, π)` (defined only when J > 0).
//!
//! F₃ also has the compact form `(2zp_R − rp_S)² + 4z²(p_S²/r² + 2k/ρ²)`;
//! both are evaluated and tested for agreement to catch transcription slips.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics;
use crate::error::Result;
use crate::geometry::CylState;
use crate::potential::{gauge_sq_cyl, PotentialParams};

/// Which of the three qualitative regimes the integral fingerprint lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// F₃ > 0, J > 0: θ₀ is defined and H > −k²/(2F₃).
    General,
    /// F₃ > 0, J = 0: H = −k²/(2F₃) is minimal for this F₃; θ₀ undefined.
    MinEnergy,
    /// F₃ = 0: J = k, the motion is a straight horizontal line.
    Degenerate,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Case::General => write!(f, "general"),
            Case::MinEnergy => write!(f, "min-energy"),
            Case::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// The conserved fingerprint of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralValues {
    pub h: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// `J = √(F₁² + F₂²) = √(k² + 2HF₃) ≥ 0`.
    pub j: f64,
    /// Phase offset in `[0, π)`; `None` when J vanishes (within tolerance).
    pub theta0: Option<f64>,
    pub case: Case,
}

/// Default classification tolerance: the special cases are measure-zero
/// sets, hit exactly only by constructed initial data.
pub fn default_case_tol(k: f64) -> f64 {
    1e-9 * (k * k).max(1.0)
}

/// Shared pieces of F₁/F₂: the two rotating brackets.
fn brackets(s: &CylState, params: &PotentialParams) -> (f64, f64) {
    let r2 = s.r * s.r;
    let g2 = gauge_sq_cyl(s.r, s.z);
    let a = s.p_r * s.p_s * s.r - 2.0 * s.p_r * s.p_r * s.z + 2.0 * s.p_s * s.p_s * s.z / r2;
    let b = -s.p_s * s.p_s + 4.0 * s.p_r * s.p_s * s.z / s.r + params.k * r2 / g2;
    (a, b)
}

pub fn f1(s: &CylState, params: &PotentialParams) -> Result<f64> {
    dynamics::hamiltonian(s, params)?; // admissibility check
    let (a, b) = brackets(s, params);
    let (sn, cs) = (2.0 * s.theta).sin_cos();
    Ok(a * cs + b * sn)
}

pub fn f2(s: &CylState, params: &PotentialParams) -> Result<f64> {
    dynamics::hamiltonian(s, params)?;
    let (a, b) = brackets(s, params);
    let (sn, cs) = (2.0 * s.theta).sin_cos();
    Ok(-a * sn + b * cs)
}

/// F₃ in the expanded form.
pub fn f3(s: &CylState, params: &PotentialParams) -> Result<f64> {
    dynamics::hamiltonian(s, params)?;
    let r2 = s.r * s.r;
    let z2 = s.z * s.z;
    let g2 = gauge_sq_cyl(s.r, s.z);
    Ok(4.0 * z2 * s.p_r * s.p_r - 4.0 * s.r * s.z * s.p_r * s.p_s
        + (r2 * r2 + 4.0 * z2) / r2 * s.p_s * s.p_s
        + 8.0 * params.k * z2 / g2)
}

/// F₃ in the compact form `(2zp_R − rp_S)² + 4z²(p_S²/r² + 2k/ρ²)`; equal to
/// [`f3`] as a polynomial identity.
pub fn f3_compact(s: &CylState, params: &PotentialParams) -> Result<f64> {
    dynamics::hamiltonian(s, params)?;
    let g2 = gauge_sq_cyl(s.r, s.z);
    let m = 2.0 * s.z * s.p_r - s.r * s.p_s;
    Ok(m * m + 4.0 * s.z * s.z * ((s.p_s / s.r) * (s.p_s / s.r) + 2.0 * params.k / g2))
}

/// Phase offset `θ₀ = ½·atan2(F₁, F₂)`, normalized into `[0, π)`.
pub fn theta0_from(f1: f64, f2: f64) -> f64 {
    let mut t = 0.5 * f64::atan2(f1, f2);
    if t < 0.0 {
        t += std::f64::consts::PI;
    }
    t
}

/// Case classification from F₃ and J with an explicit tolerance.
pub fn classify(f3: f64, j: f64, tol: f64) -> Case {
    if f3 <= tol {
        Case::Degenerate
    } else if j <= tol {
        Case::MinEnergy
    } else {
        Case::General
    }
}

/// Evaluate the full conserved fingerprint at a state.
pub fn evaluate_integrals(s: &CylState, params: &PotentialParams) -> Result<IntegralValues> {
    let h = dynamics::hamiltonian(s, params)?;
    let f1v = f1(s, params)?;
    let f2v = f2(s, params)?;
    let f3v = f3(s, params)?;
    let j = f1v.hypot(f2v);
    let tol = default_case_tol(params.k);
    let case = classify(f3v, j, tol);
    let theta0 = if j > tol {
        Some(theta0_from(f1v, f2v))
    } else {
        None
    };
    Ok(IntegralValues {
        h,
        f1: f1v,
        f2: f2v,
        f3: f3v,
        j,
        theta0,
        case,
    })
}

/// Residual of the algebraic relation: `F₁² + F₂² − 2HF₃ − k²`. An identity
/// on the whole phase space, not only along trajectories.
pub fn relation_residual(v: &IntegralValues, params: &PotentialParams) -> f64 {
    v.f1 * v.f1 + v.f2 * v.f2 - 2.0 * v.h * v.f3 - params.k * params.k
}
