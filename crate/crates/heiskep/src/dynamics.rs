//! Reduced Hamiltonian, equations of motion, and the almost Poisson bracket.
//!
//! In cylindrical phase coordinates the generalized Hamiltonian is
//!
//! ```text
//! H(r, θ, z, p_R, p_S) = (p_R² + p_S²/r²)/2 − k/√(r⁴ + 16 z²)
//! ```
//!
//! and the motion satisfies
//!
//! ```text
//! ṙ = p_R                 ṗ_R = p_S²/r³ − 2kr³/(r⁴+16z²)^(3/2)
//! θ̇ = p_S/r²              ṗ_S = −8kr²z/(r⁴+16z²)^(3/2)
//! ż = p_S/2
//! ```
//!
//! The nonholonomic constraint `ż = (r²/2)θ̇` is built into the system: both
//! sides equal `p_S/2`.
//!
//! The almost Poisson bracket over the cylindrical frame `R = ∂r`,
//! `S = ∂θ + (r²/2)∂z` is
//!
//! ```text
//! {F, G} = ∂G/∂p_R·RF − ∂F/∂p_R·RG + ∂G/∂p_S·SF − ∂F/∂p_S·SG,
//! ```
//!
//! so `Ḟ = {F, H}` along solutions, and `F` is a first integral iff
//! `{F, H} ≡ 0`. The bracket keeps antisymmetry and Leibniz but not the
//! Jacobi identity; no Jacobi test is provided.

use crate::error::{Error, Result};
use crate::fd::{self, Coord};
use crate::geometry::{CylState, AXIS_EPS};
use crate::potential::{gauge_sq_cyl, PotentialParams, RHO_MIN};

/// Rates of change of the five phase coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub dr: f64,
    pub dtheta: f64,
    pub dz: f64,
    pub dp_r: f64,
    pub dp_s: f64,
}

impl StateDerivative {
    pub fn as_array(&self) -> [f64; 5] {
        [self.dr, self.dtheta, self.dz, self.dp_r, self.dp_s]
    }
}

/// A real-valued function of the phase point, evaluable at any admissible
/// state. Implemented by closures `Fn(&CylState, &PotentialParams) -> f64`.
pub trait Observable: Sync {
    fn eval(&self, s: &CylState, params: &PotentialParams) -> f64;
}

impl<T> Observable for T
where
    T: Fn(&CylState, &PotentialParams) -> f64 + Sync,
{
    fn eval(&self, s: &CylState, params: &PotentialParams) -> f64 {
        self(s, params)
    }
}

fn check_admissible(s: &CylState) -> Result<f64> {
    if s.r < AXIS_EPS {
        return Err(Error::AxisSingularity);
    }
    let g2 = gauge_sq_cyl(s.r, s.z);
    if g2 < RHO_MIN * RHO_MIN {
        return Err(Error::OriginSingularity);
    }
    Ok(g2)
}

/// Total energy `H = (p_R² + p_S²/r²)/2 − k/√(r⁴ + 16z²)`.
pub fn hamiltonian(s: &CylState, params: &PotentialParams) -> Result<f64> {
    let g2 = check_admissible(s)?;
    let kinetic = 0.5 * (s.p_r * s.p_r + (s.p_s / s.r) * (s.p_s / s.r));
    Ok(kinetic - params.k / g2)
}

/// The five-dimensional vector field of the reduced equations of motion.
pub fn vector_field(s: &CylState, params: &PotentialParams) -> Result<StateDerivative> {
    let g2 = check_admissible(s)?;
    let g6 = g2 * g2 * g2; // (r^4 + 16 z^2)^(3/2)
    let r2 = s.r * s.r;
    let r3 = r2 * s.r;
    Ok(StateDerivative {
        dr: s.p_r,
        dtheta: s.p_s / r2,
        dz: 0.5 * s.p_s,
        dp_r: s.p_s * s.p_s / r3 - 2.0 * params.k * r3 / g6,
        dp_s: -8.0 * params.k * r2 * s.z / g6,
    })
}

fn r_frame<F: Observable + ?Sized>(f: &F, s: &CylState, params: &PotentialParams) -> f64 {
    fd::partial(f, s, params, Coord::R)
}

fn s_frame<F: Observable + ?Sized>(f: &F, s: &CylState, params: &PotentialParams) -> f64 {
    fd::partial(f, s, params, Coord::Theta) + 0.5 * s.r * s.r * fd::partial(f, s, params, Coord::Z)
}

/// Numeric almost Poisson bracket `{F, G}` at a state. All derivatives are
/// central finite differences.
pub fn almost_poisson<F, G>(f: &F, g: &G, s: &CylState, params: &PotentialParams) -> Result<f64>
where
    F: Observable + ?Sized,
    G: Observable + ?Sized,
{
    check_admissible(s)?;
    let g_pr = fd::partial(g, s, params, Coord::PR);
    let g_ps = fd::partial(g, s, params, Coord::PS);
    let f_pr = fd::partial(f, s, params, Coord::PR);
    let f_ps = fd::partial(f, s, params, Coord::PS);
    Ok(g_pr * r_frame(f, s, params) - f_pr * r_frame(g, s, params)
        + g_ps * s_frame(f, s, params)
        - f_ps * s_frame(g, s, params))
}

/// The Hamiltonian as an observable (panics on singular states, which the
/// bracket's admissibility check rules out).
pub fn obs_hamiltonian(s: &CylState, params: &PotentialParams) -> f64 {
    hamiltonian(s, params).expect("observable evaluated at a singular state")
}
