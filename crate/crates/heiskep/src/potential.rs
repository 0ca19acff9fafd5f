//! The homogeneous gauge, the gravitational potential, and a
//! finite-difference certificate that the potential is harmonic for the
//! sub-Laplacian `Δ_H = X² + Y²` away from the origin.
//!
//! The gauge is `ρ(x, y, z) = ((x² + y²)² + 16 z²)^(1/4)` and the potential
//! `U = −k/ρ²`. The coefficient 16 is forced by harmonicity: replacing it
//! (e.g. by 1/16) makes `Δ_H U` nonzero, which the residual check below
//! detects — see the tests and the verification suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CartPoint;

/// Gauge values below this threshold are treated as the origin singularity.
pub const RHO_MIN: f64 = 1e-10;

/// Coupling constant of the attracting potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub k: f64,
}

impl PotentialParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling constant must be positive and finite, got {k}"
            )));
        }
        Ok(Self { k })
    }
}

/// Homogeneous gauge `ρ = ((x² + y²)² + 16 z²)^(1/4)`.
pub fn gauge(p: &CartPoint) -> f64 {
    let w = p.x * p.x + p.y * p.y;
    (w * w + 16.0 * p.z * p.z).sqrt().sqrt()
}

/// `ρ² = √(r⁴ + 16 z²)` in cylindrical coordinates.
pub fn gauge_sq_cyl(r: f64, z: f64) -> f64 {
    let r2 = r * r;
    (r2 * r2 + 16.0 * z * z).sqrt()
}

/// Potential `U = −k/ρ²`.
pub fn potential(p: &CartPoint, params: &PotentialParams) -> Result<f64> {
    let rho = gauge(p);
    if rho < RHO_MIN {
        return Err(Error::OriginSingularity);
    }
    Ok(-params.k / (rho * rho))
}

/// Potential in cylindrical coordinates: `U = −k/√(r⁴ + 16 z²)`.
pub fn potential_cyl(r: f64, z: f64, params: &PotentialParams) -> Result<f64> {
    let g2 = gauge_sq_cyl(r, z);
    if g2 < RHO_MIN * RHO_MIN {
        return Err(Error::OriginSingularity);
    }
    Ok(-params.k / g2)
}

/// Default finite-difference step at a point: `cbrt(eps)·max(1, |coordinate|)`.
pub fn default_fd_step(p: &CartPoint) -> f64 {
    f64::EPSILON.cbrt() * p.x.abs().max(p.y.abs()).max(p.z.abs()).max(1.0)
}

fn x_frame_fd<F: Fn(&CartPoint) -> f64>(f: &F, q: &CartPoint, h: f64) -> f64 {
    let fx = (f(&CartPoint::new(q.x + h, q.y, q.z)) - f(&CartPoint::new(q.x - h, q.y, q.z)))
        / (2.0 * h);
    let fz = (f(&CartPoint::new(q.x, q.y, q.z + h)) - f(&CartPoint::new(q.x, q.y, q.z - h)))
        / (2.0 * h);
    fx - 0.5 * q.y * fz
}

fn y_frame_fd<F: Fn(&CartPoint) -> f64>(f: &F, q: &CartPoint, h: f64) -> f64 {
    let fy = (f(&CartPoint::new(q.x, q.y + h, q.z)) - f(&CartPoint::new(q.x, q.y - h, q.z)))
        / (2.0 * h);
    let fz = (f(&CartPoint::new(q.x, q.y, q.z + h)) - f(&CartPoint::new(q.x, q.y, q.z - h)))
        / (2.0 * h);
    fy + 0.5 * q.x * fz
}

/// Nested central-difference approximation of `(X² + Y²) f` at `p`, where
/// `Xf = ∂ₓf − (y/2)∂_z f` and `Yf = ∂_y f + (x/2)∂_z f`.
///
/// For an arbitrary scalar field; used both for the potential itself and for
/// deliberately wrong control potentials.
pub fn sublaplacian_residual_of<F: Fn(&CartPoint) -> f64>(f: &F, p: &CartPoint, h: f64) -> f64 {
    x_frame_fd(&|q: &CartPoint| x_frame_fd(f, q, h), p, h)
        + y_frame_fd(&|q: &CartPoint| y_frame_fd(f, q, h), p, h)
}

/// Finite-difference approximation of `Δ_H U` at `p`; ≈ 0 away from the
/// origin since U is the fundamental solution there.
pub fn sublaplacian_residual(p: &CartPoint, params: &PotentialParams, h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    // the stencil reaches ±2h per coordinate; stay well clear of the origin
    if gauge(p) <= 8.0 * h.max(RHO_MIN) {
        return Err(Error::OriginSingularity);
    }
    let k = params.k;
    Ok(sublaplacian_residual_of(
        &|q: &CartPoint| {
            let w = q.x * q.x + q.y * q.y;
            -k / (w * w + 16.0 * q.z * q.z).sqrt()
        },
        p,
        h,
    ))
}
