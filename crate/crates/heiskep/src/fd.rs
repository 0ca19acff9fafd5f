//! Central finite differences over cylindrical phase coordinates, with
//! per-coordinate steps scaled by `cbrt(eps)·max(1, |coordinate|)`.

use crate::dynamics::Observable;
use crate::geometry::CylState;
use crate::potential::PotentialParams;

/// Phase-space coordinate selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    R,
    Theta,
    Z,
    PR,
    PS,
}

impl Coord {
    pub const ALL: [Coord; 5] = [Coord::R, Coord::Theta, Coord::Z, Coord::PR, Coord::PS];
}

pub fn get(s: &CylState, c: Coord) -> f64 {
    match c {
        Coord::R => s.r,
        Coord::Theta => s.theta,
        Coord::Z => s.z,
        Coord::PR => s.p_r,
        Coord::PS => s.p_s,
    }
}

pub fn with(s: &CylState, c: Coord, v: f64) -> CylState {
    let mut out = *s;
    match c {
        Coord::R => out.r = v,
        Coord::Theta => out.theta = v,
        Coord::Z => out.z = v,
        Coord::PR => out.p_r = v,
        Coord::PS => out.p_s = v,
    }
    out
}

/// Central-difference step for a coordinate value.
pub fn step_for(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Central-difference partial derivative of an observable with respect to
/// one phase coordinate. Five-point stencil: the integrals vary steeply at
/// small radii and the plain three-point truncation error can reach the
/// conservation tolerance there.
pub fn partial<F: Observable + ?Sized>(
    f: &F,
    s: &CylState,
    params: &PotentialParams,
    c: Coord,
) -> f64 {
    let x = get(s, c);
    let h = step_for(x);
    let at = |v: f64| f.eval(&with(s, c, v), params);
    (at(x - 2.0 * h) - 8.0 * at(x - h) + 8.0 * at(x + h) - at(x + 2.0 * h)) / (12.0 * h)
}

/// Central-difference derivative of a scalar function of one variable
/// (five-point stencil).
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = step_for(x);
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}
