//! Closed-form special solutions: stationary points on the vertical axis,
//! the minimal-energy heteroclinic curves connecting them, and degenerate
//! radial lines through the origin.
//!
//! For H < 0 the only stationary solutions sit on Oz at `z = ±k/(4|H|)`;
//! they have J = 0. The non-stationary J = 0 solutions live on the
//! minimal-energy ellipsoid and, parameterized by z with `z₀ = k/(4|H|)`,
//! read
//!
//! ```text
//! r(z) = (2(z₀² − z²)/z₀)^(1/2),
//! θ(z) = ½ ln((z₀+z)/(z₀−z)) + θ(0),        |z| < z₀,
//! ```
//!
//! monotone in z and θ, approaching the poles only as t → ±∞. The ascending
//! (ż > 0) branch is canonical here; descending solutions follow from the
//! time reversal (t, p) → (−t, −p).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CylState;
use crate::potential::PotentialParams;

/// A stationary point on the vertical axis (r = 0 implied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub z: f64,
    /// Energy of the point: `H = −k/√(16z²)`.
    pub h: f64,
    /// `F₃ = 8kz²/√(16z²) = 2k|z|`; together with H this forces J = 0.
    pub f3: f64,
}

/// The two stationary points for a given negative energy.
pub fn stationary_points(params: &PotentialParams, h: f64) -> Result<[StationaryPoint; 2]> {
    if !(h < 0.0) || !h.is_finite() {
        return Err(Error::NoStationarySolution);
    }
    let z = params.k / (4.0 * h.abs());
    let f3 = 2.0 * params.k * z;
    debug_assert!((params.k * params.k + 2.0 * h * f3).abs() <= 1e-12 * params.k * params.k);
    Ok([
        StationaryPoint { z, h, f3 },
        StationaryPoint { z: -z, h, f3 },
    ])
}

/// The ascending minimal-energy heteroclinic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicCurve {
    pub k: f64,
    /// Pole height `z₀ = k/(4|H|)`.
    pub z0: f64,
    /// Phase at the equator crossing, θ(0).
    pub theta_at_zero: f64,
}

impl HeteroclinicCurve {
    pub fn new(k: f64, z0: f64, theta_at_zero: f64) -> Result<Self> {
        if !(k > 0.0 && z0 > 0.0) || !k.is_finite() || !z0.is_finite() {
            return Err(Error::InvalidArgument(
                "heteroclinic curve needs k > 0 and z0 > 0".into(),
            ));
        }
        Ok(Self { k, z0, theta_at_zero })
    }

    pub fn from_energy(params: &PotentialParams, h: f64, theta_at_zero: f64) -> Result<Self> {
        if !(h < 0.0) {
            return Err(Error::InvalidArgument(
                "heteroclinic curves exist only for H < 0".into(),
            ));
        }
        Self::new(params.k, params.k / (4.0 * h.abs()), theta_at_zero)
    }

    pub fn energy(&self) -> f64 {
        -self.k / (4.0 * self.z0)
    }

    pub fn f3(&self) -> f64 {
        2.0 * self.k * self.z0
    }

    fn check_open_interval(&self, z: f64) -> Result<()> {
        if z.abs() < self.z0 {
            Ok(())
        } else {
            Err(Error::OutOfRange { z, z0: self.z0 })
        }
    }

    /// Vertical speed of the ascending branch:
    /// `ż = √k (z₀² − z²) / (2(z₀² + z²))`.
    pub fn z_speed(&self, z: f64) -> f64 {
        let (z0sq, zsq) = (self.z0 * self.z0, z * z);
        self.k.sqrt() * (z0sq - zsq) / (2.0 * (z0sq + zsq))
    }

    /// Phase point of the ascending solution at height z, with the momenta
    /// `p_S = 2ż` and `p_R = ṙ = −2zż/(z₀ r)`.
    pub fn point(&self, z: f64) -> Result<CylState> {
        self.check_open_interval(z)?;
        let r = (2.0 * (self.z0 * self.z0 - z * z) / self.z0).sqrt();
        let theta = 0.5 * ((self.z0 + z) / (self.z0 - z)).ln() + self.theta_at_zero;
        let zdot = self.z_speed(z);
        Ok(CylState {
            r,
            theta,
            z,
            p_r: -2.0 * z * zdot / (self.z0 * r),
            p_s: 2.0 * zdot,
        })
    }

    /// Time for the ascending solution to travel from z = 0 to z₁:
    /// the closed antiderivative of `(2/√k)(z₀² + z²)/(z₀² − z²)`,
    ///
    /// ```text
    /// t(z₁) = (2/√k)·(z₀ ln((z₀+z₁)/(z₀−z₁)) − z₁),
    /// ```
    ///
    /// diverging logarithmically as z₁ → ±z₀.
    pub fn time(&self, z1: f64) -> Result<f64> {
        self.check_open_interval(z1)?;
        Ok(2.0 / self.k.sqrt() * (self.z0 * ((self.z0 + z1) / (self.z0 - z1)).ln() - z1))
    }
}

/// A degenerate (F₃ = 0) radial solution: a straight line in the plane
/// z = 0 with `ṙ²/2 = H + k/r²`, θ constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub k: f64,
    pub h: f64,
    pub r0: f64,
    /// Sign of the initial radial momentum.
    pub outgoing: bool,
}

impl RadialSolution {
    pub fn new(params: &PotentialParams, h: f64, r0: f64, outgoing: bool) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() || !h.is_finite() {
            return Err(Error::InvalidArgument("radial solution needs r0 > 0".into()));
        }
        if h < 0.0 {
            let r_turn = (params.k / h.abs()).sqrt();
            if r0 > r_turn * (1.0 + 1e-12) {
                return Err(Error::InconsistentState(format!(
                    "r0 = {r0} beyond the turning radius {r_turn} for H = {h}"
                )));
            }
        }
        Ok(Self {
            k: params.k,
            h,
            r0,
            outgoing,
        })
    }

    /// For H < 0 the motion turns around at `r* = √(k/|H|)`.
    pub fn turning_radius(&self) -> Option<f64> {
        (self.h < 0.0).then(|| (self.k / self.h.abs()).sqrt())
    }

    /// |ṙ| at radius r from the energy balance (`2(H + k/r²)`, clamped at
    /// the turning radius where it crosses zero).
    pub fn radial_speed(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        let v2 = 2.0 * (self.h + self.k / (r * r));
        if v2 < -1e-12 * self.k {
            return Err(Error::OutOfRange {
                z: r,
                z0: self.turning_radius().unwrap_or(f64::INFINITY),
            });
        }
        Ok(v2.max(0.0).sqrt())
    }

    /// Travel time from r₀ to r along the outgoing branch, from the closed
    /// antiderivative of `dr/√(2(H + k/r²))`:
    /// `t(r) = (√(2Hr² + 2k) − √(2Hr₀² + 2k)) / (2H)` (H ≠ 0),
    /// `t(r) = (r² − r₀²)/(2√(2k))` (H = 0).
    pub fn time_to(&self, r: f64) -> Result<f64> {
        self.radial_speed(r)?; // range check
        if self.h.abs() < 1e-300 {
            return Ok((r * r - self.r0 * self.r0) / (2.0 * (2.0 * self.k).sqrt()));
        }
        let g = |rr: f64| (2.0 * self.h * rr * rr + 2.0 * self.k).max(0.0).sqrt();
        Ok((g(r) - g(self.r0)) / (2.0 * self.h))
    }

    /// The phase point launching this solution at angle θ₀.
    pub fn initial_state(&self, theta0: f64) -> CylState {
        let p = self.radial_speed(self.r0).unwrap_or(0.0);
        CylState {
            r: self.r0,
            theta: theta0,
            z: 0.0,
            p_r: if self.outgoing { p } else { -p },
            p_s: 0.0,
        }
    }
}
