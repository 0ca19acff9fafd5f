//! Heisenberg group structure and phase-coordinate changes.
//!
//! The group is ℝ³ with the product
//! `(x, y, z)·(x′, y′, z′) = (x + x′, y + y′, z + z′ + (xy′ − x′y)/2)`
//! and the anisotropic dilations `δ_λ(x, y, z) = (λx, λy, λ²z)`.
//!
//! Both the horizontal distribution and the potential are rotationally
//! symmetric about Oz, so the dynamics is studied in cylindrical phase
//! coordinates. With `x = r cos θ`, `y = r sin θ` the momenta transform as
//! `p_X dx + p_Y dy = p_R dr + p_S dθ`, which gives
//! `p_R = p_X cos θ + p_Y sin θ` and `p_S = r (p_Y cos θ − p_X sin θ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radii below this are treated as on-axis: the momentum change divides by r,
/// and below rounding noise the result is meaningless.
pub const AXIS_EPS: f64 = 1e-12;

/// A point of the group, in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

/// Cartesian phase point. Momenta are dual to the horizontal frame (X, Y),
/// so there is no p_Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartState {
    pub point: CartPoint,
    pub p_x: f64,
    pub p_y: f64,
}

/// Cylindrical phase point `(r, θ, z, p_R, p_S)`.
///
/// θ is stored unwrapped (no reduction mod 2π) so that trajectories are
/// continuous in time; only [`to_cylindrical`] produces a principal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylState {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
    pub p_r: f64,
    pub p_s: f64,
}

impl CylState {
    pub fn new(r: f64, theta: f64, z: f64, p_r: f64, p_s: f64) -> Self {
        Self { r, theta, z, p_r, p_s }
    }

    /// Cartesian projection (x, y) of the position.
    pub fn xy(&self) -> (f64, f64) {
        (self.r * self.theta.cos(), self.r * self.theta.sin())
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite()
            && self.theta.is_finite()
            && self.z.is_finite()
            && self.p_r.is_finite()
            && self.p_s.is_finite()
    }
}

/// Group product.
pub fn group_mul(p: CartPoint, q: CartPoint) -> CartPoint {
    CartPoint::new(
        p.x + q.x,
        p.y + q.y,
        p.z + q.z + 0.5 * (p.x * q.y - q.x * p.y),
    )
}

/// Group inverse: `(−x, −y, −z)` (the cross term is antisymmetric).
pub fn group_inv(p: CartPoint) -> CartPoint {
    CartPoint::new(-p.x, -p.y, -p.z)
}

/// Anisotropic dilation `δ_λ(x, y, z) = (λx, λy, λ²z)`, λ > 0.
pub fn dilate(lambda: f64, p: CartPoint) -> Result<CartPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "dilation scale must be positive and finite, got {lambda}"
        )));
    }
    Ok(CartPoint::new(
        lambda * p.x,
        lambda * p.y,
        lambda * lambda * p.z,
    ))
}

/// Cartesian-to-cylindrical change of phase coordinates.
///
/// Returns θ in the principal range (−π, π]. Fails on the z-axis, where the
/// transverse momentum p_S is undefined.
pub fn to_cylindrical(s: &CartState) -> Result<CylState> {
    let r = s.point.x.hypot(s.point.y);
    if r < AXIS_EPS {
        return Err(Error::AxisSingularity);
    }
    let mut theta = s.point.y.atan2(s.point.x);
    if theta == -std::f64::consts::PI {
        theta = std::f64::consts::PI;
    }
    // cos θ, sin θ taken directly from the coordinates
    let c = s.point.x / r;
    let sn = s.point.y / r;
    Ok(CylState {
        r,
        theta,
        z: s.point.z,
        p_r: s.p_x * c + s.p_y * sn,
        p_s: r * (s.p_y * c - s.p_x * sn),
    })
}

/// Inverse of [`to_cylindrical`]:
/// `p_X = p_R cos θ − (p_S/r) sin θ`, `p_Y = p_R sin θ + (p_S/r) cos θ`.
pub fn from_cylindrical(s: &CylState) -> Result<CartState> {
    if s.r < AXIS_EPS {
        return Err(Error::AxisSingularity);
    }
    let (c, sn) = (s.theta.cos(), s.theta.sin());
    let pt = s.p_s / s.r;
    Ok(CartState {
        point: CartPoint::new(s.r * c, s.r * sn, s.z),
        p_x: s.p_r * c - pt * sn,
        p_y: s.p_r * sn + pt * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn group_identity_and_inverse() {
        let p = CartPoint::new(0.7, -1.3, 2.1);
        assert_eq!(group_mul(CartPoint::origin(), p), p);
        assert_eq!(group_mul(p, CartPoint::origin()), p);
        let e = group_mul(p, group_inv(p));
        assert_abs_diff_eq!(e.x, 0.0);
        assert_abs_diff_eq!(e.y, 0.0);
        assert_abs_diff_eq!(e.z, 0.0);
    }

    #[test]
    fn group_mul_twists_the_center() {
        let p = group_mul(CartPoint::new(1.0, 0.0, 0.0), CartPoint::new(0.0, 1.0, 0.0));
        assert_eq!(p, CartPoint::new(1.0, 1.0, 0.5));
    }

    #[test]
    fn dilation_examples() {
        let p = CartPoint::new(1.0, 1.0, 1.0);
        assert_eq!(dilate(1.0, p).unwrap(), p);
        assert_eq!(dilate(2.0, p).unwrap(), CartPoint::new(2.0, 2.0, 4.0));
        assert!(dilate(0.0, p).is_err());
        assert!(dilate(-1.0, p).is_err());
        assert!(dilate(f64::NAN, p).is_err());
    }

    #[test]
    fn cylindrical_conversion_reference_state() {
        let s = CartState {
            point: CartPoint::new(1.0, 0.0, 0.0),
            p_x: 0.0,
            p_y: 0.1,
        };
        let c = to_cylindrical(&s).unwrap();
        assert_eq!(c.r, 1.0);
        assert_eq!(c.theta, 0.0);
        assert_eq!(c.z, 0.0);
        assert_eq!(c.p_r, 0.0);
        assert_eq!(c.p_s, 0.1);
    }

    #[test]
    fn axis_is_rejected() {
        let s = CartState {
            point: CartPoint::new(0.0, 0.0, 1.0),
            p_x: 0.3,
            p_y: 0.0,
        };
        assert_eq!(to_cylindrical(&s), Err(Error::AxisSingularity));
        let c = CylState::new(0.0, 0.0, 1.0, 0.3, 0.0);
        assert_eq!(from_cylindrical(&c), Err(Error::AxisSingularity));
    }

    #[test]
    fn from_cylindrical_rotates_momenta() {
        let c = CylState::new(1.0, std::f64::consts::FRAC_PI_2, 0.0, 1.0, 0.0);
        let s = from_cylindrical(&c).unwrap();
        assert_abs_diff_eq!(s.point.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.point.y, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.p_x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.p_y, 1.0, epsilon = 1e-15);

        let c = CylState::new(1.0, 0.0, 0.0, 0.0, 0.1);
        let s = from_cylindrical(&c).unwrap();
        assert_eq!(s.point, CartPoint::new(1.0, 0.0, 0.0));
        assert_eq!(s.p_x, 0.0);
        assert_eq!(s.p_y, 0.1);
    }

    #[test]
    fn principal_theta_range() {
        let s = CartState {
            point: CartPoint::new(-1.0, -0.0, 0.0),
            p_x: 0.0,
            p_y: 0.0,
        };
        let c = to_cylindrical(&s).unwrap();
        assert_eq!(c.theta, std::f64::consts::PI);
    }

    proptest! {
        #[test]
        fn group_mul_is_associative(
            a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0,
            d in -5.0f64..5.0, e in -5.0f64..5.0, f in -5.0f64..5.0,
            g in -5.0f64..5.0, h in -5.0f64..5.0, i in -5.0f64..5.0,
        ) {
            let p = CartPoint::new(a, b, c);
            let q = CartPoint::new(d, e, f);
            let s = CartPoint::new(g, h, i);
            let lhs = group_mul(group_mul(p, q), s);
            let rhs = group_mul(p, group_mul(q, s));
            prop_assert!((lhs.x - rhs.x).abs() <= 1e-12);
            prop_assert!((lhs.y - rhs.y).abs() <= 1e-12);
            prop_assert!((lhs.z - rhs.z).abs() <= 1e-12 * (1.0 + lhs.z.abs()));
        }

        #[test]
        fn dilations_form_a_one_parameter_group(
            l1 in 0.1f64..10.0, l2 in 0.1f64..10.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0,
        ) {
            let p = CartPoint::new(x, y, z);
            let a = dilate(l1, dilate(l2, p).unwrap()).unwrap();
            let b = dilate(l1 * l2, p).unwrap();
            prop_assert!((a.x - b.x).abs() <= 1e-12 * (1.0 + b.x.abs()));
            prop_assert!((a.y - b.y).abs() <= 1e-12 * (1.0 + b.y.abs()));
            prop_assert!((a.z - b.z).abs() <= 1e-12 * (1.0 + b.z.abs()));
        }

        #[test]
        fn roundtrip_and_kinetic_energy(
            x in 1e-6f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0,
            px in -3.0f64..3.0, py in -3.0f64..3.0,
        ) {
            let s = CartState { point: CartPoint::new(x, y, z), p_x: px, p_y: py };
            let c = to_cylindrical(&s).unwrap();
            prop_assert!(c.theta > -std::f64::consts::PI && c.theta <= std::f64::consts::PI);

            // kinetic energy is invariant under the momentum change
            let t_cart = px * px + py * py;
            let t_cyl = c.p_r * c.p_r + c.p_s * c.p_s / (c.r * c.r);
            prop_assert!((t_cart - t_cyl).abs() <= 1e-12 * (1.0 + t_cart.abs()));

            let back = from_cylindrical(&c).unwrap();
            let scale = 1.0 + x.abs() + y.abs() + px.abs() + py.abs();
            prop_assert!((back.point.x - x).abs() <= 1e-12 * scale);
            prop_assert!((back.point.y - y).abs() <= 1e-12 * scale);
            prop_assert!(back.point.z == z);
            prop_assert!((back.p_x - px).abs() <= 1e-11 * scale);
            prop_assert!((back.p_y - py).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn roundtrip_keeps_positive_x_halfplane() {
        let s = CartState {
            point: CartPoint::new(0.8, 0.33, -0.2),
            p_x: 0.4,
            p_y: -0.9,
        };
        let back = from_cylindrical(&to_cylindrical(&s).unwrap()).unwrap();
        assert_relative_eq!(back.point.x, s.point.x, max_relative = 1e-13);
        assert_relative_eq!(back.point.y, s.point.y, max_relative = 1e-13);
        assert_relative_eq!(back.p_x, s.p_x, max_relative = 1e-12);
        assert_relative_eq!(back.p_y, s.p_y, max_relative = 1e-12);
    }
}
