//! Numeric residual checks for the first-integral machinery.
//!
//! A function F(r, θ, z, p_R, p_S) is a first integral iff
//!
//! ```text
//! dF/dt = F_r p_R + F_θ p_S/r² + F_z p_S/2
//!       + F_{p_R}(p_S²/r³ − 2kr³/(r⁴+16z²)^{3/2})
//!       − F_{p_S}·8kr²z/(r⁴+16z²)^{3/2} = 0.
//! ```
//!
//! For quadratic candidates `F = a p_R² + d p_R p_S + b p_S² + h` with
//! coefficient functions of (r, θ, z), that condition splits into six PDEs:
//!
//! ```text
//! (1) a_r = 0
//! (2) 2a_θ + r²(a_z + 2d_r) = 0
//! (3) 4a + r³d_z + 2r(d_θ + r²b_r) = 0
//! (4) 2d + r³b_z + 2rb_θ = 0
//! (5) 2r³(r⁴+16z²)^{3/2} h_r − 8kr⁶a − 16kr⁵z d = 0
//! (6) r(r⁴+16z²)^{3/2}(r²h_z + 2h_θ) − 4kr⁶d − 32kr⁵z b = 0
//! ```
//!
//! The closed-form solution family used here is the three-parameter
//! combination `F̃ = c₂F₁ + c₃F₂ + c₄F₃` (see [`tilde_coefficients`]); its
//! coefficients solve the system, which [`pde_residuals`] verifies
//! pointwise. Everything is checked by central finite differences — the
//! derivation is verified, not re-derived.

pub mod probe;

use crate::dynamics::{vector_field, Observable};
use crate::error::Result;
use crate::fd::{self, Coord};
use crate::geometry::CylState;
use crate::potential::PotentialParams;

pub use probe::{linear_probe, MomentumBasis, ProbeConfig, ProbeReport};

/// Coefficient function of (r, θ, z).
pub type CoeffFn = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A quadratic-in-momenta candidate integral
/// `F = a p_R² + d p_R p_S + b p_S² + h`.
pub struct QuadraticCandidate {
    pub a: CoeffFn,
    pub d: CoeffFn,
    pub b: CoeffFn,
    pub h: CoeffFn,
}

impl QuadraticCandidate {
    pub fn evaluate(&self, s: &CylState) -> f64 {
        (self.a)(s.r, s.theta, s.z) * s.p_r * s.p_r
            + (self.d)(s.r, s.theta, s.z) * s.p_r * s.p_s
            + (self.b)(s.r, s.theta, s.z) * s.p_s * s.p_s
            + (self.h)(s.r, s.theta, s.z)
    }
}

/// The three free constants of the closed-form family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixConstants {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Coefficient functions of `F̃ = c₂F₁ + c₃F₂ + c₄F₃`:
///
/// ```text
/// ã = 2z(2c₄z − c₂cos 2θ + c₃sin 2θ)
/// d̃ = (c₂r + 4c₃z/r)cos 2θ − (c₃r − 4c₂z/r)sin 2θ − 4c₄rz
/// b̃ = ((−c₃r² + 2c₂z)cos 2θ − (c₂r² + 2c₃z)sin 2θ + c₄(r⁴+4z²))/r²
/// h̃ = k(r²(c₃cos 2θ + c₂sin 2θ) + 8c₄z²)/√(r⁴+16z²)
/// ```
pub fn tilde_coefficients(c: AppendixConstants, params: &PotentialParams) -> QuadraticCandidate {
    let k = params.k;
    let AppendixConstants { c2, c3, c4 } = c;
    QuadraticCandidate {
        a: Box::new(move |_r, th, z| {
            2.0 * z * (2.0 * c4 * z - c2 * (2.0 * th).cos() + c3 * (2.0 * th).sin())
        }),
        d: Box::new(move |r, th, z| {
            (c2 * r + 4.0 * c3 * z / r) * (2.0 * th).cos()
                - (c3 * r - 4.0 * c2 * z / r) * (2.0 * th).sin()
                - 4.0 * c4 * r * z
        }),
        b: Box::new(move |r, th, z| {
            ((-c3 * r * r + 2.0 * c2 * z) * (2.0 * th).cos()
                - (c2 * r * r + 2.0 * c3 * z) * (2.0 * th).sin()
                + c4 * (r * r * r * r + 4.0 * z * z))
                / (r * r)
        }),
        h: Box::new(move |r, th, z| {
            k * (r * r * (c3 * (2.0 * th).cos() + c2 * (2.0 * th).sin()) + 8.0 * c4 * z * z)
                / (r * r * r * r + 16.0 * z * z).sqrt()
        }),
    }
}

/// The first-integral condition dF/dt evaluated by finite differences:
/// the phase gradient of F dotted with the vector field. ≈ 0 iff F is
/// conserved at `s`.
pub fn integral_residual<F: Observable + ?Sized>(
    f: &F,
    s: &CylState,
    params: &PotentialParams,
) -> Result<f64> {
    let d = vector_field(s, params)?.as_array();
    let mut acc = 0.0;
    for (i, c) in Coord::ALL.iter().enumerate() {
        acc += fd::partial(f, s, params, *c) * d[i];
    }
    Ok(acc)
}

fn coeff_partial(f: &CoeffFn, r: f64, th: f64, z: f64, which: usize) -> f64 {
    match which {
        0 => fd::central(|x| f(x, th, z), r),
        1 => fd::central(|x| f(r, x, z), th),
        _ => fd::central(|x| f(r, th, x), z),
    }
}

/// The six PDE residuals of a quadratic candidate at a sample point.
pub fn pde_residuals(
    cand: &QuadraticCandidate,
    r: f64,
    theta: f64,
    z: f64,
    params: &PotentialParams,
) -> Result<[f64; 6]> {
    if !(r > crate::geometry::AXIS_EPS) {
        return Err(crate::error::Error::AxisSingularity);
    }
    let k = params.k;
    let a = (cand.a)(r, theta, z);
    let d = (cand.d)(r, theta, z);
    let b = (cand.b)(r, theta, z);
    let a_r = coeff_partial(&cand.a, r, theta, z, 0);
    let a_t = coeff_partial(&cand.a, r, theta, z, 1);
    let a_z = coeff_partial(&cand.a, r, theta, z, 2);
    let d_r = coeff_partial(&cand.d, r, theta, z, 0);
    let d_t = coeff_partial(&cand.d, r, theta, z, 1);
    let d_z = coeff_partial(&cand.d, r, theta, z, 2);
    let b_r = coeff_partial(&cand.b, r, theta, z, 0);
    let b_t = coeff_partial(&cand.b, r, theta, z, 1);
    let b_z = coeff_partial(&cand.b, r, theta, z, 2);
    let h_r = coeff_partial(&cand.h, r, theta, z, 0);
    let h_t = coeff_partial(&cand.h, r, theta, z, 1);
    let h_z = coeff_partial(&cand.h, r, theta, z, 2);

    let r2 = r * r;
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r6 = r3 * r3;
    let g2 = (r2 * r2 + 16.0 * z * z).sqrt();
    let g3 = g2 * g2 * g2;

    Ok([
        a_r,
        2.0 * a_t + r2 * (a_z + 2.0 * d_r),
        4.0 * a + r3 * d_z + 2.0 * r * (d_t + r2 * b_r),
        2.0 * d + r3 * b_z + 2.0 * r * b_t,
        2.0 * r3 * g3 * h_r - 8.0 * k * r6 * a - 16.0 * k * r5 * z * d,
        r * g3 * (r2 * h_z + 2.0 * h_t) - 4.0 * k * r6 * d - 32.0 * k * r5 * z * b,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{almost_poisson, obs_hamiltonian};
    use crate::integrals;
    use crate::sampling::{random_states, StateRanges};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn k1() -> PotentialParams {
        PotentialParams::new(1.0).unwrap()
    }

    fn fig_state() -> CylState {
        CylState::new(1.0, 0.0, 0.0, 0.0, 0.1)
    }

    #[test]
    fn hamiltonian_is_conserved_pointwise() {
        let h = obs_hamiltonian;
        let res = integral_residual(&h, &fig_state(), &k1()).unwrap();
        assert!(res.abs() <= 1e-8, "residual {res}");
    }

    #[test]
    fn first_integral_is_conserved_at_random_states() {
        let params = k1();
        let f1 = |s: &CylState, p: &PotentialParams| integrals::f1(s, p).unwrap();
        let mut worst = 0.0f64;
        for s in random_states(11, 100, &StateRanges::default()) {
            worst = worst.max(integral_residual(&f1, &s, &params).unwrap().abs());
        }
        assert!(worst <= 1e-6, "max residual {worst}");
    }

    #[test]
    fn momentum_is_not_conserved() {
        let pr = |s: &CylState, _: &PotentialParams| s.p_r;
        let res = integral_residual(&pr, &fig_state(), &k1()).unwrap();
        assert_abs_diff_eq!(res, -1.99, epsilon = 1e-6);
    }

    #[test]
    fn residual_is_linear_in_the_observable() {
        let params = k1();
        let s = CylState::new(0.8, 1.1, 0.3, -0.2, 0.4);
        let f = |s: &CylState, _: &PotentialParams| s.p_r * s.z;
        let g = |s: &CylState, p: &PotentialParams| obs_hamiltonian(s, p) * s.r;
        let (alpha, beta) = (1.7, -0.6);
        let combo =
            move |st: &CylState, p: &PotentialParams| alpha * f(st, p) + beta * g(st, p);
        let lhs = integral_residual(&combo, &s, &params).unwrap();
        let rhs = alpha * integral_residual(&f, &s, &params).unwrap()
            + beta * integral_residual(&g, &s, &params).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-8 * (1.0 + rhs.abs()));
    }

    #[test]
    fn two_conservation_oracles_agree() {
        // dF/dt via the vector field vs the almost Poisson bracket {F, H}
        let params = k1();
        let h = obs_hamiltonian;
        let f1 = |s: &CylState, p: &PotentialParams| integrals::f1(s, p).unwrap();
        let pr = |s: &CylState, _: &PotentialParams| s.p_r;
        for s in random_states(13, 50, &StateRanges::default()) {
            for f in [&f1 as &dyn Observable, &pr as &dyn Observable] {
                let a = integral_residual(f, &s, &params).unwrap();
                let b = almost_poisson(f, &h, &s, &params).unwrap();
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn tilde_family_reassembles_the_integrals() {
        let params = k1();
        let states = random_states(17, 100, &StateRanges::default());
        let cases: [(AppendixConstants, fn(&CylState, &PotentialParams) -> f64); 3] = [
            (
                AppendixConstants { c2: 1.0, c3: 0.0, c4: 0.0 },
                |s, p| integrals::f1(s, p).unwrap(),
            ),
            (
                AppendixConstants { c2: 0.0, c3: 1.0, c4: 0.0 },
                |s, p| integrals::f2(s, p).unwrap(),
            ),
            (
                AppendixConstants { c2: 0.0, c3: 0.0, c4: 1.0 },
                |s, p| integrals::f3(s, p).unwrap(),
            ),
        ];
        for (c, reference) in cases {
            let cand = tilde_coefficients(c, &params);
            for s in &states {
                let lhs = cand.evaluate(s);
                let rhs = reference(s, &params);
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
                    "constants {c:?}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn tilde_f2_is_conserved_along_the_flow() {
        let params = k1();
        let cand = tilde_coefficients(
            AppendixConstants { c2: 0.0, c3: 1.0, c4: 0.0 },
            &params,
        );
        let obs = move |s: &CylState, _: &PotentialParams| cand.evaluate(s);
        for s in random_states(19, 50, &StateRanges::default()) {
            let res = integral_residual(&obs, &s, &params).unwrap();
            assert!(res.abs() <= 1e-6, "residual {res}");
        }
    }

    #[test]
    fn both_printed_f3_forms_agree() {
        let params = k1();
        for s in random_states(23, 200, &StateRanges::default()) {
            let a = integrals::f3(&s, &params).unwrap();
            let b = integrals::f3_compact(&s, &params).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn tilde_coefficients_solve_the_pde_system() {
        let params = k1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let c = AppendixConstants {
                c2: rng.gen_range(-1.0..1.0),
                c3: rng.gen_range(-1.0..1.0),
                c4: rng.gen_range(-1.0..1.0),
            };
            let cand = tilde_coefficients(c, &params);
            let r = rng.gen_range(0.5..1.5);
            let th = rng.gen_range(-3.0..3.0);
            let z = rng.gen_range(-1.0..1.0);
            let res = pde_residuals(&cand, r, th, z, &params).unwrap();
            for (i, e) in res.iter().enumerate() {
                assert!(e.abs() <= 1e-5, "equation {} residual {e} (c = {c:?})", i + 1);
            }
        }
    }

    #[test]
    fn constructed_violation_is_detected() {
        let params = k1();
        let cand = QuadraticCandidate {
            a: Box::new(|r, _, _| r),
            d: Box::new(|_, _, _| 0.0),
            b: Box::new(|_, _, _| 0.0),
            h: Box::new(|_, _, _| 0.0),
        };
        let res = pde_residuals(&cand, 0.9, 0.4, 0.2, &params).unwrap();
        assert_abs_diff_eq!(res[0], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn twice_the_energy_solves_the_pde_system() {
        let params = k1();
        let k = params.k;
        let cand = QuadraticCandidate {
            a: Box::new(|_, _, _| 1.0),
            d: Box::new(|_, _, _| 0.0),
            b: Box::new(|r, _, _| 1.0 / (r * r)),
            h: Box::new(move |r, _, z| -2.0 * k / (r * r * r * r + 16.0 * z * z).sqrt()),
        };
        let res = pde_residuals(&cand, 1.1, -0.7, 0.4, &params).unwrap();
        for (i, e) in res.iter().enumerate() {
            assert!(e.abs() <= 1e-5, "equation {} residual {e}", i + 1);
        }
    }
}
