//! Dynamics of a point mass on the Heisenberg group attracted by a fixed
//! "sun" at the origin.
//!
//! The configuration space is ℝ³ with the group product
//! `(x, y, z)·(x′, y′, z′) = (x + x′, y + y′, z + z′ + (xy′ − x′y)/2)`
//! and velocities constrained to the horizontal distribution spanned by
//! `X = ∂x − (y/2)∂z`, `Y = ∂y + (x/2)∂z`. The attracting potential is the
//! fundamental solution of the sub-Laplacian `X² + Y²`,
//!
//! ```text
//! U = −k/ρ²,   ρ(x, y, z) = ((x² + y²)² + 16 z²)^(1/4).
//! ```
//!
//! In cylindrical phase coordinates `(r, θ, z, p_R, p_S)` the motion is
//! governed by a five-dimensional generalized Hamiltonian system that carries
//! three independent quadratic first integrals `F₁, F₂, F₃` besides the
//! energy `H`, tied together by `F₁² + F₂² = 2HF₃ + k²`. Bounded trajectories
//! wind around fourth-order invariant surfaces determined by `(H, F₃, θ₀)`.
//!
//! The crate provides:
//!
//! * [`geometry`] — group law, dilations, Cartesian/cylindrical conversions;
//! * [`potential`] — the gauge ρ, the potential U, and a finite-difference
//!   harmonicity certificate for the sub-Laplacian;
//! * [`dynamics`] — the Hamiltonian, the vector field, and a numeric almost
//!   Poisson bracket over observables;
//! * [`integrals`] — closed forms of H, F₁, F₂, F₃, the derived invariants J
//!   and θ₀, and case classification;
//! * [`integrator`] — an embedded Dormand–Prince 5(4) integrator with PI
//!   step control, drift monitoring and dense-output sampling, plus a fixed
//!   RK4 step for convergence studies;
//! * [`surfaces`] — invariant-surface residuals, branch-aware mesh sampling,
//!   the Cartesian quartic form and the z = 0 trace conics;
//! * [`special`] — stationary points, the heteroclinic minimal-energy curves
//!   and degenerate radial lines in closed form;
//! * [`verifier`] — residual checks for the first-integral condition, the
//!   six coefficient PDEs of the quadratic ansatz, and a least-squares probe
//!   for (the absence of) linear-in-momenta integrals.
//!
//! ```
//! use heiskep::geometry::{CartPoint, CartState, to_cylindrical};
//! use heiskep::integrator::{integrate, IntegratorConfig};
//! use heiskep::potential::PotentialParams;
//!
//! let params = PotentialParams::new(1.0).unwrap();
//! let s0 = to_cylindrical(&CartState {
//!     point: CartPoint::new(1.0, 0.0, 0.0),
//!     p_x: 0.0,
//!     p_y: 0.1,
//! })
//! .unwrap();
//! let cfg = IntegratorConfig {
//!     t_end: 5.0,
//!     ..IntegratorConfig::default()
//! };
//! let traj = integrate(&s0, &cfg, &params).unwrap();
//! assert!(traj.drift.max_abs() < 1e-7);
//! ```

pub mod dynamics;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod integrals;
pub mod integrator;
pub mod potential;
pub mod sampling;
pub mod special;
pub mod surfaces;
pub mod tolerances;
pub mod verifier;

pub use error::{Error, Result};
