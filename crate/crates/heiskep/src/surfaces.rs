//! Invariant surfaces: residual evaluation, branch-aware mesh sampling, the
//! Cartesian quartic form, and the z = 0 trace conics.
//!
//! A trajectory with fingerprint (H, F₃, θ₀) stays on the surface
//!
//! ```text
//! F₃ = 8z²H + k√(r⁴ + 16z²) − J r² cos(2(θ − θ₀)),   J = √(k² + 2HF₃)
//! ```
//!
//! in the general case. For J = 0 the surface is the ellipsoid of revolution
//! `4k²z² + kF₃r² = F₃²`, and for F₃ = 0 it degenerates to the horizontal
//! line `z = 0, θ = θ₀ mod π` through the origin.
//!
//! Clearing the square root and squaring yields a quartic that is quadratic
//! in z²; its solution set is branched. A root is kept only if the
//! pre-squared equation holds (the root recovers `+k√·`, not `−k√·`) and,
//! for H < 0, if it lies inside the zero-velocity ball `√(r⁴+16z²) ≤ k/|H|`:
//! the level set folds exactly on that sphere and the sheet beyond it is
//! unreachable by trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CylState;
use crate::integrals::{default_case_tol, evaluate_integrals, Case, IntegralValues};
use crate::potential::{gauge_sq_cyl, PotentialParams};

/// The data defining one invariant surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub k: f64,
    pub h: f64,
    pub f3: f64,
    /// Phase offset in [0, π); `None` when J = 0 (rotationally symmetric).
    pub theta0: Option<f64>,
    /// `J = √(k² + 2HF₃)`.
    pub j: f64,
    pub case: Case,
}

impl SurfaceSpec {
    /// Build a spec from (k, H, F₃, θ₀). Fails when k ≤ 0, F₃ < 0 or
    /// `k² + 2HF₃ < 0` (no such invariant values exist).
    pub fn new(k: f64, h: f64, f3: f64, theta0: Option<f64>) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if !(f3 >= 0.0) {
            return Err(Error::InvalidArgument("F3 must be nonnegative".into()));
        }
        let j_sq = k * k + 2.0 * h * f3;
        let tol = default_case_tol(k);
        if j_sq < -tol {
            return Err(Error::InvalidArgument(format!(
                "inconsistent spec: k^2 + 2*H*F3 = {j_sq} < 0"
            )));
        }
        let j = j_sq.max(0.0).sqrt();
        let case = crate::integrals::classify(f3, j, tol);
        let theta0 = match case {
            Case::MinEnergy => None,
            _ => match theta0 {
                Some(t) => Some(t.rem_euclid(std::f64::consts::PI)),
                None => {
                    return Err(Error::InvalidArgument(
                        "theta0 required when J > 0".into(),
                    ))
                }
            },
        };
        Ok(Self { k, h, f3, theta0, j, case })
    }

    pub fn from_integrals(v: &IntegralValues, k: f64) -> Result<Self> {
        Self::new(k, v.h, v.f3, v.theta0)
    }

    pub fn from_state(s: &CylState, params: &PotentialParams) -> Result<Self> {
        let v = evaluate_integrals(s, params)?;
        Self::from_integrals(&v, params.k)
    }

    fn require(&self, expected: Case) -> Result<()> {
        if self.case == expected {
            Ok(())
        } else {
            Err(Error::CaseMismatch {
                expected,
                actual: self.case,
            })
        }
    }

    fn theta0_or_zero(&self) -> f64 {
        self.theta0.unwrap_or(0.0)
    }
}

/// Signed residual of the general-case surface equation; zero on the surface.
pub fn surface_residual(r: f64, theta: f64, z: f64, spec: &SurfaceSpec) -> Result<f64> {
    spec.require(Case::General)?;
    let t0 = spec.theta0_or_zero();
    Ok(8.0 * z * z * spec.h + spec.k * gauge_sq_cyl(r, z)
        - spec.j * r * r * (2.0 * (theta - t0)).cos()
        - spec.f3)
}

/// Signed residual of the minimal-energy ellipsoid `4k²z² + kF₃r² − F₃²`.
pub fn min_energy_residual(r: f64, z: f64, spec: &SurfaceSpec) -> Result<f64> {
    spec.require(Case::MinEnergy)?;
    Ok(4.0 * spec.k * spec.k * z * z + spec.k * spec.f3 * r * r - spec.f3 * spec.f3)
}

/// The degenerate locus: the horizontal line z = 0, θ ≡ θ₀ (mod π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateLine {
    pub theta0: f64,
}

impl DegenerateLine {
    /// Distance of (θ, z) from the line in the (θ mod π, z) sense.
    pub fn deviation(&self, theta: f64, z: f64) -> f64 {
        let d = (theta - self.theta0).rem_euclid(std::f64::consts::PI);
        let d = d.min(std::f64::consts::PI - d);
        d.max(z.abs())
    }
}

pub fn degenerate_locus(spec: &SurfaceSpec) -> Result<DegenerateLine> {
    spec.require(Case::Degenerate)?;
    Ok(DegenerateLine {
        theta0: spec.theta0_or_zero(),
    })
}

/// One admissible mesh point. `branch` is the index of the z²-root of the
/// quartic (0 = smaller root).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshPoint {
    pub r: f64,
    pub theta: f64,
    pub z: f64,
    pub branch: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub points: Vec<MeshPoint>,
    /// Residual tolerance every emitted point satisfies.
    pub tol: f64,
}

impl SurfaceMesh {
    pub fn max_r(&self) -> f64 {
        self.points.iter().map(|p| p.r).fold(0.0, f64::max)
    }
}

/// Solve the surface equation for z² at one (r, θ) node. Returns up to two
/// admissible roots with branch indices.
fn solve_node(r: f64, theta: f64, spec: &SurfaceSpec) -> Vec<(f64, u8)> {
    let k = spec.k;
    let tol = 1e-9 * (1.0 + k * k + spec.f3.abs());
    let mut out = Vec::new();

    if spec.case == Case::MinEnergy {
        let w = (spec.f3 * spec.f3 - k * spec.f3 * r * r) / (4.0 * k * k);
        if w >= -tol {
            out.push((w.max(0.0), 0));
        }
        return out;
    }

    let c = (2.0 * (theta - spec.theta0_or_zero())).cos();
    let c0 = spec.f3 + spec.j * r * r * c;
    let r4 = r * r * r * r;

    let push_checked = |w: f64, branch: u8, out: &mut Vec<(f64, u8)>| {
        if w < -tol {
            return;
        }
        let w = w.max(0.0);
        // pre-squared equation: k sqrt(r^4 + 16 w) must equal C0 - 8 H w
        let lhs = k * (r4 + 16.0 * w).sqrt();
        let rhs = c0 - 8.0 * spec.h * w;
        if (lhs - rhs).abs() > tol * (1.0 + lhs.abs()) {
            return;
        }
        // zero-velocity ball for bounded energies: the outer sheet beyond
        // sqrt(r^4+16z^2) = k/|H| carries no trajectories
        if spec.h < 0.0 {
            let gauge_sq = (r4 + 16.0 * w).sqrt();
            if gauge_sq > k / spec.h.abs() * (1.0 + 1e-9) + tol {
                return;
            }
        }
        out.push((w, branch));
    };

    if spec.h.abs() <= 1e-14 * k * k {
        // H = 0: the squared equation is linear in z²
        let w = (c0 * c0 - k * k * r4) / (16.0 * k * k);
        push_checked(w, 0, &mut out);
    } else {
        // 64H² w² − 16(HC₀ + k²) w + C₀² − k²r⁴ = 0
        let a = 64.0 * spec.h * spec.h;
        let b = -16.0 * (spec.h * c0 + k * k);
        let cc = c0 * c0 - k * k * r4;
        let disc = b * b - 4.0 * a * cc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let (mut w1, mut w2) = if q == 0.0 {
                (0.0, 0.0)
            } else {
                (q / a, cc / q)
            };
            if w1 > w2 {
                std::mem::swap(&mut w1, &mut w2);
            }
            push_checked(w1, 0, &mut out);
            if (w2 - w1).abs() > tol {
                push_checked(w2, 1, &mut out);
            }
        }
    }
    out
}

/// Sample the surface on an (r, θ)-uniform grid, solving for z² per node and
/// keeping only roots on the genuine branch. Cells without real admissible
/// roots stay empty; `r_max` clips unbounded (H ≥ 0) surfaces and defaults
/// to the trace extent for bounded ones.
pub fn sample_surface(
    spec: &SurfaceSpec,
    n_r: usize,
    n_theta: usize,
    r_max: Option<f64>,
) -> Result<SurfaceMesh> {
    if spec.case == Case::Degenerate {
        return Err(Error::CaseMismatch {
            expected: Case::General,
            actual: spec.case,
        });
    }
    if n_r < 2 || n_theta < 1 {
        return Err(Error::InvalidArgument(
            "mesh needs at least 2 radial and 1 angular node".into(),
        ));
    }
    let r_hi = match r_max {
        Some(v) if v > 0.0 => v,
        Some(v) => {
            return Err(Error::InvalidArgument(format!(
                "r_max must be positive, got {v}"
            )))
        }
        None => match spec.case {
            Case::MinEnergy => (spec.f3 / spec.k).sqrt(),
            _ if spec.h < 0.0 => (spec.f3 / (spec.k - spec.j)).sqrt(),
            _ => 5.0 * (spec.f3 / spec.k).sqrt().max(1.0),
        },
    };
    let tol = 1e-9 * (1.0 + spec.k * spec.k + spec.f3.abs());
    let mut points = Vec::new();
    for i in 0..n_r {
        let r = r_hi * i as f64 / (n_r - 1) as f64;
        for jt in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * jt as f64 / n_theta as f64;
            for (w, branch) in solve_node(r, theta, spec) {
                let z = w.sqrt();
                points.push(MeshPoint { r, theta, z, branch });
                if z > 0.0 {
                    points.push(MeshPoint { r, theta, z: -z, branch });
                }
            }
        }
    }
    Ok(SurfaceMesh { points, tol })
}

/// The z = 0 trace of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TraceConic {
    /// H < 0: semiaxes `√(F₃/(k−J))` (along θ₀) and `√(F₃/(k+J))`.
    Ellipse {
        semi_major: f64,
        semi_minor: f64,
        orientation: f64,
    },
    /// H = 0: two lines parallel to the θ₀ axis. The perpendicular distance
    /// from the origin is `√(F₃/(2k))` — the J → k limit of the ellipse
    /// semiminor axis, and the value mesh points actually fit.
    ParallelLines {
        distance_from_origin: f64,
        direction: f64,
    },
    /// H > 0: transverse semiaxis `√(F₃/(k+J))` along θ₀ + π/2, conjugate
    /// semiaxis `√(F₃/(J−k))`.
    Hyperbola {
        transverse_semiaxis: f64,
        conjugate_semiaxis: f64,
        transverse_axis: f64,
    },
}

pub fn trace_conic(spec: &SurfaceSpec) -> Result<TraceConic> {
    if spec.case == Case::Degenerate {
        return Err(Error::CaseMismatch {
            expected: Case::General,
            actual: spec.case,
        });
    }
    let t0 = spec.theta0_or_zero();
    let h_tol = 1e-12 * spec.k * spec.k;
    if spec.h < -h_tol {
        Ok(TraceConic::Ellipse {
            semi_major: (spec.f3 / (spec.k - spec.j)).sqrt(),
            semi_minor: (spec.f3 / (spec.k + spec.j)).sqrt(),
            orientation: t0,
        })
    } else if spec.h <= h_tol {
        Ok(TraceConic::ParallelLines {
            distance_from_origin: (spec.f3 / (2.0 * spec.k)).sqrt(),
            direction: t0,
        })
    } else {
        Ok(TraceConic::Hyperbola {
            transverse_semiaxis: (spec.f3 / (spec.k + spec.j)).sqrt(),
            conjugate_semiaxis: (spec.f3 / (spec.j - spec.k)).sqrt(),
            transverse_axis: (t0 + std::f64::consts::FRAC_PI_2)
                .rem_euclid(std::f64::consts::PI),
        })
    }
}

/// Coefficients of the squared (quartic) surface equation
/// `k²((x²+y²)² + 16z²) − (F₃ − 8z²H + α(x²−y²) + βxy)² = 0`
/// with `α = J cos 2θ₀`, `β = 2J sin 2θ₀`, as a polynomial in (x, y, z²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianQuartic {
    pub x4: f64,
    pub y4: f64,
    pub x2y2: f64,
    pub x3y: f64,
    pub xy3: f64,
    pub x2: f64,
    pub y2: f64,
    pub xy: f64,
    pub z2: f64,
    pub z4: f64,
    pub x2z2: f64,
    pub y2z2: f64,
    pub xyz2: f64,
    pub constant: f64,
}

impl CartesianQuartic {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let (x2, y2, w) = (x * x, y * y, z * z);
        self.x4 * x2 * x2
            + self.y4 * y2 * y2
            + self.x2y2 * x2 * y2
            + self.x3y * x2 * x * y
            + self.xy3 * x * y2 * y
            + self.x2 * x2
            + self.y2 * y2
            + self.xy * x * y
            + self.z2 * w
            + self.z4 * w * w
            + self.x2z2 * x2 * w
            + self.y2z2 * y2 * w
            + self.xyz2 * x * y * w
            + self.constant
    }

    pub fn coefficients(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("x^4", self.x4),
            ("y^4", self.y4),
            ("x^2*y^2", self.x2y2),
            ("x^3*y", self.x3y),
            ("x*y^3", self.xy3),
            ("x^2", self.x2),
            ("y^2", self.y2),
            ("x*y", self.xy),
            ("z^2", self.z2),
            ("z^4", self.z4),
            ("x^2*z^2", self.x2z2),
            ("y^2*z^2", self.y2z2),
            ("x*y*z^2", self.xyz2),
            ("1", self.constant),
        ]
    }
}

pub fn cartesian_quartic(spec: &SurfaceSpec) -> Result<CartesianQuartic> {
    spec.require(Case::General)?;
    let t0 = spec.theta0_or_zero();
    let k2 = spec.k * spec.k;
    let alpha = spec.j * (2.0 * t0).cos();
    let beta = 2.0 * spec.j * (2.0 * t0).sin();
    let (f3, h) = (spec.f3, spec.h);
    Ok(CartesianQuartic {
        x4: k2 - alpha * alpha,
        y4: k2 - alpha * alpha,
        x2y2: 2.0 * k2 + 2.0 * alpha * alpha - beta * beta,
        x3y: -2.0 * alpha * beta,
        xy3: 2.0 * alpha * beta,
        x2: -2.0 * f3 * alpha,
        y2: 2.0 * f3 * alpha,
        xy: -2.0 * f3 * beta,
        z2: 16.0 * k2 + 16.0 * f3 * h,
        z4: -64.0 * h * h,
        x2z2: 16.0 * h * alpha,
        y2z2: -16.0 * h * alpha,
        xyz2: 16.0 * h * beta,
        constant: -f3 * f3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn k1() -> PotentialParams {
        PotentialParams::new(1.0).unwrap()
    }

    fn fig_spec() -> SurfaceSpec {
        let s = CylState::new(1.0, 0.0, 0.0, 0.0, 0.1);
        SurfaceSpec::from_state(&s, &k1()).unwrap()
    }

    fn min_energy_spec() -> SurfaceSpec {
        SurfaceSpec::new(1.0, -0.25, 2.0, None).unwrap()
    }

    #[test]
    fn spec_from_reference_state() {
        let spec = fig_spec();
        assert_eq!(spec.case, Case::General);
        assert_relative_eq!(spec.j, 0.99, max_relative = 1e-14);
        assert_eq!(spec.theta0, Some(0.0));
    }

    #[test]
    fn inconsistent_spec_is_rejected() {
        assert!(SurfaceSpec::new(1.0, -2.0, 2.0, Some(0.0)).is_err()); // k²+2HF₃ = -7
        assert!(SurfaceSpec::new(-1.0, 0.0, 1.0, Some(0.0)).is_err());
        assert!(SurfaceSpec::new(1.0, 0.0, -1.0, Some(0.0)).is_err());
    }

    #[test]
    fn residual_vanishes_on_initial_point() {
        let spec = fig_spec();
        let res = surface_residual(1.0, 0.0, 0.0, &spec).unwrap();
        assert_abs_diff_eq!(res, 0.0, epsilon = 1e-12);
        // off-surface control: cos(2·π/4) = 0
        let off = surface_residual(1.0, std::f64::consts::FRAC_PI_4, 0.0, &spec).unwrap();
        assert_relative_eq!(off, 0.99, max_relative = 1e-12);
    }

    #[test]
    fn residual_case_guards() {
        let me = min_energy_spec();
        assert!(surface_residual(1.0, 0.0, 0.0, &me).is_err());
        assert!(min_energy_residual(1.0, 0.0, &fig_spec()).is_err());
        assert!(degenerate_locus(&fig_spec()).is_err());
    }

    #[test]
    fn ellipsoid_anchors() {
        let spec = min_energy_spec();
        assert_abs_diff_eq!(
            min_energy_residual(2.0f64.sqrt(), 0.0, &spec).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // poles
        assert_abs_diff_eq!(min_energy_residual(0.0, 1.0, &spec).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min_energy_residual(0.0, -1.0, &spec).unwrap(), 0.0, epsilon = 1e-12);
        // the origin is interior
        assert!(min_energy_residual(0.0, 0.0, &spec).unwrap() < 0.0);
    }

    #[test]
    fn degenerate_line_from_rest_state() {
        let rest = CylState::new(1.0, 0.0, 0.0, 0.0, 0.0);
        let spec = SurfaceSpec::from_state(&rest, &k1()).unwrap();
        assert_eq!(spec.case, Case::Degenerate);
        let line = degenerate_locus(&spec).unwrap();
        assert_eq!(line.theta0, 0.0);
        assert_eq!(line.deviation(std::f64::consts::PI, 0.0), 0.0);
        // a line spec along the y-axis
        let spec = SurfaceSpec::new(1.0, -1.0, 0.0, Some(std::f64::consts::FRAC_PI_2)).unwrap();
        let line = degenerate_locus(&spec).unwrap();
        assert_abs_diff_eq!(line.theta0, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn min_energy_mesh_matches_closed_form() {
        let spec = min_energy_spec();
        let mesh = sample_surface(&spec, 40, 8, None).unwrap();
        assert!(!mesh.points.is_empty());
        for p in &mesh.points {
            // z² = 1 − r²/2 for k=1, F₃=2
            let expect = 1.0 - p.r * p.r / 2.0;
            assert_abs_diff_eq!(p.z * p.z, expect.max(0.0), epsilon = 1e-12);
            assert_abs_diff_eq!(
                min_energy_residual(p.r, p.z, &spec).unwrap(),
                0.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn general_mesh_points_satisfy_the_equation() {
        let spec = fig_spec();
        let mesh = sample_surface(&spec, 60, 24, None).unwrap();
        assert!(!mesh.points.is_empty());
        for p in &mesh.points {
            let res = surface_residual(p.r, p.theta, p.z, &spec).unwrap();
            assert!(res.abs() <= 1e-9, "residual {res} at {p:?}");
        }
    }

    #[test]
    fn bounded_energy_mesh_has_bounded_radius() {
        let spec = fig_spec();
        let mesh = sample_surface(&spec, 80, 32, None).unwrap();
        let r_bound = (spec.f3 / (spec.k - spec.j)).sqrt();
        assert!(mesh.max_r() <= r_bound + 1e-9, "max r {}", mesh.max_r());
    }

    #[test]
    fn flat_energy_surface_is_unbounded_single_branch() {
        let spec = SurfaceSpec::new(1.0, 0.0, 1.0, Some(0.0)).unwrap();
        // along θ = θ₀ the trace satisfies k√(r⁴+16z²) = F₃ + J r²
        for r in [0.5, 1.0, 10.0, 1e3] {
            let roots = solve_node(r, 0.0, &spec);
            assert_eq!(roots.len(), 1, "r={r}");
            let (w, _) = roots[0];
            let lhs = spec.k * (r.powi(4) + 16.0 * w).sqrt();
            let rhs = spec.f3 + spec.j * r * r;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn positive_energy_admits_arbitrarily_large_radii() {
        let spec = SurfaceSpec::new(1.0, 0.5, 1.0, Some(0.0)).unwrap();
        let roots = solve_node(1e3, 0.0, &spec);
        assert!(!roots.is_empty());
    }

    #[test]
    fn residual_reflection_symmetries() {
        let spec = fig_spec();
        let t0 = spec.theta0.unwrap();
        for (r, th, z) in [(0.5, 0.7, 0.1), (0.9, -1.3, 0.02), (0.2, 2.0, 0.05)] {
            let a = surface_residual(r, th, z, &spec).unwrap();
            assert_eq!(a, surface_residual(r, th, -z, &spec).unwrap());
            let m1 = surface_residual(r, 2.0 * t0 - th, z, &spec).unwrap();
            let m2 =
                surface_residual(r, 2.0 * t0 + std::f64::consts::PI - th, z, &spec).unwrap();
            assert_abs_diff_eq!(a, m1, epsilon = 1e-12);
            assert_abs_diff_eq!(a, m2, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_j_surfaces_are_rotation_invariant() {
        let spec = min_energy_spec();
        let a = min_energy_residual(0.7, 0.4, &spec).unwrap();
        // the residual has no θ argument at all; exercise the mesh instead
        let mesh = sample_surface(&spec, 10, 16, None).unwrap();
        let mut by_r: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
        for p in &mesh.points {
            by_r.entry(p.r.to_bits()).or_default().push(p.z.abs());
        }
        for (_, zs) in by_r {
            for w in zs.windows(2) {
                assert_abs_diff_eq!(w[0], w[1], epsilon = 1e-12);
            }
        }
        assert!(a.is_finite());
    }

    #[test]
    fn trace_conic_reference_ellipse() {
        let conic = trace_conic(&fig_spec()).unwrap();
        match conic {
            TraceConic::Ellipse {
                semi_major,
                semi_minor,
                orientation,
            } => {
                assert_relative_eq!(semi_major, 1.0, max_relative = 1e-12);
                assert_relative_eq!(
                    semi_minor,
                    (0.01f64 / 1.99).sqrt(),
                    max_relative = 1e-12
                );
                assert_eq!(orientation, 0.0);
            }
            other => panic!("expected ellipse, got {other:?}"),
        }
    }

    #[test]
    fn trace_conic_circle_and_lines_and_hyperbola() {
        match trace_conic(&min_energy_spec()).unwrap() {
            TraceConic::Ellipse {
                semi_major,
                semi_minor,
                ..
            } => {
                assert_relative_eq!(semi_major, 2.0f64.sqrt(), max_relative = 1e-12);
                assert_relative_eq!(semi_minor, 2.0f64.sqrt(), max_relative = 1e-12);
            }
            other => panic!("expected circle, got {other:?}"),
        }
        let flat = SurfaceSpec::new(1.0, 0.0, 1.0, Some(0.0)).unwrap();
        match trace_conic(&flat).unwrap() {
            TraceConic::ParallelLines {
                distance_from_origin,
                ..
            } => {
                // the J → k limit of the ellipse semiminor axis
                assert_relative_eq!(distance_from_origin, 0.5f64.sqrt(), max_relative = 1e-12);
            }
            other => panic!("expected lines, got {other:?}"),
        }
        let open = SurfaceSpec::new(1.0, 0.5, 1.0, Some(0.0)).unwrap();
        match trace_conic(&open).unwrap() {
            TraceConic::Hyperbola {
                transverse_semiaxis,
                transverse_axis,
                ..
            } => {
                assert_relative_eq!(
                    transverse_semiaxis,
                    (1.0 / (1.0 + 2.0f64.sqrt())).sqrt(),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    transverse_axis,
                    std::f64::consts::FRAC_PI_2,
                    max_relative = 1e-12
                );
            }
            other => panic!("expected hyperbola, got {other:?}"),
        }
    }

    #[test]
    fn flat_energy_lines_lie_on_the_surface() {
        // points of the reported parallel lines solve the surface equation
        // with z = 0: the node solver returns the root z² ≈ 0 there
        let spec = SurfaceSpec::new(1.0, 0.0, 1.0, Some(0.0)).unwrap();
        let d = match trace_conic(&spec).unwrap() {
            TraceConic::ParallelLines {
                distance_from_origin,
                ..
            } => distance_from_origin,
            _ => unreachable!(),
        };
        for i in 1..20 {
            let theta = 0.15 + (std::f64::consts::PI - 0.3) * i as f64 / 20.0;
            let r_line = d / theta.sin().abs();
            let roots = solve_node(r_line, theta, &spec);
            assert_eq!(roots.len(), 1, "theta={theta}");
            assert!(roots[0].0.abs() <= 1e-10, "w = {} at theta={theta}", roots[0].0);
            // the wrong (factor-√2) distance does not fit
            let r_bad = (2.0f64).sqrt() * d / theta.sin().abs();
            let bad = solve_node(r_bad, theta, &spec);
            if let Some((w, _)) = bad.first() {
                assert!(*w > 1e-4, "sqrt(F3/k) line should be off-surface at z=0");
            }
        }
    }

    #[test]
    fn quartic_vanishes_on_mesh_and_catches_spurious_branch() {
        let spec = fig_spec();
        let quartic = cartesian_quartic(&spec).unwrap();
        let mesh = sample_surface(&spec, 30, 12, None).unwrap();
        for p in &mesh.points {
            let (x, y) = (p.r * p.theta.cos(), p.r * p.theta.sin());
            let q = quartic.eval(x, y, p.z);
            let scale = spec.k * spec.k * gauge_sq_cyl(p.r, p.z).powi(2) + spec.f3 * spec.f3;
            assert!(q.abs() <= 1e-8 * scale.max(1e-6), "quartic {q} at {p:?}");
        }

        // spurious branch: positive-energy spec at θ = θ₀ + π/2 has a
        // quartic root that fails the pre-squared equation
        let open = SurfaceSpec::new(1.0, 0.5, 1.0, Some(0.0)).unwrap();
        let q_open = cartesian_quartic(&open).unwrap();
        let (r, theta) = (1.0, std::f64::consts::FRAC_PI_2);
        assert!(solve_node(r, theta, &open).is_empty());
        // root of 16w² − 12.686w − 0.828 = 0 rejected by the branch check
        let w = {
            let c0 = open.f3 + open.j * r * r * (2.0 * (theta - 0.0)).cos();
            let a = 64.0 * open.h * open.h;
            let b = -16.0 * (open.h * c0 + 1.0);
            let cc = c0 * c0 - r.powi(4);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            ((-b + disc) / (2.0 * a)).max((-b - disc) / (2.0 * a))
        };
        let z = w.sqrt();
        let (x, y) = (r * theta.cos(), r * theta.sin());
        assert_abs_diff_eq!(q_open.eval(x, y, z), 0.0, epsilon = 1e-9);
        let res = surface_residual(r, theta, z, &open).unwrap();
        assert!(res.abs() > 1.0, "spurious branch should be off-surface: {res}");
    }

    #[test]
    fn quartic_cross_terms_vanish_for_aligned_axes() {
        let spec = fig_spec(); // θ₀ = 0
        let q = cartesian_quartic(&spec).unwrap();
        assert_eq!(q.x3y, 0.0);
        assert_eq!(q.xy3, 0.0);
        assert_eq!(q.xy, 0.0);
        assert_eq!(q.xyz2, 0.0);
    }
}
