use serde::Serialize;

use heiskep::surfaces::{
    sample_surface, surface_residual, trace_conic, SurfaceSpec, TraceConic,
};

use crate::config::{self, CommonArgs, Overrides};
use crate::output::{ensure_dir, write_json, write_mesh_csv, write_surface_plot, ReportMeta};
use crate::{CliError, CliResult, SurfaceArgs};

#[derive(Serialize)]
struct SymmetryChecks {
    /// Max |residual(z) − residual(−z)| over probe points.
    reflection_gap: f64,
    /// Max residual asymmetry across the θ₀ mirror (general case only).
    mirror_gap: Option<f64>,
    max_r: f64,
    points: usize,
}

#[derive(Serialize)]
struct SurfaceReport {
    meta: ReportMeta,
    spec: SurfaceSpec,
    conic: Option<TraceConic>,
    symmetry: SymmetryChecks,
    residual_max: f64,
}

pub fn run(common: &CommonArgs, args: &SurfaceArgs) -> CliResult {
    let resolved = config::resolve(
        common,
        &Overrides {
            k: args.k,
            cart: args.cart.as_deref(),
            cyl: args.cyl.as_deref(),
            ..Default::default()
        },
    )?;

    // the spec comes either from explicit invariants or from a state
    let energy = args.energy.or(resolved.surface.energy);
    let f3 = args.f3.or(resolved.surface.f3);
    let theta0 = args.theta0.or(resolved.surface.theta0);
    let spec = match (energy, f3) {
        (Some(h), Some(f3)) => SurfaceSpec::new(resolved.params.k, h, f3, theta0.or(Some(0.0)))
            .map_err(|e| CliError::Config(e.to_string()))?,
        (None, None) => {
            let initial = resolved.initial.ok_or_else(|| {
                CliError::Config(
                    "surface needs either --energy/--f3 or an initial state".into(),
                )
            })?;
            SurfaceSpec::from_state(&initial.to_cyl()?, &resolved.params)
                .map_err(|e| CliError::Config(e.to_string()))?
        }
        _ => {
            return Err(CliError::Config(
                "give both --energy and --f3, or neither".into(),
            ))
        }
    };

    let n_r = resolved.surface.n_r.unwrap_or(args.n_r);
    let n_theta = resolved.surface.n_theta.unwrap_or(args.n_theta);
    let r_max = args.r_max.or(resolved.surface.r_max);
    log::info!("surface: case {:?}, {} x {} grid", spec.case, n_r, n_theta);

    let mesh = sample_surface(&spec, n_r, n_theta, r_max)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut residual_max = 0.0f64;
    let mut reflection = 0.0f64;
    let mut mirror = None;
    if spec.case == heiskep::integrals::Case::General {
        let t0 = spec.theta0.unwrap_or(0.0);
        let mut mg = 0.0f64;
        for p in mesh.points.iter().take(500) {
            let a = surface_residual(p.r, p.theta, p.z, &spec).unwrap_or(f64::NAN);
            residual_max = residual_max.max(a.abs());
            let b = surface_residual(p.r, p.theta, -p.z, &spec).unwrap_or(f64::NAN);
            reflection = reflection.max((a - b).abs());
            let m = surface_residual(p.r, 2.0 * t0 - p.theta, p.z, &spec).unwrap_or(f64::NAN);
            mg = mg.max((a - m).abs());
        }
        mirror = Some(mg);
    } else {
        for p in &mesh.points {
            let a = heiskep::surfaces::min_energy_residual(p.r, p.z, &spec)
                .unwrap_or(f64::NAN);
            residual_max = residual_max.max(a.abs());
        }
    }

    let report = SurfaceReport {
        meta: ReportMeta::new(resolved.seed, resolved.tolerances),
        spec,
        conic: trace_conic(&spec).ok(),
        symmetry: SymmetryChecks {
            reflection_gap: reflection,
            mirror_gap: mirror,
            max_r: mesh.max_r(),
            points: mesh.points.len(),
        },
        residual_max,
    };

    ensure_dir(&resolved.out)?;
    write_mesh_csv(&resolved.out.join("mesh.csv"), &mesh)?;
    write_json(&resolved.out.join("surface_report.json"), &report)?;
    write_surface_plot(&resolved.out.join("plot_surface.gp"), "mesh.csv")?;
    println!(
        "surface: {} mesh points (case {}), residual <= {:.2e}, outputs in {}",
        mesh.points.len(),
        spec.case,
        residual_max,
        resolved.out.display()
    );
    Ok(0)
}
