use std::fs::File;
use std::io::{BufWriter, Write};

use serde::Serialize;

use heiskep::special::{stationary_points, HeteroclinicCurve, RadialSolution};
use heiskep::surfaces::{min_energy_residual, SurfaceSpec};

use crate::config::{self, CommonArgs, Overrides};
use crate::output::{ensure_dir, fmt_f64, write_json, ReportMeta};
use crate::{CliError, CliResult, SpecialArgs, SpecialCommand};

#[derive(Serialize)]
struct SpecialReport<T: Serialize> {
    meta: ReportMeta,
    k: f64,
    #[serde(flatten)]
    body: T,
}

pub fn run(common: &CommonArgs, args: &SpecialArgs) -> CliResult {
    match &args.what {
        SpecialCommand::Stationary { k, energy } => stationary(common, *k, *energy),
        SpecialCommand::Heteroclinic { k, z0, samples, z_frac } => {
            heteroclinic(common, *k, *z0, *samples, *z_frac)
        }
        SpecialCommand::Radial { k, energy, r0, samples } => {
            radial(common, *k, *energy, *r0, *samples)
        }
    }
}

fn stationary(common: &CommonArgs, k: Option<f64>, energy: f64) -> CliResult {
    let resolved = config::resolve(common, &Overrides { k, ..Default::default() })?;
    let pts = stationary_points(&resolved.params, energy)
        .map_err(|e| CliError::Config(e.to_string()))?;
    ensure_dir(&resolved.out)?;
    let mut w = BufWriter::new(File::create(resolved.out.join("stationary.csv"))?);
    writeln!(w, "z,H,F3,J_sq_residual")?;
    for p in pts {
        let j_sq = resolved.params.k * resolved.params.k + 2.0 * p.h * p.f3;
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.z),
            fmt_f64(p.h),
            fmt_f64(p.f3),
            fmt_f64(j_sq)
        )?;
    }
    drop(w);

    #[derive(Serialize)]
    struct Body {
        energy: f64,
        points: Vec<heiskep::special::StationaryPoint>,
    }
    write_json(
        &resolved.out.join("stationary_report.json"),
        &SpecialReport {
            meta: ReportMeta::new(resolved.seed, resolved.tolerances),
            k: resolved.params.k,
            body: Body { energy, points: pts.to_vec() },
        },
    )?;
    println!(
        "special stationary: z = +/-{}, F3 = {}, outputs in {}",
        pts[0].z,
        pts[0].f3,
        resolved.out.display()
    );
    Ok(0)
}

fn heteroclinic(
    common: &CommonArgs,
    k: Option<f64>,
    z0: f64,
    samples: usize,
    z_frac: f64,
) -> CliResult {
    if !(0.0 < z_frac && z_frac < 1.0) {
        return Err(CliError::Config("z_frac must lie in (0, 1)".into()));
    }
    if samples < 2 {
        return Err(CliError::Config("need at least 2 samples".into()));
    }
    let resolved = config::resolve(common, &Overrides { k, ..Default::default() })?;
    let curve = HeteroclinicCurve::new(resolved.params.k, z0, 0.0)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let spec = SurfaceSpec::new(resolved.params.k, curve.energy(), curve.f3(), None)
        .map_err(|e| CliError::Config(e.to_string()))?;

    ensure_dir(&resolved.out)?;
    let mut w = BufWriter::new(File::create(resolved.out.join("heteroclinic.csv"))?);
    writeln!(w, "z,r,theta,pR,pS,t,ellipsoid_residual")?;
    let lo = -z_frac * z0;
    let hi = z_frac * z0;
    for i in 0..samples {
        let z = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let s = curve.point(z).map_err(|e| CliError::Config(e.to_string()))?;
        let t = curve.time(z).map_err(|e| CliError::Config(e.to_string()))?;
        let res = min_energy_residual(s.r, s.z, &spec).unwrap_or(f64::NAN);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(z),
            fmt_f64(s.r),
            fmt_f64(s.theta),
            fmt_f64(s.p_r),
            fmt_f64(s.p_s),
            fmt_f64(t),
            fmt_f64(res)
        )?;
    }
    drop(w);

    #[derive(Serialize)]
    struct Body {
        z0: f64,
        energy: f64,
        f3: f64,
        samples: usize,
    }
    write_json(
        &resolved.out.join("heteroclinic_report.json"),
        &SpecialReport {
            meta: ReportMeta::new(resolved.seed, resolved.tolerances),
            k: resolved.params.k,
            body: Body {
                z0,
                energy: curve.energy(),
                f3: curve.f3(),
                samples,
            },
        },
    )?;
    println!(
        "special heteroclinic: {} samples of the ascending curve, outputs in {}",
        samples,
        resolved.out.display()
    );
    Ok(0)
}

fn radial(
    common: &CommonArgs,
    k: Option<f64>,
    energy: f64,
    r0: f64,
    samples: usize,
) -> CliResult {
    if samples < 2 {
        return Err(CliError::Config("need at least 2 samples".into()));
    }
    let resolved = config::resolve(common, &Overrides { k, ..Default::default() })?;
    let sol = RadialSolution::new(&resolved.params, energy, r0, true)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let r_hi = sol
        .turning_radius()
        .unwrap_or_else(|| 4.0 * r0.max(1.0));

    ensure_dir(&resolved.out)?;
    let mut w = BufWriter::new(File::create(resolved.out.join("radial.csv"))?);
    writeln!(w, "r,pR,t")?;
    for i in 0..samples {
        let r = r0 + (r_hi - r0) * i as f64 / (samples - 1) as f64;
        let p = sol.radial_speed(r).map_err(|e| CliError::Config(e.to_string()))?;
        let t = sol.time_to(r).map_err(|e| CliError::Config(e.to_string()))?;
        writeln!(w, "{},{},{}", fmt_f64(r), fmt_f64(p), fmt_f64(t))?;
    }
    drop(w);

    #[derive(Serialize)]
    struct Body {
        energy: f64,
        r0: f64,
        turning_radius: Option<f64>,
    }
    write_json(
        &resolved.out.join("radial_report.json"),
        &SpecialReport {
            meta: ReportMeta::new(resolved.seed, resolved.tolerances),
            k: resolved.params.k,
            body: Body {
                energy,
                r0,
                turning_radius: sol.turning_radius(),
            },
        },
    )?;
    match sol.turning_radius() {
        Some(rt) => println!(
            "special radial: turning radius {rt}, outputs in {}",
            resolved.out.display()
        ),
        None => println!(
            "special radial: unbounded motion, outputs in {}",
            resolved.out.display()
        ),
    }
    Ok(0)
}
