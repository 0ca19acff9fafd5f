//! File emission: trajectory/mesh CSV (17 significant digits), JSON reports
//! with embedded seed/tolerances/version, and gnuplot scripts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use heiskep::integrals::IntegralValues;
use heiskep::integrator::Trajectory;
use heiskep::surfaces::SurfaceMesh;
use heiskep::tolerances::ToleranceProfile;

use crate::CliError;

/// Provenance header embedded in every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub version: String,
    pub seed: u64,
    pub tolerances: ToleranceProfile,
}

impl ReportMeta {
    pub fn new(seed: u64, tolerances: ToleranceProfile) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            tolerances,
        }
    }
}

/// 17 significant digits; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const TRAJECTORY_HEADER: &str = "t,r,theta,z,pR,pS,x,y,H,F1,F2,F3,reldrift";

fn rel_drift(v0: &IntegralValues, v: &IntegralValues) -> f64 {
    let d = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    d(v0.h, v.h)
        .max(d(v0.f1, v.f1))
        .max(d(v0.f2, v.f2))
        .max(d(v0.f3, v.f3))
}

/// Write the trajectory CSV with the fixed column schema.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    let v0 = &traj.integrals_at_start;
    for s in &traj.samples {
        let (x, y) = s.state.xy();
        let cols = [
            s.t,
            s.state.r,
            s.state.theta,
            s.state.z,
            s.state.p_r,
            s.state.p_s,
            x,
            y,
            s.integrals.h,
            s.integrals.f1,
            s.integrals.f2,
            s.integrals.f3,
            rel_drift(v0, &s.integrals),
        ];
        let line: Vec<String> = cols.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Write the mesh CSV (`r,theta,z,branch`).
pub fn write_mesh_csv(path: &Path, mesh: &SurfaceMesh) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "r,theta,z,branch")?;
    for p in &mesh.points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.r),
            fmt_f64(p.theta),
            fmt_f64(p.z),
            p.branch
        )?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialize report: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Gnuplot script rendering the 3D trajectory and its Oxy projection.
pub fn write_trajectory_plot(path: &Path, csv_name: &str) -> Result<(), CliError> {
    let script = format!(
        r#"set datafile separator comma
set terminal pngcairo size 1400,640
set output 'trajectory.png'
set multiplot layout 1,2
set xlabel 'x'
set ylabel 'y'
set zlabel 'z'
set ticslevel 0
splot '{csv_name}' every ::1 using 7:8:4 with lines lc rgb '#1f77b4' notitle
set size square
set xlabel 'x'
set ylabel 'y'
plot '{csv_name}' every ::1 using 7:8 with lines lc rgb '#1f77b4' notitle
unset multiplot
"#
    );
    std::fs::write(path, script)?;
    Ok(())
}

/// Gnuplot script rendering a surface mesh as a point cloud.
pub fn write_surface_plot(path: &Path, csv_name: &str) -> Result<(), CliError> {
    let script = format!(
        r#"set datafile separator comma
set terminal pngcairo size 800,700
set output 'surface.png'
set xlabel 'x'
set ylabel 'y'
set zlabel 'z'
set ticslevel 0
splot '{csv_name}' every ::1 using ($1*cos($2)):($1*sin($2)):3 with points pt 7 ps 0.25 lc rgb '#2ca02c' notitle
"#
    );
    std::fs::write(path, script)?;
    Ok(())
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)?;
    Ok(())
}
