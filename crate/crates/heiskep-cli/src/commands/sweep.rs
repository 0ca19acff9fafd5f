//! Grid sweeps over the coupling constant and initial-state fields. Cells
//! run concurrently with isolated state; partial failures are recorded
//! per cell and the run fails only when every cell does.

use std::fs::File;
use std::io::{BufWriter, Write};

use rayon::prelude::*;
use serde::Serialize;

use heiskep::integrator::{drift_report, integrate};
use heiskep::potential::PotentialParams;

use crate::config::{self, CommonArgs, InitialState, Overrides, SweepAxis};
use crate::output::{
    ensure_dir, fmt_f64, write_json, write_trajectory_csv, ReportMeta,
};
use crate::{CliError, CliResult, SweepArgs};

fn parse_axis(text: &str) -> Result<SweepAxis, CliError> {
    let (field, values) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("axis must be field=v1,v2,...: {text}")))?;
    let values: Result<Vec<f64>, _> = values.split(',').map(str::parse::<f64>).collect();
    let values = values.map_err(|e| CliError::Config(format!("axis {field}: {e}")))?;
    if values.is_empty() {
        return Err(CliError::Config(format!("axis {field} has no values")));
    }
    Ok(SweepAxis {
        field: field.to_string(),
        values,
    })
}

fn apply_field(
    k: &mut f64,
    initial: &mut InitialState,
    field: &str,
    value: f64,
) -> Result<(), CliError> {
    match (field, initial) {
        ("k", _) => *k = value,
        ("x", InitialState::Cartesian { x, .. }) => *x = value,
        ("y", InitialState::Cartesian { y, .. }) => *y = value,
        ("z", InitialState::Cartesian { z, .. }) => *z = value,
        ("p_x", InitialState::Cartesian { p_x, .. }) => *p_x = value,
        ("p_y", InitialState::Cartesian { p_y, .. }) => *p_y = value,
        ("r", InitialState::Cylindrical { r, .. }) => *r = value,
        ("theta", InitialState::Cylindrical { theta, .. }) => *theta = value,
        ("z", InitialState::Cylindrical { z, .. }) => *z = value,
        ("p_r", InitialState::Cylindrical { p_r, .. }) => *p_r = value,
        ("p_s", InitialState::Cylindrical { p_s, .. }) => *p_s = value,
        (other, _) => {
            return Err(CliError::Config(format!(
                "unknown sweep field {other} for this initial-state form"
            )))
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct CellSummary {
    cell: usize,
    fields: Vec<(String, f64)>,
    status: String,
    h0: f64,
    f1_0: f64,
    f2_0: f64,
    f3_0: f64,
    drift_h: f64,
    drift_f1: f64,
    drift_f2: f64,
    drift_f3: f64,
    relation_max: f64,
}

pub fn run(common: &CommonArgs, args: &SweepArgs) -> CliResult {
    let resolved = config::resolve(
        common,
        &Overrides {
            k: args.k,
            cart: args.cart.as_deref(),
            cyl: args.cyl.as_deref(),
            t_end: args.t_end,
            rel_tol: args.rel_tol,
            sample_interval: args.sample_interval,
            ..Default::default()
        },
    )?;
    let base_initial = resolved
        .initial
        .ok_or_else(|| CliError::Config("sweep needs a base initial state".into()))?;

    let mut axes: Vec<SweepAxis> = resolved.sweep_axes.clone();
    for a in &args.axes {
        axes.push(parse_axis(a)?);
    }
    if axes.is_empty() {
        return Err(CliError::Config("sweep needs at least one --axis".into()));
    }

    // the grid is the product of all axes, row-major in axis order
    let mut cells: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(cells.len() * axis.values.len());
        for cell in &cells {
            for v in &axis.values {
                let mut c = cell.clone();
                c.push((axis.field.clone(), *v));
                next.push(c);
            }
        }
        cells = next;
    }
    log::info!("sweep: {} cells over {} axes", cells.len(), axes.len());

    ensure_dir(&resolved.out)?;
    let results: Vec<Result<CellSummary, (usize, String)>> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, fields)| {
            let mut k = resolved.params.k;
            let mut initial = base_initial;
            for (f, v) in fields {
                apply_field(&mut k, &mut initial, f, *v).map_err(|e| (idx, e.to_string()))?;
            }
            let params = PotentialParams::new(k).map_err(|e| (idx, e.to_string()))?;
            let s0 = initial.to_cyl().map_err(|e| (idx, e.to_string()))?;
            let dir = resolved.out.join(format!("cell_{idx:03}"));
            ensure_dir(&dir).map_err(|e| (idx, e.to_string()))?;
            let traj = integrate(&s0, &resolved.integrator, &params)
                .map_err(|e| (idx, e.to_string()))?;
            write_trajectory_csv(&dir.join("trajectory.csv"), &traj)
                .map_err(|e| (idx, e.to_string()))?;
            let report = drift_report(&traj);
            write_json(&dir.join("drift_report.json"), &report)
                .map_err(|e| (idx, e.to_string()))?;
            let v0 = traj.integrals_at_start;
            Ok(CellSummary {
                cell: idx,
                fields: fields.clone(),
                status: if traj.termination.is_completed() {
                    "completed".into()
                } else {
                    "singularity".into()
                },
                h0: v0.h,
                f1_0: v0.f1,
                f2_0: v0.f2,
                f3_0: v0.f3,
                drift_h: report.max.h,
                drift_f1: report.max.f1,
                drift_f2: report.max.f2,
                drift_f3: report.max.f3,
                relation_max: report.relation_residual_max,
            })
        })
        .collect();

    // summary, written once by the orchestrator, in cell order
    let field_names: Vec<String> = axes.iter().map(|a| a.field.clone()).collect();
    let mut w = BufWriter::new(File::create(resolved.out.join("summary.csv"))?);
    writeln!(
        w,
        "cell,{},status,H0,F1_0,F2_0,F3_0,drift_H,drift_F1,drift_F2,drift_F3,relation_max",
        field_names.join(",")
    )?;
    let mut ok = 0usize;
    for res in &results {
        match res {
            Ok(c) => {
                ok += 1;
                let fields: Vec<String> = c.fields.iter().map(|(_, v)| fmt_f64(*v)).collect();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    c.cell,
                    fields.join(","),
                    c.status,
                    fmt_f64(c.h0),
                    fmt_f64(c.f1_0),
                    fmt_f64(c.f2_0),
                    fmt_f64(c.f3_0),
                    fmt_f64(c.drift_h),
                    fmt_f64(c.drift_f1),
                    fmt_f64(c.drift_f2),
                    fmt_f64(c.drift_f3),
                    fmt_f64(c.relation_max),
                )?;
            }
            Err((idx, msg)) => {
                let fields: Vec<String> =
                    cells[*idx].iter().map(|(_, v)| fmt_f64(*v)).collect();
                let nan = fmt_f64(f64::NAN);
                writeln!(
                    w,
                    "{},{},failed,{}",
                    idx,
                    fields.join(","),
                    vec![nan; 9].join(",")
                )?;
                log::info!("cell {idx} failed: {msg}");
            }
        }
    }
    drop(w);

    #[derive(Serialize)]
    struct SweepReport {
        meta: ReportMeta,
        cells: usize,
        succeeded: usize,
    }
    write_json(
        &resolved.out.join("sweep_report.json"),
        &SweepReport {
            meta: ReportMeta::new(resolved.seed, resolved.tolerances),
            cells: results.len(),
            succeeded: ok,
        },
    )?;

    println!(
        "sweep: {ok}/{} cells succeeded, outputs in {}",
        results.len(),
        resolved.out.display()
    );
    if ok == 0 {
        Err(CliError::Runtime("every sweep cell failed".into()))
    } else {
        Ok(0)
    }
}
