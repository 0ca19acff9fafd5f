use serde::Serialize;

use heiskep::integrator::{drift_report, integrate, DriftReport};

use crate::config::{self, CommonArgs, Overrides};
use crate::output::{
    ensure_dir, write_json, write_trajectory_csv, write_trajectory_plot, ReportMeta,
};
use crate::{CliError, CliResult, SimulateArgs};

#[derive(Serialize)]
struct SimulationReport {
    meta: ReportMeta,
    k: f64,
    initial_integrals: heiskep::integrals::IntegralValues,
    drift: DriftReport,
}

pub fn run(common: &CommonArgs, args: &SimulateArgs) -> CliResult {
    let resolved = config::resolve(
        common,
        &Overrides {
            k: args.k,
            cart: args.cart.as_deref(),
            cyl: args.cyl.as_deref(),
            t_end: args.t_end,
            rel_tol: args.rel_tol,
            abs_tol: args.abs_tol,
            sample_interval: args.sample_interval,
            project: args.project,
        },
    )?;
    let initial = resolved
        .initial
        .ok_or_else(|| CliError::Config("simulate needs an initial state (--cart/--cyl or config)".into()))?;
    let s0 = initial.to_cyl()?;

    log::info!(
        "simulate: k = {}, t_end = {}, rel_tol = {:.1e}",
        resolved.params.k,
        resolved.integrator.t_end,
        resolved.integrator.rel_tol
    );
    let traj = integrate(&s0, &resolved.integrator, &resolved.params)?;
    let report = SimulationReport {
        meta: ReportMeta::new(resolved.seed, resolved.tolerances),
        k: resolved.params.k,
        initial_integrals: traj.integrals_at_start,
        drift: drift_report(&traj),
    };

    ensure_dir(&resolved.out)?;
    write_trajectory_csv(&resolved.out.join("trajectory.csv"), &traj)?;
    write_json(&resolved.out.join("drift_report.json"), &report)?;
    write_trajectory_plot(&resolved.out.join("plot_trajectory.gp"), "trajectory.csv")?;

    if traj.termination.is_completed() {
        println!(
            "simulate: {} samples, max drift {:.3e}, outputs in {}",
            traj.samples.len(),
            traj.drift.max_abs(),
            resolved.out.display()
        );
        Ok(0)
    } else {
        eprintln!(
            "simulate: terminated early ({:?}); partial outputs in {}",
            traj.termination,
            resolved.out.display()
        );
        Ok(3)
    }
}
