//! The verification suites: bracket conservation, the algebraic relation,
//! the coefficient PDE system, sub-Laplacian harmonicity, and the
//! linear-integral probe. Every random draw flows from the configured seed.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use heiskep::dynamics::{almost_poisson, obs_hamiltonian, Observable};
use heiskep::geometry::{CartPoint, CylState};
use heiskep::integrals::{evaluate_integrals, relation_residual};
use heiskep::potential::{
    gauge_sq_cyl, potential, sublaplacian_residual, sublaplacian_residual_of, PotentialParams,
};
use heiskep::sampling::{random_points_in_gauge_shell, random_states, StateRanges};
use heiskep::tolerances::{
    BRACKET_TOL, HARMONICITY_REL_TOL, PROBE_LINEAR_FLOOR, PROBE_QUADRATIC_CEIL,
};
use heiskep::verifier::probe::default_probe_ensemble;
use heiskep::verifier::{
    integral_residual, linear_probe, pde_residuals, tilde_coefficients, AppendixConstants,
    ProbeConfig,
};

use crate::config::{self, CommonArgs, Overrides};
use crate::output::{ensure_dir, write_json, ReportMeta};
use crate::{CliError, CliResult, VerifyArgs};

#[derive(Debug, Serialize)]
struct SuiteResult {
    name: &'static str,
    passed: bool,
    /// The measured extremum the threshold applies to.
    measured: f64,
    threshold: f64,
    /// "<=" or ">=".
    direction: &'static str,
    detail: String,
}

#[derive(Serialize)]
struct VerificationReport {
    meta: ReportMeta,
    k: f64,
    corrupt_f1: bool,
    suites: Vec<SuiteResult>,
    passed: bool,
}

/// F1, optionally with the potential term's sign flipped (negative control:
/// the corrupted function is not conserved and breaks the relation).
fn f1_maybe_corrupt(corrupt: bool) -> impl Fn(&CylState, &PotentialParams) -> f64 + Sync {
    move |s: &CylState, p: &PotentialParams| {
        let r2 = s.r * s.r;
        let g2 = gauge_sq_cyl(s.r, s.z);
        let sign = if corrupt { -1.0 } else { 1.0 };
        let a = s.p_r * s.p_s * s.r - 2.0 * s.p_r * s.p_r * s.z
            + 2.0 * s.p_s * s.p_s * s.z / r2;
        let b = -s.p_s * s.p_s + 4.0 * s.p_r * s.p_s * s.z / s.r + sign * p.k * r2 / g2;
        let (sn, cs) = (2.0 * s.theta).sin_cos();
        a * cs + b * sn
    }
}

fn suite_brackets(params: &PotentialParams, seed: u64, corrupt: bool) -> SuiteResult {
    let h = obs_hamiltonian;
    let f1 = f1_maybe_corrupt(corrupt);
    let f2 = |s: &CylState, p: &PotentialParams| heiskep::integrals::f2(s, p).unwrap();
    let f3 = |s: &CylState, p: &PotentialParams| heiskep::integrals::f3(s, p).unwrap();
    let mut worst = 0.0f64;
    for s in random_states(seed ^ 0x62726b, 1000, &StateRanges::default()) {
        for f in [&f1 as &dyn Observable, &f2, &f3] {
            let bracket = almost_poisson(f, &h, &s, params).unwrap();
            let flow = integral_residual(f, &s, params).unwrap();
            worst = worst.max(bracket.abs()).max(flow.abs());
        }
    }
    SuiteResult {
        name: "bracket_conservation",
        passed: worst <= BRACKET_TOL,
        measured: worst,
        threshold: BRACKET_TOL,
        direction: "<=",
        detail: "max |{F_i, H}| and flow residual over 10^3 random states".into(),
    }
}

fn suite_relation(params: &PotentialParams, seed: u64, corrupt: bool) -> SuiteResult {
    let threshold = 1e-9 * params.k * params.k;
    let f1 = f1_maybe_corrupt(corrupt);
    let mut worst = 0.0f64;
    for s in random_states(seed ^ 0x72656c, 10_000, &StateRanges::default()) {
        let mut v = evaluate_integrals(&s, params).unwrap();
        v.f1 = f1(&s, params);
        worst = worst.max(relation_residual(&v, params).abs());
    }
    SuiteResult {
        name: "relation_identity",
        passed: worst <= threshold,
        measured: worst,
        threshold,
        direction: "<=",
        detail: "max |F1^2+F2^2-2HF3-k^2| over 10^4 random states".into(),
    }
}

fn suite_pde(params: &PotentialParams, seed: u64) -> SuiteResult {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x706465);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = AppendixConstants {
            c2: rng.gen_range(-1.0..1.0),
            c3: rng.gen_range(-1.0..1.0),
            c4: rng.gen_range(-1.0..1.0),
        };
        let cand = tilde_coefficients(c, params);
        let (r, th, z) = (
            rng.gen_range(0.5..1.5),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-1.0..1.0),
        );
        for e in pde_residuals(&cand, r, th, z, params).unwrap() {
            worst = worst.max(e.abs());
        }
    }
    SuiteResult {
        name: "appendix_pde",
        passed: worst <= 1e-5,
        measured: worst,
        threshold: 1e-5,
        direction: "<=",
        detail: "six coefficient-PDE residuals at 10^2 random points".into(),
    }
}

fn suite_harmonicity(params: &PotentialParams, seed: u64) -> SuiteResult {
    let h = 1e-3;
    let points = random_points_in_gauge_shell(seed ^ 0x68726d, 100, (0.5, 5.0));
    let mut worst = 0.0f64;
    for p in &points {
        let u = potential(p, params).unwrap();
        let res = sublaplacian_residual(p, params, h).unwrap();
        worst = worst.max((res / u).abs());
    }
    // second-order convergence and the wrong-coefficient control
    let probe = CartPoint::new(1.0, 0.5, 0.3);
    let ratio = sublaplacian_residual(&probe, params, 1e-2).unwrap()
        / sublaplacian_residual(&probe, params, 5e-3).unwrap();
    let bad = |q: &CartPoint| {
        let w = q.x * q.x + q.y * q.y;
        -params.k / (w * w + q.z * q.z / 16.0).sqrt()
    };
    let control = (sublaplacian_residual_of(&bad, &probe, h) / bad(&probe)).abs();
    let passed =
        worst <= HARMONICITY_REL_TOL && (2.5..6.0).contains(&ratio) && control > 10.0 * HARMONICITY_REL_TOL;
    SuiteResult {
        name: "sublaplacian_harmonicity",
        passed,
        measured: worst,
        threshold: HARMONICITY_REL_TOL,
        direction: "<=",
        detail: format!(
            "relative FD residual at 10^2 points, rho in [0.5, 5]; O(h^2) ratio {ratio:.2}; wrong-coefficient control {control:.2e}"
        ),
    }
}

fn suite_probe(params: &PotentialParams) -> Result<Vec<SuiteResult>, CliError> {
    let ensemble = default_probe_ensemble(params)?;
    let linear = linear_probe(params, &ensemble, &ProbeConfig::linear())?;
    let control = linear_probe(params, &ensemble, &ProbeConfig::quadratic_control())?;
    Ok(vec![
        SuiteResult {
            name: "linear_probe",
            passed: linear.min_normalized_residual >= PROBE_LINEAR_FLOOR && !linear.flagged,
            measured: linear.min_normalized_residual,
            threshold: PROBE_LINEAR_FLOOR,
            direction: ">=",
            detail: format!(
                "best linear-in-momenta fit over {} samples, {} basis functions, {} distinct fingerprints (evidence, not proof)",
                linear.sample_count, linear.basis_size, linear.distinct_fingerprints
            ),
        },
        SuiteResult {
            name: "quadratic_control",
            passed: control.min_normalized_residual <= PROBE_QUADRATIC_CEIL,
            measured: control.min_normalized_residual,
            threshold: PROBE_QUADRATIC_CEIL,
            direction: "<=",
            detail: "the quadratic momentum space recovers a conserved combination".into(),
        },
    ])
}

pub fn run(common: &CommonArgs, args: &VerifyArgs) -> CliResult {
    let resolved = config::resolve(
        common,
        &Overrides {
            k: args.k,
            ..Default::default()
        },
    )?;
    let params = resolved.params;
    let seed = resolved.seed;

    let want = |name: &str| args.suites.is_empty() || args.suites.iter().any(|s| s == name);
    let mut suites = Vec::new();
    if want("bracket_conservation") {
        suites.push(suite_brackets(&params, seed, args.corrupt_f1));
    }
    if want("relation_identity") {
        suites.push(suite_relation(&params, seed, args.corrupt_f1));
    }
    if want("appendix_pde") {
        suites.push(suite_pde(&params, seed));
    }
    if want("sublaplacian_harmonicity") {
        suites.push(suite_harmonicity(&params, seed));
    }
    if want("linear_probe") {
        suites.extend(suite_probe(&params)?);
    }
    if suites.is_empty() {
        return Err(CliError::Config(format!(
            "no such suite: {:?}",
            args.suites
        )));
    }

    let passed = suites.iter().all(|s| s.passed);
    for s in &suites {
        println!(
            "{}: {} (measured {:.3e} {} {:.0e}) - {}",
            s.name,
            if s.passed { "PASS" } else { "FAIL" },
            s.measured,
            s.direction,
            s.threshold,
            s.detail
        );
    }

    let report = VerificationReport {
        meta: ReportMeta::new(seed, resolved.tolerances),
        k: params.k,
        corrupt_f1: args.corrupt_f1,
        suites,
        passed,
    };
    ensure_dir(&resolved.out)?;
    write_json(&resolved.out.join("verification_report.json"), &report)?;

    if passed {
        Ok(0)
    } else {
        Err(CliError::Verification(
            "one or more suites failed; see verification_report.json".into(),
        ))
    }
}
