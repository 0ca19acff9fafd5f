//! End-to-end tests of the command-line interface: exit codes, file
//! schemas, config handling and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn heiskep(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heiskep"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_schema_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heiskep(
        &[
            "simulate",
            "--cart",
            "1,0,0,0,0.1",
            "--t-end",
            "5",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let csv = std::fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,r,theta,z,pR,pS,x,y,H,F1,F2,F3,reldrift"
    );
    let first = lines.next().unwrap();
    assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
    // 17 significant digits everywhere
    for field in first.split(',') {
        assert!(field.contains('e'), "field {field} not in scientific form");
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/drift_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["meta"]["seed"], 42);
    assert!(report["drift"]["max"]["h"].as_f64().unwrap() <= 1e-6);
    assert_eq!(report["drift"]["boundedness"]["satisfied"], true);
    assert!(tmp.path().join("run/plot_trajectory.gp").exists());
}

#[test]
fn simulate_zero_horizon_gives_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heiskep(
        &["simulate", "--cart", "1,0,0,0,0.1", "--t-end", "0", "--out", "run"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2); // header + one sample
    let row = csv.lines().nth(1).unwrap();
    let reldrift: f64 = row.split(',').next_back().unwrap().parse().unwrap();
    assert_eq!(reldrift, 0.0);
}

#[test]
fn radial_run_keeps_z_exactly_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heiskep(
        &[
            "simulate",
            "--cyl",
            "1,0,0,1.4142135623730951,0",
            "--t-end",
            "5",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let z: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(z, 0.0);
    }
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // no initial state
    let out = heiskep(&["simulate", "--t-end", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    // both coordinate systems at once
    let out = heiskep(
        &[
            "simulate",
            "--cart",
            "1,0,0,0,0.1",
            "--cyl",
            "1,0,0,0,0.1",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // nonpositive coupling
    let out = heiskep(
        &["simulate", "--cart", "1,0,0,0,0.1", "--k", "-1"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // inconsistent surface spec: k^2 + 2HF3 < 0
    let out = heiskep(
        &["surface", "--energy", "-2", "--f3", "2", "--theta0", "0"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    // malformed config file
    std::fs::write(tmp.path().join("bad.json"), "{ not json").unwrap();
    let out = heiskep(
        &["--config", "bad.json", "simulate", "--cart", "1,0,0,0,0.1"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_infall_exits_3_with_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heiskep(
        &[
            "simulate",
            "--cyl",
            "1,0,0,-1,0",
            "--t-end",
            "10",
            "--sample-interval",
            "0.01",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    assert!(csv.lines().count() > 10, "partial trajectory should be written");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("run/drift_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["drift"]["termination"]["reason"], "singularity_approach");
}

#[test]
fn config_file_drives_simulate_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "k": 1.0,
        "initial": { "cartesian": { "x": 1.0, "y": 0.0, "z": 0.0, "p_x": 0.0, "p_y": 0.1 } },
        "integrator": { "t_end": 2.0, "sample_interval": 0.5 },
        "out": "from_config"
    });
    std::fs::write(
        tmp.path().join("run.json"),
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();
    let out = heiskep(&["--config", "run.json", "simulate"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("from_config/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4); // header + samples at 0, .5, 1, 1.5, 2

    // the flag overrides the file's horizon
    let out = heiskep(
        &["--config", "run.json", "--out", "override", "simulate", "--t-end", "1"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("override/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 2);
}

#[test]
fn surface_reports_reference_ellipse() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heiskep(
        &["surface", "--cart", "1,0,0,0,0.1", "--out", "surf"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let mesh = std::fs::read_to_string(tmp.path().join("surf/mesh.csv")).unwrap();
    assert_eq!(mesh.lines().next().unwrap(), "r,theta,z,branch");
    assert!(mesh.lines().count() > 100);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("surf/surface_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["conic"]["kind"], "ellipse");
    let a = report["conic"]["semi_major"].as_f64().unwrap();
    let b = report["conic"]["semi_minor"].as_f64().unwrap();
    assert!((a - 1.0).abs() <= 1e-7);
    assert!((b - 0.0708881205).abs() <= 1e-7);
    assert!(report["residual_max"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn verify_is_deterministic_and_detects_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = heiskep(
            &[
                "verify",
                "--suite",
                "appendix_pde",
                "--suite",
                "relation_identity",
                "--seed",
                "7",
                "--out",
                dir,
            ],
            tmp.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(tmp.path().join(dir).join("verification_report.json")).unwrap()
    };
    let a = run("v1");
    let b = run("v2");
    assert_eq!(a, b, "seeded reruns must be bit-identical");

    // the sign-flipped control must fail with exit 1
    let out = heiskep(
        &[
            "verify",
            "--suite",
            "relation_identity",
            "--corrupt-f1",
            "--out",
            "v3",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("v3/verification_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], false);
    assert!(report["suites"][0]["measured"].as_f64().unwrap() > 1e-3);
}

#[test]
fn special_tables_have_expected_anchors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = heiskep(
        &["special", "stationary", "--energy", "-0.25", "--out", "sp"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("sp/stationary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    for line in csv.lines().skip(1) {
        let j_sq: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(j_sq.abs() <= 1e-12);
    }
    // H >= 0 has no stationary points
    let out = heiskep(
        &["special", "stationary", "--energy", "0", "--out", "sp"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = heiskep(
        &["special", "heteroclinic", "--z0", "1", "--samples", "101", "--out", "sp"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(tmp.path().join("sp/heteroclinic.csv")).unwrap();
    let thetas: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(thetas.len(), 101);
    assert!(thetas.windows(2).all(|w| w[1] > w[0]), "theta must increase");
    for line in csv.lines().skip(1) {
        let res: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(res.abs() <= 1e-12);
    }

    let out = heiskep(
        &["special", "radial", "--energy", "-1", "--r0", "0.5", "--out", "sp"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("sp/radial_report.json")).unwrap())
            .unwrap();
    assert!((report["turning_radius"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn sweep_grid_is_deterministic_and_isolates_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--cart",
        "1,0,0,0,0.1",
        "--axis",
        "p_y=0.05,0.1,0.2",
        "--axis",
        "k=0.5,1,2",
        "--t-end",
        "1",
        "--out",
        "grid",
    ];
    let out = heiskep(&args, tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("9/9"));
    let summary1 = std::fs::read(tmp.path().join("grid/summary.csv")).unwrap();
    for i in 0..9 {
        assert!(tmp.path().join(format!("grid/cell_{i:03}/trajectory.csv")).exists());
    }

    let out = heiskep(&args, tmp.path());
    assert!(out.status.success());
    let summary2 = std::fs::read(tmp.path().join("grid/summary.csv")).unwrap();
    assert_eq!(summary1, summary2, "rerun must give an identical summary");

    // a degenerate infalling cell terminates alone; the sweep still succeeds
    let out = heiskep(
        &[
            "sweep",
            "--cyl",
            "1,0,0,-1,0",
            "--axis",
            "p_s=0,0.3",
            "--t-end",
            "5",
            "--out",
            "grid2",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = std::fs::read_to_string(tmp.path().join("grid2/summary.csv")).unwrap();
    assert!(summary.contains("singularity"));
    assert!(summary.contains("completed"));
}

#[test]
fn unknown_recipe_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("recipes")).unwrap();
    let out = heiskep(&["recipe", "no-such-recipe"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn stationary_recipe_runs_from_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("recipes");
    std::fs::create_dir(&dir).unwrap();
    let body = serde_json::json!({
        "name": "thm7-stationary",
        "description": "stationary points",
        "seed": 42,
        "tolerances": { "fd_tol": 1e-5, "drift_tol": 1e-6, "identity_tol": 1e-9, "mesh_tol": 1e-9 },
        "k": 1.0
    });
    std::fs::write(
        dir.join("thm7-stationary.json"),
        serde_json::to_string_pretty(&body).unwrap(),
    )
    .unwrap();
    let out = heiskep(&["recipe", "thm7-stationary", "--out", "r"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
    assert!(tmp
        .path()
        .join("r/thm7-stationary/recipe_report.json")
        .exists());
}
