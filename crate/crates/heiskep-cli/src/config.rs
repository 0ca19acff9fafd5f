//! Run configuration: a single JSON document, with every command-line flag
//! overriding the corresponding key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use heiskep::geometry::{to_cylindrical, CartPoint, CartState, CylState};
use heiskep::integrator::IntegratorConfig;
use heiskep::potential::PotentialParams;
use heiskep::tolerances::ToleranceProfile;

use crate::CliError;

/// Global flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct CommonArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Initial phase state, in exactly one coordinate system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Cartesian { x: f64, y: f64, z: f64, p_x: f64, p_y: f64 },
    Cylindrical { r: f64, theta: f64, z: f64, p_r: f64, p_s: f64 },
}

impl InitialState {
    pub fn to_cyl(&self) -> Result<CylState, CliError> {
        match *self {
            InitialState::Cartesian { x, y, z, p_x, p_y } => to_cylindrical(&CartState {
                point: CartPoint::new(x, y, z),
                p_x,
                p_y,
            })
            .map_err(|e| CliError::Config(format!("initial state: {e}"))),
            InitialState::Cylindrical { r, theta, z, p_r, p_s } => {
                if r <= 0.0 {
                    return Err(CliError::Config("initial r must be positive".into()));
                }
                Ok(CylState::new(r, theta, z, p_r, p_s))
            }
        }
    }
}

/// Surface selection in a config file.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSection {
    pub energy: Option<f64>,
    pub f3: Option<f64>,
    pub theta0: Option<f64>,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
    pub r_max: Option<f64>,
}

/// One sweep axis: a field name and its grid values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepAxis {
    pub field: String,
    pub values: Vec<f64>,
}

/// The configuration file schema.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub initial: Option<InitialState>,
    pub integrator: Option<IntegratorConfig>,
    pub surface: Option<SurfaceSection>,
    pub sweep_axes: Option<Vec<SweepAxis>>,
    pub tolerances: Option<ToleranceProfile>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }
}

/// Fully resolved run settings after merging the file and the flags.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: PotentialParams,
    pub seed: u64,
    pub out: PathBuf,
    pub initial: Option<InitialState>,
    pub integrator: IntegratorConfig,
    pub surface: SurfaceSection,
    pub sweep_axes: Vec<SweepAxis>,
    pub tolerances: ToleranceProfile,
}

pub struct Overrides<'a> {
    pub k: Option<f64>,
    pub cart: Option<&'a [f64]>,
    pub cyl: Option<&'a [f64]>,
    pub t_end: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub sample_interval: Option<f64>,
    pub project: bool,
}

impl Default for Overrides<'_> {
    fn default() -> Self {
        Self {
            k: None,
            cart: None,
            cyl: None,
            t_end: None,
            rel_tol: None,
            abs_tol: None,
            sample_interval: None,
            project: false,
        }
    }
}

pub fn resolve(common: &CommonArgs, ov: &Overrides) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let k = ov.k.or(file.k).unwrap_or(1.0);
    let params =
        PotentialParams::new(k).map_err(|e| CliError::Config(e.to_string()))?;

    let five = |name: &str, c: &[f64]| -> Result<(), CliError> {
        if c.len() == 5 {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "--{name} needs 5 comma-separated numbers, got {}",
                c.len()
            )))
        }
    };
    let initial = match (ov.cart, ov.cyl) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give the initial state in exactly one coordinate system".into(),
            ))
        }
        (Some(c), None) => Some({
            five("cart", c)?;
            InitialState::Cartesian {
            x: c[0],
            y: c[1],
            z: c[2],
            p_x: c[3],
            p_y: c[4],
        }}),
        (None, Some(c)) => Some({
            five("cyl", c)?;
            InitialState::Cylindrical {
            r: c[0],
            theta: c[1],
            z: c[2],
            p_r: c[3],
            p_s: c[4],
        }}),
        (None, None) => file.initial,
    };

    let mut integrator = file.integrator.unwrap_or_default();
    if let Some(v) = ov.t_end {
        integrator.t_end = v;
    }
    if let Some(v) = ov.rel_tol {
        integrator.rel_tol = v;
    }
    if let Some(v) = ov.abs_tol {
        integrator.abs_tol = v;
    }
    if let Some(v) = ov.sample_interval {
        integrator.sample_interval = v;
    }
    if ov.project {
        integrator.project_onto_integrals = true;
    }
    integrator
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    Ok(Resolved {
        params,
        seed: common.seed.or(file.seed).unwrap_or(42),
        out: common
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out")),
        initial,
        integrator,
        surface: file.surface.unwrap_or_default(),
        sweep_axes: file.sweep_axes.unwrap_or_default(),
        tolerances: file.tolerances.unwrap_or_default(),
    })
}
