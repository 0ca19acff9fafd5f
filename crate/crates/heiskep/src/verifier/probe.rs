//! Least-squares search for first integrals of prescribed momentum degree
//! over a trajectory ensemble.
//!
//! A candidate `F = Σ w_j φ_j` is conserved when its variance along each
//! trajectory vanishes. The probe minimizes the ratio
//!
//! ```text
//! Σ_τ Σ_i (F(s_τi) − mean_τ F)²  /  Σ_all (F(s) − mean F)²
//! ```
//!
//! over the coefficient vector w — a generalized Rayleigh quotient solved by
//! whitening the denominator Gram matrix. A ratio near zero means a
//! conserved combination exists in the basis; a ratio bounded away from
//! zero is evidence (not proof) that none does.
//!
//! The basis is `momentum monomial × r^a z^b [× (r⁴+16z²)^(−1/2)] × Fourier
//! mode in θ`. The Laurent powers and the gauge factor are included so that
//! the quadratic momentum space contains H, F₁, F₂, F₃ exactly; the linear
//! space (p_R, p_S, 1) is the probe proper.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::potential::PotentialParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumBasis {
    /// `{p_R, p_S, 1}` — the probe for linear integrals.
    Linear,
    /// `{p_R², p_R p_S, p_S², p_R, p_S, 1}` — the control space containing
    /// the known quadratic integrals.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub momentum: MomentumBasis,
    /// Laurent range of radial powers, inclusive.
    pub r_powers: (i32, i32),
    /// Highest power of z.
    pub max_z_power: u32,
    /// Highest Fourier mode in θ.
    pub fourier_max: u32,
    /// Include the spatial block multiplied by `(r⁴+16z²)^(−1/2)`.
    pub include_gauge_block: bool,
    /// Relative eigenvalue cutoff when whitening the denominator.
    pub whiten_cutoff: f64,
}

impl ProbeConfig {
    pub fn linear() -> Self {
        Self {
            momentum: MomentumBasis::Linear,
            r_powers: (-2, 4),
            max_z_power: 2,
            fourier_max: 2,
            include_gauge_block: true,
            whiten_cutoff: 1e-12,
        }
    }

    pub fn quadratic_control() -> Self {
        Self {
            momentum: MomentumBasis::Quadratic,
            ..Self::linear()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub momentum: MomentumBasis,
    /// Minimum of the normalized within-trajectory variance ratio.
    pub min_normalized_residual: f64,
    pub basis_size: usize,
    pub sample_count: usize,
    pub trajectory_count: usize,
    pub distinct_fingerprints: usize,
    /// Set when fewer than 5 distinct fingerprints back the fit; the
    /// minimum can then be spuriously small.
    pub flagged: bool,
}

fn fingerprints_distinct(a: &Trajectory, b: &Trajectory) -> bool {
    let va = &a.integrals_at_start;
    let vb = &b.integrals_at_start;
    let differs = |x: f64, y: f64| (x - y).abs() > 1e-6 * (1.0 + x.abs().max(y.abs()));
    differs(va.h, vb.h) || differs(va.f1, vb.f1) || differs(va.f2, vb.f2) || differs(va.f3, vb.f3)
}

fn count_distinct(ensemble: &[Trajectory]) -> usize {
    let mut reps: Vec<&Trajectory> = Vec::new();
    for t in ensemble {
        if reps.iter().all(|r| fingerprints_distinct(r, t)) {
            reps.push(t);
        }
    }
    reps.len()
}

struct Basis {
    /// (momentum selector, spatial, fourier) indices flattened; evaluated
    /// per state into one row.
    momentum: Vec<[u32; 2]>,
    spatial: Vec<(i32, u32, bool)>,
    fourier: Vec<(u32, bool)>, // (mode, is_sine)
}

impl Basis {
    fn build(cfg: &ProbeConfig) -> Self {
        let momentum = match cfg.momentum {
            MomentumBasis::Linear => vec![[1, 0], [0, 1], [0, 0]],
            MomentumBasis::Quadratic => {
                vec![[2, 0], [1, 1], [0, 2], [1, 0], [0, 1], [0, 0]]
            }
        };
        let mut spatial = Vec::new();
        for a in cfg.r_powers.0..=cfg.r_powers.1 {
            for b in 0..=cfg.max_z_power {
                spatial.push((a, b, false));
            }
        }
        if cfg.include_gauge_block {
            for a in 0..=2 {
                for b in 0..=cfg.max_z_power.min(2) {
                    spatial.push((a, b, true));
                }
            }
        }
        let mut fourier = vec![(0, false)];
        for m in 1..=cfg.fourier_max {
            fourier.push((m, false));
            fourier.push((m, true));
        }
        Self { momentum, spatial, fourier }
    }

    fn len(&self) -> usize {
        self.momentum.len() * self.spatial.len() * self.fourier.len()
    }

    fn fill_row(&self, row: &mut [f64], s: &crate::geometry::CylState) {
        let gauge_inv = 1.0 / (s.r * s.r * s.r * s.r + 16.0 * s.z * s.z).sqrt();
        let mut idx = 0;
        for &[mr, ms] in &self.momentum {
            let mom = s.p_r.powi(mr as i32) * s.p_s.powi(ms as i32);
            for &(mode, is_sine) in &self.fourier {
                let ang = if mode == 0 {
                    1.0
                } else if is_sine {
                    (mode as f64 * s.theta).sin()
                } else {
                    (mode as f64 * s.theta).cos()
                };
                for &(a, b, gauged) in &self.spatial {
                    let mut v = s.r.powi(a) * s.z.powi(b as i32);
                    if gauged {
                        v *= gauge_inv;
                    }
                    row[idx] = mom * ang * v;
                    idx += 1;
                }
            }
        }
    }
}

/// Fit the best candidate of the configured momentum degree over the
/// ensemble and return the minimum normalized variance ratio.
pub fn linear_probe(
    _params: &PotentialParams,
    ensemble: &[Trajectory],
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    if ensemble.is_empty() {
        return Err(Error::InvalidEnsemble("empty ensemble".into()));
    }
    let distinct = count_distinct(ensemble);
    if ensemble.len() >= 2 && distinct == 1 {
        return Err(Error::InvalidEnsemble(
            "all trajectories share one integral fingerprint".into(),
        ));
    }
    let basis = Basis::build(cfg);
    let p = basis.len();
    let n: usize = ensemble.iter().map(|t| t.samples.len()).sum();
    // with too few distinct surfaces or too few samples the fit can return
    // spuriously small minima
    let flagged = distinct < 5 || n < 2 * p;

    // design matrix, by trajectory blocks
    let mut phi = DMatrix::<f64>::zeros(n, p);
    let mut offsets = Vec::with_capacity(ensemble.len() + 1);
    offsets.push(0usize);
    {
        let mut row = vec![0.0; p];
        let mut at = 0usize;
        for traj in ensemble {
            for sample in &traj.samples {
                basis.fill_row(&mut row, &sample.state);
                for (j, v) in row.iter().enumerate() {
                    phi[(at, j)] = *v;
                }
                at += 1;
            }
            offsets.push(at);
        }
    }

    // scale columns to unit rms; drop identically-zero ones implicitly
    for j in 0..p {
        let rms = (phi.column(j).norm_squared() / n as f64).sqrt();
        if rms > 0.0 {
            let inv = 1.0 / rms;
            for i in 0..n {
                phi[(i, j)] *= inv;
            }
        }
    }

    // within-trajectory centering (numerator) and global centering
    // (denominator)
    let mut within = phi.clone();
    for w in offsets.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let rows = hi - lo;
        if rows == 0 {
            continue;
        }
        for j in 0..p {
            let mean = (lo..hi).map(|i| within[(i, j)]).sum::<f64>() / rows as f64;
            for i in lo..hi {
                within[(i, j)] -= mean;
            }
        }
    }
    let mut global = phi;
    for j in 0..p {
        let mean = global.column(j).sum() / n as f64;
        for i in 0..n {
            global[(i, j)] -= mean;
        }
    }

    let a = within.transpose() * &within;
    let b = global.transpose() * &global;

    // whiten the denominator and take the smallest eigenvalue of the
    // transformed numerator
    let eig_b = SymmetricEigen::new(b);
    let lam_max = eig_b
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..p)
        .filter(|&i| eig_b.eigenvalues[i] > cfg.whiten_cutoff * lam_max)
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidEnsemble(
            "denominator Gram matrix is numerically zero".into(),
        ));
    }
    let mut w = DMatrix::<f64>::zeros(p, keep.len());
    for (jj, &i) in keep.iter().enumerate() {
        let scale = 1.0 / eig_b.eigenvalues[i].sqrt();
        for r in 0..p {
            w[(r, jj)] = eig_b.eigenvectors[(r, i)] * scale;
        }
    }
    let a_tilde = w.transpose() * a * &w;
    let eig_a = SymmetricEigen::new(a_tilde);
    let min = eig_a
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::MAX, f64::min)
        .max(0.0);

    Ok(ProbeReport {
        momentum: cfg.momentum,
        min_normalized_residual: min,
        basis_size: p,
        sample_count: n,
        trajectory_count: ensemble.len(),
        distinct_fingerprints: distinct,
        flagged,
    })
}

/// The deterministic five-trajectory ensemble used by the verification
/// suite: bounded orbits with well-separated fingerprints, long enough to
/// cover their invariant surfaces.
pub fn default_probe_ensemble(params: &PotentialParams) -> Result<Vec<Trajectory>> {
    use crate::geometry::CylState;
    use crate::integrator::{integrate, IntegratorConfig};

    let ics = [
        CylState::new(1.0, 0.0, 0.0, 0.0, 0.35),
        CylState::new(1.2, 0.4, 0.1, 0.1, 0.5),
        CylState::new(0.8, 1.0, -0.15, -0.15, 0.6),
        CylState::new(1.5, 2.0, 0.2, 0.05, 0.8),
        CylState::new(0.9, -1.2, 0.25, 0.2, 0.45),
    ];
    let cfg = IntegratorConfig {
        t_end: 100.0,
        sample_interval: 0.1,
        ..Default::default()
    };
    ics.iter().map(|s| integrate(s, &cfg, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CylState;
    use crate::integrator::{integrate, IntegratorConfig};

    fn k1() -> PotentialParams {
        PotentialParams::new(1.0).unwrap()
    }

    fn short_ensemble(n: usize) -> Vec<Trajectory> {
        let params = k1();
        let ics = [
            CylState::new(1.0, 0.0, 0.0, 0.0, 0.35),
            CylState::new(1.2, 0.4, 0.1, 0.1, 0.5),
            CylState::new(0.8, 1.0, -0.15, -0.15, 0.6),
            CylState::new(1.5, 2.0, 0.2, 0.05, 0.8),
            CylState::new(0.9, -1.2, 0.25, 0.2, 0.45),
        ];
        let cfg = IntegratorConfig {
            t_end: 40.0,
            sample_interval: 0.1,
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            ..Default::default()
        };
        ics[..n]
            .iter()
            .map(|s| integrate(s, &cfg, &params).unwrap())
            .collect()
    }

    #[test]
    fn quadratic_control_recovers_a_conserved_combination() {
        let params = k1();
        let ensemble = short_ensemble(5);
        let report =
            linear_probe(&params, &ensemble, &ProbeConfig::quadratic_control()).unwrap();
        assert!(
            report.min_normalized_residual <= 1e-6,
            "quadratic control ratio {}",
            report.min_normalized_residual
        );
        assert!(!report.flagged);
    }

    #[test]
    fn single_trajectory_is_flagged() {
        let params = k1();
        let ensemble = short_ensemble(1);
        let report = linear_probe(&params, &ensemble, &ProbeConfig::linear()).unwrap();
        assert!(report.flagged);
        assert_eq!(report.distinct_fingerprints, 1);
    }

    #[test]
    fn identical_ensemble_is_rejected() {
        let params = k1();
        let one = short_ensemble(1).pop().unwrap();
        let ensemble = vec![one.clone(), one];
        match linear_probe(&params, &ensemble, &ProbeConfig::linear()) {
            Err(Error::InvalidEnsemble(_)) => {}
            other => panic!("expected invalid-ensemble, got {other:?}"),
        }
    }
}
