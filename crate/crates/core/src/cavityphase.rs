//! Standing-wave Gaussian mode geometry and the phase excursions of the
//! emitted field caused by atomic motion along the cavity axis.
//!
//! The cavity axis is `x`, atoms pass through the mode along `z`, and the
//! normalized coupling is `cos(2πx/λ)·exp(−(y² + z²)/w0²)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{require_finite, require_nonnegative, require_positive};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    /// Wavelength [m].
    pub lambda: f64,
    /// Mode waist [m].
    pub w0: f64,
    /// Peak coupling [rad/s]; only scales [`coupling`].
    pub g0: f64,
}

impl ModeGeometry {
    pub fn new(lambda: f64, w0: f64, g0: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("w0", w0)?;
        require_finite("g0", g0)?;
        Ok(ModeGeometry { lambda, w0, g0 })
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicParams {
    /// Speed through the mode [m/s].
    pub v_z: f64,
    /// RMS velocity along the cavity axis [m/s].
    pub sigma_vx: f64,
}

impl KinematicParams {
    pub fn new(v_z: f64, sigma_vx: f64) -> Result<Self> {
        require_positive("vz", v_z)?;
        require_nonnegative("sigma_vx", sigma_vx)?;
        Ok(KinematicParams { v_z, sigma_vx })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub r0: [f64; 3],
    pub v: [f64; 3],
}

impl Trajectory {
    pub fn position(&self, t: f64) -> [f64; 3] {
        [
            self.r0[0] + self.v[0] * t,
            self.r0[1] + self.v[1] * t,
            self.r0[2] + self.v[2] * t,
        ]
    }
}

/// Normalized coupling `g(r)/g0`.
pub fn coupling(pos: [f64; 3], geom: &ModeGeometry) -> f64 {
    let [x, y, z] = pos;
    (geom.wavenumber() * x).cos() * (-(y * y + z * z) / (geom.w0 * geom.w0)).exp()
}

/// Transit time `t0 = 2 w0 / v_z`.
pub fn transit_time(geom: &ModeGeometry, kin: &KinematicParams) -> f64 {
    2.0 * geom.w0 / kin.v_z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseExcursion {
    /// Axial optical phase accumulated over the emission window [rad].
    pub delta_phi: f64,
    /// Standing-wave nodes crossed during the window.
    pub sign_flips: u64,
}

/// Phase accumulated by the axial motion during `window`, and the number of
/// nodes of `cos(2πx/λ)` strictly crossed.
pub fn phase_excursion(
    traj: &Trajectory,
    window: f64,
    geom: &ModeGeometry,
) -> Result<PhaseExcursion> {
    require_positive("window", window)?;
    let x0 = traj.r0[0];
    let x1 = x0 + traj.v[0] * window;
    // Nodes sit at x = λ/4 + nλ/2, i.e. at integer u = (x − λ/4)/(λ/2).
    let u = |x: f64| (x - 0.25 * geom.lambda) / (0.5 * geom.lambda);
    let (lo, hi) = if x0 <= x1 {
        (u(x0), u(x1))
    } else {
        (u(x1), u(x0))
    };
    let sign_flips = if hi > lo {
        (hi.ceil() - lo.floor() - 1.0).max(0.0) as u64
    } else {
        0
    };
    Ok(PhaseExcursion {
        delta_phi: geom.wavenumber() * traj.v[0] * window,
        sign_flips,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionSample {
    pub trajectory: Trajectory,
    pub excursion: PhaseExcursion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionStats {
    pub samples: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub std: f64,
    pub std_se: f64,
    /// Fraction of samples with `|Δφ| ≥ π/2`.
    pub fraction_quarter_wave: f64,
    pub fraction_se: f64,
}

/// Draw trajectories with `v_x ~ N(0, σ_vx)` and the axial start uniform over
/// one wavelength; atoms enter on axis at the waist plane.
pub fn sample_excursions<R: Rng + ?Sized>(
    geom: &ModeGeometry,
    kin: &KinematicParams,
    window: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<ExcursionSample>> {
    require_positive("window", window)?;
    let vx =
        Normal::new(0.0, kin.sigma_vx).map_err(|e| Error::invalid("sigma_vx", e.to_string()))?;
    (0..n_samples)
        .map(|_| {
            let x0 = geom.lambda * rng.random::<f64>();
            let trajectory = Trajectory {
                r0: [x0, 0.0, -geom.w0],
                v: [vx.sample(rng), 0.0, kin.v_z],
            };
            Ok(ExcursionSample {
                trajectory,
                excursion: phase_excursion(&trajectory, window, geom)?,
            })
        })
        .collect()
}

/// Sample mean, standard deviation and quarter-wave fraction of `Δφ`, with
/// standard errors.
pub fn summarize(delta_phi: &[f64]) -> Result<ExcursionStats> {
    let n = delta_phi.len();
    if n < 2 {
        return Err(Error::Undefined("need at least two samples".into()));
    }
    let nf = n as f64;
    let mean = delta_phi.iter().sum::<f64>() / nf;
    let var = delta_phi.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let std = var.sqrt();
    let frac = delta_phi.iter().filter(|d| d.abs() >= FRAC_PI_2).count() as f64 / nf;
    Ok(ExcursionStats {
        samples: n,
        mean,
        mean_se: std / nf.sqrt(),
        std,
        std_se: std / (2.0 * (nf - 1.0)).sqrt(),
        fraction_quarter_wave: frac,
        fraction_se: (frac * (1.0 - frac) / nf).sqrt(),
    })
}

pub fn excursion_stats<R: Rng + ?Sized>(
    geom: &ModeGeometry,
    kin: &KinematicParams,
    window: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<ExcursionStats> {
    if n_samples < 1000 {
        return Err(Error::invalid("samples", "need at least 1000 samples"));
    }
    let samples = sample_excursions(geom, kin, window, n_samples, rng)?;
    let phases: Vec<f64> = samples.iter().map(|s| s.excursion.delta_phi).collect();
    summarize(&phases)
}
